//! Acceptance suite. Runs every criterion in order, prints one PASS/FAIL line
//! each and exits non-zero if any fails.

use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use nogo_core::hv::random_models::{factorized_case, mixed_case, MixedFamily};
use nogo_core::hv::{
    check_all, check_cpi, check_joint_noncontextuality, check_marginal_noncontextuality, check_oi, check_pi,
    check_triviality, default_contexts, ContextSets, ProbabilityTable, TrivialQuantumModel,
};
use nogo_core::influence::{reconstruct_lambda, verify_lemma1, verify_lemma3, LambdaOperator};
use nogo_core::leggett::{
    leggett_bound, max_lhs_lp, quantum_lhs, violation_region, CorrelationKind, DirectionTriple, LeggettModel, Pairing,
    Rotation, SphereGrid,
};
use nogo_core::linalg::{partial_transpose, Complex64, ComplexMatrix, FactorDims, HermitianMatrix, Projector, Side};
use nogo_core::nogo::{max_perturbation_ladder, DirectionPolicy};
use nogo_core::sampling::{haar_ket, random_unit_trace_hermitian, rng};
use nogo_core::states::{born_joint, born_marginal_a, max_entangled, partner_projection, DensityOperator, PureState};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

struct Criterion {
    id: u32,
    title: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion { id: 1, title: "perfect correlations with partner projections", limit: secs(5), run: perfect_correlations },
        Criterion { id: 2, title: "rank-one images of rank-one projections", limit: secs(5), run: rank_one_images },
        Criterion { id: 3, title: "Hilbert-Schmidt conformal factor", limit: secs(10), run: conformal_factor },
        Criterion { id: 4, title: "operator reconstruction round trip", limit: secs(30), run: reconstruction },
        Criterion { id: 5, title: "partial transpose of the singlet", limit: secs(10), run: partial_transpose_singlet },
        Criterion { id: 6, title: "Leggett inequality values and violation region", limit: secs(1), run: leggett_values },
        Criterion { id: 7, title: "LP soundness and refinement", limit: secs(300), run: lp_soundness },
        Criterion { id: 8, title: "condition-checker logic", limit: secs(120), run: checker_logic },
        Criterion { id: 9, title: "decomposition room shrinks for the entangled state", limit: secs(600), run: nogo_trend },
        Criterion { id: 10, title: "byte-identical CLI output", limit: secs(600), run: determinism },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let result = match result {
            Ok(detail) if elapsed > c.limit => Err(format!("{detail}; too slow")),
            other => other,
        };
        let (tag, detail) = match &result {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!(
            "{tag} criterion {:>2}: {} | {detail} | {:.2} s of {} s",
            c.id,
            c.title,
            elapsed.as_secs_f64(),
            c.limit.as_secs()
        );
        if result.is_err() {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn ket(p: &Projector) -> Vec<Complex64> {
    p.ket().expect("rank-1 projector")
}

/// `⟨x⊗y|Ψ⟩` from the raw amplitudes `ψ_{ij}`.
fn overlap(psi: &[Complex64], n: usize, x: &[Complex64], y: &[Complex64]) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            s += x[i].conj() * y[j].conj() * psi[i * n + j];
        }
    }
    s
}

/// `Σ_j |⟨x⊗j|Ψ⟩|²`.
fn marginal(psi: &[Complex64], n: usize, x: &[Complex64]) -> f64 {
    (0..n)
        .map(|j| (0..n).map(|i| x[i].conj() * psi[i * n + j]).sum::<Complex64>().norm_sqr())
        .sum()
}

fn perfect_correlations() -> Outcome {
    let mut worst = 0.0f64;
    for n in [2, 3, 4] {
        let psi = max_entangled(n).map_err(|e| e.to_string())?;
        let rho = psi.density();
        let amps = psi.amplitudes();
        let mut r = rng(1000 + n as u64);
        for _ in 0..1000 {
            let x = haar_ket(n, &mut r);
            let p = Projector::rank_one(&x).unwrap();
            let partner = partner_projection(&psi, &p).unwrap();
            let pp = born_marginal_a(&rho, &p).unwrap();
            let joint = born_joint(&rho, &p, &partner).unwrap();
            let oracle_p = marginal(amps, n, &x);
            let oracle_joint = overlap(amps, n, &x, &ket(&partner)).norm_sqr();
            let dev = [
                (pp - 1.0 / n as f64).abs(),
                (joint - pp).abs(),
                (oracle_p - pp).abs(),
                (oracle_joint - joint).abs(),
            ]
            .into_iter()
            .fold(0.0, f64::max);
            worst = worst.max(dev);
        }
    }
    ensure!(worst <= 1e-10, "max deviation {worst:e} > 1e-10");
    Ok(format!("n = 2, 3, 4; 1000 projections each; max deviation {worst:.2e} <= 1e-10"))
}

fn rank_one_images() -> Outcome {
    let mut worst = 0.0f64;
    for n in [2, 3] {
        let psi = max_entangled(n).unwrap();
        let rep = verify_lemma1(&psi, 1000, 2000 + n as u64).map_err(|e| e.to_string())?;
        ensure!(rep.samples == 1000 && rep.skipped == 0, "n = {n}: {} of 1000 samples skipped", rep.skipped);
        worst = worst.max(rep.max_ratio);
    }
    ensure!(worst <= 1e-10, "max eigenvalue ratio {worst:e} > 1e-10");
    Ok(format!("n = 2, 3; 1000 projections each; max |lambda_2| / trace {worst:.2e} <= 1e-10"))
}

/// Hilbert-Schmidt Gram matrix of the images of all matrix units under the
/// map `Q ↦ Ψ Qᵀ Ψ†`, where `Ψ` is the amplitude matrix. Returns the
/// diagonal value and the largest deviation from a multiple of the identity.
fn conformal_oracle(psi: &PureState) -> (f64, f64) {
    let n = psi.dims().a;
    let a = psi.amplitudes();
    let image = |u: usize, v: usize| -> Vec<Complex64> {
        // (Ψ E_uvᵀ Ψ†)_{ki} = ψ_{kv} conj(ψ_{iu}).
        let mut m = vec![Complex64::new(0.0, 0.0); n * n];
        for k in 0..n {
            for i in 0..n {
                m[k * n + i] = a[k * n + v] * a[i * n + u].conj();
            }
        }
        m
    };
    let images: Vec<Vec<Complex64>> = (0..n * n).map(|k| image(k / n, k % n)).collect();
    let gram = |s: usize, t: usize| -> Complex64 { images[s].iter().zip(&images[t]).map(|(x, y)| x.conj() * y).sum() };
    let c = gram(0, 0).re;
    let mut dev = 0.0f64;
    for s in 0..n * n {
        for t in 0..n * n {
            let want = if s == t { c } else { 0.0 };
            dev = dev.max((gram(s, t) - Complex64::new(want, 0.0)).norm());
        }
    }
    (c, dev)
}

fn conformal_factor() -> Outcome {
    let mut notes = Vec::new();
    for n in [2, 3, 4] {
        let psi = max_entangled(n).unwrap();
        let (oracle, oracle_dev) = conformal_oracle(&psi);
        ensure!(oracle_dev < 1e-14, "oracle is not conformal for n = {n}: {oracle_dev:e}");
        ensure!((oracle - 1.0 / (n * n) as f64).abs() < 1e-14, "oracle factor {oracle} for n = {n}");
        let rep = verify_lemma3(&psi, 500, 3000 + n as u64).map_err(|e| e.to_string())?;
        ensure!(rep.pairs == 500, "pairs {}", rep.pairs);
        ensure!((rep.factor - oracle).abs() <= 1e-10, "n = {n}: factor {} vs oracle {oracle}", rep.factor);
        ensure!(rep.dispersion <= 1e-10, "n = {n}: dispersion {:e}", rep.dispersion);
        notes.push(format!("n={n} factor {:.12} disp {:.1e}", rep.factor, rep.dispersion));
    }
    let control = PureState::from_schmidt_coefficients(&[0.8f64.sqrt(), 0.2f64.sqrt()]).unwrap();
    let rep = verify_lemma3(&control, 500, 3100).map_err(|e| e.to_string())?;
    ensure!(rep.dispersion > 1e-3, "control dispersion {:e} <= 1e-3", rep.dispersion);
    ensure!(conformal_oracle(&control).1 > 1e-3, "oracle control is conformal");
    Ok(format!("{}; control dispersion {:.3}", notes.join(", "), rep.dispersion))
}

/// `Tr(Λ P⊗Q)` by explicit index contraction.
fn product_trace(lam: &ComplexMatrix, n: usize, p: &ComplexMatrix, q: &ComplexMatrix) -> f64 {
    let mut s = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    s += lam[(i * n + j, k * n + l)] * p[(k, i)] * q[(l, j)];
                }
            }
        }
    }
    s.re
}

fn reconstruction() -> Outcome {
    let n = 3;
    let mut r = rng(4000);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let lam = random_unit_trace_hermitian(n * n, &mut r);
        let m = lam.matrix().clone();
        let rebuilt = reconstruct_lambda(|p, q| product_trace(&m, n, p.matrix(), q.matrix()), n).map_err(|e| e.to_string())?;
        worst = worst.max(rebuilt.matrix().dist_hs(&m));
    }
    ensure!(worst <= 1e-8, "HS error {worst:e} > 1e-8");
    Ok(format!("n = 3; 100 operators; max HS error {worst:.2e} <= 1e-8"))
}

fn partial_transpose_singlet() -> Outcome {
    let singlet = PureState::singlet();
    let pt = partial_transpose(singlet.density().matrix(), FactorDims::square(2), Side::B).unwrap();
    let pt = HermitianMatrix::new(pt).unwrap();
    let min = pt.min_eigenvalue().unwrap();
    ensure!((min + 0.5).abs() <= 1e-12, "min eigenvalue {min}");
    let lam = LambdaOperator::new(pt.clone(), 2).unwrap();
    let sampled = lam.min_product_value(100_000, 5000);
    // Independent pass over fresh product kets.
    let mut r = rng(5001);
    let mut oracle = f64::INFINITY;
    for _ in 0..100_000 {
        let x = haar_ket(2, &mut r);
        let y = haar_ket(2, &mut r);
        let v: Vec<Complex64> = (0..4).map(|k| x[k / 2] * y[k % 2]).collect();
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..4 {
            for j in 0..4 {
                s += v[i].conj() * pt.matrix()[(i, j)] * v[j];
            }
        }
        oracle = oracle.min(s.re);
    }
    ensure!(sampled >= -1e-12, "sampled minimum {sampled:e}");
    ensure!(oracle >= -1e-12, "oracle minimum {oracle:e}");
    Ok(format!("min eigenvalue {min:.15}; min over 1e5 products {sampled:.2e} (oracle {oracle:.2e})"))
}

fn bisect_crossing() -> f64 {
    let f = |phi: f64| 2.0 * (phi / 2.0).cos() - (2.0 - (2.0 / 3.0) * (phi / 2.0).sin());
    let (mut lo, mut hi) = (0.5f64, 2.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn leggett_values() -> Outcome {
    let d = DirectionTriple::new(0.2).unwrap();
    let q = quantum_lhs(&d);
    let b = leggett_bound(0.2);
    ensure!((q - 1.990008).abs() <= 1e-6, "quantum_lhs(0.2) = {q}");
    ensure!((b - 1.933444).abs() <= 1e-6, "leggett_bound(0.2) = {b}");
    let (lo, star) = violation_region();
    let oracle = bisect_crossing();
    ensure!(lo == 0.0, "region starts at {lo}");
    ensure!((star - oracle).abs() <= 1e-10, "phi* {star} vs oracle {oracle}");
    for k in 1..=20 {
        let below = star * k as f64 / 21.0;
        let above = star + (std::f64::consts::PI - star) * k as f64 / 21.0;
        let qb = quantum_lhs(&DirectionTriple::new(below).unwrap());
        let qa = quantum_lhs(&DirectionTriple::new(above).unwrap());
        ensure!(qb > leggett_bound(below), "no violation at {below}");
        ensure!(qa < leggett_bound(above), "violation at {above}");
    }
    Ok(format!("lhs {q:.7}, bound {b:.7}, phi* {star:.13} (oracle diff {:.1e})", (star - oracle).abs()))
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

fn lp_soundness() -> Outcome {
    let grids = [128, 512, 2048];
    let mut notes = Vec::new();
    for phi in [0.3, 0.8, 1.2, 2.0] {
        let d = DirectionTriple::new(phi).unwrap();
        let bound = leggett_bound(phi);
        let mut medians = Vec::new();
        for &g in &grids {
            let mut slack = Vec::new();
            for seed in 0..8u64 {
                let grid = SphereGrid::fibonacci(g).unwrap().rotated(&Rotation::random(seed));
                let sol = max_lhs_lp(&d, &grid, 1.0, Pairing::Antipodal).map_err(|e| e.to_string())?;
                ensure!(sol.value <= bound + 1e-9, "phi {phi}, grid {g}, seed {seed}: {} > {bound}", sol.value);
                ensure!(sol.marginal_residual <= 1e-9, "marginal residual {:e}", sol.marginal_residual);
                slack.push(bound - sol.value);
            }
            medians.push(median(&mut slack));
        }
        ensure!(medians.windows(2).all(|w| w[1] <= w[0]), "phi {phi}: median slack {medians:?} increases");
        notes.push(format!("phi {phi}: {:.4}/{:.4}/{:.4}", medians[0], medians[1], medians[2]));
    }
    Ok(format!("median slack at 128/512/2048 points: {}", notes.join("; ")))
}

fn trivial_table(psi: DensityOperator, n: usize, seed: u64) -> ProbabilityTable {
    let ctx = ContextSets::new(default_contexts(n, 1, seed).unwrap(), default_contexts(n, 1, seed + 1).unwrap()).unwrap();
    ProbabilityTable::new(&TrivialQuantumModel::new(psi), &ctx).unwrap()
}

fn checker_logic() -> Outcome {
    let (tol, floor) = (1e-10, 1e-8);
    // (a)
    for (rho, n) in [(PureState::singlet().density(), 2), (max_entangled(3).unwrap().density(), 3)] {
        let t = trivial_table(rho, n, 8000);
        let gating: Vec<_> = check_all(&t, tol, floor).into_iter().filter(|(c, _)| c.is_gating()).collect();
        ensure!(gating.len() == 6, "{} gating checks", gating.len());
        for (c, r) in gating {
            let r = r.map_err(|e| format!("(a) {c}: {e}"))?;
            ensure!(r.passed, "(a) n = {n}: {c} violation {:e}", r.violation);
        }
    }
    // (b)
    let ctx = ContextSets::new(default_contexts(2, 1, 8100).unwrap(), default_contexts(2, 1, 8101).unwrap()).unwrap();
    let mut leggett_pi = 0.0f64;
    for correlation in [CorrelationKind::Product, CorrelationKind::ClampedSinglet] {
        let model = LeggettModel::new(64, 1.0, Pairing::Antipodal, correlation).unwrap();
        let t = ProbabilityTable::new(&model, &ctx).unwrap();
        let pi = check_pi(&t, 1e-14).unwrap();
        let cpi = check_cpi(&t, 1e-14, floor).unwrap();
        ensure!(pi.passed && cpi.passed, "(b) {correlation:?}: PI {:e}, CPI {:e}", pi.violation, cpi.violation);
        ensure!(!check_triviality(&t, tol).unwrap().passed, "(b) {correlation:?} is trivial");
        leggett_pi = leggett_pi.max(pi.violation).max(cpi.violation);
    }
    // (c)
    let (mut both, mut neither, mut oi_cases) = (0, 0, 0);
    for seed in 0..200 {
        let t = factorized_case(seed).unwrap();
        if !check_oi(&t, 1e-12).unwrap().passed {
            continue;
        }
        oi_cases += 1;
        let pi = check_pi(&t, tol).unwrap().passed;
        let cpi = check_cpi(&t, tol, floor).unwrap().passed;
        ensure!(pi == cpi, "(c) seed {seed}: PI {pi}, CPI {cpi}");
        if pi { both += 1 } else { neither += 1 }
    }
    ensure!(oi_cases == 200, "(c) only {oi_cases} generated cases satisfy OI");
    ensure!(both > 0 && neither > 0, "(c) vacuous: {both} pass, {neither} fail");
    // (d)
    let (mut premise, mut attempts) = (0, 0u64);
    let mut families = [0usize; 4];
    while premise < 200 {
        ensure!(attempts < 2000, "(d) only {premise} premise cases in {attempts} attempts");
        let k = attempts as usize % 4;
        let t = mixed_case(MixedFamily::ALL[k], attempts).unwrap();
        attempts += 1;
        let m = check_marginal_noncontextuality(&t, tol).unwrap();
        let c = check_cpi(&t, tol, floor).unwrap();
        if m.passed && c.passed {
            premise += 1;
            families[k] += 1;
            let j = check_joint_noncontextuality(&t, 4.0 * tol + 2.0 * floor).unwrap();
            ensure!(j.passed, "(d) case {attempts}: JOINT-NC violation {:e}", j.violation);
        }
    }
    ensure!(families.iter().filter(|&&f| f > 0).count() >= 2, "(d) premise met by one family only: {families:?}");
    Ok(format!(
        "(a) ok; (b) max PI/CPI {leggett_pi:.1e}; (c) {both} pass / {neither} fail of {oi_cases}; (d) 200 of {attempts} met the premise"
    ))
}

fn nogo_trend() -> Outcome {
    let n = 3;
    let ladder = [200, 1000, 5000, 20000];
    let ent = max_entangled(n).unwrap().density();
    let mix = DensityOperator::maximally_mixed(FactorDims::square(n));
    let mut e = vec![Vec::new(); ladder.len()];
    let mut m = vec![Vec::new(); ladder.len()];
    for seed in 0..32 {
        let ce = max_perturbation_ladder(&ent, 0.5, &ladder, seed, &DirectionPolicy::Random).map_err(|e| e.to_string())?;
        let cm = max_perturbation_ladder(&mix, 0.5, &ladder, seed, &DirectionPolicy::Random).map_err(|e| e.to_string())?;
        for k in 0..ladder.len() {
            ensure!(ce[k].min_residual >= -1e-12 && cm[k].min_residual >= -1e-12, "negative residual at seed {seed}");
            e[k].push(ce[k].t_max);
            m[k].push(cm[k].t_max);
        }
    }
    let me: Vec<f64> = e.iter_mut().map(|v| median(v)).collect();
    let mm: Vec<f64> = m.iter_mut().map(|v| median(v)).collect();
    ensure!(me.windows(2).all(|w| w[1] <= w[0]), "entangled medians {me:?} increase");
    let ratio = mm[3] / me[3];
    ensure!(ratio >= 10.0, "ratio at N = 20000 is {ratio}");
    Ok(format!(
        "entangled medians {:.2e}/{:.2e}/{:.2e}/{:.2e}; comparator {:.3}; ratio {ratio:.0}",
        me[0], me[1], me[2], me[3], mm[3]
    ))
}

fn run_cli(dir: &Path, args: &[&str]) -> Result<i32, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_nogo"))
        .current_dir(dir)
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    out.status.code().ok_or_else(|| "killed".to_string())
}

fn determinism() -> Outcome {
    let runs: [(&str, &[&str], &[i32]); 7] = [
        ("scan.csv", &["leggett-scan", "--seed", "3", "--lp", "--grid", "48", "--out", "scan.csv"], &[0]),
        ("scan.json", &["leggett-scan", "--seed", "3", "--format", "json", "--out", "scan.json"], &[0]),
        ("lemmas.json", &["verify-lemmas", "--seed", "4", "--n", "4", "--out", "lemmas.json"], &[0]),
        ("nogo.json", &["nogo", "--seed", "5", "--out", "nogo.json"], &[0]),
        ("nogo.csv", &["nogo", "--seed", "5", "--n", "2", "--ladder", "16,400", "--seeds", "5", "--format", "csv", "--out", "nogo.csv"], &[0]),
        ("trivial.json", &["model-check", "--seed", "6", "--model", "trivial.toml", "--out", "trivial.json"], &[0]),
        ("leggett.json", &["model-check", "--seed", "6", "--model", "leggett.toml", "--out", "leggett.json"], &[3]),
    ];
    let dirs = [tempfile::TempDir::new().unwrap(), tempfile::TempDir::new().unwrap()];
    for d in &dirs {
        std::fs::write(d.path().join("trivial.toml"), "[state]\nkind = \"max-entangled\"\nn = 3\n[model]\nfamily = \"trivial\"\n[contexts]\nrandom_extra = 2\n").unwrap();
        std::fs::write(d.path().join("leggett.toml"), "[model]\nfamily = \"eta-leggett\"\neta = 0.9\ngrid = 32\ncorrelation = \"clamped-singlet\"\n[contexts]\nrandom_extra = 1\n").unwrap();
    }
    for (file, args, codes) in runs {
        let mut outputs = Vec::new();
        for d in &dirs {
            let code = run_cli(d.path(), args)?;
            ensure!(codes.contains(&code), "{}: exit {code}", args[0]);
            outputs.push(std::fs::read(d.path().join(file)).map_err(|e| e.to_string())?);
        }
        ensure!(outputs[0] == outputs[1], "{file} differs between runs");
        ensure!(!outputs[0].contains(&b'\r'), "{file} has CR line endings");
    }
    Ok("4 subcommands, 7 configurations, identical bytes".into())
}
