use nogo_core::influence::{informationally_complete_projectors, reconstruct_lambda, verify_lemma1, verify_lemma3};
use nogo_core::nogo::{basis_image_conditioning, verify_constancy_chain};
use nogo_core::states::{born_joint, PureState};
use serde::Serialize;

use super::{count, resolve_common, status, tolerance, CommonEcho, Outcome};
use crate::args::{Format, VerifyLemmasArgs};
use crate::error::{config, CliResult};
use crate::format::{finite, to_json, write_output, Num};
use crate::model_file::{load_state_file, ResolvedState, StateEcho, StateKind, StateSpec};

const DIMENSIONS: [usize; 3] = [2, 3, 4];

#[derive(Serialize)]
struct Config {
    command: &'static str,
    #[serde(flatten)]
    common: CommonEcho,
    n: usize,
    state_file: Option<String>,
    state: StateEcho,
    samples: usize,
    pairs: usize,
    tol_lemma1: Num,
    tol_lemma3: Num,
    tol_constancy: Num,
}

#[derive(Serialize)]
struct Lemma1 {
    status: &'static str,
    samples: usize,
    skipped: usize,
    max_ratio: Num,
    tolerance: Num,
}

#[derive(Serialize)]
struct Lemma3 {
    status: &'static str,
    pairs: usize,
    hs_factor: Num,
    expected_factor: Num,
    factor_deviation: Num,
    dispersion: Num,
    tolerance: Num,
}

#[derive(Serialize)]
struct Conditioning {
    status: &'static str,
    is_basis: bool,
    gram_condition: Option<Num>,
    input_condition: Option<Num>,
    min_eigenvalue: Num,
}

#[derive(Serialize)]
struct Constancy {
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    c_mean: Option<Num>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dispersion: Option<Num>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_residual: Option<Num>,
    #[serde(skip_serializing_if = "Option::is_none")]
    distance_to_psi: Option<Num>,
    #[serde(skip_serializing_if = "Option::is_none")]
    proportional: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    c_is_one: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tolerance: Option<Num>,
}

#[derive(Serialize)]
struct Checks {
    lemma1: Lemma1,
    lemma3: Lemma3,
    conditioning: Conditioning,
    constancy: Constancy,
}

#[derive(Serialize)]
struct Report {
    config: Config,
    checks: Checks,
    verdict: &'static str,
}

fn resolve_state(args: &VerifyLemmasArgs) -> CliResult<(PureState, StateSpec)> {
    let spec = match &args.state {
        Some(path) => load_state_file(path)?,
        None => StateSpec {
            kind: StateKind::MaxEntangled,
            n: Some(args.n.unwrap_or(3)),
            coefficients: None,
            amplitudes: None,
        },
    };
    if let (Some(_), Some(n)) = (&args.state, spec.n) {
        if args.n.is_some_and(|m| m != n) {
            return Err(config(format!("--n {} disagrees with state.n = {n}", args.n.unwrap_or(n))));
        }
    }
    let psi = match spec.resolve()? {
        ResolvedState::Pure(p) => p,
        ResolvedState::Mixed(_) => return Err(config("verify-lemmas needs a pure state")),
    };
    let dims = psi.dims();
    if dims.a != dims.b || !DIMENSIONS.contains(&dims.a) {
        return Err(config(format!("state dimension {}x{} not supported; use n in {{2, 3, 4}}", dims.a, dims.b)));
    }
    if args.n.is_some_and(|m| m != dims.a) {
        return Err(config(format!("--n disagrees with the state dimension {}", dims.a)));
    }
    Ok((psi, spec))
}

pub fn run(args: &VerifyLemmasArgs) -> CliResult<Outcome> {
    let common = resolve_common(&args.common, Format::Json, &[Format::Json])?;
    let samples = count("--samples", args.samples)?;
    let pairs = count("--pairs", args.pairs)?;
    let tol1 = tolerance("--tol-lemma1", args.tol_lemma1)?;
    let tol3 = tolerance("--tol-lemma3", args.tol_lemma3)?;
    let tolc = tolerance("--tol-constancy", args.tol_constancy)?;
    let (psi, spec) = resolve_state(args)?;
    let n = psi.dims().a;
    let seed = args.common.seed;

    let l1 = verify_lemma1(&psi, samples, seed)?;
    let l1_pass = l1.max_ratio <= tol1 && l1.skipped < l1.samples;
    let lemma1 = Lemma1 {
        status: status(l1_pass),
        samples: l1.samples,
        skipped: l1.skipped,
        max_ratio: Num(l1.max_ratio),
        tolerance: Num(tol1),
    };

    let l3 = verify_lemma3(&psi, pairs, seed.wrapping_add(1))?;
    let expected = 1.0 / (n * n) as f64;
    let l3_pass = l3.factor > 0.0 && l3.dispersion <= tol3;
    let lemma3 = Lemma3 {
        status: status(l3_pass),
        pairs: l3.pairs,
        hs_factor: Num(l3.factor),
        expected_factor: Num(expected),
        factor_deviation: Num((l3.factor - expected).abs()),
        dispersion: Num(l3.dispersion),
        tolerance: Num(tol3),
    };

    let basis: Vec<_> = informationally_complete_projectors(n).iter().map(|p| p.matrix().clone()).collect();
    let cond = basis_image_conditioning(&psi, &basis)?;
    let conditioning = Conditioning {
        status: status(cond.is_basis),
        is_basis: cond.is_basis,
        gram_condition: finite(cond.gram_condition),
        input_condition: finite(cond.input_condition),
        min_eigenvalue: Num(cond.min_eigenvalue),
    };

    let constancy = if psi.is_maximally_entangled() {
        let rho = psi.density();
        let lam = reconstruct_lambda(|p, q| born_joint(&rho, p, q).unwrap_or(f64::NAN), n)?;
        let c = verify_constancy_chain(&psi, &lam, &basis, samples, seed.wrapping_add(2))?;
        let pass = c.proportional && c.c_is_one && c.distance_to_psi <= tolc;
        Constancy {
            status: status(pass),
            reason: None,
            c_mean: Some(Num(c.c_mean)),
            dispersion: Some(Num(c.dispersion)),
            max_residual: Some(Num(c.max_residual)),
            distance_to_psi: Some(Num(c.distance_to_psi)),
            proportional: Some(c.proportional),
            c_is_one: Some(c.c_is_one),
            tolerance: Some(Num(tolc)),
        }
    } else {
        Constancy {
            status: "skipped",
            reason: Some("state is not maximally entangled".into()),
            c_mean: None,
            dispersion: None,
            max_residual: None,
            distance_to_psi: None,
            proportional: None,
            c_is_one: None,
            tolerance: None,
        }
    };

    let failures: Vec<String> = [
        ("lemma1", lemma1.status),
        ("lemma3", lemma3.status),
        ("conditioning", conditioning.status),
        ("constancy", constancy.status),
    ]
    .iter()
    .filter(|(_, s)| *s == "fail")
    .map(|(name, _)| name.to_string())
    .collect();

    let report = Report {
        config: Config {
            command: "verify-lemmas",
            common,
            n,
            state_file: args.state.as_ref().map(|p| p.display().to_string()),
            state: spec.echo(n),
            samples,
            pairs,
            tol_lemma1: Num(tol1),
            tol_lemma3: Num(tol3),
            tol_constancy: Num(tolc),
        },
        checks: Checks {
            lemma1,
            lemma3,
            conditioning,
            constancy,
        },
        verdict: status(failures.is_empty()),
    };
    write_output(&args.common.out, &to_json(&report)?)?;
    Ok(Outcome {
        out: args.common.out.clone(),
        failures,
    })
}
