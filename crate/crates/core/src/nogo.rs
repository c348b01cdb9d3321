//! Sampled search for non-trivial convex decompositions `ρ = ηΛ₁ + (1−η)Λ₂`
//! into operators that are non-negative on product projections, plus the
//! checks that force any such decomposition of a maximally entangled state to
//! be trivial.

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::influence::{
    fit_proportionality, phi_from_lambda, phi_from_pure_state, proportionality_profile, require_max_entangled,
    LambdaOperator, ProportionalityRecord, ProportionalityReport,
};
use crate::linalg::{hs_inner, kron_vec, ComplexMatrix, FactorDims, HermitianMatrix};
use crate::lp;
use crate::sampling::{haar_ket, random_traceless_hermitian, rng, SeededRng};
use crate::states::{DensityOperator, PureState};

const TRACELESS_TOL: f64 = 1e-10;
const INACTIVE: f64 = 1e-14;
/// Below this Gram eigenvalue a family of operators is not treated as a basis.
pub const BASIS_TOL: f64 = 1e-10;
pub const CONSTANCY_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub enum DirectionPolicy {
    /// A random traceless Hermitian direction of unit HS norm, drawn from the
    /// problem's seed before any constraint.
    Random,
    Given(HermitianMatrix),
}

#[derive(Clone, Debug)]
pub struct DecompositionProblem {
    rho: DensityOperator,
    eta: f64,
    samples: usize,
    seed: u64,
    direction: DirectionPolicy,
}

impl DecompositionProblem {
    pub fn new(rho: DensityOperator, eta: f64, samples: usize, seed: u64, direction: DirectionPolicy) -> Result<Self> {
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::InvalidParameter(format!("eta {eta} must lie strictly inside (0, 1)")));
        }
        let d = rho.dims().total();
        if samples < d * d {
            return Err(Error::InvalidParameter(format!(
                "{samples} constraint samples; at least {} needed",
                d * d
            )));
        }
        if let DirectionPolicy::Given(delta) = &direction {
            if delta.dim() != d {
                return Err(Error::Dimension(format!("direction of dimension {} for a {d}-dimensional state", delta.dim())));
            }
            let tr = delta.trace();
            if tr.abs() > TRACELESS_TOL {
                return Err(Error::InvalidParameter(format!("direction has trace {tr}")));
            }
            if delta.matrix().hs_norm() == 0.0 {
                return Err(Error::InvalidParameter("zero direction".into()));
            }
        }
        Ok(Self {
            rho,
            eta,
            samples,
            seed,
            direction,
        })
    }

    pub fn rho(&self) -> &DensityOperator {
        &self.rho
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Product kets `x ⊗ y` of the sampled constraints, in stream order.
pub struct ConstraintStream {
    dims: FactorDims,
    rng: SeededRng,
}

impl Iterator for ConstraintStream {
    type Item = Vec<Complex64>;

    fn next(&mut self) -> Option<Self::Item> {
        let x = haar_ket(self.dims.a, &mut self.rng);
        let y = haar_ket(self.dims.b, &mut self.rng);
        Some(kron_vec(&x, &y))
    }
}

/// The direction and constraint stream for `seed`. The direction is drawn
/// first, so a longer sample is an extension of a shorter one.
pub fn constraint_stream(dims: FactorDims, seed: u64, policy: &DirectionPolicy) -> (HermitianMatrix, ConstraintStream) {
    let mut r = rng(seed);
    let delta = match policy {
        DirectionPolicy::Random => random_traceless_hermitian(dims.total(), &mut r),
        DirectionPolicy::Given(d) => d.clone(),
    };
    (delta, ConstraintStream { dims, rng: r })
}

#[derive(Clone, Debug)]
pub struct FeasibilityCertificate {
    pub t_max: f64,
    pub delta: HermitianMatrix,
    /// Smallest `Tr(Λ_k P⊗Q)` over both operators and every sample at `t_max`.
    pub min_residual: f64,
    pub samples: usize,
    pub eta: f64,
}

impl FeasibilityCertificate {
    /// `(Λ₁, Λ₂) = (ρ + (1−η) t Δ, ρ − η t Δ)`.
    pub fn lambdas(&self, rho: &DensityOperator) -> (ComplexMatrix, ComplexMatrix) {
        let d = self.delta.matrix();
        (
            rho.matrix() + &d.scale_real((1.0 - self.eta) * self.t_max),
            rho.matrix() - &d.scale_real(self.eta * self.t_max),
        )
    }
}

struct Accumulator {
    eta: f64,
    t_max: f64,
    active: bool,
    forms: Vec<(f64, f64)>,
}

impl Accumulator {
    fn new(eta: f64) -> Self {
        Self {
            eta,
            t_max: f64::INFINITY,
            active: false,
            forms: Vec::new(),
        }
    }

    fn push(&mut self, r: f64, d: f64) {
        let r = r.max(0.0);
        if d > INACTIVE {
            self.active = true;
            self.t_max = self.t_max.min(r / (self.eta * d));
        } else if d < -INACTIVE {
            self.active = true;
            self.t_max = self.t_max.min(r / ((1.0 - self.eta) * -d));
        }
        self.forms.push((r, d));
    }

    fn certificate(&self, delta: &HermitianMatrix) -> Result<FeasibilityCertificate> {
        if !self.active {
            return Err(Error::Degenerate(format!(
                "direction is inactive on all {} samples",
                self.forms.len()
            )));
        }
        let t = self.t_max;
        let min_residual = self
            .forms
            .iter()
            .map(|&(r, d)| (r + (1.0 - self.eta) * t * d).min(r - self.eta * t * d))
            .fold(f64::INFINITY, f64::min);
        Ok(FeasibilityCertificate {
            t_max: t,
            delta: delta.clone(),
            min_residual,
            samples: self.forms.len(),
            eta: self.eta,
        })
    }
}

/// Largest `t ≥ 0` for which both `ρ + (1−η)tΔ` and `ρ − ηtΔ` are
/// non-negative on every sampled product projection. Each sample is a pair of
/// linear forms in `t`, so the maximum is a ratio test.
pub fn max_perturbation(p: &DecompositionProblem) -> Result<FeasibilityCertificate> {
    Ok(max_perturbation_ladder(&p.rho, p.eta, &[p.samples], p.seed, &p.direction)?.remove(0))
}

/// [`max_perturbation`] for each prefix length in `ladder` of one constraint
/// stream. `t_max` is non-increasing along the ladder.
pub fn max_perturbation_ladder(
    rho: &DensityOperator,
    eta: f64,
    ladder: &[usize],
    seed: u64,
    policy: &DirectionPolicy,
) -> Result<Vec<FeasibilityCertificate>> {
    if ladder.is_empty() || ladder.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("sample ladder must be non-empty and strictly increasing".into()));
    }
    for &n in ladder {
        DecompositionProblem::new(rho.clone(), eta, n, seed, policy.clone())?;
    }
    let (delta, stream) = constraint_stream(rho.dims(), seed, policy);
    let mut acc = Accumulator::new(eta);
    let mut out = Vec::with_capacity(ladder.len());
    let mut rungs = ladder.iter().peekable();
    for (k, v) in stream.enumerate() {
        let r = rho.matrix().expectation(&v).re;
        let d = delta.matrix().expectation(&v).re;
        acc.push(r, d);
        if rungs.peek() == Some(&&(k + 1)) {
            out.push(acc.certificate(&delta)?);
            rungs.next();
            if rungs.peek().is_none() {
                break;
            }
        }
    }
    Ok(out)
}

/// Orthonormal traceless Hermitian basis of `d × d` matrices (generalized
/// Gell-Mann): symmetric and antisymmetric off-diagonal pairs for `j < k`,
/// then the diagonal family.
pub fn traceless_basis(d: usize) -> Vec<HermitianMatrix> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(d * d - 1);
    for j in 0..d {
        for k in j + 1..d {
            let mut sym = ComplexMatrix::zeros(d, d);
            sym[(j, k)] = Complex64::new(s, 0.0);
            sym[(k, j)] = Complex64::new(s, 0.0);
            out.push(HermitianMatrix::hermitian_part(&sym));
            let mut anti = ComplexMatrix::zeros(d, d);
            anti[(j, k)] = Complex64::new(0.0, -s);
            anti[(k, j)] = Complex64::new(0.0, s);
            out.push(HermitianMatrix::hermitian_part(&anti));
        }
    }
    for l in 1..d {
        let norm = ((l * (l + 1)) as f64).sqrt();
        let diag: Vec<f64> = (0..d)
            .map(|j| match j.cmp(&l) {
                std::cmp::Ordering::Less => 1.0 / norm,
                std::cmp::Ordering::Equal => -(l as f64) / norm,
                std::cmp::Ordering::Greater => 0.0,
            })
            .collect();
        out.push(HermitianMatrix::hermitian_part(&ComplexMatrix::diagonal(&diag)));
    }
    out
}

/// `⟨v|G_k|v⟩` for every element of [`traceless_basis`], without forming the
/// matrices.
pub fn traceless_coordinates(v: &[Complex64]) -> Vec<f64> {
    let d = v.len();
    let r2 = std::f64::consts::SQRT_2;
    let mut out = Vec::with_capacity(d * d - 1);
    for j in 0..d {
        for k in j + 1..d {
            let z = v[j].conj() * v[k];
            out.push(r2 * z.re);
            out.push(r2 * z.im);
        }
    }
    let mut prefix = 0.0;
    for l in 1..d {
        prefix += v[l - 1].norm_sqr();
        let norm = ((l * (l + 1)) as f64).sqrt();
        out.push((prefix - l as f64 * v[l].norm_sqr()) / norm);
    }
    out
}

#[derive(Clone, Debug)]
pub struct LpPerturbation {
    /// Optimal `⟨Δ, X⟩` over feasible perturbations `X` in the box.
    pub extent: f64,
    pub direction: HermitianMatrix,
    pub x: HermitianMatrix,
    /// Whether any basis coordinate of `X` sits on the box `|x_k| ≤ 1`.
    pub box_active: bool,
    pub min_residual: f64,
    pub samples: usize,
}

/// Multi-direction variant: maximizes `⟨Δ, X⟩` over all traceless Hermitian
/// `X = Σ x_k G_k` with `|x_k| ≤ 1` such that `ρ + (1−η)X` and `ρ − ηX` are
/// non-negative on the sampled product projections. The dense LP has
/// `2N` rows and `d² − 1` columns, so keep `N` moderate.
pub fn max_perturbation_lp(p: &DecompositionProblem) -> Result<LpPerturbation> {
    let d = p.rho.dims().total();
    let basis = traceless_basis(d);
    let (delta, stream) = constraint_stream(p.rho.dims(), p.seed, &p.direction);
    let mut problem = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<_> = basis
        .iter()
        .map(|g| {
            let c = hs_inner(delta.matrix(), g.matrix()).expect("same shape").re;
            problem.add_var(c, (-1.0, 1.0))
        })
        .collect();
    let mut rows = Vec::with_capacity(p.samples);
    for v in stream.take(p.samples) {
        let r = p.rho.matrix().expectation(&v).re.max(0.0);
        let g = traceless_coordinates(&v);
        let plus = vars.iter().zip(&g).map(|(&x, &gk)| (x, (1.0 - p.eta) * gk));
        problem.add_constraint(plus, ComparisonOp::Ge, -r);
        let minus = vars.iter().zip(&g).map(|(&x, &gk)| (x, p.eta * gk));
        problem.add_constraint(minus, ComparisonOp::Le, r);
        rows.push((r, g));
    }
    let solution = lp::solve(&problem, "sampled decomposition LP")?;
    let x: Vec<f64> = vars.iter().map(|&v| solution.var_value(v)).collect();
    let mut xm = ComplexMatrix::zeros(d, d);
    for (xk, g) in x.iter().zip(&basis) {
        xm = &xm + &g.matrix().scale_real(*xk);
    }
    let min_residual = rows
        .iter()
        .map(|(r, g)| {
            let s: f64 = g.iter().zip(&x).map(|(a, b)| a * b).sum();
            (r + (1.0 - p.eta) * s).min(r - p.eta * s)
        })
        .fold(f64::INFINITY, f64::min);
    Ok(LpPerturbation {
        extent: solution.objective(),
        direction: delta,
        x: HermitianMatrix::hermitian_part(&xm),
        box_active: x.iter().any(|v| v.abs() >= 1.0 - 1e-9),
        min_residual,
        samples: p.samples,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditioningReport {
    /// `λ_max/λ_min` of the HS Gram matrix of the images; infinite when the
    /// images are linearly dependent.
    pub gram_condition: f64,
    /// The same ratio for the input family.
    pub input_condition: f64,
    pub min_eigenvalue: f64,
    pub is_basis: bool,
}

fn gram_spectrum(ops: &[ComplexMatrix]) -> Result<(f64, f64)> {
    let k = ops.len();
    let gram = ComplexMatrix::from_fn(k, k, |i, j| hs_inner(&ops[i], &ops[j]).expect("same shape"));
    let values = HermitianMatrix::hermitian_part(&gram).eig()?.values;
    Ok((values[0], values[k - 1]))
}

fn condition(min: f64, max: f64) -> f64 {
    if min > BASIS_TOL {
        max / min
    } else {
        f64::INFINITY
    }
}

/// Whether `{Φ_Ψ(Q_i)}` is again a basis when `{Q_i}` is one.
pub fn basis_image_conditioning(psi: &PureState, basis: &[ComplexMatrix]) -> Result<ConditioningReport> {
    let n = psi.dims().a;
    if psi.dims().b != n {
        return Err(Error::Dimension("expected equal factor dimensions".into()));
    }
    if basis.len() != n * n || basis.iter().any(|q| q.rows() != n || q.cols() != n) {
        return Err(Error::Dimension(format!("expected {} operators of size {n}x{n}", n * n)));
    }
    let (in_min, in_max) = gram_spectrum(basis)?;
    if in_min <= BASIS_TOL {
        return Err(Error::Singular(format!("input family does not span (Gram eigenvalue {in_min:e})")));
    }
    let phi = phi_from_pure_state(psi)?;
    let images: Vec<_> = basis.iter().map(|q| phi.apply(q)).collect();
    let (min, max) = gram_spectrum(&images)?;
    Ok(ConditioningReport {
        gram_condition: condition(min, max),
        input_condition: condition(in_min, in_max),
        min_eigenvalue: min,
        is_basis: min > BASIS_TOL,
    })
}

#[derive(Clone, Debug)]
pub struct ConstancyReport {
    /// `c(Q_i)` for each basis element; `None` where `Φ_Ψ(Q_i)` vanishes.
    pub basis_records: Vec<Option<ProportionalityRecord>>,
    pub sampled: ProportionalityReport,
    pub c_mean: f64,
    /// Max `|c(Q) − c_mean|` over basis elements and samples.
    pub dispersion: f64,
    pub max_residual: f64,
    /// Residuals and dispersion both within [`CONSTANCY_TOL`].
    pub proportional: bool,
    pub c_is_one: bool,
    /// `‖Λ − |Ψ⟩⟨Ψ|‖_HS`.
    pub distance_to_psi: f64,
}

/// Computes `c(Q)` on a spanning family and on random projections. When `Φ_Λ`
/// is proportional to `Φ_Ψ` everywhere the constant must be 1 and `Λ` must be
/// `|Ψ⟩⟨Ψ|`.
pub fn verify_constancy_chain(
    psi: &PureState,
    lam: &LambdaOperator,
    basis: &[ComplexMatrix],
    samples: usize,
    seed: u64,
) -> Result<ConstancyReport> {
    require_max_entangled(psi)?;
    basis_image_conditioning(psi, basis)?;
    let phi_psi = phi_from_pure_state(psi)?;
    let phi_lam = phi_from_lambda(lam);
    let basis_records: Vec<_> = basis
        .iter()
        .map(|q| fit_proportionality(&phi_lam, &phi_psi, q))
        .collect();
    let sampled = proportionality_profile(psi, lam, samples, seed)?;
    let all: Vec<ProportionalityRecord> = basis_records
        .iter()
        .flatten()
        .chain(&sampled.records)
        .copied()
        .collect();
    if all.is_empty() {
        return Err(Error::Degenerate("no projection with non-vanishing image".into()));
    }
    let c_mean = all.iter().map(|r| r.c).sum::<f64>() / all.len() as f64;
    let dispersion = all.iter().map(|r| (r.c - c_mean).abs()).fold(0.0, f64::max);
    let max_residual = all.iter().map(|r| r.residual).fold(0.0, f64::max);
    let proportional = dispersion <= CONSTANCY_TOL && max_residual <= CONSTANCY_TOL;
    let distance_to_psi = lam.matrix().dist_hs(psi.density().matrix());
    Ok(ConstancyReport {
        basis_records,
        sampled,
        c_mean,
        dispersion,
        max_residual,
        proportional,
        c_is_one: proportional && (c_mean - 1.0).abs() <= CONSTANCY_TOL,
        distance_to_psi,
    })
}
