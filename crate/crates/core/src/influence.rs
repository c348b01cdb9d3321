//! Influence-free operators `Λ` and the maps `Φ_Λ` they induce.
//!
//! A hidden state that assigns `p(P,Q) = Tr(Λ P⊗Q)` to product projections is
//! equivalently described by the linear map `Φ_Λ(Q) = Tr_B(Λ (1⊗Q))`, with
//! `p(P,Q) = Tr(P Φ_Λ(Q))`. `Λ` itself only has to be non-negative on product
//! projections; it need not be positive semidefinite.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    hs_inner, kron, ComplexMatrix, FactorDims, HermitianMatrix, Projector, ONE, ZERO,
};
use crate::sampling::{ginibre, haar_projector, rng};
use crate::states::{basis_ket, product_expectation, DensityOperator, PureState};

/// Trace tolerance for `Λ`.
pub const LAMBDA_TRACE_TOL: f64 = 1e-10;
/// Allowed negativity of `Tr(Λ P⊗Q)` on sampled product projections.
pub const PRODUCT_POSITIVITY_TOL: f64 = 1e-10;
/// `Φ(Q)` with smaller trace (or HS norm) is treated as a zero-probability sample.
pub const ZERO_PROBABILITY_SKIP: f64 = 1e-8;

/// Self-adjoint, unit-trace operator on `H ⊗ H` with `dim H = n`.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaOperator {
    matrix: HermitianMatrix,
    n: usize,
}

impl LambdaOperator {
    pub fn new(matrix: HermitianMatrix, n: usize) -> Result<Self> {
        Self::with_trace_tolerance(matrix, n, LAMBDA_TRACE_TOL)
    }

    fn with_trace_tolerance(matrix: HermitianMatrix, n: usize, tol: f64) -> Result<Self> {
        if matrix.dim() != n * n {
            return Err(Error::Dimension(format!(
                "Λ of dimension {} on a {n}x{n} space",
                matrix.dim()
            )));
        }
        let tr = matrix.trace();
        if (tr - 1.0).abs() > tol {
            return Err(Error::InvalidParameter(format!("Tr(Λ) = {tr}, expected 1")));
        }
        Ok(Self { matrix, n })
    }

    pub fn from_density(rho: &DensityOperator) -> Result<Self> {
        let dims = rho.dims();
        if dims.a != dims.b {
            return Err(Error::Dimension("Λ needs equal factor dimensions".into()));
        }
        Self::new(rho.hermitian().clone(), dims.a)
    }

    pub fn from_pure(psi: &PureState) -> Result<Self> {
        Self::from_density(&psi.density())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dims(&self) -> FactorDims {
        FactorDims::square(self.n)
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.matrix.matrix()
    }

    /// `Tr(Λ P⊗Q)`, unclamped.
    pub fn product_value(&self, p: &Projector, q: &Projector) -> f64 {
        product_expectation(self.matrix(), p.matrix(), q.matrix()).re
    }

    /// Minimum of `Tr(Λ P⊗Q)` over `samples` Haar-random rank-1 product pairs.
    /// A sampled audit, not a proof of product positivity.
    pub fn min_product_value(&self, samples: usize, seed: u64) -> f64 {
        let mut r = rng(seed);
        let n = self.n;
        let m = self.matrix();
        (0..samples)
            .map(|_| {
                let x = crate::sampling::haar_ket(n, &mut r);
                let y = crate::sampling::haar_ket(n, &mut r);
                m.expectation(&crate::linalg::kron_vec(&x, &y)).re
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_product_positive_on_samples(&self, samples: usize, seed: u64) -> bool {
        self.min_product_value(samples, seed) >= -PRODUCT_POSITIVITY_TOL
    }
}

/// Linear map on `n × n` operators, stored as an `n² × n²` matrix acting on
/// row-major vectorizations.
#[derive(Clone, Debug, PartialEq)]
pub struct PhiMap {
    n: usize,
    matrix: ComplexMatrix,
}

impl PhiMap {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn apply(&self, q: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((q.rows(), q.cols()), (self.n, self.n), "operator dimension mismatch");
        let out = self.matrix.apply(q.data());
        ComplexMatrix::new(self.n, self.n, out).expect("finite by construction")
    }

    /// `Tr(P Φ(Q))`.
    pub fn probability(&self, p: &Projector, q: &Projector) -> f64 {
        (p.matrix() * &self.apply(q.matrix())).trace().re
    }

    /// `Tr(Φ(1))`, which is 1 for a unit-trace `Λ`.
    pub fn normalization(&self) -> f64 {
        self.apply(&ComplexMatrix::identity(self.n)).trace().re
    }

    /// Image of a Hermitian operator, symmetrized.
    pub fn apply_hermitian(&self, q: &ComplexMatrix) -> HermitianMatrix {
        HermitianMatrix::hermitian_part(&self.apply(q))
    }
}

/// `Φ_Λ(Q) = Tr_B(Λ (1⊗Q))`, i.e. `Φ(Q)[a,c] = Σ_{b,d} Λ[(a,b),(c,d)] Q[d,b]`.
pub fn phi_from_lambda(lam: &LambdaOperator) -> PhiMap {
    let n = lam.n;
    let l = lam.matrix();
    let nn = n * n;
    let matrix = ComplexMatrix::from_fn(nn, nn, |row, col| {
        let (a, c) = (row / n, row % n);
        let (d, b) = (col / n, col % n);
        l[(a * n + b, c * n + d)]
    });
    PhiMap { n, matrix }
}

/// `Φ_Ψ(Q) = Σ_ij β_i β_j |ψ_i⟩⟨ψ_j| ⟨φ_j|Q|φ_i⟩`, assembled from the Schmidt
/// data of `psi`.
pub fn phi_from_pure_state(psi: &PureState) -> Result<PhiMap> {
    let dims = psi.dims();
    if dims.a != dims.b {
        return Err(Error::Dimension(format!(
            "Φ needs equal factor dimensions, got {}x{}",
            dims.a, dims.b
        )));
    }
    let n = dims.a;
    let s = psi.schmidt();
    let k = s.coefficients.len();
    let mut matrix = ComplexMatrix::zeros(n * n, n * n);
    // Column (d, b) is the image of the matrix unit |d⟩⟨b|:
    // ⟨φ_j|d⟩⟨b|φ_i⟩ = conj(φ_j[d]) φ_i[b].
    for d in 0..n {
        for b in 0..n {
            let col = d * n + b;
            for i in 0..k {
                for j in 0..k {
                    let w = s.coefficients[i] * s.coefficients[j];
                    if w == 0.0 {
                        continue;
                    }
                    let amp = s.right[j][d].conj() * s.right[i][b] * w;
                    for a in 0..n {
                        for c in 0..n {
                            matrix[(a * n + c, col)] += amp * s.left[i][a] * s.left[j][c].conj();
                        }
                    }
                }
            }
        }
    }
    Ok(PhiMap { n, matrix })
}

#[derive(Clone, Debug)]
pub struct PurityReport {
    pub samples: usize,
    pub skipped: usize,
    /// Largest `|λ_k| / Tr Φ(Q)` over all but the leading eigenvalue.
    pub max_ratio: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Checks that `Φ(Q)` has numerical rank at most one for sampled rank-1 `Q`.
pub fn purity_profile(phi: &PhiMap, samples: usize, seed: u64) -> Result<PurityReport> {
    let tolerance = 1e-10;
    let mut r = rng(seed);
    let mut skipped = 0;
    let mut max_ratio = 0.0f64;
    for _ in 0..samples {
        let q = haar_projector(phi.n, &mut r);
        let image = phi.apply_hermitian(q.matrix());
        let tr = image.trace();
        if tr <= ZERO_PROBABILITY_SKIP {
            skipped += 1;
            continue;
        }
        let eig = image.eig()?;
        let n = eig.values.len();
        let rest = eig.values[..n - 1].iter().map(|v| v.abs()).fold(0.0, f64::max);
        max_ratio = max_ratio.max(rest / tr);
    }
    Ok(PurityReport {
        samples,
        skipped,
        max_ratio,
        tolerance,
        passed: max_ratio <= tolerance && skipped < samples,
    })
}

/// Images of rank-1 projections under `Φ_Ψ` are rank one for any pure `Ψ`.
pub fn verify_lemma1(psi: &PureState, samples: usize, seed: u64) -> Result<PurityReport> {
    purity_profile(&phi_from_pure_state(psi)?, samples, seed)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProportionalityRecord {
    pub c: f64,
    /// `‖Φ_Λ(Q) − c Φ_Ψ(Q)‖_HS`.
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct ProportionalityReport {
    pub records: Vec<ProportionalityRecord>,
    pub skipped: usize,
    pub c_mean: f64,
    pub max_deviation: f64,
    pub max_residual: f64,
    pub min_c: f64,
}

impl ProportionalityReport {
    fn from_records(records: Vec<ProportionalityRecord>, skipped: usize) -> Self {
        let k = records.len().max(1) as f64;
        let c_mean = records.iter().map(|r| r.c).sum::<f64>() / k;
        let max_deviation = records.iter().map(|r| (r.c - c_mean).abs()).fold(0.0, f64::max);
        let max_residual = records.iter().map(|r| r.residual).fold(0.0, f64::max);
        let min_c = records.iter().map(|r| r.c).fold(f64::INFINITY, f64::min);
        Self {
            records,
            skipped,
            c_mean,
            max_deviation,
            max_residual,
            min_c,
        }
    }
}

/// Least-squares `c` with `Φ_Λ(Q) ≈ c Φ_Ψ(Q)`; `None` if `Φ_Ψ(Q)` vanishes.
pub fn fit_proportionality(
    phi_lambda: &PhiMap,
    phi_psi: &PhiMap,
    q: &ComplexMatrix,
) -> Option<ProportionalityRecord> {
    let target = phi_psi.apply(q);
    let norm_sq = target.hs_norm().powi(2);
    if norm_sq.sqrt() <= ZERO_PROBABILITY_SKIP {
        return None;
    }
    let image = phi_lambda.apply(q);
    let c = hs_inner(&target, &image).expect("same shape").re / norm_sq;
    let residual = image.dist_hs(&target.scale_real(c));
    Some(ProportionalityRecord { c, residual })
}

/// Compares `Φ_Λ` against `Φ_Ψ` on sampled rank-1 projections.
pub fn proportionality_profile(
    psi: &PureState,
    lam: &LambdaOperator,
    samples: usize,
    seed: u64,
) -> Result<ProportionalityReport> {
    require_max_entangled(psi)?;
    if psi.dims().a != lam.n {
        return Err(Error::Dimension(format!(
            "state on {}x{} vs Λ on {}x{}",
            psi.dims().a,
            psi.dims().b,
            lam.n,
            lam.n
        )));
    }
    let phi_psi = phi_from_pure_state(psi)?;
    let phi_lam = phi_from_lambda(lam);
    let mut r = rng(seed);
    let mut records = Vec::with_capacity(samples);
    let mut skipped = 0;
    for _ in 0..samples {
        let q = haar_projector(lam.n, &mut r);
        match fit_proportionality(&phi_lam, &phi_psi, q.matrix()) {
            Some(rec) => records.push(rec),
            None => skipped += 1,
        }
    }
    Ok(ProportionalityReport::from_records(records, skipped))
}

pub(crate) fn require_max_entangled(psi: &PureState) -> Result<()> {
    let dev = psi
        .max_entanglement_deviation()
        .ok_or_else(|| Error::Dimension("expected equal factor dimensions".into()))?;
    if dev > crate::states::MAX_ENTANGLED_TOL {
        return Err(Error::NotMaximallyEntangled(dev));
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct ConformalityReport {
    /// Fitted constant `c` in `Tr(Φ(A)† Φ(B)) = c Tr(A† B)`.
    pub factor: f64,
    /// Max `|Tr(Φ(A)†Φ(B)) − c Tr(A†B)|` over unit-norm pairs.
    pub dispersion: f64,
    pub pairs: usize,
    pub is_hs_conformal: bool,
}

/// Dispersion above which no single constant is considered to fit.
pub const CONFORMAL_TOL: f64 = 1e-8;

/// Tests whether `Φ` preserves the Hilbert-Schmidt inner product up to a
/// positive constant, over random unit-norm operator pairs. Every third pair
/// uses `B = A` so the fit always sees positive `Tr(A†A)`.
pub fn hs_conformality(phi: &PhiMap, pairs: usize, seed: u64) -> ConformalityReport {
    let mut r = rng(seed);
    let mut sample = Vec::with_capacity(pairs);
    for k in 0..pairs {
        let a = ginibre(phi.n, &mut r);
        let b = if k % 3 == 0 { a.clone() } else { ginibre(phi.n, &mut r) };
        let lhs = hs_inner(&phi.apply(&a), &phi.apply(&b)).expect("same shape");
        let rhs = hs_inner(&a, &b).expect("same shape");
        sample.push((lhs, rhs));
    }
    let num: Complex64 = sample.iter().map(|(g, h)| h.conj() * g).sum();
    let den: f64 = sample.iter().map(|(_, h)| h.norm_sqr()).sum();
    let c = if den > 0.0 { num / den } else { ZERO };
    let dispersion = sample
        .iter()
        .map(|(g, h)| (g - c * h).norm())
        .fold(c.im.abs(), f64::max);
    ConformalityReport {
        factor: c.re,
        dispersion,
        pairs,
        is_hs_conformal: pairs > 0 && c.re > 0.0 && dispersion <= CONFORMAL_TOL,
    }
}

/// For maximally entangled `Ψ`, `Φ_Ψ` is Hilbert-Schmidt unitary up to the
/// factor `1/n²`.
pub fn verify_lemma3(psi: &PureState, pairs: usize, seed: u64) -> Result<ConformalityReport> {
    Ok(hs_conformality(&phi_from_pure_state(psi)?, pairs, seed))
}

/// `n²` rank-1 projectors spanning the Hermitian operators on `C^n`: the basis
/// projectors `|i⟩⟨i|` and, for each `i < j`, the superpositions
/// `(|i⟩+|j⟩)/√2` and `(|i⟩+i|j⟩)/√2`.
pub fn informationally_complete_projectors(n: usize) -> Vec<Projector> {
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        out.push(Projector::basis(n, i));
    }
    for i in 0..n {
        for j in i + 1..n {
            let mut v = basis_ket(n, i);
            v[j] = ONE;
            out.push(Projector::rank_one(&v).expect("nonzero"));
            v[j] = Complex64::new(0.0, 1.0);
            out.push(Projector::rank_one(&v).expect("nonzero"));
        }
    }
    out
}

/// Dual frame `D_a` with `Tr(D_a E_b) = δ_ab` for a spanning set of Hermitian
/// operators `E_b`.
pub(crate) fn dual_frame(frame: &[&ComplexMatrix]) -> Result<Vec<ComplexMatrix>> {
    let k = frame.len();
    let gram = DMatrix::from_fn(k, k, |a, b| {
        hs_inner(frame[a], frame[b]).expect("same shape").re
    });
    let svd = gram.clone().svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-12 * smax.max(1.0)) {
        return Err(Error::Singular(format!(
            "frame Gram matrix has singular value {smin:e}"
        )));
    }
    let inv = gram
        .try_inverse()
        .ok_or_else(|| Error::Singular("frame Gram matrix is not invertible".into()))?;
    let dim = frame[0].rows();
    Ok((0..k)
        .map(|a| {
            let mut d = ComplexMatrix::zeros(dim, dim);
            for (b, e) in frame.iter().enumerate() {
                d = &d + &e.scale_real(inv[(a, b)]);
            }
            d
        })
        .collect())
}

/// Linear-inversion reconstruction of `Λ` from its values on product
/// projections.
pub fn reconstruct_lambda<F>(mut oracle: F, n: usize) -> Result<LambdaOperator>
where
    F: FnMut(&Projector, &Projector) -> f64,
{
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    let frame = informationally_complete_projectors(n);
    let mats: Vec<&ComplexMatrix> = frame.iter().map(|p| p.matrix()).collect();
    let dual = dual_frame(&mats)?;

    let nn = n * n;
    let mut lam = ComplexMatrix::zeros(nn, nn);
    for (a, ea) in frame.iter().enumerate() {
        for (b, eb) in frame.iter().enumerate() {
            let p = oracle(ea, eb);
            if !p.is_finite() {
                return Err(Error::InconsistentOracle(format!("non-finite value {p}")));
            }
            if p != 0.0 {
                lam = &lam + &kron(&dual[a], &dual[b]).scale_real(p);
            }
        }
    }
    let lam = HermitianMatrix::hermitian_part(&lam);
    let tr = lam.trace();
    if (tr - 1.0).abs() > 1e-6 {
        return Err(Error::InconsistentOracle(format!("reconstructed trace {tr}")));
    }

    // Linear inversion always returns something; probe fresh product pairs to
    // catch oracles that are not of the form Tr(Λ P⊗Q).
    let mut r = rng(0x5eed_1a4b);
    for _ in 0..nn {
        let p = haar_projector(n, &mut r);
        let q = haar_projector(n, &mut r);
        let want = oracle(&p, &q);
        let got = product_expectation(lam.matrix(), p.matrix(), q.matrix()).re;
        if (want - got).abs() > 1e-6 {
            return Err(Error::InconsistentOracle(format!(
                "oracle is not linear in P⊗Q (probe deviation {:e})",
                (want - got).abs()
            )));
        }
    }
    LambdaOperator::with_trace_tolerance(lam, n, 1e-6)
}
