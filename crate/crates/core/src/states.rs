//! Bipartite pure and mixed states, Schmidt data and Born-rule probabilities.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    inner, kron, kron_vec, partial_trace, vector_norm, ComplexMatrix, FactorDims, HermitianMatrix,
    Projector, Side, ONE, ZERO,
};

/// Flat-spectrum tolerance for "maximally entangled".
pub const MAX_ENTANGLED_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    dims: FactorDims,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    /// Requires unit norm within 1e-12.
    pub fn new(dims: FactorDims, amplitudes: Vec<Complex64>) -> Result<Self> {
        Self::check_len(dims, &amplitudes)?;
        let norm = vector_norm(&amplitudes);
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format!("norm {norm} is not 1")));
        }
        Ok(Self { dims, amplitudes })
    }

    pub fn normalized(dims: FactorDims, amplitudes: Vec<Complex64>) -> Result<Self> {
        Self::check_len(dims, &amplitudes)?;
        let norm = vector_norm(&amplitudes);
        if !(norm > 1e-300) || !norm.is_finite() {
            return Err(Error::InvalidState("zero or non-finite amplitudes".into()));
        }
        Ok(Self {
            dims,
            amplitudes: amplitudes.into_iter().map(|z| z / norm).collect(),
        })
    }

    fn check_len(dims: FactorDims, amplitudes: &[Complex64]) -> Result<()> {
        if amplitudes.len() != dims.total() || dims.a == 0 || dims.b == 0 {
            return Err(Error::Dimension(format!(
                "{} amplitudes for a {}x{} space",
                amplitudes.len(),
                dims.a,
                dims.b
            )));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite amplitude".into()));
        }
        Ok(())
    }

    /// `ψ_A ⊗ ψ_B`.
    pub fn product(a: &[Complex64], b: &[Complex64]) -> Result<Self> {
        Self::normalized(FactorDims::new(a.len(), b.len()), kron_vec(a, b))
    }

    /// `Σ_i c_i |i⟩|i⟩` for real coefficients (renormalized).
    pub fn from_schmidt_coefficients(coefficients: &[f64]) -> Result<Self> {
        let n = coefficients.len();
        let mut amps = vec![ZERO; n * n];
        for (i, &c) in coefficients.iter().enumerate() {
            amps[i * n + i] = Complex64::new(c, 0.0);
        }
        Self::normalized(FactorDims::square(n), amps)
    }

    /// `(|01⟩ − |10⟩)/√2`.
    pub fn singlet() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            dims: FactorDims::square(2),
            amplitudes: vec![ZERO, Complex64::new(s, 0.0), Complex64::new(-s, 0.0), ZERO],
        }
    }

    pub fn dims(&self) -> FactorDims {
        self.dims
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn density(&self) -> DensityOperator {
        let m = ComplexMatrix::outer(&self.amplitudes, &self.amplitudes);
        DensityOperator {
            matrix: HermitianMatrix::hermitian_part(&m),
            dims: self.dims,
        }
    }

    /// `|⟨self|other⟩|`, which is 1 iff the states agree up to global phase.
    pub fn fidelity_amplitude(&self, other: &Self) -> f64 {
        inner(&self.amplitudes, &other.amplitudes).norm()
    }

    pub fn same_ray(&self, other: &Self, tol: f64) -> bool {
        self.dims == other.dims && (1.0 - self.fidelity_amplitude(other)).abs() <= tol
    }

    pub fn schmidt(&self) -> SchmidtData {
        schmidt_decompose(self)
    }

    pub fn is_maximally_entangled(&self) -> bool {
        self.max_entanglement_deviation().is_some_and(|d| d <= MAX_ENTANGLED_TOL)
    }

    /// Max deviation of the Schmidt coefficients from `1/√n`, or `None` when
    /// the factors have different dimensions.
    pub fn max_entanglement_deviation(&self) -> Option<f64> {
        if self.dims.a != self.dims.b {
            return None;
        }
        let n = self.dims.a;
        let flat = 1.0 / (n as f64).sqrt();
        let s = self.schmidt();
        let mut dev = 0.0f64;
        for i in 0..n {
            let b = s.coefficients.get(i).copied().unwrap_or(0.0);
            dev = dev.max((b - flat).abs());
        }
        Some(dev)
    }
}

/// `(1/√n) Σ_i |i⟩|i⟩`.
pub fn max_entangled(n: usize) -> Result<PureState> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "maximally entangled state needs n >= 2, got {n}"
        )));
    }
    PureState::from_schmidt_coefficients(&vec![1.0; n])
}

/// Biorthogonal form `Σ_i β_i |ψ_i⟩|φ_i⟩` with `β` descending.
#[derive(Clone, Debug)]
pub struct SchmidtData {
    pub coefficients: Vec<f64>,
    pub left: Vec<Vec<Complex64>>,
    pub right: Vec<Vec<Complex64>>,
}

impl SchmidtData {
    pub fn reconstruct(&self, dims: FactorDims) -> Vec<Complex64> {
        let mut out = vec![ZERO; dims.total()];
        for ((b, l), r) in self.coefficients.iter().zip(&self.left).zip(&self.right) {
            for (o, v) in out.iter_mut().zip(kron_vec(l, r)) {
                *o += v * *b;
            }
        }
        out
    }

    pub fn rank(&self, tol: f64) -> usize {
        self.coefficients.iter().filter(|&&b| b > tol).count()
    }
}

/// Schmidt decomposition from the SVD of the `dim_a × dim_b` amplitude matrix.
///
/// All `min(dim_a, dim_b)` terms are kept, including zero coefficients, so
/// both bases are complete up to that size.
pub fn schmidt_decompose(s: &PureState) -> SchmidtData {
    let dims = s.dims;
    let m = ComplexMatrix::new(dims.a, dims.b, s.amplitudes.clone())
        .expect("amplitude count checked at construction")
        .to_nalgebra();
    let svd = m.svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let k = dims.a.min(dims.b);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));

    let mut data = SchmidtData {
        coefficients: Vec::with_capacity(k),
        left: Vec::with_capacity(k),
        right: Vec::with_capacity(k),
    };
    for &i in &order {
        data.coefficients.push(svd.singular_values[i]);
        // M = U Σ V†, so amplitude (a, b) = Σ_i σ_i U[a,i] (V†)[i,b].
        data.left.push((0..dims.a).map(|a| u[(a, i)]).collect());
        data.right.push((0..dims.b).map(|b| v_t[(i, b)]).collect());
    }
    data
}

/// Positive semidefinite, unit-trace operator on a bipartite space.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: HermitianMatrix,
    dims: FactorDims,
}

impl DensityOperator {
    pub fn new(matrix: HermitianMatrix, dims: FactorDims) -> Result<Self> {
        if matrix.dim() != dims.total() {
            return Err(Error::Dimension(format!(
                "{}-dimensional operator on a {}x{} space",
                matrix.dim(),
                dims.a,
                dims.b
            )));
        }
        let tr = matrix.trace();
        if (tr - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let min = matrix.min_eigenvalue()?;
        if min < -1e-10 {
            return Err(Error::InvalidState(format!("negative eigenvalue {min}")));
        }
        Ok(Self { matrix, dims })
    }

    pub fn maximally_mixed(dims: FactorDims) -> Self {
        let n = dims.total();
        Self {
            matrix: HermitianMatrix::hermitian_part(&ComplexMatrix::identity(n).scale_real(1.0 / n as f64)),
            dims,
        }
    }

    pub fn product(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<Self> {
        let m = HermitianMatrix::hermitian_part(&kron(a.matrix(), b.matrix()));
        Self::new(m, FactorDims::new(a.dim(), b.dim()))
    }

    pub fn dims(&self) -> FactorDims {
        self.dims
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.matrix.matrix()
    }

    pub fn reduced(&self, keep: Side) -> ComplexMatrix {
        let traced = match keep {
            Side::A => Side::B,
            Side::B => Side::A,
        };
        partial_trace(self.matrix(), self.dims, traced).expect("dims checked at construction")
    }
}

const BORN_SNAP: f64 = 1e-12;
const BORN_LIMIT: f64 = 1e-10;

fn finish_probability(p: f64) -> Result<f64> {
    if !(-BORN_LIMIT..=1.0 + BORN_LIMIT).contains(&p) || !p.is_finite() {
        return Err(Error::InvalidProbability(p));
    }
    if (-BORN_SNAP..0.0).contains(&p) {
        Ok(0.0)
    } else if p > 1.0 && p <= 1.0 + BORN_SNAP {
        Ok(1.0)
    } else {
        Ok(p)
    }
}

/// `Tr(ρ · P⊗Q)`.
pub fn born_joint(rho: &DensityOperator, p: &Projector, q: &Projector) -> Result<f64> {
    let dims = rho.dims();
    if p.dim() != dims.a || q.dim() != dims.b {
        return Err(Error::Dimension(format!(
            "projectors of dims {}, {} on a {}x{} state",
            p.dim(),
            q.dim(),
            dims.a,
            dims.b
        )));
    }
    finish_probability(product_expectation(rho.matrix(), p.matrix(), q.matrix()).re)
}

/// `Tr(ρ · P⊗1)`.
pub fn born_marginal_a(rho: &DensityOperator, p: &Projector) -> Result<f64> {
    born_joint(rho, p, &Projector::identity(rho.dims().b))
}

/// `Tr(ρ · 1⊗Q)`.
pub fn born_marginal_b(rho: &DensityOperator, q: &Projector) -> Result<f64> {
    born_joint(rho, &Projector::identity(rho.dims().a), q)
}

/// `Tr(M · A⊗B)` without forming the Kronecker product.
pub fn product_expectation(m: &ComplexMatrix, a: &ComplexMatrix, b: &ComplexMatrix) -> Complex64 {
    let (da, db) = (a.rows(), b.rows());
    let mut acc = ZERO;
    // Tr(M (A⊗B)) = Σ M[(i,k),(j,l)] A[j,i] B[l,k]
    for i in 0..da {
        for k in 0..db {
            let row = i * db + k;
            for j in 0..da {
                let aji = a[(j, i)];
                if aji == ZERO {
                    continue;
                }
                for l in 0..db {
                    acc += m[(row, j * db + l)] * aji * b[(l, k)];
                }
            }
        }
    }
    acc
}

/// The rank-1 projector on B perfectly correlated with `p` in a maximally
/// entangled state: for `p = |x⟩⟨x|`, `x = Σ c_i ψ_i`, returns `|y⟩⟨y|` with
/// `y = Σ conj(c_i) φ_i`.
pub fn partner_projection(psi: &PureState, p: &Projector) -> Result<Projector> {
    let dev = psi
        .max_entanglement_deviation()
        .ok_or_else(|| Error::Dimension("partner projection needs equal factor dimensions".into()))?;
    if dev > MAX_ENTANGLED_TOL {
        return Err(Error::NotMaximallyEntangled(dev));
    }
    if p.rank() != 1 {
        return Err(Error::NotProjector(format!("expected rank 1, got rank {}", p.rank())));
    }
    if p.dim() != psi.dims().a {
        return Err(Error::Dimension(format!(
            "projector of dim {} for a {}-dimensional factor",
            p.dim(),
            psi.dims().a
        )));
    }
    let x = p.ket().expect("rank checked");
    let s = psi.schmidt();
    let n = psi.dims().b;
    let mut y = vec![ZERO; n];
    for (left, right) in s.left.iter().zip(&s.right) {
        let c = inner(left, &x);
        for (yk, r) in y.iter_mut().zip(right) {
            *yk += c.conj() * r;
        }
    }
    Projector::rank_one(&y)
}

pub(crate) fn basis_ket(dim: usize, k: usize) -> Vec<Complex64> {
    let mut e = vec![ZERO; dim];
    e[k] = ONE;
    e
}
