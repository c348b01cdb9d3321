//! Dense complex linear algebra on small bipartite operator spaces.
//!
//! Matrices are stored row-major. Bipartite factorizations are always passed
//! explicitly through [`FactorDims`]; nothing here guesses the split of a
//! composite dimension.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::DMatrix;
pub use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance for accepting a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Tolerance for idempotence and trace of projectors.
pub const PROJECTOR_TOL: f64 = 1e-10;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::new(rows, cols, data.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(values[i], 0.0)
            } else {
                ZERO
            }
        })
    }

    /// `|x⟩⟨y|`
    pub fn outer(x: &[Complex64], y: &[Complex64]) -> Self {
        Self::from_fn(x.len(), y.len(), |i, j| x[i] * y[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * c).collect(),
        }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(Complex64::new(c, 0.0))
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Hilbert-Schmidt (Frobenius) norm.
    pub fn hs_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Max-entry distance; infinite if shapes differ.
    pub fn dist_max(&self, other: &Self) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn dist_hs(&self, other: &Self) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.cols, "vector length mismatch");
        (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// `⟨x|M|x⟩` for a square matrix.
    pub fn expectation(&self, x: &[Complex64]) -> Complex64 {
        inner(x, &self.apply(x))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "add shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "sub shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

/// `⟨x|y⟩`, conjugate-linear in the first argument.
pub fn inner(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

pub fn vector_norm(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ar, ac, br, bc) = (a.rows, a.cols, b.rows, b.cols);
    ComplexMatrix::from_fn(ar * br, ac * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

pub fn kron_vec(x: &[Complex64], y: &[Complex64]) -> Vec<Complex64> {
    x.iter().flat_map(|a| y.iter().map(move |b| a * b)).collect()
}

/// Hilbert-Schmidt inner product `Tr(a† b)`.
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Complex64> {
    if a.rows != b.rows || a.cols != b.cols {
        return Err(Error::Dimension(format!(
            "hs_inner of {}x{} and {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    Ok(a.data.iter().zip(&b.data).map(|(x, y)| x.conj() * y).sum())
}

/// Factor dimensions of a bipartite space `H_A ⊗ H_B`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FactorDims {
    pub a: usize,
    pub b: usize,
}

impl FactorDims {
    pub const fn new(a: usize, b: usize) -> Self {
        Self { a, b }
    }

    pub const fn square(n: usize) -> Self {
        Self { a: n, b: n }
    }

    pub const fn total(&self) -> usize {
        self.a * self.b
    }

    fn check(&self, m: &ComplexMatrix) -> Result<()> {
        if !m.is_square() || m.rows != self.total() {
            return Err(Error::Dimension(format!(
                "{}x{} matrix does not factor as {}x{}",
                m.rows, m.cols, self.a, self.b
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    A,
    B,
}

/// Traces out one factor. `side` names the factor that is removed.
pub fn partial_trace(m: &ComplexMatrix, dims: FactorDims, side: Side) -> Result<ComplexMatrix> {
    dims.check(m)?;
    let (da, db) = (dims.a, dims.b);
    let out = match side {
        Side::B => ComplexMatrix::from_fn(da, da, |i, j| {
            (0..db).map(|k| m[(i * db + k, j * db + k)]).sum()
        }),
        Side::A => ComplexMatrix::from_fn(db, db, |i, j| {
            (0..da).map(|k| m[(k * db + i, k * db + j)]).sum()
        }),
    };
    Ok(out)
}

/// Transposes the indices of one factor only.
pub fn partial_transpose(m: &ComplexMatrix, dims: FactorDims, side: Side) -> Result<ComplexMatrix> {
    dims.check(m)?;
    let db = dims.b;
    let n = dims.total();
    Ok(ComplexMatrix::from_fn(n, n, |r, c| {
        let (i, k) = (r / db, r % db);
        let (j, l) = (c / db, c % db);
        match side {
            Side::B => m[(i * db + l, j * db + k)],
            Side::A => m[(j * db + k, i * db + l)],
        }
    }))
}

/// A square matrix equal to its adjoint, stored symmetrized.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(ComplexMatrix);

impl HermitianMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Dimension(format!(
                "Hermitian matrix must be square, got {}x{}",
                m.rows, m.cols
            )));
        }
        let dev = m.dist_max(&m.adjoint());
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Self::hermitian_part(&m))
    }

    /// `(M + M†)/2` without any tolerance check.
    pub fn hermitian_part(m: &ComplexMatrix) -> Self {
        assert!(m.is_square(), "hermitian_part of non-square matrix");
        Self((m + &m.adjoint()).scale_real(0.5))
    }

    pub fn identity(n: usize) -> Self {
        Self(ComplexMatrix::identity(n))
    }

    pub fn dim(&self) -> usize {
        self.0.rows
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn eig(&self) -> Result<EigenDecomposition> {
        eig_hermitian(self)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eig()?.values[0])
    }
}

#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    /// Ascending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: ComplexMatrix,
}

impl EigenDecomposition {
    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        self.vectors.column(k)
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        let d = ComplexMatrix::diagonal(&self.values);
        &(&self.vectors * &d) * &self.vectors.adjoint()
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues are sorted ascending. Each eigenvector is rephased so that its
/// first component of non-negligible magnitude is real and positive, which
/// makes the output reproducible for non-degenerate spectra.
pub fn eig_hermitian(m: &HermitianMatrix) -> Result<EigenDecomposition> {
    let n = m.dim();
    if n == 0 {
        return Ok(EigenDecomposition {
            values: vec![],
            vectors: ComplexMatrix::zeros(0, 0),
        });
    }
    let eig = m
        .0
        .to_nalgebra()
        .try_symmetric_eigen(f64::EPSILON, 10_000)
        .ok_or(Error::Convergence)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));

    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Convergence);
    }
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        let v: Vec<Complex64> = (0..n).map(|i| eig.eigenvectors[(i, k)]).collect();
        let vmax = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let pivot = v
            .iter()
            .find(|z| z.norm() > 1e-8 * vmax.max(f64::MIN_POSITIVE))
            .copied()
            .unwrap_or(ONE);
        let phase = pivot.conj() / pivot.norm();
        for (i, z) in v.iter().enumerate() {
            vectors[(i, col)] = z * phase;
        }
    }
    Ok(EigenDecomposition { values, vectors })
}

/// An orthogonal projection with declared rank.
#[derive(Clone, Debug, PartialEq)]
pub struct Projector {
    matrix: HermitianMatrix,
    rank: usize,
}

impl Projector {
    pub fn new(matrix: HermitianMatrix, rank: usize) -> Result<Self> {
        let m = matrix.matrix();
        let idem = (m * m).dist_max(m);
        if idem > PROJECTOR_TOL {
            return Err(Error::NotProjector(format!("|P^2 - P| = {idem:e}")));
        }
        let tr = matrix.trace();
        if (tr - rank as f64).abs() > PROJECTOR_TOL {
            return Err(Error::NotProjector(format!(
                "trace {tr} does not match declared rank {rank}"
            )));
        }
        Ok(Self { matrix, rank })
    }

    /// `|x⟩⟨x|/⟨x|x⟩`.
    pub fn rank_one(ket: &[Complex64]) -> Result<Self> {
        let norm = vector_norm(ket);
        if !(norm > 1e-300) || !norm.is_finite() {
            return Err(Error::NotProjector("zero or non-finite ket".into()));
        }
        let x: Vec<Complex64> = ket.iter().map(|z| z / norm).collect();
        Ok(Self {
            matrix: HermitianMatrix::hermitian_part(&ComplexMatrix::outer(&x, &x)),
            rank: 1,
        })
    }

    /// Projector onto the span of orthonormal kets.
    pub fn from_orthonormal(kets: &[Vec<Complex64>], dim: usize) -> Result<Self> {
        let mut m = ComplexMatrix::zeros(dim, dim);
        for k in kets {
            if k.len() != dim {
                return Err(Error::Dimension(format!("ket of length {} in dim {dim}", k.len())));
            }
            m = &m + &ComplexMatrix::outer(k, k);
        }
        Self::new(HermitianMatrix::hermitian_part(&m), kets.len())
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        let mut e = vec![ZERO; dim];
        e[k] = ONE;
        Self::rank_one(&e).expect("basis ket is normalized")
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: HermitianMatrix::identity(dim),
            rank: dim,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.matrix.matrix()
    }

    /// Unit ket spanning the range of a rank-1 projector, phased so that its
    /// largest diagonal component is real positive.
    pub fn ket(&self) -> Option<Vec<Complex64>> {
        if self.rank != 1 {
            return None;
        }
        let m = self.matrix();
        let n = m.rows();
        let k = (0..n)
            .max_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re))
            .unwrap_or(0);
        let s = m[(k, k)].re.sqrt();
        Some((0..n).map(|i| m[(i, k)] / s).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{random_hermitian, rng};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    fn pauli_y() -> ComplexMatrix {
        ComplexMatrix::new(2, 2, vec![ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO]).unwrap()
    }

    fn singlet_density() -> ComplexMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = [ZERO, c(s, 0.0), c(-s, 0.0), ZERO];
        ComplexMatrix::outer(&psi, &psi)
    }

    #[test]
    fn constructor_rejects_bad_input() {
        assert!(matches!(
            ComplexMatrix::new(2, 2, vec![ZERO; 3]),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            ComplexMatrix::new(1, 2, vec![ZERO, c(f64::NAN, 0.0)]),
            Err(Error::NonFinite(1))
        ));
        assert!(matches!(
            HermitianMatrix::new(ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap()),
            Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn kron_examples() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4));

        let p0 = ComplexMatrix::diagonal(&[1.0, 0.0]);
        let p1 = ComplexMatrix::diagonal(&[0.0, 1.0]);
        assert_eq!(kron(&p0, &p1), ComplexMatrix::diagonal(&[0.0, 1.0, 0.0, 0.0]));

        let xx = kron(&pauli_x(), &pauli_x());
        let ket00 = [ONE, ZERO, ZERO, ZERO];
        assert_eq!(xx.apply(&ket00), vec![ZERO, ZERO, ZERO, ONE]);
    }

    #[test]
    fn hs_inner_examples() {
        let i3 = ComplexMatrix::identity(3);
        assert_eq!(hs_inner(&i3, &i3).unwrap(), c(3.0, 0.0));
        assert!(hs_inner(&pauli_x(), &pauli_y()).unwrap().norm() < 1e-15);
        let p = Projector::rank_one(&[c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        assert!((hs_inner(p.matrix(), p.matrix()).unwrap() - ONE).norm() < 1e-14);
        assert!(matches!(hs_inner(&i3, &pauli_x()), Err(Error::Dimension(_))));
    }

    #[test]
    fn eig_examples() {
        let d = HermitianMatrix::new(ComplexMatrix::diagonal(&[2.0, 1.0, 3.0])).unwrap();
        let e = d.eig().unwrap();
        for (v, want) in e.values.iter().zip([1.0, 2.0, 3.0]) {
            assert!((v - want).abs() < 1e-14);
        }

        let x = HermitianMatrix::new(pauli_x()).unwrap().eig().unwrap();
        assert!((x.values[0] + 1.0).abs() < 1e-14 && (x.values[1] - 1.0).abs() < 1e-14);

        let s = HermitianMatrix::new(singlet_density()).unwrap().eig().unwrap();
        for (v, want) in s.values.iter().zip([0.0, 0.0, 0.0, 1.0]) {
            assert!((v - want).abs() < 1e-14, "{:?}", s.values);
        }
    }

    #[test]
    fn eig_phase_convention_is_deterministic() {
        let h = random_hermitian(5, &mut rng(11));
        let e1 = h.eig().unwrap();
        let e2 = h.eig().unwrap();
        assert_eq!(e1.vectors, e2.vectors);
        for k in 0..5 {
            let v = e1.vector(k);
            let first = v.iter().find(|z| z.norm() > 1e-8).unwrap();
            assert!(first.im.abs() < 1e-14 && first.re > 0.0);
        }
    }

    #[test]
    fn partial_trace_examples() {
        let dims = FactorDims::square(2);
        let r = partial_trace(&singlet_density(), dims, Side::B).unwrap();
        assert!(r.dist_max(&ComplexMatrix::identity(2).scale_real(0.5)) < 1e-15);

        let i9 = ComplexMatrix::identity(9).scale_real(1.0 / 9.0);
        let r = partial_trace(&i9, FactorDims::square(3), Side::B).unwrap();
        assert!(r.dist_max(&ComplexMatrix::identity(3).scale_real(1.0 / 3.0)) < 1e-15);

        let rho_a = ComplexMatrix::from_real(2, 2, &[0.7, 0.2, 0.2, 0.3]).unwrap();
        let rho_b = ComplexMatrix::diagonal(&[0.1, 0.5, 0.4]);
        let prod = kron(&rho_a, &rho_b);
        let r = partial_trace(&prod, FactorDims::new(2, 3), Side::B).unwrap();
        assert!(r.dist_max(&rho_a) < 1e-15);
        let r = partial_trace(&prod, FactorDims::new(2, 3), Side::A).unwrap();
        assert!(r.dist_max(&rho_b) < 1e-15);

        assert!(partial_trace(&prod, FactorDims::square(2), Side::B).is_err());
    }

    #[test]
    fn partial_transpose_examples() {
        let rho_a = ComplexMatrix::new(2, 2, vec![c(0.6, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.4, 0.0)]).unwrap();
        let rho_b = ComplexMatrix::new(2, 2, vec![c(0.5, 0.0), c(0.0, 0.3), c(0.0, -0.3), c(0.5, 0.0)]).unwrap();
        let dims = FactorDims::square(2);
        let pt = partial_transpose(&kron(&rho_a, &rho_b), dims, Side::B).unwrap();
        assert!(pt.dist_max(&kron(&rho_a, &rho_b.transpose())) < 1e-15);
        let pt = partial_transpose(&kron(&rho_a, &rho_b), dims, Side::A).unwrap();
        assert!(pt.dist_max(&kron(&rho_a.transpose(), &rho_b)) < 1e-15);

        let pt = partial_transpose(&singlet_density(), dims, Side::B).unwrap();
        let min = HermitianMatrix::new(pt).unwrap().min_eigenvalue().unwrap();
        assert!((min + 0.5).abs() < 1e-12);

        let i4 = ComplexMatrix::identity(4).scale_real(0.25);
        assert_eq!(partial_transpose(&i4, dims, Side::B).unwrap(), i4);
    }

    #[test]
    fn projector_validation() {
        let p = Projector::basis(3, 1);
        assert_eq!(p.rank(), 1);
        let bad = HermitianMatrix::new(ComplexMatrix::diagonal(&[0.5, 0.0])).unwrap();
        assert!(Projector::new(bad, 1).is_err());
        let wrong_rank = HermitianMatrix::new(ComplexMatrix::diagonal(&[1.0, 1.0])).unwrap();
        assert!(Projector::new(wrong_rank, 1).is_err());
        assert!(Projector::rank_one(&[ZERO, ZERO]).is_err());

        let q = Projector::rank_one(&[c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
        let ket = q.ket().unwrap();
        assert!(Projector::rank_one(&ket).unwrap().matrix().dist_max(q.matrix()) < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn hs_inner_conjugate_symmetric_and_positive(seed in any::<u64>(), n in 1usize..6) {
            let mut r = rng(seed);
            let a = crate::sampling::ginibre(n, &mut r);
            let b = crate::sampling::ginibre(n, &mut r);
            let ab = hs_inner(&a, &b).unwrap();
            let ba = hs_inner(&b, &a).unwrap();
            prop_assert!((ab - ba.conj()).norm() < 1e-10);
            let aa = hs_inner(&a, &a).unwrap();
            prop_assert!(aa.re > 0.0 && aa.im.abs() < 1e-10);
        }

        #[test]
        fn eig_reconstructs_input(seed in any::<u64>(), n in 1usize..10) {
            let h = random_hermitian(n, &mut rng(seed));
            let e = h.eig().unwrap();
            let scale = h.matrix().max_abs().max(1e-300);
            prop_assert!(e.reconstruct().dist_max(h.matrix()) <= 1e-9 * scale);
            let v = &e.vectors;
            prop_assert!((&v.adjoint() * v).dist_max(&ComplexMatrix::identity(n)) <= 1e-9);
            for k in 0..n {
                let x = e.vector(k);
                let mx = h.matrix().apply(&x);
                let resid: f64 = mx.iter().zip(&x).map(|(a, b)| (a - b * e.values[k]).norm_sqr()).sum::<f64>().sqrt();
                prop_assert!(resid <= 1e-9 * scale.max(1.0));
            }
            prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }

        #[test]
        fn partial_trace_of_product(seed in any::<u64>(), da in 1usize..4, db in 1usize..4) {
            let mut r = rng(seed);
            let a = random_hermitian(da, &mut r).into_matrix();
            let b = random_hermitian(db, &mut r).into_matrix();
            let dims = FactorDims::new(da, db);
            let pt = partial_trace(&kron(&a, &b), dims, Side::B).unwrap();
            prop_assert!(pt.dist_max(&a.scale(b.trace())) < 1e-10);
            let m = random_hermitian(da * db, &mut r).into_matrix();
            let t = partial_trace(&m, dims, Side::B).unwrap().trace();
            prop_assert!((t - m.trace()).norm() < 1e-10);
        }

        #[test]
        fn partial_transpose_involution(seed in any::<u64>(), da in 1usize..4, db in 1usize..4) {
            let dims = FactorDims::new(da, db);
            let m = random_hermitian(da * db, &mut rng(seed)).into_matrix();
            let once = partial_transpose(&m, dims, Side::B).unwrap();
            prop_assert_eq!(partial_transpose(&once, dims, Side::B).unwrap(), m.clone());
            prop_assert!((once.trace() - m.trace()).norm() < 1e-12);
            prop_assert!(once.dist_max(&once.adjoint()) < 1e-12);
        }
    }
}
