//! Seeded random sampling of kets, projectors and operators.
//!
//! Every sampler draws from an explicit generator; nothing reads entropy from
//! the environment.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{inner, vector_norm, ComplexMatrix, HermitianMatrix, Projector};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(r: &mut SeededRng) -> Complex64 {
    let re: f64 = StandardNormal.sample(r);
    let im: f64 = StandardNormal.sample(r);
    Complex64::new(re, im)
}

/// Haar-random unit ket: a normalized complex Gaussian vector.
pub fn haar_ket(dim: usize, r: &mut SeededRng) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..dim).map(|_| gaussian(r)).collect();
        let n = vector_norm(&v);
        if n > 1e-12 {
            return v.into_iter().map(|z| z / n).collect();
        }
    }
}

pub fn haar_projector(dim: usize, r: &mut SeededRng) -> Projector {
    Projector::rank_one(&haar_ket(dim, r)).expect("Haar ket is normalized")
}

/// Haar-distributed rank-1 projector, fully determined by `seed`.
pub fn random_rank1_projector(dim: usize, seed: u64) -> Projector {
    haar_projector(dim, &mut rng(seed))
}

/// Haar-random orthonormal basis (Gram-Schmidt on Gaussian vectors).
pub fn haar_basis(dim: usize, r: &mut SeededRng) -> Vec<Vec<Complex64>> {
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
    while basis.len() < dim {
        let mut v: Vec<Complex64> = (0..dim).map(|_| gaussian(r)).collect();
        for b in &basis {
            let c = inner(b, &v);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= c * y;
            }
        }
        let n = vector_norm(&v);
        if n > 1e-8 {
            basis.push(v.into_iter().map(|z| z / n).collect());
        }
    }
    basis
}

/// Complex Ginibre matrix with unit HS norm.
pub fn ginibre(n: usize, r: &mut SeededRng) -> ComplexMatrix {
    let m = ComplexMatrix::from_fn(n, n, |_, _| gaussian(r));
    let norm = m.hs_norm();
    m.scale_real(1.0 / norm)
}

/// GUE-like random Hermitian matrix.
pub fn random_hermitian(n: usize, r: &mut SeededRng) -> HermitianMatrix {
    let g = ComplexMatrix::from_fn(n, n, |_, _| gaussian(r));
    HermitianMatrix::hermitian_part(&g)
}

/// Random traceless Hermitian matrix with unit Hilbert-Schmidt norm.
pub fn random_traceless_hermitian(n: usize, r: &mut SeededRng) -> HermitianMatrix {
    let h = random_hermitian(n, r).into_matrix();
    let shift = ComplexMatrix::identity(n).scale(h.trace() / n as f64);
    let t = &h - &shift;
    let norm = t.hs_norm();
    HermitianMatrix::hermitian_part(&t.scale_real(1.0 / norm))
}

/// Random unit-trace Hermitian matrix, not necessarily positive.
pub fn random_unit_trace_hermitian(n: usize, r: &mut SeededRng) -> HermitianMatrix {
    let t = random_traceless_hermitian(n, r).into_matrix();
    let id = ComplexMatrix::identity(n).scale_real(1.0 / n as f64);
    HermitianMatrix::hermitian_part(&(&id + &t))
}

/// Random density matrix `G G† / Tr(G G†)` (Hilbert-Schmidt measure).
pub fn random_density_matrix(n: usize, r: &mut SeededRng) -> HermitianMatrix {
    let g = ginibre(n, r);
    let m = &g * &g.adjoint();
    let tr = m.trace().re;
    HermitianMatrix::hermitian_part(&m.scale_real(1.0 / tr))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_projector() {
        assert_eq!(random_rank1_projector(4, 99), random_rank1_projector(4, 99));
        assert_ne!(random_rank1_projector(4, 99), random_rank1_projector(4, 100));
    }

    #[test]
    fn projector_invariants_hold() {
        for seed in 0..50 {
            let p = random_rank1_projector(3, seed);
            let rebuilt = Projector::new(p.hermitian().clone(), 1).unwrap();
            assert_eq!(rebuilt.rank(), 1);
        }
    }

    #[test]
    fn haar_first_moment_is_maximally_mixed() {
        // Mean of 1e5 projectors against I/d, entrywise within 3 standard errors.
        let dim = 3;
        let samples = 100_000;
        let mut r = rng(2024);
        let mut sum = vec![Complex64::new(0.0, 0.0); dim * dim];
        let mut sum_sq = vec![0.0f64; dim * dim];
        for _ in 0..samples {
            let p = haar_projector(dim, &mut r);
            for (k, z) in p.matrix().data().iter().enumerate() {
                sum[k] += z;
                sum_sq[k] += z.norm_sqr();
            }
        }
        for k in 0..dim * dim {
            let mean = sum[k] / samples as f64;
            let var = sum_sq[k] / samples as f64 - mean.norm_sqr();
            let se = (var / samples as f64).sqrt();
            let want = if k % (dim + 1) == 0 { 1.0 / dim as f64 } else { 0.0 };
            assert!(
                (mean - Complex64::new(want, 0.0)).norm() <= 3.0 * se,
                "entry {k}: mean {mean} vs {want}, se {se}"
            );
        }
    }

    #[test]
    fn haar_basis_is_orthonormal() {
        let b = haar_basis(4, &mut rng(5));
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((inner(&b[i], &b[j]) - Complex64::new(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn traceless_sampler() {
        let t = random_traceless_hermitian(3, &mut rng(8));
        assert!(t.trace().abs() < 1e-12);
        assert!((t.matrix().hs_norm() - 1.0).abs() < 1e-12);
        let rho = random_density_matrix(3, &mut rng(8));
        assert!((rho.trace() - 1.0).abs() < 1e-12);
        assert!(rho.min_eigenvalue().unwrap() > -1e-12);
    }
}
