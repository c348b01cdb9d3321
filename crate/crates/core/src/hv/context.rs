use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Projector, PROJECTOR_TOL, ZERO};
use crate::sampling::{haar_basis, rng};
use crate::states::basis_ket;

/// A complete projective measurement on one factor. Its position in a
/// [`ContextSets`] list is the context's identity; the label is for humans.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementContext {
    label: String,
    outcomes: Vec<Projector>,
}

impl MeasurementContext {
    pub fn new(label: impl Into<String>, outcomes: Vec<Projector>) -> Result<Self> {
        let label = label.into();
        let first = outcomes
            .first()
            .ok_or_else(|| Error::InvalidParameter(format!("context {label} has no outcomes")))?;
        let dim = first.dim();
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for (j, p) in outcomes.iter().enumerate() {
            if p.dim() != dim {
                return Err(Error::Dimension(format!("context {label} mixes dimensions")));
            }
            sum = &sum + p.matrix();
            for q in &outcomes[j + 1..] {
                let overlap = (p.matrix() * q.matrix()).max_abs();
                if overlap > PROJECTOR_TOL {
                    return Err(Error::NotProjector(format!(
                        "outcomes of context {label} are not orthogonal ({overlap:e})"
                    )));
                }
            }
        }
        let dev = sum.dist_max(&ComplexMatrix::identity(dim));
        if dev > PROJECTOR_TOL {
            return Err(Error::NotProjector(format!(
                "outcomes of context {label} do not sum to the identity ({dev:e})"
            )));
        }
        Ok(Self { label, outcomes })
    }

    /// Rank-1 measurement in an orthonormal basis.
    pub fn from_basis(label: impl Into<String>, kets: &[Vec<Complex64>]) -> Result<Self> {
        let outcomes = kets
            .iter()
            .map(|k| Projector::rank_one(k))
            .collect::<Result<Vec<_>>>()?;
        Self::new(label, outcomes)
    }

    pub fn computational(dim: usize, label: impl Into<String>) -> Self {
        let kets: Vec<_> = (0..dim).map(|k| basis_ket(dim, k)).collect();
        Self::from_basis(label, &kets).expect("standard basis")
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn outcomes(&self) -> &[Projector] {
        &self.outcomes
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.outcomes[0].dim()
    }

    pub fn projector(&self, k: usize) -> &Projector {
        &self.outcomes[k]
    }

    /// Same projectors under a different experimenter label.
    pub fn relabelled(&self, label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            outcomes: self.outcomes.clone(),
        }
    }

    pub fn contains(&self, p: &Projector) -> Option<usize> {
        self.outcomes
            .iter()
            .position(|q| q.matrix().dist_max(p.matrix()) <= 1e-9)
    }
}

/// Context lists for both parties; checkers consider every pair.
#[derive(Clone, Debug)]
pub struct ContextSets {
    pub alice: Vec<MeasurementContext>,
    pub bob: Vec<MeasurementContext>,
}

impl ContextSets {
    pub fn new(alice: Vec<MeasurementContext>, bob: Vec<MeasurementContext>) -> Result<Self> {
        for (side, list) in [("alice", &alice), ("bob", &bob)] {
            let Some(first) = list.first() else {
                return Err(Error::InvalidParameter(format!("no {side} contexts")));
            };
            if list.iter().any(|c| c.dim() != first.dim()) {
                return Err(Error::Dimension(format!("{side} contexts mix dimensions")));
            }
        }
        Ok(Self { alice, bob })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.alice[0].dim(), self.bob[0].dim())
    }
}

fn fourier_vector(n: usize, j: usize) -> Vec<Complex64> {
    (0..n)
        .map(|k| Complex64::from_polar(1.0 / (n as f64).sqrt(), std::f64::consts::TAU * (j * k) as f64 / n as f64))
        .collect()
}

/// Default context family for one party.
///
/// Qubits: the Z, X and Y bases plus a relabelled copy of Z. Higher
/// dimensions: the computational basis, one context per basis vector `|k⟩`
/// that keeps `|k⟩` and rotates its complement by a discrete Fourier
/// transform, and a relabelled copy of the computational basis. `extra_random`
/// Haar-random bases are appended.
pub fn default_contexts(dim: usize, extra_random: usize, seed: u64) -> Result<Vec<MeasurementContext>> {
    if dim < 2 {
        return Err(Error::InvalidParameter(format!("context dimension {dim} < 2")));
    }
    let mut out = Vec::new();
    let z = MeasurementContext::computational(dim, "Z");
    if dim == 2 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let c = |re: f64, im: f64| Complex64::new(re, im);
        out.push(z.clone());
        out.push(MeasurementContext::from_basis("X", &[vec![c(s, 0.0), c(s, 0.0)], vec![c(s, 0.0), c(-s, 0.0)]])?);
        out.push(MeasurementContext::from_basis("Y", &[vec![c(s, 0.0), c(0.0, s)], vec![c(s, 0.0), c(0.0, -s)]])?);
        out.push(z.relabelled("Z'"));
    } else {
        out.push(z.clone());
        for k in 0..dim {
            let rest: Vec<usize> = (0..dim).filter(|&i| i != k).collect();
            let m = rest.len();
            let mut kets = vec![basis_ket(dim, k)];
            for j in 0..m {
                let f = fourier_vector(m, j);
                let mut v = vec![ZERO; dim];
                for (slot, &i) in rest.iter().enumerate() {
                    v[i] = f[slot];
                }
                kets.push(v);
            }
            out.push(MeasurementContext::from_basis(format!("keep{k}"), &kets)?);
        }
        out.push(z.relabelled("Z'"));
    }
    let mut r = rng(seed);
    for e in 0..extra_random {
        out.push(MeasurementContext::from_basis(format!("haar{e}"), &haar_basis(dim, &mut r))?);
    }
    Ok(out)
}

/// Contexts that all contain `|0⟩`: the computational basis and `count − 1`
/// further bases whose complement of `|0⟩` is Haar-random.
pub fn star_contexts(dim: usize, count: usize, seed: u64) -> Result<Vec<MeasurementContext>> {
    if dim < 3 {
        return Err(Error::InvalidParameter("star contexts need dim >= 3".into()));
    }
    let mut r = rng(seed);
    let mut out = vec![MeasurementContext::computational(dim, "star0")];
    for c in 1..count {
        let inner = haar_basis(dim - 1, &mut r);
        let mut kets = vec![basis_ket(dim, 0)];
        for v in inner {
            let mut k = vec![ZERO; dim];
            k[1..].copy_from_slice(&v);
            kets.push(k);
        }
        out.push(MeasurementContext::from_basis(format!("star{c}"), &kets)?);
    }
    Ok(out)
}
