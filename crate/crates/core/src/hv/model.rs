use crate::error::{Error, Result};
use crate::linalg::{FactorDims, Projector};
use crate::states::{product_expectation, DensityOperator};

use super::context::{ContextSets, MeasurementContext};

/// Weights `ρ(λ)` over a finite hidden-variable space.
#[derive(Clone, Debug, PartialEq)]
pub struct HiddenSpace {
    weights: Vec<f64>,
}

impl HiddenSpace {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidParameter("empty hidden-variable space".into()));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidParameter(format!("hidden-variable weight {w}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidParameter(format!("weights sum to {total}")));
        }
        Ok(Self { weights })
    }

    pub fn uniform(count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidParameter("empty hidden-variable space".into()));
        }
        Ok(Self {
            weights: vec![1.0 / count as f64; count],
        })
    }

    pub fn single() -> Self {
        Self { weights: vec![1.0] }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// A context as seen by a model: its position in the context list plus the
/// measurement itself.
#[derive(Clone, Copy, Debug)]
pub struct ContextRef<'a> {
    pub index: usize,
    pub context: &'a MeasurementContext,
}

impl<'a> ContextRef<'a> {
    pub fn projector(&self, outcome: usize) -> &'a Projector {
        self.context.projector(outcome)
    }
}

/// A hidden-variable model of a bipartite state: for each `λ` and pair of
/// contexts, a joint distribution over outcome pairs.
pub trait HiddenVariableModel: Send + Sync {
    fn name(&self) -> &str;

    fn dims(&self) -> FactorDims;

    /// The quantum state whose predictions the model is meant to reproduce.
    fn state(&self) -> &DensityOperator;

    fn hidden(&self) -> &HiddenSpace;

    /// `p^{ctx_a, ctx_b}_λ(P_a, Q_b)` for outcome `a` of `ctx_a` and `b` of `ctx_b`.
    fn joint(&self, lambda: usize, ctx_a: ContextRef<'_>, ctx_b: ContextRef<'_>, a: usize, b: usize) -> f64;
}

/// Every probability a model assigns on a set of context pairs, together with
/// the quantum predictions and projector identities across contexts.
#[derive(Clone, Debug)]
pub struct ProbabilityTable {
    pub(crate) weights: Vec<f64>,
    pub(crate) alice_sizes: Vec<usize>,
    pub(crate) bob_sizes: Vec<usize>,
    /// `[λ][i][j]` → row-major `alice_sizes[i] × bob_sizes[j]` block.
    pub(crate) joint: Vec<Vec<Vec<Vec<f64>>>>,
    /// `[i][j]` → Born-rule block.
    pub(crate) quantum: Vec<Vec<Vec<f64>>>,
    /// Projector identity of outcome `k` in context `i`.
    pub(crate) alice_ids: Vec<Vec<usize>>,
    pub(crate) bob_ids: Vec<Vec<usize>>,
    pub(crate) alice_labels: Vec<String>,
    pub(crate) bob_labels: Vec<String>,
}

const RANGE_TOL: f64 = 1e-12;
const NORMALIZATION_TOL: f64 = 1e-10;

fn projector_ids(contexts: &[MeasurementContext]) -> Vec<Vec<usize>> {
    let mut unique: Vec<&Projector> = Vec::new();
    contexts
        .iter()
        .map(|c| {
            c.outcomes()
                .iter()
                .map(|p| match unique.iter().position(|u| u.matrix().dist_max(p.matrix()) <= 1e-9) {
                    Some(id) => id,
                    None => {
                        unique.push(p);
                        unique.len() - 1
                    }
                })
                .collect()
        })
        .collect()
}

impl ProbabilityTable {
    /// Evaluates `model` on every context pair, validating ranges and
    /// per-context normalization.
    pub fn new(model: &dyn HiddenVariableModel, contexts: &ContextSets) -> Result<Self> {
        let dims = model.dims();
        let (da, db) = contexts.dims();
        if (da, db) != (dims.a, dims.b) {
            return Err(Error::Dimension(format!(
                "contexts on {da}x{db} for a model on {}x{}",
                dims.a, dims.b
            )));
        }
        let rho = model.state();
        let weights = model.hidden().weights().to_vec();
        let mut joint = Vec::with_capacity(weights.len());
        for lambda in 0..weights.len() {
            let mut per_a = Vec::with_capacity(contexts.alice.len());
            for (i, ca) in contexts.alice.iter().enumerate() {
                let mut per_b = Vec::with_capacity(contexts.bob.len());
                for (j, cb) in contexts.bob.iter().enumerate() {
                    let ra = ContextRef { index: i, context: ca };
                    let rb = ContextRef { index: j, context: cb };
                    let mut block = Vec::with_capacity(ca.len() * cb.len());
                    for a in 0..ca.len() {
                        for b in 0..cb.len() {
                            let p = model.joint(lambda, ra, rb, a, b);
                            if !p.is_finite() || !(-RANGE_TOL..=1.0 + RANGE_TOL).contains(&p) {
                                return Err(Error::InvalidProbability(p));
                            }
                            block.push(p);
                        }
                    }
                    let total: f64 = block.iter().sum();
                    if (total - 1.0).abs() > NORMALIZATION_TOL {
                        return Err(Error::InvalidParameter(format!(
                            "model {} is not normalized at λ={lambda}, contexts ({}, {}): sum {total}",
                            model.name(),
                            ca.label(),
                            cb.label()
                        )));
                    }
                    per_b.push(block);
                }
                per_a.push(per_b);
            }
            joint.push(per_a);
        }
        let quantum = contexts
            .alice
            .iter()
            .map(|ca| {
                contexts
                    .bob
                    .iter()
                    .map(|cb| {
                        let mut block = Vec::with_capacity(ca.len() * cb.len());
                        for p in ca.outcomes() {
                            for q in cb.outcomes() {
                                block.push(product_expectation(rho.matrix(), p.matrix(), q.matrix()).re);
                            }
                        }
                        block
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            weights,
            alice_sizes: contexts.alice.iter().map(|c| c.len()).collect(),
            bob_sizes: contexts.bob.iter().map(|c| c.len()).collect(),
            joint,
            quantum,
            alice_ids: projector_ids(&contexts.alice),
            bob_ids: projector_ids(&contexts.bob),
            alice_labels: contexts.alice.iter().map(|c| c.label().to_string()).collect(),
            bob_labels: contexts.bob.iter().map(|c| c.label().to_string()).collect(),
        })
    }

    pub fn hidden_count(&self) -> usize {
        self.weights.len()
    }

    pub fn alice_context_count(&self) -> usize {
        self.alice_sizes.len()
    }

    pub fn bob_context_count(&self) -> usize {
        self.bob_sizes.len()
    }

    pub fn alice_label(&self, i: usize) -> &str {
        &self.alice_labels[i]
    }

    pub fn bob_label(&self, j: usize) -> &str {
        &self.bob_labels[j]
    }

    /// `p^{i,j}_λ(a, b)`.
    pub fn joint(&self, lambda: usize, i: usize, j: usize, a: usize, b: usize) -> f64 {
        self.joint[lambda][i][j][a * self.bob_sizes[j] + b]
    }

    /// Alice's marginal `Σ_b p^{i,j}_λ(a, b)`.
    pub fn marginal_a(&self, lambda: usize, i: usize, j: usize, a: usize) -> f64 {
        let nb = self.bob_sizes[j];
        self.joint[lambda][i][j][a * nb..(a + 1) * nb].iter().sum()
    }

    /// Bob's marginal `Σ_a p^{i,j}_λ(a, b)`.
    pub fn marginal_b(&self, lambda: usize, i: usize, j: usize, b: usize) -> f64 {
        let nb = self.bob_sizes[j];
        (0..self.alice_sizes[i]).map(|a| self.joint[lambda][i][j][a * nb + b]).sum()
    }

    pub fn quantum(&self, i: usize, j: usize, a: usize, b: usize) -> f64 {
        self.quantum[i][j][a * self.bob_sizes[j] + b]
    }

    /// `Σ_λ ρ(λ) p^{i,j}_λ(a, b)`.
    pub fn averaged(&self, i: usize, j: usize, a: usize, b: usize) -> f64 {
        self.weights
            .iter()
            .enumerate()
            .map(|(l, w)| w * self.joint(l, i, j, a, b))
            .sum()
    }
}
