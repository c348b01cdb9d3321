//! Seeded generators of finite hidden-variable models, used to exercise the
//! logical relations between the checkers on many instances.

use rand::Rng;

use crate::error::Result;
use crate::linalg::{partial_transpose, ComplexMatrix, FactorDims, Side};
use crate::sampling::{random_density_matrix, rng, SeededRng};
use crate::states::{max_entangled, product_expectation, DensityOperator};

use super::context::{default_contexts, star_contexts, ContextSets};
use super::families::{FnModel, PlantedContextualJointModel, PlantedSignallingModel};
use super::model::{HiddenSpace, ProbabilityTable};

const DIM: usize = 3;

fn distribution(len: usize, r: &mut SeededRng) -> Vec<f64> {
    let raw: Vec<f64> = (0..len).map(|_| r.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

fn hidden_weights(count: usize, r: &mut SeededRng) -> Result<HiddenSpace> {
    HiddenSpace::new(distribution(count, r))
}

/// A model whose every `λ` factorizes, `p_λ = p_A · p_B`, on three star
/// contexts per side in dimension 3. Each side independently either keeps its
/// marginals fixed or lets them depend on the distant context.
pub fn factorized_case(seed: u64) -> Result<ProbabilityTable> {
    let mut r = rng(seed);
    let contexts = ContextSets::new(star_contexts(DIM, 3, seed ^ 0xa11ce)?, star_contexts(DIM, 3, seed ^ 0xb0b)?)?;
    let lambdas = 3;
    let hidden = hidden_weights(lambdas, &mut r)?;
    let (na, nb) = (contexts.alice.len(), contexts.bob.len());
    let alice_signals = r.random_bool(0.5);
    let bob_signals = r.random_bool(0.5);
    // [λ][i][j] → distribution; shared over the far index when not signalling.
    let mut pa = vec![vec![vec![Vec::new(); nb]; na]; lambdas];
    let mut pb = vec![vec![vec![Vec::new(); nb]; na]; lambdas];
    for l in 0..lambdas {
        for i in 0..na {
            let base = distribution(DIM, &mut r);
            for j in 0..nb {
                pa[l][i][j] = if alice_signals { distribution(DIM, &mut r) } else { base.clone() };
            }
        }
        for j in 0..nb {
            let base = distribution(DIM, &mut r);
            for i in 0..na {
                pb[l][i][j] = if bob_signals { distribution(DIM, &mut r) } else { base.clone() };
            }
        }
    }
    let state = DensityOperator::maximally_mixed(FactorDims::square(DIM));
    let model = FnModel::new("factorized", state, hidden, move |l, ca, cb, a, b| {
        pa[l][ca.index][cb.index][a] * pb[l][ca.index][cb.index][b]
    });
    ProbabilityTable::new(&model, &contexts)
}

/// Families mixed into the randomized test of "marginal non-contextuality
/// and CPI imply joint non-contextuality".
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MixedFamily {
    /// A random density matrix per `λ`.
    QuantumMixture,
    /// `Λ_λ = (1 − s_λ) I/9 + s_λ Φ⁺^{T_B}`, non-negative on products only.
    ProductPositive,
    ContextualJoint,
    Signalling,
}

impl MixedFamily {
    pub const ALL: [MixedFamily; 4] = [
        MixedFamily::QuantumMixture,
        MixedFamily::ProductPositive,
        MixedFamily::ContextualJoint,
        MixedFamily::Signalling,
    ];
}

fn operator_model(name: &str, ops: Vec<ComplexMatrix>, hidden: HiddenSpace) -> FnModel {
    let state = DensityOperator::maximally_mixed(FactorDims::square(DIM));
    FnModel::new(name, state, hidden, move |l, ca, cb, a, b| {
        product_expectation(&ops[l], ca.projector(a).matrix(), cb.projector(b).matrix()).re
    })
}

/// One seeded instance of `family` on the default dimension-3 contexts plus
/// one random basis per side.
pub fn mixed_case(family: MixedFamily, seed: u64) -> Result<ProbabilityTable> {
    let mut r = rng(seed);
    let contexts = ContextSets::new(default_contexts(DIM, 1, seed ^ 0xa11ce)?, default_contexts(DIM, 1, seed ^ 0xb0b)?)?;
    match family {
        MixedFamily::QuantumMixture => {
            let lambdas = 3;
            let ops = (0..lambdas)
                .map(|_| random_density_matrix(DIM * DIM, &mut r).into_matrix())
                .collect();
            ProbabilityTable::new(&operator_model("quantum-mixture", ops, hidden_weights(lambdas, &mut r)?), &contexts)
        }
        MixedFamily::ProductPositive => {
            let dims = FactorDims::square(DIM);
            let pt = partial_transpose(max_entangled(DIM)?.density().matrix(), dims, Side::B)?;
            let mixed = ComplexMatrix::identity(DIM * DIM).scale_real(1.0 / (DIM * DIM) as f64);
            let lambdas = 2;
            let ops = (0..lambdas)
                .map(|_| {
                    let s: f64 = r.random_range(0.0..=1.0);
                    &mixed.scale_real(1.0 - s) + &pt.scale_real(s)
                })
                .collect();
            ProbabilityTable::new(&operator_model("product-positive", ops, hidden_weights(lambdas, &mut r)?), &contexts)
        }
        MixedFamily::ContextualJoint => {
            let model = PlantedContextualJointModel::new(DIM, r.random_range(0.05..=1.0))?;
            ProbabilityTable::new(&model, &contexts)
        }
        MixedFamily::Signalling => {
            let model = PlantedSignallingModel::new(DIM, r.random_range(0.02..=1.0 / DIM as f64))?;
            ProbabilityTable::new(&model, &contexts)
        }
    }
}
