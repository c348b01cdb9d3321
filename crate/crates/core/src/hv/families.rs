use crate::error::{Error, Result};
use crate::linalg::FactorDims;
use crate::states::{product_expectation, DensityOperator};

use super::model::{ContextRef, HiddenSpace, HiddenVariableModel};

/// Per-λ predictions equal to the Born rule for `ρ`.
#[derive(Clone, Debug)]
pub struct TrivialQuantumModel {
    state: DensityOperator,
    hidden: HiddenSpace,
}

impl TrivialQuantumModel {
    pub fn new(state: DensityOperator) -> Self {
        Self {
            state,
            hidden: HiddenSpace::single(),
        }
    }
}

impl HiddenVariableModel for TrivialQuantumModel {
    fn name(&self) -> &str {
        "trivial"
    }

    fn dims(&self) -> FactorDims {
        self.state.dims()
    }

    fn state(&self) -> &DensityOperator {
        &self.state
    }

    fn hidden(&self) -> &HiddenSpace {
        &self.hidden
    }

    fn joint(&self, _lambda: usize, ctx_a: ContextRef<'_>, ctx_b: ContextRef<'_>, a: usize, b: usize) -> f64 {
        product_expectation(self.state.matrix(), ctx_a.projector(a).matrix(), ctx_b.projector(b).matrix()).re
    }
}

/// `+1` on Bob contexts with odd index.
fn far_switch(ctx: ContextRef<'_>) -> f64 {
    (ctx.index % 2) as f64
}

fn planted_state(n: usize, epsilon: f64, max_epsilon: f64) -> Result<DensityOperator> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("dimension {n} < 2")));
    }
    if !(0.0..=max_epsilon).contains(&epsilon) {
        return Err(Error::InvalidParameter(format!("epsilon {epsilon} outside [0, {max_epsilon}]")));
    }
    Ok(DensityOperator::maximally_mixed(FactorDims::square(n)))
}

/// Alice's outcome distribution shifts by `ε` on the first two outcomes
/// whenever Bob measures an odd-indexed context. Factorizes for every `λ`.
#[derive(Clone, Debug)]
pub struct PlantedSignallingModel {
    n: usize,
    epsilon: f64,
    state: DensityOperator,
    hidden: HiddenSpace,
}

impl PlantedSignallingModel {
    pub fn new(n: usize, epsilon: f64) -> Result<Self> {
        let state = planted_state(n, epsilon, 1.0 / n as f64)?;
        Ok(Self {
            n,
            epsilon,
            state,
            hidden: HiddenSpace::single(),
        })
    }
}

impl HiddenVariableModel for PlantedSignallingModel {
    fn name(&self) -> &str {
        "planted-signalling"
    }

    fn dims(&self) -> FactorDims {
        FactorDims::square(self.n)
    }

    fn state(&self) -> &DensityOperator {
        &self.state
    }

    fn hidden(&self) -> &HiddenSpace {
        &self.hidden
    }

    fn joint(&self, _lambda: usize, _ctx_a: ContextRef<'_>, ctx_b: ContextRef<'_>, a: usize, _b: usize) -> f64 {
        let shift = match a {
            0 => 1.0,
            1 => -1.0,
            _ => 0.0,
        };
        let n = self.n as f64;
        (1.0 / n + self.epsilon * shift * far_switch(ctx_b)) / n
    }
}

/// Flat marginals, but outcome correlations that switch on with Bob's
/// context: `p = 1/n² + ε s_j (δ_ab − 1/n)/n`.
#[derive(Clone, Debug)]
pub struct PlantedContextualJointModel {
    n: usize,
    epsilon: f64,
    state: DensityOperator,
    hidden: HiddenSpace,
}

impl PlantedContextualJointModel {
    pub fn new(n: usize, epsilon: f64) -> Result<Self> {
        let state = planted_state(n, epsilon, 1.0)?;
        Ok(Self {
            n,
            epsilon,
            state,
            hidden: HiddenSpace::single(),
        })
    }
}

impl HiddenVariableModel for PlantedContextualJointModel {
    fn name(&self) -> &str {
        "planted-contextual-joint"
    }

    fn dims(&self) -> FactorDims {
        FactorDims::square(self.n)
    }

    fn state(&self) -> &DensityOperator {
        &self.state
    }

    fn hidden(&self) -> &HiddenSpace {
        &self.hidden
    }

    fn joint(&self, _lambda: usize, _ctx_a: ContextRef<'_>, ctx_b: ContextRef<'_>, a: usize, b: usize) -> f64 {
        let n = self.n as f64;
        let delta = if a == b { 1.0 } else { 0.0 };
        1.0 / (n * n) + self.epsilon * far_switch(ctx_b) * (delta - 1.0 / n) / n
    }
}

type JointFn = dyn Fn(usize, ContextRef<'_>, ContextRef<'_>, usize, usize) -> f64 + Send + Sync;

/// A model given by an arbitrary probability function.
pub struct FnModel {
    name: String,
    state: DensityOperator,
    hidden: HiddenSpace,
    joint: Box<JointFn>,
}

impl FnModel {
    pub fn new<F>(name: impl Into<String>, state: DensityOperator, hidden: HiddenSpace, joint: F) -> Self
    where
        F: Fn(usize, ContextRef<'_>, ContextRef<'_>, usize, usize) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            state,
            hidden,
            joint: Box::new(joint),
        }
    }
}

impl std::fmt::Debug for FnModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FnModel")
            .field("name", &self.name)
            .field("hidden", &self.hidden.len())
            .finish()
    }
}

impl HiddenVariableModel for FnModel {
    fn name(&self) -> &str {
        &self.name
    }

    fn dims(&self) -> FactorDims {
        self.state.dims()
    }

    fn state(&self) -> &DensityOperator {
        &self.state
    }

    fn hidden(&self) -> &HiddenSpace {
        &self.hidden
    }

    fn joint(&self, lambda: usize, ctx_a: ContextRef<'_>, ctx_b: ContextRef<'_>, a: usize, b: usize) -> f64 {
        (self.joint)(lambda, ctx_a, ctx_b, a, b)
    }
}
