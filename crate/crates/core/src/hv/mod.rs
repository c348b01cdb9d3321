//! Finite hidden-variable models and checkers for the independence and
//! non-contextuality conditions they may satisfy.

pub mod checks;
pub mod context;
pub mod families;
pub mod model;
pub mod random_models;

pub use checks::{
    check_all, check_cpi, check_joint_noncontextuality, check_marginal_noncontextuality, check_oi, check_pi,
    check_reproduction, check_triviality, Condition, ConditionReport, Witness,
};
pub use context::{default_contexts, star_contexts, ContextSets, MeasurementContext};
pub use families::{FnModel, PlantedContextualJointModel, PlantedSignallingModel, TrivialQuantumModel};
pub use model::{ContextRef, HiddenSpace, HiddenVariableModel, ProbabilityTable};

#[cfg(test)]
mod tests;
