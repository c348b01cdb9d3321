//! Numerical toolkit for hidden-variable models of bipartite quantum
//! correlations: influence-free operators and their induced maps, checkers for
//! outcome/parameter independence and contextuality, Leggett-type models and
//! inequalities, and a sampled decomposition search for maximally entangled
//! states.

pub mod error;
pub mod hv;
pub mod influence;
pub mod leggett;
pub mod linalg;
mod lp;
pub mod nogo;
pub mod sampling;
pub mod states;

pub use error::{Error, Result};
