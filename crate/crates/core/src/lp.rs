use microlp::{Problem, Solution};

use crate::error::{Error, Result};

pub(crate) fn solve(problem: &Problem, what: &str) -> Result<Solution> {
    match problem.solve() {
        Ok(outcome) => outcome
            .into_solution()
            .map_err(|_| Error::LinearProgram(format!("{what}: solver interrupted"))),
        Err(microlp::Error::Infeasible) => Err(Error::Infeasible(what.to_string())),
        Err(e) => Err(Error::LinearProgram(format!("{what}: {e}"))),
    }
}
