use std::path::PathBuf;

use serde::Serialize;

use crate::args::{Common, Format};
use crate::error::{config, CliResult};

pub mod leggett_scan;
pub mod model_check;
pub mod nogo;
pub mod verify_lemmas;

/// What a finished run reports back to the caller.
#[derive(Debug)]
pub struct Outcome {
    pub out: PathBuf,
    /// Names of the checks that failed; empty on success.
    pub failures: Vec<String>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Serialize)]
pub struct CommonEcho {
    pub seed: u64,
    pub out: String,
    pub format: Format,
}

pub fn resolve_common(common: &Common, default: Format, allowed: &[Format]) -> CliResult<CommonEcho> {
    let format = common.format.unwrap_or(default);
    if !allowed.contains(&format) {
        return Err(config(format!("--format {format:?} is not supported by this subcommand")));
    }
    Ok(CommonEcho {
        seed: common.seed,
        out: common.out.display().to_string(),
        format,
    })
}

pub fn tolerance(name: &str, value: f64) -> CliResult<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(config(format!("{name} = {value} must be positive")))
    }
}

pub fn count(name: &str, value: usize) -> CliResult<usize> {
    if value >= 1 {
        Ok(value)
    } else {
        Err(config(format!("{name} must be at least 1")))
    }
}

pub fn status(passed: bool) -> &'static str {
    if passed {
        "pass"
    } else {
        "fail"
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}
