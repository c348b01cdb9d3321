use nogo_core::hv::{check_all, default_contexts, ContextSets, ProbabilityTable, Witness};
use nogo_core::leggett::LeggettModel;
use nogo_core::Error;
use serde::Serialize;

use super::{resolve_common, status, tolerance, CommonEcho, Outcome};
use crate::args::{Format, ModelCheckArgs};
use crate::error::CliResult;
use crate::format::{to_json, write_output, Num};
use crate::model_file::{build_model, load_model_file, Family, ModelEcho};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_COND_FLOOR: f64 = 1e-9;

#[derive(Serialize)]
struct Config {
    command: &'static str,
    #[serde(flatten)]
    common: CommonEcho,
    model_file: String,
    model: ModelEcho,
    random_extra: usize,
    tol: Num,
    cond_floor: Num,
}

#[derive(Serialize)]
struct ModelSummary {
    name: String,
    hidden_count: usize,
    alice_contexts: Vec<String>,
    bob_contexts: Vec<String>,
}

#[derive(Serialize)]
struct WitnessOut {
    lambda: Option<usize>,
    alice_contexts: Vec<String>,
    bob_contexts: Vec<String>,
    alice_outcomes: Vec<usize>,
    bob_outcomes: Vec<usize>,
}

#[derive(Serialize)]
struct ConditionOut {
    condition: &'static str,
    gating: bool,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    violation: Option<Num>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tolerance: Option<Num>,
    #[serde(skip_serializing_if = "Option::is_none")]
    compared: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    skipped: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<WitnessOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    message: Option<String>,
}

#[derive(Serialize)]
struct Report {
    config: Config,
    model: ModelSummary,
    conditions: Vec<ConditionOut>,
    verdict: &'static str,
}

fn witness(t: &ProbabilityTable, w: &Witness) -> WitnessOut {
    WitnessOut {
        lambda: w.lambda,
        alice_contexts: w.alice_contexts.iter().map(|&i| t.alice_label(i).to_string()).collect(),
        bob_contexts: w.bob_contexts.iter().map(|&j| t.bob_label(j).to_string()).collect(),
        alice_outcomes: w.alice_outcomes.clone(),
        bob_outcomes: w.bob_outcomes.clone(),
    }
}

pub fn run(args: &ModelCheckArgs) -> CliResult<Outcome> {
    let common = resolve_common(&args.common, Format::Json, &[Format::Json])?;
    let file = load_model_file(&args.model)?;
    let tol = tolerance("tolerance", args.tol_check.or(file.check.tol).unwrap_or(DEFAULT_TOL))?;
    let floor = tolerance("conditioning floor", args.tol_floor.or(file.check.cond_floor).unwrap_or(DEFAULT_COND_FLOOR))?;
    let built = build_model(&file)?;
    let extra = file.contexts.random_extra.unwrap_or(0);
    let seed = args.common.seed;
    let dims = built.model.dims();
    let contexts = ContextSets::new(
        default_contexts(dims.a, extra, seed)?,
        default_contexts(dims.b, extra, seed.wrapping_add(1))?,
    )?;
    if matches!(file.model.family, Family::Leggett | Family::EtaLeggett) {
        LeggettModel::validate_contexts(&contexts)?;
    }
    let table = ProbabilityTable::new(built.model.as_ref(), &contexts)?;

    let mut failures = Vec::new();
    let mut conditions = Vec::new();
    for (condition, result) in check_all(&table, tol, floor) {
        let gating = condition.is_gating();
        let out = match result {
            Ok(r) => {
                if gating && !r.passed {
                    failures.push(condition.as_str().to_string());
                }
                ConditionOut {
                    condition: condition.as_str(),
                    gating,
                    status: status(r.passed),
                    violation: Some(Num(r.violation)),
                    tolerance: Some(Num(r.tolerance)),
                    compared: Some(r.compared),
                    skipped: Some(r.skipped),
                    witness: r.witness.as_ref().map(|w| witness(&table, w)),
                    message: None,
                }
            }
            Err(Error::Inconclusive(msg)) => ConditionOut {
                condition: condition.as_str(),
                gating,
                status: "inconclusive",
                violation: None,
                tolerance: None,
                compared: None,
                skipped: None,
                witness: None,
                message: Some(msg),
            },
            Err(e) => return Err(e.into()),
        };
        conditions.push(out);
    }

    let report = Report {
        config: Config {
            command: "model-check",
            common,
            model_file: args.model.display().to_string(),
            model: built.echo,
            random_extra: extra,
            tol: Num(tol),
            cond_floor: Num(floor),
        },
        model: ModelSummary {
            name: built.model.name().to_string(),
            hidden_count: table.hidden_count(),
            alice_contexts: (0..table.alice_context_count()).map(|i| table.alice_label(i).to_string()).collect(),
            bob_contexts: (0..table.bob_context_count()).map(|j| table.bob_label(j).to_string()).collect(),
        },
        conditions,
        verdict: status(failures.is_empty()),
    };
    write_output(&args.common.out, &to_json(&report)?)?;
    Ok(Outcome {
        out: args.common.out.clone(),
        failures,
    })
}
