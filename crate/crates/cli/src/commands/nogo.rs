use std::thread;

use nogo_core::linalg::FactorDims;
use nogo_core::nogo::{max_perturbation_ladder, DirectionPolicy, FeasibilityCertificate};
use nogo_core::states::{max_entangled, DensityOperator};
use serde::Serialize;

use super::{count, median, resolve_common, status, tolerance, CommonEcho, Outcome};
use crate::args::{Format, NogoArgs};
use crate::error::{config, CliError, CliResult};
use crate::format::{finite, to_json, write_output, Cell, Csv, Num};

const ENTANGLED: &str = "max-entangled";
const MIXED: &str = "maximally-mixed";

#[derive(Serialize)]
struct Config {
    command: &'static str,
    #[serde(flatten)]
    common: CommonEcho,
    n: usize,
    eta: Num,
    ladder: Vec<usize>,
    seeds: Vec<u64>,
    min_ratio: Num,
}

#[derive(Serialize)]
struct Certificate {
    state: &'static str,
    n: usize,
    eta: Num,
    #[serde(rename = "N")]
    samples: usize,
    seed: u64,
    t_max: Num,
    min_residual: Num,
}

#[derive(Serialize)]
struct TableRow {
    #[serde(rename = "N")]
    samples: usize,
    median_entangled: Num,
    median_mixed: Num,
    ratio: Option<Num>,
}

#[derive(Serialize)]
struct Verdicts {
    entangled_non_increasing: &'static str,
    separation: &'static str,
}

#[derive(Serialize)]
struct Report {
    config: Config,
    table: Vec<TableRow>,
    verdicts: Verdicts,
    certificates: Vec<Certificate>,
}

/// Runs the ladder for every seed, fanned out over threads; results come
/// back in seed order.
fn run_seeds(rho: &DensityOperator, eta: f64, ladder: &[usize], seeds: &[u64]) -> CliResult<Vec<Vec<FeasibilityCertificate>>> {
    let workers = thread::available_parallelism().map_or(1, |n| n.get()).min(seeds.len()).max(1);
    let chunk = seeds.len().div_ceil(workers);
    let parts: Vec<nogo_core::Result<Vec<Vec<FeasibilityCertificate>>>> = thread::scope(|s| {
        let handles: Vec<_> = seeds
            .chunks(chunk)
            .map(|part| {
                s.spawn(move || {
                    part.iter()
                        .map(|&seed| max_perturbation_ladder(rho, eta, ladder, seed, &DirectionPolicy::Random))
                        .collect()
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut out = Vec::with_capacity(seeds.len());
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

fn validate(args: &NogoArgs) -> CliResult<()> {
    if args.n < 2 {
        return Err(config(format!("--n = {} must be at least 2", args.n)));
    }
    if !(args.eta > 0.0 && args.eta < 1.0) {
        return Err(config(format!("--eta = {} must lie in (0, 1)", args.eta)));
    }
    let floor = args.n.pow(4);
    match args.ladder.first() {
        None => return Err(config("--ladder is empty")),
        Some(&first) if first < floor => {
            return Err(config(format!("--ladder starts at {first}; at least n^4 = {floor} samples are needed")))
        }
        _ => {}
    }
    if args.ladder.windows(2).any(|w| w[1] <= w[0]) {
        return Err(config("--ladder must be strictly increasing"));
    }
    Ok(())
}

pub fn run(args: &NogoArgs) -> CliResult<Outcome> {
    let common = resolve_common(&args.common, Format::Json, &[Format::Json, Format::Csv])?;
    validate(args)?;
    count("--seeds", args.seeds)?;
    let min_ratio = tolerance("--min-ratio", args.min_ratio)?;
    let seeds: Vec<u64> = (0..args.seeds as u64).map(|k| args.common.seed.wrapping_add(k)).collect();
    let n = args.n;
    let ent = max_entangled(n)?.density();
    let mix = DensityOperator::maximally_mixed(FactorDims::square(n));
    let ent_runs = run_seeds(&ent, args.eta, &args.ladder, &seeds)?;
    let mix_runs = run_seeds(&mix, args.eta, &args.ladder, &seeds)?;

    let column = |runs: &[Vec<FeasibilityCertificate>], k: usize| -> Vec<f64> { runs.iter().map(|r| r[k].t_max).collect() };
    let table: Vec<TableRow> = args
        .ladder
        .iter()
        .enumerate()
        .map(|(k, &samples)| {
            let e = median(&column(&ent_runs, k));
            let m = median(&column(&mix_runs, k));
            TableRow {
                samples,
                median_entangled: Num(e),
                median_mixed: Num(m),
                ratio: finite(m / e),
            }
        })
        .collect();
    let non_increasing = table.windows(2).all(|w| w[1].median_entangled.0 <= w[0].median_entangled.0);
    let last = table.last().expect("ladder is non-empty");
    let separated = last.median_mixed.0 >= min_ratio * last.median_entangled.0;

    let mut failures = Vec::new();
    if !non_increasing {
        failures.push("entangled-non-increasing".to_string());
    }
    if !separated {
        failures.push("separation".to_string());
    }

    let text = match common.format {
        Format::Csv => {
            let mut csv = Csv::new(&["N", "median_entangled", "median_mixed", "ratio"]);
            for r in &table {
                let ratio = r.ratio.ok_or_else(|| CliError::Config("entangled median is zero; ratio undefined".into()))?;
                csv.row(&[Cell::Int(r.samples as u64), Cell::Num(r.median_entangled.0), Cell::Num(r.median_mixed.0), Cell::Num(ratio.0)])?;
            }
            csv.into_string()
        }
        Format::Json => {
            let mut certificates = Vec::new();
            for (state, runs) in [(ENTANGLED, &ent_runs), (MIXED, &mix_runs)] {
                for (seed, certs) in seeds.iter().zip(runs) {
                    for c in certs {
                        certificates.push(Certificate {
                            state,
                            n,
                            eta: Num(args.eta),
                            samples: c.samples,
                            seed: *seed,
                            t_max: Num(c.t_max),
                            min_residual: Num(c.min_residual),
                        });
                    }
                }
            }
            to_json(&Report {
                config: Config {
                    command: "nogo",
                    common,
                    n,
                    eta: Num(args.eta),
                    ladder: args.ladder.clone(),
                    seeds: seeds.clone(),
                    min_ratio: Num(min_ratio),
                },
                table,
                verdicts: Verdicts {
                    entangled_non_increasing: status(non_increasing),
                    separation: status(separated),
                },
                certificates,
            })?
        }
    };
    write_output(&args.common.out, &text)?;
    Ok(Outcome {
        out: args.common.out.clone(),
        failures,
    })
}
