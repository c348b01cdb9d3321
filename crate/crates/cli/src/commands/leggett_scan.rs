use nogo_core::leggett::{leggett_bound, max_lhs_lp, quantum_lhs, violation_region, DirectionTriple, Pairing, Rotation, SphereGrid};
use serde::Serialize;

use super::{count, resolve_common, tolerance, CommonEcho, Outcome};
use crate::args::{Format, LeggettScanArgs};
use crate::error::{config, CliResult};
use crate::format::{to_json, write_output, Cell, Csv, Num};

const MAX_ROWS: usize = 1_000_000;

#[derive(Serialize)]
struct Config {
    command: &'static str,
    #[serde(flatten)]
    common: CommonEcho,
    phi_min: Num,
    phi_max: Num,
    phi_step: Num,
    lp: bool,
    grid: usize,
    eta: Num,
    tol_lp: Num,
}

#[derive(Serialize)]
struct Row {
    phi: Num,
    quantum_lhs: Num,
    leggett_bound: Num,
    violation: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    lp_value: Option<Num>,
    #[serde(skip_serializing_if = "Option::is_none")]
    grid_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    slack: Option<Num>,
}

#[derive(Serialize)]
struct Report {
    config: Config,
    phi_star: Num,
    rows: Vec<Row>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lp_sound: Option<bool>,
}

fn angles(min: f64, max: f64, step: f64) -> CliResult<Vec<f64>> {
    if !min.is_finite() || !max.is_finite() {
        return Err(config("phi range must be finite"));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(config(format!("--phi-step = {step} must be positive")));
    }
    if min > max {
        return Err(config(format!("empty phi range [{min}, {max}]")));
    }
    let span = ((max - min) / step + 1e-9).floor();
    if span >= MAX_ROWS as f64 {
        return Err(config(format!("phi range would produce more than {MAX_ROWS} rows")));
    }
    Ok((0..=span as usize).map(|k| min + k as f64 * step).collect())
}

pub fn run(args: &LeggettScanArgs) -> CliResult<Outcome> {
    let common = resolve_common(&args.common, Format::Csv, &[Format::Csv, Format::Json])?;
    let phis = angles(args.phi_min, args.phi_max, args.phi_step)?;
    let tol_lp = tolerance("--tol-lp", args.tol_lp)?;
    let grid_size = count("--grid", args.grid)?;
    if !(args.eta > 0.0 && args.eta <= 1.0) {
        return Err(config(format!("--eta = {} must lie in (0, 1]", args.eta)));
    }
    let grid = if args.lp {
        Some(SphereGrid::fibonacci(grid_size)?.rotated(&Rotation::random(args.common.seed)))
    } else {
        None
    };

    let mut rows = Vec::with_capacity(phis.len());
    let mut sound = true;
    for &phi in &phis {
        let d = DirectionTriple::new(phi)?;
        let q = quantum_lhs(&d);
        let b = leggett_bound(phi);
        let mut row = Row {
            phi: Num(phi),
            quantum_lhs: Num(q),
            leggett_bound: Num(b),
            violation: q > b,
            lp_value: None,
            grid_points: None,
            slack: None,
        };
        if let Some(g) = &grid {
            let sol = max_lhs_lp(&d, g, args.eta, Pairing::Antipodal)?;
            sound &= sol.value <= b + tol_lp;
            row.lp_value = Some(Num(sol.value));
            row.grid_points = Some(g.len());
            row.slack = Some(Num(b - sol.value));
        }
        rows.push(row);
    }

    let text = match common.format {
        Format::Csv => {
            let mut header = vec!["phi", "quantum_lhs", "leggett_bound", "violation"];
            if args.lp {
                header.extend(["lp_value", "grid_points", "slack"]);
            }
            let mut csv = Csv::new(&header);
            for r in &rows {
                let mut cells = vec![Cell::Num(r.phi.0), Cell::Num(r.quantum_lhs.0), Cell::Num(r.leggett_bound.0), Cell::Flag(r.violation)];
                if let (Some(v), Some(n), Some(s)) = (r.lp_value, r.grid_points, r.slack) {
                    cells.extend([Cell::Num(v.0), Cell::Int(n as u64), Cell::Num(s.0)]);
                }
                csv.row(&cells)?;
            }
            csv.into_string()
        }
        Format::Json => to_json(&Report {
            config: Config {
                command: "leggett-scan",
                common,
                phi_min: Num(args.phi_min),
                phi_max: Num(args.phi_max),
                phi_step: Num(args.phi_step),
                lp: args.lp,
                grid: grid_size,
                eta: Num(args.eta),
                tol_lp: Num(tol_lp),
            },
            phi_star: Num(violation_region().1),
            rows,
            lp_sound: args.lp.then_some(sound),
        })?,
    };
    write_output(&args.common.out, &text)?;
    Ok(Outcome {
        out: args.common.out.clone(),
        failures: if sound { Vec::new() } else { vec!["lp-soundness".into()] },
    })
}
