use std::path::Path;

use serde::ser::Error as _;
use serde::{Serialize, Serializer};

use crate::error::{CliError, CliResult};

/// Twelve significant digits; scientific notation below `1e-4` and from
/// `1e12` up, fixed notation otherwise, trailing zeros removed.
pub fn format_number(x: f64) -> Option<String> {
    if !x.is_finite() {
        return None;
    }
    if x == 0.0 {
        return Some("0".into());
    }
    let ax = x.abs();
    if !(1e-4..1e12).contains(&ax) {
        let s = format!("{x:.11e}");
        let (mantissa, exponent) = s.split_once('e').expect("exponent present");
        return Some(format!("{}e{exponent}", trim_zeros(mantissa)));
    }
    let magnitude = ax.log10().floor() as i32;
    let decimals = (11 - magnitude).max(0) as usize;
    Some(trim_zeros(&format!("{x:.decimals$}")).to_string())
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// A float that serializes through [`format_number`] and refuses NaN/Inf.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let text = format_number(self.0).ok_or_else(|| S::Error::custom(format!("non-finite value {}", self.0)))?;
        let n: serde_json::Number = text.parse().map_err(S::Error::custom)?;
        n.serialize(s)
    }
}

/// `None` for non-finite values, written as `null`.
pub fn finite(x: f64) -> Option<Num> {
    x.is_finite().then_some(Num(x))
}

pub fn nums(xs: &[f64]) -> Vec<Num> {
    xs.iter().copied().map(Num).collect()
}

pub fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Config(format!("cannot serialize report: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// Comma-separated rows with a header line, LF endings.
pub struct Csv {
    columns: usize,
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Self { columns: header.len(), text }
    }

    pub fn row(&mut self, cells: &[Cell]) -> CliResult<()> {
        assert_eq!(cells.len(), self.columns, "row width");
        let mut out = Vec::with_capacity(cells.len());
        for c in cells {
            out.push(match *c {
                Cell::Num(x) => format_number(x).ok_or_else(|| CliError::Config(format!("non-finite value {x}")))?,
                Cell::Int(k) => k.to_string(),
                Cell::Flag(b) => u8::from(b).to_string(),
            });
        }
        self.text.push_str(&out.join(","));
        self.text.push('\n');
        Ok(())
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

#[derive(Clone, Copy, Debug)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Flag(bool),
}

pub fn write_output(path: &Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}
