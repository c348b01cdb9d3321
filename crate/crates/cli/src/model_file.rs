//! TOML descriptions of states and built-in hidden-variable models.
//!
//! ```toml
//! [state]
//! kind = "schmidt"            # singlet | max-entangled | schmidt | amplitudes | maximally-mixed
//! coefficients = [0.8, 0.6]
//!
//! [model]
//! family = "trivial"          # trivial | leggett | eta-leggett | planted-signalling | planted-contextual-joint
//!
//! [contexts]
//! random_extra = 1
//!
//! [check]
//! tol = 1e-10
//! cond_floor = 1e-9
//! ```

use std::path::Path;

use nogo_core::hv::{HiddenVariableModel, PlantedContextualJointModel, PlantedSignallingModel, TrivialQuantumModel};
use nogo_core::leggett::{CorrelationKind, LeggettModel, Pairing};
use nogo_core::linalg::{Complex64, FactorDims};
use nogo_core::states::{max_entangled, DensityOperator, PureState};
use serde::{Deserialize, Serialize};

use crate::error::{config, CliError, CliResult};
use crate::format::{nums, Num};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateKind {
    Singlet,
    MaxEntangled,
    Schmidt,
    Amplitudes,
    MaximallyMixed,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    pub kind: StateKind,
    pub n: Option<usize>,
    pub coefficients: Option<Vec<f64>>,
    /// `[re, im]` pairs in the product basis `|i⟩|j⟩`, index `i·n + j`.
    pub amplitudes: Option<Vec<[f64; 2]>>,
}

#[derive(Serialize)]
pub struct StateEcho {
    kind: StateKind,
    n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    coefficients: Option<Vec<Num>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    amplitudes: Option<Vec<[Num; 2]>>,
}

pub enum ResolvedState {
    Pure(PureState),
    Mixed(DensityOperator),
}

impl ResolvedState {
    pub fn density(&self) -> DensityOperator {
        match self {
            ResolvedState::Pure(p) => p.density(),
            ResolvedState::Mixed(d) => d.clone(),
        }
    }
}

impl StateSpec {
    fn forbid(&self, coefficients: bool, amplitudes: bool) -> CliResult<()> {
        if !coefficients && self.coefficients.is_some() {
            return Err(config("state.coefficients is only used with kind = \"schmidt\""));
        }
        if !amplitudes && self.amplitudes.is_some() {
            return Err(config("state.amplitudes is only used with kind = \"amplitudes\""));
        }
        Ok(())
    }

    fn need_n(&self) -> CliResult<usize> {
        match self.n {
            Some(n) if n >= 2 => Ok(n),
            Some(n) => Err(config(format!("state.n = {n} must be at least 2"))),
            None => Err(config(format!("state.n is required for kind = {:?}", self.kind))),
        }
    }

    pub fn resolve(&self) -> CliResult<ResolvedState> {
        match self.kind {
            StateKind::Singlet => {
                self.forbid(false, false)?;
                if self.n.is_some_and(|n| n != 2) {
                    return Err(config("the singlet has n = 2"));
                }
                Ok(ResolvedState::Pure(PureState::singlet()))
            }
            StateKind::MaxEntangled => {
                self.forbid(false, false)?;
                Ok(ResolvedState::Pure(max_entangled(self.need_n()?)?))
            }
            StateKind::MaximallyMixed => {
                self.forbid(false, false)?;
                Ok(ResolvedState::Mixed(DensityOperator::maximally_mixed(FactorDims::square(self.need_n()?))))
            }
            StateKind::Schmidt => {
                self.forbid(true, false)?;
                let c = self.coefficients.as_ref().ok_or_else(|| config("state.coefficients is required"))?;
                if c.len() < 2 || self.n.is_some_and(|n| n != c.len()) {
                    return Err(config("state.coefficients needs n >= 2 entries"));
                }
                Ok(ResolvedState::Pure(PureState::from_schmidt_coefficients(c)?))
            }
            StateKind::Amplitudes => {
                self.forbid(false, true)?;
                let n = self.need_n()?;
                let a = self.amplitudes.as_ref().ok_or_else(|| config("state.amplitudes is required"))?;
                if a.len() != n * n {
                    return Err(config(format!("state.amplitudes needs {} entries, found {}", n * n, a.len())));
                }
                let amps = a.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
                Ok(ResolvedState::Pure(PureState::normalized(FactorDims::square(n), amps)?))
            }
        }
    }

    pub fn echo(&self, n: usize) -> StateEcho {
        StateEcho {
            kind: self.kind,
            n,
            coefficients: self.coefficients.as_deref().map(nums),
            amplitudes: self
                .amplitudes
                .as_ref()
                .map(|a| a.iter().map(|&[re, im]| [Num(re), Num(im)]).collect()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Trivial,
    Leggett,
    EtaLeggett,
    PlantedSignalling,
    PlantedContextualJoint,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Correlation {
    Product,
    ClampedSinglet,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairingName {
    Antipodal,
    Same,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub family: Family,
    pub correlation: Option<Correlation>,
    pub eta: Option<f64>,
    pub grid: Option<usize>,
    pub pairing: Option<PairingName>,
    pub epsilon: Option<f64>,
    pub n: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContextSpec {
    pub random_extra: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    pub tol: Option<f64>,
    pub cond_floor: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub state: Option<StateSpec>,
    pub model: ModelSpec,
    #[serde(default)]
    pub contexts: ContextSpec,
    #[serde(default)]
    pub check: CheckSpec,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub state: StateSpec,
}

pub const DEFAULT_GRID: usize = 64;

#[derive(Serialize)]
pub struct ModelEcho {
    family: Family,
    #[serde(skip_serializing_if = "Option::is_none")]
    state: Option<StateEcho>,
    #[serde(skip_serializing_if = "Option::is_none")]
    correlation: Option<Correlation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eta: Option<Num>,
    #[serde(skip_serializing_if = "Option::is_none")]
    grid: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pairing: Option<PairingName>,
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<Num>,
    n: usize,
}

pub struct BuiltModel {
    pub model: Box<dyn HiddenVariableModel>,
    pub echo: ModelEcho,
}

fn read_toml<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| config(format!("{}: {e}", path.display())))
}

pub fn load_model_file(path: &Path) -> CliResult<ModelFile> {
    read_toml(path)
}

pub fn load_state_file(path: &Path) -> CliResult<StateSpec> {
    Ok(read_toml::<StateFile>(path)?.state)
}

impl ModelSpec {
    fn allow(&self, keys: &[&str]) -> CliResult<()> {
        let present = [
            ("correlation", self.correlation.is_some()),
            ("eta", self.eta.is_some()),
            ("grid", self.grid.is_some()),
            ("pairing", self.pairing.is_some()),
            ("epsilon", self.epsilon.is_some()),
            ("n", self.n.is_some()),
        ];
        for (key, set) in present {
            if set && !keys.contains(&key) {
                return Err(config(format!("model.{key} does not apply to family {:?}", self.family)));
            }
        }
        Ok(())
    }
}

pub fn build_model(file: &ModelFile) -> CliResult<BuiltModel> {
    let spec = &file.model;
    if spec.family != Family::Trivial && file.state.is_some() {
        return Err(config("a [state] table is only used by the trivial family"));
    }
    let mut echo = ModelEcho {
        family: spec.family,
        state: None,
        correlation: None,
        eta: None,
        grid: None,
        pairing: None,
        epsilon: None,
        n: 2,
    };
    let model: Box<dyn HiddenVariableModel> = match spec.family {
        Family::Trivial => {
            spec.allow(&[])?;
            let state_spec = file.state.as_ref().ok_or_else(|| config("the trivial family needs a [state] table"))?;
            let rho = state_spec.resolve()?.density();
            echo.n = rho.dims().a;
            echo.state = Some(state_spec.echo(echo.n));
            Box::new(TrivialQuantumModel::new(rho))
        }
        Family::Leggett | Family::EtaLeggett => {
            spec.allow(&["correlation", "eta", "grid", "pairing"])?;
            let eta = match (spec.family, spec.eta) {
                (Family::Leggett, None) => 1.0,
                (Family::Leggett, Some(_)) => return Err(config("family leggett has eta = 1; use eta-leggett")),
                (_, Some(e)) if e > 0.0 && e < 1.0 => e,
                (_, Some(e)) => return Err(config(format!("model.eta = {e} must lie in (0, 1)"))),
                (_, None) => return Err(config("family eta-leggett needs model.eta")),
            };
            let grid = spec.grid.unwrap_or(DEFAULT_GRID);
            let correlation = spec.correlation.unwrap_or(Correlation::Product);
            let pairing = spec.pairing.unwrap_or(PairingName::Antipodal);
            let kind = match correlation {
                Correlation::Product => CorrelationKind::Product,
                Correlation::ClampedSinglet => CorrelationKind::ClampedSinglet,
            };
            let p = match pairing {
                PairingName::Antipodal => Pairing::Antipodal,
                PairingName::Same => Pairing::Same,
            };
            echo.correlation = Some(correlation);
            echo.eta = Some(Num(eta));
            echo.grid = Some(grid);
            echo.pairing = Some(pairing);
            Box::new(LeggettModel::new(grid, eta, p, kind)?)
        }
        Family::PlantedSignalling | Family::PlantedContextualJoint => {
            spec.allow(&["epsilon", "n"])?;
            let n = spec.n.ok_or_else(|| config("planted families need model.n"))?;
            let eps = spec.epsilon.ok_or_else(|| config("planted families need model.epsilon"))?;
            echo.n = n;
            echo.epsilon = Some(Num(eps));
            if spec.family == Family::PlantedSignalling {
                Box::new(PlantedSignallingModel::new(n, eps)?)
            } else {
                Box::new(PlantedContextualJointModel::new(n, eps)?)
            }
        }
    };
    Ok(BuiltModel { model, echo })
}
