//! Run configuration: a JSON file with physical parameters (units of γ),
//! grid, method selection and an optional sweep.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::error::Error;
use crate::iof::Port;
use crate::liouville::MAX_N_MAX;
use crate::operators::SystemParams;
use crate::spectra::{FrequencyGrid, Normalization};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl GridSpec {
    /// Parses `MIN:MAX:POINTS`.
    pub fn parse(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [min, max, points] = parts.as_slice() else {
            return Err(format!("grid '{s}' is not MIN:MAX:POINTS"));
        };
        let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("grid '{s}': {e}"));
        Ok(Self {
            min: num(min)?,
            max: num(max)?,
            points: points.trim().parse().map_err(|e| format!("grid '{s}': {e}"))?,
        })
    }

    pub fn build(&self) -> crate::Result<FrequencyGrid> {
        FrequencyGrid::uniform(self.min, self.max, self.points)
    }

    pub fn of(grid: &FrequencyGrid) -> Self {
        Self {
            min: grid.min(),
            max: grid.max(),
            points: grid.len(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodSelection {
    Ipm,
    Iof,
    #[default]
    Both,
}

impl MethodSelection {
    pub fn includes_ipm(self) -> bool {
        matches!(self, MethodSelection::Ipm | MethodSelection::Both)
    }

    pub fn includes_iof(self) -> bool {
        matches!(self, MethodSelection::Iof | MethodSelection::Both)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Pump,
    /// Total cavity field decay Γ, varied through κ1 at fixed κ0.
    GammaTotal,
    Delta,
    G,
    Gamma,
    Kappa0,
}

impl SweepParameter {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepParameter::Pump => "pump",
            SweepParameter::GammaTotal => "gamma_total",
            SweepParameter::Delta => "delta",
            SweepParameter::G => "g",
            SweepParameter::Gamma => "gamma",
            SweepParameter::Kappa0 => "kappa0",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    /// Keeps g = ratio·Γ at every point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tie_g_ratio: Option<f64>,
    /// Keeps δ = ratio·Γ at every point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tie_delta_ratio: Option<f64>,
}

impl SweepSpec {
    pub fn apply(&self, base: &SystemParams, value: f64) -> SystemParams {
        let mut p = *base;
        match self.parameter {
            SweepParameter::Pump => p.pump = value,
            SweepParameter::GammaTotal => p.set_gamma_total(value),
            SweepParameter::Delta => p.delta = value,
            SweepParameter::G => p.g = value,
            SweepParameter::Gamma => p.gamma = value,
            SweepParameter::Kappa0 => {
                let total = p.gamma_total();
                p.kappa0 = value;
                p.set_gamma_total(total);
            }
        }
        if let Some(r) = self.tie_g_ratio {
            p.g = r * p.gamma_total();
        }
        if let Some(r) = self.tie_delta_ratio {
            p.delta = r * p.gamma_total();
        }
        p
    }
}

fn default_max_truncation() -> usize {
    MAX_N_MAX
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub params: SystemParams,
    /// Uniform grid; the parameter-dependent default is used when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub method: MethodSelection,
    #[serde(default)]
    pub port: Port,
    #[serde(default)]
    pub normalization: Normalization,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    /// Largest Fock cutoff the steady-state escalation may reach.
    #[serde(default = "default_max_truncation")]
    pub max_truncation: usize,
    #[serde(default)]
    pub plot: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: SystemParams::default(),
            grid: None,
            method: MethodSelection::default(),
            port: Port::default(),
            normalization: Normalization::default(),
            out: None,
            sweep: None,
            max_truncation: MAX_N_MAX,
            plot: false,
        }
    }
}

fn param_error(prefix: &str, e: Error) -> CliError {
    match e {
        Error::InvalidParams { field, reason } => CliError::Config(format!("{prefix}{field}: {reason}")),
        other => CliError::Config(format!("{prefix}{other}")),
    }
}

impl RunConfig {
    /// Parses a configuration, or the `config` object of a spectrum sidecar.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        match serde_json::from_str::<RunConfig>(text) {
            Ok(c) => Ok(c),
            Err(direct) => {
                let nested = serde_json::from_str::<serde_json::Value>(text)
                    .ok()
                    .and_then(|v| v.get("config").cloned())
                    .map(serde_json::from_value::<RunConfig>);
                match nested {
                    Some(Ok(c)) => Ok(c),
                    Some(Err(e)) => Err(CliError::Config(format!("config: {e}"))),
                    None => Err(CliError::Config(format!(
                        "line {}, column {}: {direct}",
                        direct.line(),
                        direct.column()
                    ))),
                }
            }
        }
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.params.validate().map_err(|e| param_error("params.", e))?;
        if let Some(g) = &self.grid {
            g.build().map_err(|e| CliError::Config(format!("grid: {e}")))?;
        }
        if self.max_truncation < self.params.n_max {
            return Err(CliError::Config(format!(
                "max_truncation: {} is below params.n_max = {}",
                self.max_truncation, self.params.n_max
            )));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(CliError::Config("sweep.values: empty".into()));
            }
            for (k, &v) in sweep.values.iter().enumerate() {
                if !v.is_finite() {
                    return Err(CliError::Config(format!("sweep.values[{k}]: not finite")));
                }
                sweep
                    .apply(&self.params, v)
                    .validate()
                    .map_err(|e| param_error(&format!("sweep.values[{k}] ({} = {v}): ", sweep.parameter.as_str()), e))?;
            }
        }
        Ok(())
    }

    pub fn grid_for(&self, params: &SystemParams) -> crate::Result<FrequencyGrid> {
        match &self.grid {
            Some(g) => g.build(),
            None => Ok(FrequencyGrid::default_for(params)),
        }
    }

    /// Applies command-line overrides.
    pub fn with_overrides(mut self, grid: Option<GridSpec>, port: Option<Port>, normalization: Option<Normalization>) -> Self {
        if grid.is_some() {
            self.grid = grid;
        }
        if let Some(p) = port {
            self.port = p;
        }
        if let Some(n) = normalization {
            self.normalization = n;
        }
        self
    }
}
