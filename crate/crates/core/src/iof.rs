//! Input-output transmission of the cavity-waveguide-dot system in the
//! weak-excitation limit.
//!
//! With the cavity driven through one waveguide port and the dot response
//! linearized, the steady-state field in the cavity obeys
//!
//! ```text
//! D(ω) = −iω + Γ + g² / (i(δ − ω) + γ),   Γ = κ0/2 + κ1,
//! t(ω) = 1 − κ1/D(ω)   (through port),
//! d(ω) = κ1/D(ω)       (drop port),
//! ```
//!
//! with ω measured from the cavity frequency.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::operators::SystemParams;
use crate::spectra::{Channel, FrequencyGrid, Method, Normalization, Spectrum};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Port {
    #[default]
    Through,
    Drop,
}

impl Port {
    pub fn as_str(self) -> &'static str {
        match self {
            Port::Through => "through",
            Port::Drop => "drop",
        }
    }

    pub fn channel(self) -> Channel {
        match self {
            Port::Through => Channel::ThroughPort,
            Port::Drop => Channel::DropPort,
        }
    }
}

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Port {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "through" => Ok(Port::Through),
            "drop" => Ok(Port::Drop),
            other => Err(format!("unknown port '{other}' (through|drop)")),
        }
    }
}

fn denominator(params: &SystemParams, omega: f64) -> Complex64 {
    let dot = Complex64::new(params.gamma, params.delta - omega);
    Complex64::new(params.gamma_total(), -omega) + params.g * params.g / dot
}

/// Field transfer ratio output/input at offset `omega_offset` from the cavity.
/// The pump rate plays no role here.
pub fn transmission_amplitude(params: &SystemParams, omega_offset: f64, port: Port) -> Complex64 {
    let drop = params.kappa1 / denominator(params, omega_offset);
    match port {
        Port::Through => 1.0 - drop,
        Port::Drop => drop,
    }
}

/// `|amplitude|²` on the grid.
pub fn iof_spectrum(params: &SystemParams, grid: &FrequencyGrid, port: Port) -> Result<Spectrum> {
    params.validate()?;
    let values = grid
        .offsets()
        .iter()
        .map(|&w| transmission_amplitude(params, w, port).norm_sqr())
        .collect();
    Spectrum::new(grid.clone(), values, Method::Iof, port.channel(), Normalization::Raw, *params)
}
