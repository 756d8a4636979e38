//! Steady-state moment equations under incoherent cavity pumping.
//!
//! Taking traces of the master equation against a†a, σ†σ and a†σ and closing
//! with the weak-excitation approximation (dot mostly in its ground state)
//! gives a linear system for four real unknowns
//! n_a = ⟨a†a⟩, n_σ = ⟨σ†σ⟩, x + iy = ⟨a†σ⟩:
//!
//! ```text
//! −2ξ n_a + 2g x           = −2P
//! −2γ n_σ − 2g x           = 0
//! −χ x + δ y + g(n_σ − n_a) = 0
//! −χ y − δ x               = 0
//! ```
//!
//! where ξ = κ − P and χ = ξ + γ. On resonance n_a reduces to
//! `P(g² + χγ) / (χ(ξγ + g²))`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{solve_dense, ComplexMatrix};
use crate::operators::SystemParams;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    pub n_a: f64,
    pub n_sigma: f64,
    /// ⟨a†σ⟩ for coupling phase 0.
    pub coherence: Complex64,
    pub chi: f64,
    pub xi: f64,
}

fn rates(params: &SystemParams) -> Result<(f64, f64)> {
    params.validate()?;
    let kappa = params.kappa_me();
    let xi = kappa - params.pump;
    if xi <= 0.0 {
        return Err(Error::PumpExceedsDecay {
            pump: params.pump,
            kappa,
        });
    }
    Ok((xi, xi + params.gamma))
}

/// Resonant cavity population `P(g² + χγ) / (χ(ξγ + g²))`.
pub fn cavity_population_closed_form(params: &SystemParams) -> Result<f64> {
    if params.delta != 0.0 {
        return Err(Error::InvalidParams {
            field: "delta",
            reason: "closed form holds on resonance only".into(),
        });
    }
    let (xi, chi) = rates(params)?;
    let (g2, gamma, p) = (params.g * params.g, params.gamma, params.pump);
    Ok(p * (g2 + chi * gamma) / (chi * (xi * gamma + g2)))
}

pub fn moment_steady_state(params: &SystemParams) -> Result<MomentSet> {
    let (xi, chi) = rates(params)?;
    if params.pump > 0.5 * params.kappa_me() {
        log::warn!(
            "pump {} exceeds half the cavity decay {}; weak-excitation closure is unreliable",
            params.pump,
            params.kappa_me()
        );
    }
    let (g, gamma, delta) = (params.g, params.gamma, params.delta);
    #[rustfmt::skip]
    let a = [
        -2.0 * xi, 0.0,            2.0 * g,  0.0,
        0.0,       -2.0 * gamma,   -2.0 * g, 0.0,
        -g,        g,              -chi,     delta,
        0.0,       0.0,            -delta,   -chi,
    ];
    let a = ComplexMatrix::from_vec(4, 4, a.iter().map(|&v| Complex64::new(v, 0.0)).collect())
        .map_err(|_| Error::SingularMomentSystem)?;
    let b = [-2.0 * params.pump, 0.0, 0.0, 0.0].map(|v| Complex64::new(v, 0.0));
    let x = solve_dense(&a, &b).map_err(|_| Error::SingularMomentSystem)?;
    if x.iter().any(|v| !v.re.is_finite()) {
        return Err(Error::SingularMomentSystem);
    }
    Ok(MomentSet {
        n_a: x[0].re,
        n_sigma: x[1].re,
        coherence: Complex64::new(x[2].re, x[3].re),
        chi,
        xi,
    })
}
