//! Truncated cavity ⊗ quantum-dot Hilbert space and the Jaynes-Cummings
//! Hamiltonian in the frame rotating at the cavity frequency.
//!
//! Basis ordering is photon-number major, dot state minor:
//! `index = 2 n + q` with `q = 0` for the ground state and `q = 1` for the
//! excited state. All rates are in units of the dot emission rate γ.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::ComplexMatrix;

/// Fock truncation used when none is given.
pub const DEFAULT_N_MAX: usize = 6;

/// Physical rates and frequencies of the coupled system, in units of γ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Dot spontaneous emission rate γ.
    pub gamma: f64,
    /// Intrinsic cavity loss κ0.
    pub kappa0: f64,
    /// External (waveguide) cavity coupling κ1.
    pub kappa1: f64,
    /// Cavity-dot coupling strength.
    pub g: f64,
    /// Dot-cavity detuning ω_QD − ω_cav.
    pub delta: f64,
    /// Incoherent cavity pump P_a (master-equation route only).
    pub pump: f64,
    /// Highest photon number kept.
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    /// Overrides the master-equation cavity decay rate; by default it equals
    /// the total field decay rate κ0/2 + κ1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_me: Option<f64>,
    /// Phase φ of the coupling, g → g·e^{iφ}.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub coupling_phase: f64,
}

fn default_n_max() -> usize {
    DEFAULT_N_MAX
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

impl Default for SystemParams {
    /// On-resonance Γ = 15γ, g = Γ/2, P_a = 2.5γ.
    fn default() -> Self {
        Self::from_total_decay(15.0, 7.5, 0.0, 2.5)
    }
}

impl SystemParams {
    /// Parameters for a lossless (κ0 = 0) cavity with total field decay rate
    /// `gamma_total`, γ = 1.
    pub fn from_total_decay(gamma_total: f64, g: f64, delta: f64, pump: f64) -> Self {
        Self {
            gamma: 1.0,
            kappa0: 0.0,
            kappa1: gamma_total,
            g,
            delta,
            pump,
            n_max: DEFAULT_N_MAX,
            kappa_me: None,
            coupling_phase: 0.0,
        }
    }

    /// Total cavity field decay rate Γ = κ0/2 + κ1.
    #[inline]
    pub fn gamma_total(&self) -> f64 {
        0.5 * self.kappa0 + self.kappa1
    }

    /// Cavity decay rate used in the master equation.
    #[inline]
    pub fn kappa_me(&self) -> f64 {
        self.kappa_me.unwrap_or_else(|| self.gamma_total())
    }

    /// Sets Γ while keeping κ0, i.e. κ1 = Γ − κ0/2.
    pub fn set_gamma_total(&mut self, gamma_total: f64) {
        self.kappa1 = gamma_total - 0.5 * self.kappa0;
    }

    pub fn with_pump(mut self, pump: f64) -> Self {
        self.pump = pump;
        self
    }

    pub fn with_n_max(mut self, n_max: usize) -> Self {
        self.n_max = n_max;
        self
    }

    /// Hilbert-space dimension 2 (n_max + 1).
    #[inline]
    pub fn dim(&self) -> usize {
        2 * (self.n_max + 1)
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = |field: &'static str, v: f64| -> Result<()> {
            if !v.is_finite() || v < 0.0 {
                Err(Error::InvalidParams {
                    field,
                    reason: format!("must be finite and ≥ 0, got {v}"),
                })
            } else {
                Ok(())
            }
        };
        if !self.gamma.is_finite() || self.gamma <= 0.0 {
            return Err(Error::InvalidParams {
                field: "gamma",
                reason: format!("must be finite and > 0, got {}", self.gamma),
            });
        }
        nonneg("kappa0", self.kappa0)?;
        nonneg("kappa1", self.kappa1)?;
        nonneg("g", self.g)?;
        nonneg("pump", self.pump)?;
        if let Some(k) = self.kappa_me {
            nonneg("kappa_me", k)?;
        }
        if !self.delta.is_finite() {
            return Err(Error::InvalidParams {
                field: "delta",
                reason: "must be finite".into(),
            });
        }
        if !self.coupling_phase.is_finite() {
            return Err(Error::InvalidParams {
                field: "coupling_phase",
                reason: "must be finite".into(),
            });
        }
        if self.n_max < 1 {
            return Err(Error::InvalidParams {
                field: "n_max",
                reason: "must be ≥ 1".into(),
            });
        }
        Ok(())
    }

    /// Checks the condition for a pumped steady state, P_a < κ.
    pub fn check_pump(&self) -> Result<()> {
        if self.pump >= self.kappa_me() {
            return Err(Error::PumpExceedsDecay {
                pump: self.pump,
                kappa: self.kappa_me(),
            });
        }
        Ok(())
    }
}

/// Mode operators and Hamiltonian on the composite space.
#[derive(Clone, Debug)]
pub struct OperatorSet {
    pub dim: usize,
    pub n_max: usize,
    /// Photon annihilation a ⊗ 1.
    pub a: ComplexMatrix,
    /// Dot lowering 1 ⊗ σ.
    pub sigma: ComplexMatrix,
    /// Hamiltonian in the frame rotating at ω_cav.
    pub h: ComplexMatrix,
}

impl OperatorSet {
    pub fn number(&self) -> ComplexMatrix {
        self.a.adjoint().matmul(&self.a)
    }

    pub fn excitation(&self) -> ComplexMatrix {
        self.sigma.adjoint().matmul(&self.sigma)
    }

    /// Projector onto photon number `n` (either dot state).
    pub fn photon_projector(&self, n: usize) -> ComplexMatrix {
        let mut p = ComplexMatrix::zeros(self.dim, self.dim);
        for q in 0..2 {
            let i = basis_index(n, q == 1);
            p[(i, i)] = Complex64::new(1.0, 0.0);
        }
        p
    }

    /// Pure-state projector |n, q⟩⟨n, q|.
    pub fn basis_projector(&self, n: usize, excited: bool) -> ComplexMatrix {
        let mut p = ComplexMatrix::zeros(self.dim, self.dim);
        let i = basis_index(n, excited);
        p[(i, i)] = Complex64::new(1.0, 0.0);
        p
    }
}

#[inline]
pub fn basis_index(photons: usize, excited: bool) -> usize {
    2 * photons + usize::from(excited)
}

#[inline]
pub fn basis_state(index: usize) -> (usize, bool) {
    (index / 2, index % 2 == 1)
}

/// Bare Fock-space annihilation operator, `a|n⟩ = √n |n−1⟩`.
pub fn single_mode_operators(n_max: usize) -> (usize, ComplexMatrix) {
    assert!(n_max >= 1, "n_max must be at least 1");
    let dim = n_max + 1;
    let mut a = ComplexMatrix::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    (dim, a)
}

/// Builds a, σ and H = δ σ†σ − i g σ†a + i g a†σ.
pub fn build_operators(params: &SystemParams) -> Result<OperatorSet> {
    params.validate()?;
    let (_, a_mode) = single_mode_operators(params.n_max);
    let mut sigma_dot = ComplexMatrix::zeros(2, 2);
    sigma_dot[(0, 1)] = Complex64::new(1.0, 0.0);

    let a = a_mode.kron(&ComplexMatrix::identity(2));
    let sigma = ComplexMatrix::identity(params.n_max + 1).kron(&sigma_dot);
    let dim = a.rows();

    let coupling = Complex64::from_polar(params.g, params.coupling_phase);
    let i = Complex64::new(0.0, 1.0);
    let sd_a = sigma.adjoint().matmul(&a);
    let ad_s = a.adjoint().matmul(&sigma);
    let detuning = sigma.adjoint().matmul(&sigma).scale(Complex64::new(params.delta, 0.0));
    let h = &(&detuning + &sd_a.scale(-i * coupling)) + &ad_s.scale(i * coupling.conj());

    Ok(OperatorSet {
        dim,
        n_max: params.n_max,
        a,
        sigma,
        h,
    })
}
