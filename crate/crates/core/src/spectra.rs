//! Emission and transmission spectra from the Liouvillian.
//!
//! Two-time correlations follow from the regression theorem,
//! `⟨A(τ) B(0)⟩ = Tr[A e^{Lτ}(B ρ)]`, and the spectrum is evaluated
//! frequency by frequency through the shifted resolvent:
//!
//! ```text
//! S(ω) = (1/π) ∫_{−∞}^{∞} e^{−iωτ} ⟨A(τ) B(0)⟩ dτ = (2/π) Re Tr[A x(ω)],
//! (iω − L) x(ω) = B ρ.
//! ```
//!
//! With `A = a†`, `B = a` this gives ∫S dω = 2⟨a†a⟩, and features appear at
//! their physical offsets (a dot detuned by δ emits near +δ).
//!
//! The resolvent is only ever solved on the smallest subspace of Liouville
//! space that is closed under `L` and contains `B ρ`. For the U(1)-symmetric
//! generators built here that is a single excitation-number-difference
//! sector, a few dozen components instead of several hundred.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liouville::{self, DensityMatrix, Liouvillian, MAX_N_MAX};
use crate::numerics::{self, invariant_closure, ComplexMatrix, LuFactorization};
use crate::operators::{basis_index, build_operators, SystemParams};

/// Grid size used when none is configured.
pub const DEFAULT_GRID_POINTS: usize = 2001;

/// Values below this are treated as round-off and clamped to zero.
pub const NEGATIVITY_TOLERANCE: f64 = 1e-12;

const SPECTRUM_PREFACTOR: f64 = 2.0 / std::f64::consts::PI;

/// Ascending list of frequency offsets from ω_cav, in units of γ.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyGrid {
    offsets: Vec<f64>,
    uniform: bool,
}

impl FrequencyGrid {
    pub fn new(offsets: Vec<f64>) -> Result<Self> {
        if offsets.len() < 3 {
            return Err(Error::InvalidGrid(format!("{} points, need at least 3", offsets.len())));
        }
        if offsets.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidGrid("non-finite offset".into()));
        }
        if offsets.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("offsets must be strictly ascending".into()));
        }
        let step = offsets[1] - offsets[0];
        let uniform = offsets
            .windows(2)
            .all(|w| ((w[1] - w[0]) - step).abs() <= 1e-9 * step.abs().max(1.0));
        Ok(Self { offsets, uniform })
    }

    /// `points` equally spaced offsets from `min` to `max` inclusive.
    pub fn uniform(min: f64, max: f64, points: usize) -> Result<Self> {
        if points < 3 {
            return Err(Error::InvalidGrid(format!("{points} points, need at least 3")));
        }
        if !(min.is_finite() && max.is_finite()) || max <= min {
            return Err(Error::InvalidGrid(format!("range [{min}, {max}]")));
        }
        let span = max - min;
        let last = (points - 1) as f64;
        let offsets = (0..points)
            .map(|k| if k + 1 == points { max } else { min + span * (k as f64) / last })
            .collect();
        Ok(Self { offsets, uniform: true })
    }

    /// Covers both polaritons and their tails: [−3Γ−3g, 3Γ+3g] widened by
    /// the detuning on the side it points to.
    pub fn default_for(params: &SystemParams) -> Self {
        let mut half = 3.0 * (params.gamma_total() + params.g);
        if half <= 0.0 {
            half = 3.0 * params.gamma;
        }
        let min = -half + params.delta.min(0.0);
        let max = half + params.delta.max(0.0);
        Self::uniform(min, max, DEFAULT_GRID_POINTS).expect("default grid is valid")
    }

    /// Offsets `center + scale·tan θ` for θ uniform on the open interval
    /// (−π/2, π/2). Resolves Lorentzian tails out to very large offsets, for
    /// integrals over the whole line.
    pub fn tangent(center: f64, scale: f64, points: usize) -> Result<Self> {
        if !(scale > 0.0) {
            return Err(Error::InvalidGrid(format!("tangent scale {scale}")));
        }
        let n = points as f64 + 1.0;
        let offsets = (1..=points)
            .map(|k| {
                let theta = -std::f64::consts::FRAC_PI_2 + std::f64::consts::PI * k as f64 / n;
                center + scale * theta.tan()
            })
            .collect();
        Self::new(offsets)
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    pub fn min(&self) -> f64 {
        self.offsets[0]
    }

    pub fn max(&self) -> f64 {
        self.offsets[self.offsets.len() - 1]
    }

    /// Grid step for uniform grids.
    pub fn step(&self) -> Option<f64> {
        self.uniform.then(|| (self.max() - self.min()) / (self.len() - 1) as f64)
    }

    /// Trapezoidal integral of samples on this grid.
    pub fn trapezoid(&self, values: &[f64]) -> f64 {
        assert_eq!(values.len(), self.len());
        self.offsets
            .windows(2)
            .zip(values.windows(2))
            .map(|(w, v)| 0.5 * (w[1] - w[0]) * (v[0] + v[1]))
            .sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ipm,
    Iof,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Axis,
    Side,
    Combined,
    ThroughPort,
    DropPort,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    Raw,
    #[default]
    UnitMax,
    UnitArea,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Ipm => "ipm",
            Method::Iof => "iof",
        }
    }
}

impl Channel {
    pub fn as_str(self) -> &'static str {
        match self {
            Channel::Axis => "axis",
            Channel::Side => "side",
            Channel::Combined => "combined",
            Channel::ThroughPort => "through_port",
            Channel::DropPort => "drop_port",
        }
    }
}

impl Normalization {
    pub fn as_str(self) -> &'static str {
        match self {
            Normalization::Raw => "raw",
            Normalization::UnitMax => "unit_max",
            Normalization::UnitArea => "unit_area",
        }
    }
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Normalization {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "raw" => Ok(Normalization::Raw),
            "unit_max" => Ok(Normalization::UnitMax),
            "unit_area" => Ok(Normalization::UnitArea),
            other => Err(format!("unknown normalization '{other}' (raw|unit_max|unit_area)")),
        }
    }
}

/// Real spectrum on a frequency grid, with provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub grid: FrequencyGrid,
    pub values: Vec<f64>,
    pub method: Method,
    pub channel: Channel,
    pub normalization: Normalization,
    pub params: SystemParams,
}

impl Spectrum {
    /// Validates the samples; slightly negative round-off is clamped to 0.
    pub fn new(
        grid: FrequencyGrid,
        mut values: Vec<f64>,
        method: Method,
        channel: Channel,
        normalization: Normalization,
        params: SystemParams,
    ) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} values on a {}-point grid",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        // Negative values can only come from round-off on a nonnegative spectrum.
        let scale = values.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        if let Some(bad) = values.iter().find(|&&v| v < -NEGATIVITY_TOLERANCE * scale) {
            return Err(Error::InvalidParams {
                field: "values",
                reason: format!("negative spectral value {bad:e}"),
            });
        }
        for v in &mut values {
            *v = v.max(0.0);
        }
        Ok(Self {
            grid,
            values,
            method,
            channel,
            normalization,
            params,
        })
    }

    pub fn integral(&self) -> f64 {
        self.grid.trapezoid(&self.values)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Rescales the samples; `Raw` leaves them untouched.
    pub fn normalized(mut self, normalization: Normalization) -> Result<Self> {
        let divisor = match normalization {
            Normalization::Raw => 1.0,
            Normalization::UnitMax => self.max_value(),
            Normalization::UnitArea => self.integral(),
        };
        if !(divisor > 0.0 && divisor.is_finite()) {
            return Err(Error::InvalidParams {
                field: "normalization",
                reason: format!("cannot apply {normalization} to a spectrum with scale {divisor}"),
            });
        }
        if normalization != Normalization::Raw {
            for v in &mut self.values {
                *v /= divisor;
            }
        }
        self.normalization = normalization;
        Ok(self)
    }

    /// Linear interpolation at `offset` (clamped to the grid).
    pub fn value_at(&self, offset: f64) -> f64 {
        let w = self.grid.offsets();
        if offset <= w[0] {
            return self.values[0];
        }
        if offset >= w[w.len() - 1] {
            return self.values[w.len() - 1];
        }
        let k = w.partition_point(|&x| x <= offset) - 1;
        let t = (offset - w[k]) / (w[k + 1] - w[k]);
        self.values[k] + t * (self.values[k + 1] - self.values[k])
    }
}

/// Liouville-space resolvent restricted to an `L`-invariant subspace.
struct Resolvent<'a> {
    generator: &'a Liouvillian,
    indices: Vec<usize>,
    source: Vec<Complex64>,
    weights: Vec<Complex64>,
    deflation: Option<(Vec<Complex64>, Vec<Complex64>)>,
}

fn support(v: &[Complex64]) -> impl Iterator<Item = usize> + '_ {
    v.iter().enumerate().filter(|(_, z)| z.norm() > 0.0).map(|(i, _)| i)
}

impl<'a> Resolvent<'a> {
    fn new(generator: &'a Liouvillian, steady: &DensityMatrix, left: &ComplexMatrix, source: &ComplexMatrix) -> Result<Self> {
        let d = generator.dim;
        for (name, m) in [("left", left), ("source", source), ("steady", steady.matrix())] {
            if m.rows() != d || m.cols() != d {
                return Err(Error::DimensionMismatch(format!("{name} operator does not match dimension {d}")));
            }
        }
        let v = source.vectorize();
        let mut indices = invariant_closure(&generator.matrix, support(&v));
        let is_diagonal = |k: usize| k.is_multiple_of(d + 1);

        let mut v = v;
        let mut deflation = None;
        if indices.iter().any(|&k| is_diagonal(k)) {
            // The sector holds the zero mode. Remove the coherent part
            // Tr(source)·ρ_ss and solve with L − ρ_ss⊗Tr, which is regular at ω = 0
            // and agrees with L on traceless vectors.
            let rho_vec = steady.matrix().vectorize();
            indices = invariant_closure(&generator.matrix, indices.iter().copied().chain(support(&rho_vec).collect::<Vec<_>>()));
            let tr = source.trace();
            for (x, r) in v.iter_mut().zip(&rho_vec) {
                *x -= tr * r;
            }
            let rho_sub: Vec<Complex64> = indices.iter().map(|&k| rho_vec[k]).collect();
            let trace_sub: Vec<Complex64> = indices
                .iter()
                .map(|&k| if is_diagonal(k) { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) })
                .collect();
            deflation = Some((rho_sub, trace_sub));
        }

        let source = indices.iter().map(|&k| v[k]).collect();
        // Tr[left · X] = Σ_{i,j} left[j, i] X[i, j], with k = i + j d.
        let weights = indices.iter().map(|&k| left[(k / d, k % d)]).collect();
        Ok(Self {
            generator,
            indices,
            source,
            weights,
            deflation,
        })
    }

    fn spectral_density(&self, omega: f64) -> Result<f64> {
        let m = self.indices.len();
        if m == 0 {
            return Ok(0.0);
        }
        let l = &self.generator.matrix;
        let mut shifted = ComplexMatrix::from_fn(m, m, |r, c| -l[(self.indices[r], self.indices[c])]);
        for r in 0..m {
            shifted[(r, r)] += Complex64::new(0.0, omega);
        }
        if let Some((rho, tr)) = &self.deflation {
            for r in 0..m {
                if rho[r] == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..m {
                    shifted[(r, c)] += rho[r] * tr[c];
                }
            }
        }
        let lu = LuFactorization::new(&shifted).map_err(|_| Error::ResolventSingular { omega })?;
        let x = lu.solve(&self.source);
        let s: Complex64 = self.weights.iter().zip(&x).map(|(w, x)| w * x).sum();
        Ok(SPECTRUM_PREFACTOR * s.re)
    }

    fn evaluate(&self, grid: &FrequencyGrid) -> Result<Vec<f64>> {
        grid.offsets().par_iter().map(|&w| self.spectral_density(w)).collect()
    }
}

/// `S(ω)` of the pair (`left`, `right`) in the steady state `rho_ss`.
///
/// Any coherent part `⟨left⟩⟨right⟩` (a delta function at ω = 0) is
/// excluded; for a†, a under incoherent pumping it vanishes identically.
pub fn regression_spectrum(
    l: &Liouvillian,
    rho_ss: &DensityMatrix,
    left: &ComplexMatrix,
    right: &ComplexMatrix,
    grid: &FrequencyGrid,
) -> Result<Vec<f64>> {
    let source = right.matmul(rho_ss.matrix());
    Resolvent::new(l, rho_ss, left, &source)?.evaluate(grid)
}

/// Initial single excitation for transient channel spectra.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Excitation {
    /// |0 photons, excited dot⟩.
    Dot,
    /// |1 photon, ground dot⟩.
    Photon,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelMode {
    /// Stationary emission under the incoherent pump.
    PumpedSteady,
    /// Total emission while an initial excitation decays (no pump).
    InitialExcitation(Excitation),
}

/// Axis (cavity) and side (dot) emission spectra.
///
/// `T_axis = (κ/π) ∫ e^{−iωτ} ⟨a†(τ) a⟩ dτ` and
/// `T_side = (γ_p/2π) ∫ e^{−iωτ} ⟨σ†(τ) σ⟩ dτ`, where γ_p = 2γ is the dot
/// population decay rate of the `2γ L(σ)` master equation. In terms of
/// [`regression_spectrum`] these are `κ·S_aa` and `γ·S_σσ`; each integrates to
/// the number of photons leaving through its channel, so in
/// `InitialExcitation` mode ∫(T_axis + T_side) dω = 1.
pub fn channel_spectra(params: &SystemParams, grid: &FrequencyGrid, mode: ChannelMode) -> Result<(Spectrum, Spectrum)> {
    channel_spectra_with(params, grid, mode, MAX_N_MAX)
}

pub fn channel_spectra_with(
    params: &SystemParams,
    grid: &FrequencyGrid,
    mode: ChannelMode,
    max_n_max: usize,
) -> Result<(Spectrum, Spectrum)> {
    params.validate()?;
    let (snapshot, axis, side) = match mode {
        ChannelMode::PumpedSteady => {
            if params.pump <= 0.0 {
                return Err(Error::InvalidParams {
                    field: "pump",
                    reason: "pumped steady-state spectra need pump > 0".into(),
                });
            }
            let sol = liouville::converged_steady_state(params, true, max_n_max)?;
            let axis = regression_spectrum(&sol.liouvillian, &sol.rho, &sol.ops.a.adjoint(), &sol.ops.a, grid)?;
            let side = regression_spectrum(&sol.liouvillian, &sol.rho, &sol.ops.sigma.adjoint(), &sol.ops.sigma, grid)?;
            (sol.params, axis, side)
        }
        ChannelMode::InitialExcitation(excitation) => {
            if params.pump != 0.0 {
                return Err(Error::InvalidParams {
                    field: "pump",
                    reason: "initial-excitation spectra are computed without pump".into(),
                });
            }
            let ops = build_operators(params)?;
            let l = liouville::build_liouvillian(&ops, params, false)?;
            let ground = liouville::steady_state(&l)?;
            let start = match excitation {
                Excitation::Dot => basis_index(0, true),
                Excitation::Photon => basis_index(1, false),
            };
            let d = ops.dim;
            // Y = ∫₀^∞ (ρ(t) − ρ_∞) dt solves L Y = ρ_∞ − ρ(0) with Tr Y = 0.
            let rhs = (ground.matrix() - DensityMatrix::basis(d, start).matrix()).vectorize();
            let y = numerics::solve_trace_constrained(&l.matrix, d, &rhs, Complex64::new(0.0, 0.0), 0)?;
            let y = ComplexMatrix::unvectorize(&y, d)?;
            let axis = Resolvent::new(&l, &ground, &ops.a.adjoint(), &ops.a.matmul(&y))?.evaluate(grid)?;
            let side = Resolvent::new(&l, &ground, &ops.sigma.adjoint(), &ops.sigma.matmul(&y))?.evaluate(grid)?;
            (*params, axis, side)
        }
    };
    let kappa = snapshot.kappa_me();
    let gamma = snapshot.gamma;
    let t_axis = Spectrum::new(
        grid.clone(),
        axis.into_iter().map(|v| kappa * v).collect(),
        Method::Ipm,
        Channel::Axis,
        Normalization::Raw,
        snapshot,
    )?;
    let t_side = Spectrum::new(
        grid.clone(),
        side.into_iter().map(|v| gamma * v).collect(),
        Method::Ipm,
        Channel::Side,
        Normalization::Raw,
        snapshot,
    )?;
    Ok((t_axis, t_side))
}

/// Incoherent-pumping transmission: cavity emission `S_{a†a}(ω)` of the
/// pumped steady state.
pub fn ipm_transmission(params: &SystemParams, grid: &FrequencyGrid, normalization: Normalization) -> Result<Spectrum> {
    ipm_transmission_with(params, grid, normalization, MAX_N_MAX)
}

pub fn ipm_transmission_with(
    params: &SystemParams,
    grid: &FrequencyGrid,
    normalization: Normalization,
    max_n_max: usize,
) -> Result<Spectrum> {
    params.validate()?;
    if params.pump <= 0.0 {
        return Err(Error::InvalidParams {
            field: "pump",
            reason: "incoherent pumping needs pump > 0".into(),
        });
    }
    params.check_pump()?;
    let sol = liouville::converged_steady_state(params, true, max_n_max)?;
    let values = regression_spectrum(&sol.liouvillian, &sol.rho, &sol.ops.a.adjoint(), &sol.ops.a, grid)?;
    Spectrum::new(grid.clone(), values, Method::Ipm, Channel::Axis, Normalization::Raw, sol.params)?.normalized(normalization)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouville::{build_liouvillian, expectation, solve_steady};

    fn params(kappa: f64, gamma: f64, g: f64, delta: f64, pump: f64, n_max: usize) -> SystemParams {
        SystemParams {
            gamma,
            n_max,
            ..SystemParams::from_total_decay(kappa, g, delta, pump)
        }
    }

    #[test]
    fn uniform_grid_endpoints_and_step() {
        let g = FrequencyGrid::uniform(-2.0, 2.0, 5).unwrap();
        assert_eq!(g.offsets(), &[-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert_eq!(g.step(), Some(1.0));
        assert!(FrequencyGrid::uniform(0.0, 1.0, 2).is_err());
        assert!(FrequencyGrid::new(vec![0.0, 0.0, 1.0]).is_err());
        assert!(FrequencyGrid::new(vec![0.0, 1.0, f64::NAN]).is_err());
    }

    #[test]
    fn default_grid_span() {
        let p = params(15.0, 1.0, 7.5, 22.5, 2.5, 6);
        let g = FrequencyGrid::default_for(&p);
        assert_eq!(g.len(), DEFAULT_GRID_POINTS);
        assert!((g.min() + 67.5).abs() < 1e-12);
        assert!((g.max() - 90.0).abs() < 1e-12);
    }

    #[test]
    fn tangent_grid_is_symmetric_and_wide() {
        let g = FrequencyGrid::tangent(0.0, 1.0, 101).unwrap();
        assert!(!g.is_uniform());
        assert!(g.max() > 30.0);
        assert!((g.offsets()[50]).abs() < 1e-12);
    }

    #[test]
    fn decoupled_mode_gives_lorentzian() {
        // ⟨a†(τ)a⟩ = n e^{−(κ−P)τ}, so S = (2/π) n ξ/(ξ² + ω²) with ξ = 0.8, n = 0.25.
        let p = params(1.0, 0.1, 0.0, 0.0, 0.2, 20);
        let sol = solve_steady(&p, true).unwrap();
        let grid = FrequencyGrid::uniform(-4.0, 4.0, 81).unwrap();
        let s = regression_spectrum(&sol.liouvillian, &sol.rho, &sol.ops.a.adjoint(), &sol.ops.a, &grid).unwrap();
        for (w, v) in grid.offsets().iter().zip(&s) {
            let exact = 2.0 / std::f64::consts::PI * 0.25 * 0.8 / (0.64 + w * w);
            assert!((v - exact).abs() < 1e-10, "ω = {w}: {v} vs {exact}");
        }
    }

    #[test]
    fn resonant_spectrum_is_even() {
        let p = params(3.0, 1.0, 2.0, 0.0, 0.5, 5);
        let sol = solve_steady(&p, true).unwrap();
        let grid = FrequencyGrid::uniform(-10.0, 10.0, 201).unwrap();
        let s = regression_spectrum(&sol.liouvillian, &sol.rho, &sol.ops.a.adjoint(), &sol.ops.a, &grid).unwrap();
        for k in 0..s.len() {
            assert!((s[k] - s[s.len() - 1 - k]).abs() <= 1e-8);
            assert!(s[k] >= -1e-12);
        }
    }

    #[test]
    fn spectrum_at_zero_offset_is_regular_with_zero_mode() {
        // ⟨σ†σ⟩-type source lies in the sector of the steady state itself.
        let p = params(2.0, 1.0, 1.0, 0.0, 0.4, 4);
        let sol = solve_steady(&p, true).unwrap();
        let n = sol.ops.number();
        let grid = FrequencyGrid::uniform(-1.0, 1.0, 3).unwrap();
        let s = regression_spectrum(&sol.liouvillian, &sol.rho, &n, &n, &grid).unwrap();
        assert!(s.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn pointwise_evaluation_is_grid_independent() {
        let p = params(4.0, 1.0, 2.0, 3.0, 0.5, 4);
        let sol = solve_steady(&p, true).unwrap();
        let coarse = FrequencyGrid::uniform(-8.0, 8.0, 17).unwrap();
        let fine = FrequencyGrid::uniform(-8.0, 8.0, 33).unwrap();
        let a = sol.ops.a.clone();
        let sc = regression_spectrum(&sol.liouvillian, &sol.rho, &a.adjoint(), &a, &coarse).unwrap();
        let sf = regression_spectrum(&sol.liouvillian, &sol.rho, &a.adjoint(), &a, &fine).unwrap();
        for k in 0..sc.len() {
            assert!((sc[k] - sf[2 * k]).abs() <= 1e-14 * sc[k].abs().max(1e-300) + 1e-16);
        }
    }

    #[test]
    fn sum_rule_twice_the_population() {
        let p = params(1.0, 0.1, 0.3, 0.0, 0.2, 12);
        let sol = solve_steady(&p, true).unwrap();
        let n = expectation(&sol.rho, &sol.ops.number()).re;
        let grid = FrequencyGrid::uniform(-41.0, 41.0, 8201).unwrap();
        let s = regression_spectrum(&sol.liouvillian, &sol.rho, &sol.ops.a.adjoint(), &sol.ops.a, &grid).unwrap();
        let ratio = grid.trapezoid(&s) / n;
        assert!((1.9..=2.1).contains(&ratio), "{ratio}");
    }

    #[test]
    fn normalizations() {
        let p = params(2.0, 1.0, 1.0, 0.0, 0.3, 5);
        let grid = FrequencyGrid::uniform(-12.0, 12.0, 401).unwrap();
        let s = ipm_transmission(&p, &grid, Normalization::UnitMax).unwrap();
        assert_eq!(s.max_value(), 1.0);
        assert_eq!(s.method, Method::Ipm);
        assert_eq!(s.channel, Channel::Axis);
        let s = ipm_transmission(&p, &grid, Normalization::UnitArea).unwrap();
        assert!((s.integral() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn ipm_requires_positive_pump_below_decay() {
        let grid = FrequencyGrid::uniform(-1.0, 1.0, 5).unwrap();
        assert!(ipm_transmission(&params(1.0, 1.0, 0.5, 0.0, 0.0, 3), &grid, Normalization::Raw).is_err());
        assert!(matches!(
            ipm_transmission(&params(1.0, 1.0, 0.5, 0.0, 1.5, 3), &grid, Normalization::Raw),
            Err(Error::PumpExceedsDecay { .. })
        ));
    }

    #[test]
    fn decoupled_dot_never_emits_from_cavity_photon() {
        let p = params(2.0, 1.0, 0.0, 0.0, 0.0, 3);
        let grid = FrequencyGrid::tangent(0.0, 2.0, 2001).unwrap();
        let (axis, side) = channel_spectra(&p, &grid, ChannelMode::InitialExcitation(Excitation::Photon)).unwrap();
        assert!(side.values.iter().all(|&v| v == 0.0));
        assert!((axis.integral() - 1.0).abs() < 0.01);
    }

    #[test]
    fn pumped_channels_are_nonnegative() {
        let p = params(5.0, 1.0, 2.5, 1.0, 1.0, 5);
        let grid = FrequencyGrid::default_for(&p);
        let (axis, side) = channel_spectra(&p, &grid, ChannelMode::PumpedSteady).unwrap();
        assert!(axis.values.iter().chain(&side.values).all(|&v| v >= 0.0));
        assert!(axis.integral() > 0.0 && side.integral() > 0.0);
        assert!(channel_spectra(&p.with_pump(0.0), &grid, ChannelMode::PumpedSteady).is_err());
        assert!(channel_spectra(&p, &grid, ChannelMode::InitialExcitation(Excitation::Dot)).is_err());
    }

    #[test]
    fn unpumped_liouvillian_channels_conserve_excitation() {
        let p = params(10.0, 1.0, 5.0, 0.0, 0.0, 2);
        let ops = build_operators(&p).unwrap();
        assert!(build_liouvillian(&ops, &p, false).unwrap().trace_defect() < 1e-10);
        let grid = FrequencyGrid::tangent(0.0, 10.0, 3001).unwrap();
        let (axis, side) = channel_spectra(&p, &grid, ChannelMode::InitialExcitation(Excitation::Dot)).unwrap();
        assert!((axis.integral() + side.integral() - 1.0).abs() < 0.01);
    }

    #[test]
    fn spectrum_validation() {
        let grid = FrequencyGrid::uniform(-1.0, 1.0, 3).unwrap();
        let p = SystemParams::default();
        let s = Spectrum::new(grid.clone(), vec![-1e-14, 1.0, 0.5], Method::Iof, Channel::ThroughPort, Normalization::Raw, p).unwrap();
        assert_eq!(s.values[0], 0.0);
        assert!(Spectrum::new(grid.clone(), vec![-0.1, 1.0, 0.5], Method::Iof, Channel::ThroughPort, Normalization::Raw, p).is_err());
        assert!(Spectrum::new(grid, vec![1.0, 0.5], Method::Iof, Channel::ThroughPort, Normalization::Raw, p).is_err());
    }

    #[test]
    fn value_at_interpolates() {
        let grid = FrequencyGrid::uniform(0.0, 2.0, 3).unwrap();
        let s = Spectrum::new(grid, vec![0.0, 1.0, 3.0], Method::Iof, Channel::DropPort, Normalization::Raw, SystemParams::default()).unwrap();
        assert_eq!(s.value_at(0.5), 0.5);
        assert_eq!(s.value_at(1.5), 2.0);
        assert_eq!(s.value_at(-1.0), 0.0);
    }
}
