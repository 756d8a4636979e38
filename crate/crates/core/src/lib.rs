//! Transmission spectra of a cavity coupled to a quantum dot and a waveguide.
//!
//! Two routes are provided. The master-equation route models the probe as an
//! incoherent cavity pump, solves the Lindblad steady state on a truncated
//! Fock space and reads transmission from the cavity emission spectrum. The
//! input-output route evaluates the linear transfer function of the through
//! and drop ports. [`features`] extracts the polariton and dipole-induced
//! transparency (DIT) features of either and compares them.
//!
//! All rates and frequencies are in units of the dot decay rate γ.

pub mod cli;
pub mod error;
pub mod features;
pub mod iof;
pub mod liouville;
pub mod moments;
pub mod numerics;
pub mod operators;
pub mod spectra;

pub use error::{Error, Result};
pub use features::{
    compare_methods, dit_metrics, extract_features, fit_pump_rate, predicted_linewidths, strong_coupling_check,
    ComparisonReport, DitMetrics, FeatureKind, PumpFit, SpectralFeature,
};
pub use iof::{iof_spectrum, transmission_amplitude, Port};
pub use liouville::{build_liouvillian, expectation, steady_state, DensityMatrix, Liouvillian};
pub use moments::{cavity_population_closed_form, moment_steady_state, MomentSet};
pub use numerics::ComplexMatrix;
pub use operators::{build_operators, OperatorSet, SystemParams};
pub use spectra::{
    channel_spectra, ipm_transmission, regression_spectrum, Channel, ChannelMode, FrequencyGrid, Method,
    Normalization, Spectrum,
};
