use thiserror::Error;

/// Errors raised by the numerical pipeline.
///
/// Every variant has a stable short name (see [`Error::name`]) that the batch
/// driver writes into summary cells when a sweep point fails.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix is singular: pivot {pivot:e} below threshold {threshold:e}")]
    SingularMatrix { pivot: f64, threshold: f64 },

    #[error("steady state is not unique (trace-constrained generator is singular)")]
    DegenerateSteadyState,

    #[error("pump rate {pump} must be below the cavity decay rate {kappa}")]
    PumpExceedsDecay { pump: f64, kappa: f64 },

    #[error("steady state has eigenvalue {min_eigenvalue:e} below the positivity floor")]
    PositivityViolation { min_eigenvalue: f64 },

    #[error("Fock truncation not converged at n_max = {n_max} (top-level population {top_population:e})")]
    TruncationNotConverged { n_max: usize, top_population: f64 },

    #[error("shifted resolvent is singular at offset {omega}")]
    ResolventSingular { omega: f64 },

    #[error("spectrum has no polariton/DIT/polariton structure: {0}")]
    NoDitStructure(String),

    #[error("linewidth prediction requires nonzero detuning")]
    ZeroDetuning,

    #[error("spectra are sampled on different frequency grids")]
    GridMismatch,

    #[error("spectra carry different normalizations ({0} vs {1})")]
    NormalizationMismatch(String, String),

    #[error("moment equations are singular")]
    SingularMomentSystem,

    #[error("invalid parameter {field}: {reason}")]
    InvalidParams { field: &'static str, reason: String },

    #[error("invalid frequency grid: {0}")]
    InvalidGrid(String),
}

impl Error {
    /// Short identifier used in CSV cells and JSON reports.
    pub fn name(&self) -> &'static str {
        match self {
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::NonFinite => "NonFinite",
            Error::SingularMatrix { .. } => "SingularMatrix",
            Error::DegenerateSteadyState => "DegenerateSteadyState",
            Error::PumpExceedsDecay { .. } => "PumpExceedsDecay",
            Error::PositivityViolation { .. } => "PositivityViolation",
            Error::TruncationNotConverged { .. } => "TruncationNotConverged",
            Error::ResolventSingular { .. } => "ResolventSingular",
            Error::NoDitStructure(_) => "NoDITStructure",
            Error::ZeroDetuning => "ZeroDetuning",
            Error::GridMismatch => "GridMismatch",
            Error::NormalizationMismatch(..) => "NormalizationMismatch",
            Error::SingularMomentSystem => "SingularMomentSystem",
            Error::InvalidParams { .. } => "InvalidParams",
            Error::InvalidGrid(_) => "InvalidGrid",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
