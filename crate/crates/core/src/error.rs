use thiserror::Error;

/// Failures reported by the spectral routines.
///
/// Every scalar function is total over its documented domain and reports
/// leaving it through one of these variants instead of returning NaN.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("half-integer flux (cos(A*pi) = {cos_flux:e}): the dispersion function is undefined")]
    HalfIntegerFlux { cos_flux: f64 },

    #[error("energy {energy} lies inside a spectral band (|xi| = {xi_abs})")]
    InsideBand { energy: f64, xi_abs: f64 },

    #[error("energy {energy} sits on the flat band k = {k}")]
    FlatBandPole { energy: f64, k: u64 },

    #[error("no spectral band found below cutoff {cutoff}")]
    CutoffTooSmall { cutoff: f64 },

    #[error("fit failed: {0}")]
    FitFailed(String),

    #[error("outside the representable range: {0}")]
    NumericRange(String),
}

pub type Result<T> = std::result::Result<T, Error>;
