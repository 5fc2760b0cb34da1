use thiserror::Error;

/// Failures raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// `omega_m - m * g_ck` vanished or went negative for some photon number.
    #[error("singular denominator: omega_m - {photons}*g_ck = {value} <= 0")]
    SingularDenominator { photons: usize, value: f64 },

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("invalid Hilbert space: {0}")]
    InvalidSpace(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// The last tenth of a truncated sideband sum carried too much weight.
    #[error("sideband sum not converged: tail fraction {tail_fraction:e} with {terms} terms")]
    NonConvergedSum { tail_fraction: f64, terms: usize },

    #[error("adaptive step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("steady state not reached: {0}")]
    NonConvergence(String),

    #[error("mean photon number {0:e} too small for g2")]
    ZeroPhotonNumber(f64),

    /// `1 +/- cos(theta) exp(-|beta|^2/2)` vanished for the requested branch.
    #[error("degenerate cat branch: norm^2 = {0:e}")]
    DegenerateCat(f64),

    #[error("conditional branch has vanishing probability {0:e}")]
    DegenerateBranch(f64),

    #[error("truncation loss {weight:e} exceeds {limit:e}")]
    TruncationLoss { weight: f64, limit: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
