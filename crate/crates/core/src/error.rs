use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("wave-vector ratio is irrational ({tag}); the Melnikov function has no period, use Monte Carlo estimation instead")]
    NoPeriod { tag: String },

    #[error("Melnikov function vanishes identically (no lattice drive)")]
    IdenticallyZero,

    #[error("resolution {resolution} gives {per_oscillation:.2} samples per oscillation, need at least 8")]
    ResolutionTooCoarse {
        resolution: usize,
        per_oscillation: f64,
    },

    #[error("amplitude {value} is off the homoclinic orbit (0, {peak}]")]
    OffOrbit { value: f64, peak: f64 },

    #[error("c0 = {c0} is not a zero of M (|M| = {value:e} >= {tol:e})")]
    NotAZero { c0: f64, value: f64, tol: f64 },

    #[error(
        "quadrature on [{a}, {b}] did not reach tolerance {tol:e} (estimated error {estimate:e})"
    )]
    QuadratureFailed {
        a: f64,
        b: f64,
        tol: f64,
        estimate: f64,
    },

    #[error("step size underflow at xi = {xi}")]
    StepSizeUnderflow { xi: f64 },

    #[error("integration exceeded {max_steps} steps before xi = {xi}")]
    StepBudgetExhausted { xi: f64, max_steps: usize },

    #[error("trajectory left the escape radius at xi = {xi} (stroboscopic iteration {iteration}){}", segment.map(|s| format!(" in segment `{s}`")).unwrap_or_default())]
    Unbounded {
        xi: f64,
        iteration: usize,
        segment: Option<&'static str>,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter { .. } | Error::Config(_) | Error::Io(_) => 2,
            Error::Domain(_)
            | Error::NoPeriod { .. }
            | Error::IdenticallyZero
            | Error::ResolutionTooCoarse { .. }
            | Error::OffOrbit { .. }
            | Error::NotAZero { .. } => 3,
            Error::QuadratureFailed { .. }
            | Error::StepSizeUnderflow { .. }
            | Error::StepBudgetExhausted { .. }
            | Error::Unbounded { .. } => 4,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
