use thiserror::Error;

/// Errors raised by the achievability library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid plant parameters: {0}")]
    InvalidParams(String),

    #[error("invalid grid profile: {0}")]
    InvalidProfile(String),

    #[error("degenerate grid voltage {0} V: cannot invert the alpha-beta map")]
    DegenerateGrid(f64),

    #[error("matrix is not symmetric (asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("gain does not stabilize the closed loop (eigenvalues {0})")]
    NotStabilizing(String),

    #[error("multiplier search inconclusive: enlarge lambda_max (currently {0})")]
    Inconclusive(f64),

    #[error("invalid sampling configuration: {0}")]
    InvalidSampling(String),

    #[error("setpoint acceptance rate {accepted}/{drawn} is below 1%: check p/q/pf ranges")]
    LowAcceptance { accepted: usize, drawn: usize },

    #[error("no stabilizing gain among {0} sampled candidates")]
    NoStabilizingGain(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
