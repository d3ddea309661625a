use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("domain mismatch: [{a0}, {b0}] vs [{a1}, {b1}]")]
    DomainMismatch { a0: f64, b0: f64, a1: f64, b1: f64 },

    #[error("site {x} outside the interior of [-{l}, {l}]")]
    SiteOutOfRange { x: i64, l: usize },

    #[error("invalid window [{xl}, {xr}] for half-length {l}")]
    BadWindow { xl: i64, xr: i64, l: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("mismatched half-lengths in coupled runs: {0} vs {1}")]
    MismatchedLength(usize, usize),

    #[error("numerical instability: {0}")]
    Unstable(String),

    #[error("fixed-point iteration did not contract (observed factor {factor:.4})")]
    NotContracting { factor: f64 },

    #[error("insufficient sampling: {0}")]
    InsufficientSampling(String),

    #[error("config: {0}")]
    Config(String),

    #[error("parse: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
