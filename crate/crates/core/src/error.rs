use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("site {site} out of range for {n_sites} sites")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("state is not normalized (norm^2 = {0})")]
    NotNormalized(f64),

    #[error("operator {0} is not Hermitian")]
    NotHermitian(String),

    #[error("observables {0} and {1} are not Hilbert-Schmidt orthogonal")]
    NotOrthogonal(usize, usize),

    #[error("observable {index} has Hilbert-Schmidt norm {norm}, expected {expected}")]
    UnequalNorms { index: usize, norm: f64, expected: f64 },

    #[error("observable set has no Casimir scalar attached")]
    MissingCasimir,

    #[error("invalid level pair ({0}, {1})")]
    InvalidLevelPair(usize, usize),

    #[error("local operator on site {site} is singular (|det| = {det})")]
    Singular { site: usize, det: f64 },

    #[error("degenerate range: {0}")]
    Degenerate(String),

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("Fock cutoff overflow: amplitude {amplitude} at n = {cutoff}")]
    CutoffOverflow { cutoff: usize, amplitude: f64 },

    #[error("trajectory has no Stokes jump")]
    NoStokesJump,

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
