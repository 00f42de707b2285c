use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix norm {0} exceeds 1; block-encoding requires ||A|| <= 1")]
    NormTooLarge(f64),

    #[error("quadrature size N_q = {nq} is smaller than degree N_c = {nc}")]
    QuadratureTooSmall { nq: usize, nc: usize },

    #[error("non-finite sample f({s}) = {value}")]
    NonFiniteSample { s: f64, value: f64 },

    #[error("odd series has even coefficient c_{index} = {value:e} above tolerance")]
    ParityViolation { index: usize, value: f64 },

    #[error("number of angles {0} is odd; an odd target needs an even count")]
    OddAngleCount(usize),

    #[error("angle sequence is not inversion-symmetric at index {0}")]
    NotSymmetric(usize),

    #[error("|s| = {0} lies outside [-1, 1]")]
    OutOfDomain(f64),

    #[error("required number of angles {required} exceeds the cap {cap}")]
    DegreeCap { required: usize, cap: usize },

    #[error("least-squares design matrix is rank deficient ({0})")]
    RankDeficient(String),

    #[error("theta sign pattern broken at indices {0} and {1}")]
    SignPattern(usize, usize),

    #[error("angle set with N_a = {0} is too short for envelope estimation (need N_a >= 8)")]
    TooFewAngles(usize),

    #[error("reference bank: {0}")]
    Bank(String),

    #[error("amplitude model gives non-positive theta_max = {value:e} at kappa = {kappa}")]
    NonPositiveAmplitude { kappa: f64, value: f64 },

    #[error("kappa_qsvt = {kappa} is below the minimum valid value {required} for this system")]
    KappaTooSmall { kappa: f64, required: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("unsupported schema version {found} (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
