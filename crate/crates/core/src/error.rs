use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("negative radicand in {what}: {value}")]
    NegativeRadicand { what: &'static str, value: f64 },

    #[error("no admissible eps' exists: {0}")]
    NoFeasibleEpsPrime(String),

    #[error("unsupported dimension n = {0} (wave-speed bounds exist for n = 1, 2, 3)")]
    UnsupportedDimension(usize),

    #[error("time must be positive, got {0}")]
    NonpositiveTime(f64),

    #[error("operation not supported for profile family {0}")]
    UnsupportedFamily(&'static str),

    #[error("invalid profile constants: {0}")]
    InvalidProfile(String),

    #[error("t1 = {t1} must exceed the switch time T2 = {t2_switch}")]
    OutOfRegime { t1: f64, t2_switch: f64 },

    #[error("degenerate time interval [{t1}, {t2}] for distance {d}")]
    DegenerateInterval { t1: f64, t2: f64, d: f64 },

    #[error("field has a nonpositive value {value} at flat index {index}")]
    NonpositiveField { index: usize, value: f64 },

    #[error("infeasible parameters: {0}")]
    InfeasibleParams(String),

    #[error("need a sample with neighbours on both sides at t = {0}")]
    InsufficientSnapshots(f64),

    #[error("radius {rho} outside [0, {r})")]
    RadiusOutOfRange { rho: f64, r: f64 },

    #[error("solution left the invariant range at t = {t}: value {value} at flat index {index}")]
    StabilityViolation { t: f64, index: usize, value: f64 },

    #[error("value outside (0, 1): {0}")]
    RangeViolation(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("ODE integration failed at z = {z}: {reason}")]
    IntegrationFailure { z: f64, reason: String },

    #[error("bisection bracket [{lo}, {hi}] does not straddle the classification change")]
    BracketFailure { lo: f64, hi: f64 },

    #[error("no snapshot at t = {0}")]
    MissingSnapshot(f64),

    #[error("pair separation {gap} is below the resolvable minimum {min}")]
    PairTooClose { gap: f64, min: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
