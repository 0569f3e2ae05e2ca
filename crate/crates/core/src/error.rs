use thiserror::Error;

use crate::grid::Gauge;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid ring configuration: {0}")]
    InvalidRing(String),

    #[error("empty index window [{kmin}, {kmax}]")]
    EmptyWindow { kmin: i64, kmax: i64 },

    #[error("index window mismatch: [{left_min}, {left_max}] vs [{right_min}, {right_max}]")]
    WindowMismatch {
        left_min: i64,
        left_max: i64,
        right_min: i64,
        right_max: i64,
    },

    #[error("window of {len} indices is too small (need at least {min})")]
    WindowTooSmall { len: usize, min: usize },

    #[error("expected a wavefunction in the {expected} gauge, got {found}")]
    WrongGauge { expected: Gauge, found: Gauge },

    #[error("grid size mismatch: {0} vs {1}")]
    GridMismatch(usize, usize),

    #[error("invalid grid size {nx}: {reason}")]
    InvalidGrid { nx: usize, reason: &'static str },

    #[error("time {t} lies outside the schedule interval [{start}, {end}]")]
    OutsideSchedule { t: f64, start: f64, end: f64 },

    #[error("invalid flux schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("norm drifted to {norm} after {step} steps (t = {t})")]
    NormDrift { norm: f64, step: usize, t: f64 },

    #[error("linear solve failed: {0}")]
    Singular(&'static str),

    #[error("state not in a single eigenspace (best fidelity {fidelity})")]
    NotAnEigenstate { fidelity: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
