use thiserror::Error;

use crate::validity::ValidityReport;

/// Errors raised by constructors, evaluators and samplers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("dimension must be at least {min}, got {d}")]
    DimensionTooSmall { d: usize, min: usize },

    #[error("g_1 is not the identity: |g_1({u}) - {u}| = {deviation:e}")]
    FirstFactorNotIdentity { u: f64, deviation: f64 },

    #[error("g_{k}(1) = {value}, expected 1")]
    EndpointNotOne { k: usize, value: f64 },

    #[error("argument {value} at position {index} lies outside [0, 1]")]
    OutOfUnitInterval { index: usize, value: f64 },

    #[error("g_{k} vanishes at u = {u}; negative powers are undefined")]
    NotPositive { k: usize, u: f64 },

    #[error("normalization violated: max |prod H_m^binom(d-1,m-1)(u) - u| = {max_deviation:e} at u = {u}")]
    Normalization { max_deviation: f64, u: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index out of range: {0}")]
    Index(String),

    #[error("sequence is not {d}-monotone: alternating sum for (k = {k}, j = {j}) is {value}")]
    NotDMonotone { d: usize, k: usize, j: usize, value: f64 },

    #[error("copula failed validity check ({} witnesses)", .0.witnesses.len())]
    Invalid(Box<ValidityReport>),

    #[error("shock sampler supports d <= {cap}, got {d}; use the frailty route")]
    DimensionOverCap { d: usize, cap: usize },

    #[error("path did not reach level {target} after {extensions} horizon extensions")]
    HorizonExhausted { target: f64, extensions: usize },

    #[error("level {level} exceeds the path's terminal level {terminal}")]
    LevelAboveTerminal { level: f64, terminal: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
