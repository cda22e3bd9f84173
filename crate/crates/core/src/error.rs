//! Crate-wide error type.

use thiserror::Error;

use crate::vine_structure::StructureViolation;

#[derive(Debug, Error)]
pub enum VineError {
    #[error("parameter out of domain for {family}: {detail}")]
    ParamDomain { family: &'static str, detail: String },

    #[error("tau {tau} outside attainable range [{lo}, {hi}] for {family}")]
    TauRange {
        family: &'static str,
        tau: f64,
        lo: f64,
        hi: f64,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid vine structure: {0}")]
    Structure(#[from] StructureViolation),

    #[error("edge {0} does not belong to the model structure")]
    UnknownEdge(String),

    #[error("need at least {min} observations, got {got}")]
    TooFewObservations { min: usize, got: usize },

    #[error("pair-copula fit failed for every candidate: {tried}")]
    FitFailed { tried: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, VineError>;
