//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown point id `{0}`")]
    UnknownPoint(String),

    #[error("duplicate point id `{0}`")]
    DuplicateId(String),

    #[error("truncation radius must be finite and nonnegative, got {0}")]
    InvalidTruncationRadius(f64),

    #[error("basepoint `{0}` not present in input")]
    MissingBasepoint(String),

    #[error("negative edge weight {weight} on edge {from} -- {to}")]
    NegativeEdgeWeight {
        from: String,
        to: String,
        weight: f64,
    },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("empty point set: {0}")]
    EmptySubset(String),

    #[error("map samples disagree on {0}")]
    MismatchedInstances(String),

    #[error("invalid scale ladder: {0}")]
    InvalidLadder(String),

    #[error("ladder too small: need at least {need} levels in each direction, have {have_r} cut-offs and {have_scales} scales")]
    LadderTooSmall {
        need: usize,
        have_r: usize,
        have_scales: usize,
    },

    #[error("coordinate dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("point does not lie on any piece of the space: {0}")]
    PointNotOnSpace(String),

    #[error("invalid chain schema: {0}")]
    InvalidSchema(String),

    #[error("invalid gap certificate: {0}")]
    InvalidCertificate(String),

    #[error("conflicting certificates: {0}")]
    CertificateConflict(String),

    #[error("invalid recipe: {0}")]
    InvalidRecipe(String),

    #[error("invalid map sample: {0}")]
    InvalidMap(String),

    #[error("map fails the coarse-map hypotheses at ladder scales: {0}")]
    MapNotCoarse(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("refusing to overwrite existing file {0} (pass overwrite to replace)")]
    WouldOverwrite(String),

    #[error("non-finite coordinate in input: {0}")]
    NonFiniteCoordinate(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
