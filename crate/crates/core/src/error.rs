//! Crate-wide error type.

use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid magnet spec: {0}")]
    InvalidMagnetSpec(String),

    #[error("orientation must be unit length (|H| - 1 = {deviation:e})")]
    NonUnitOrientation { deviation: f64 },

    #[error("orientation vector has zero length")]
    ZeroOrientation,

    #[error("sensor coincides with the magnet (separation {distance_m:e} m < {epsilon_m:e} m)")]
    SensorCoincident { distance_m: f64, epsilon_m: f64 },

    #[error("sensor array must contain at least one sensor")]
    EmptyArray,

    #[error("sensor {index} has a non-finite position")]
    NonFiniteSensor { index: usize },

    #[error("sensors {first} and {second} are closer than {min_separation_m:e} m")]
    SensorsTooClose {
        first: usize,
        second: usize,
        min_separation_m: f64,
    },

    #[error("invalid grid layout: {0}")]
    InvalidGridLayout(String),

    #[error("{family} layout does not allow count {count} (allowed: {allowed}); enable permissive layouts to override")]
    UnsupportedLayoutCount {
        family: &'static str,
        count: usize,
        allowed: &'static str,
    },

    #[error("{path}: {source}")]
    FileIo { path: PathBuf, source: io::Error },

    #[error("{path} line {line}: {message}")]
    FileParse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: file contains no data rows")]
    EmptyFile { path: PathBuf },

    #[error("invalid sensor model: {0}")]
    InvalidSensorModel(String),

    #[error("filter window must be at least 1")]
    ZeroWindow,

    #[error("cannot trim {cycles} warmup frames from a stream of {frames} frames")]
    TrimExhaustsStream { cycles: usize, frames: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("reading count {readings} does not match sensor count {sensors}")]
    ReadingCountMismatch { readings: usize, sensors: usize },

    #[error("every sensor reading is saturated; cannot form an initial guess")]
    AllSaturated,

    #[error("invalid solver config: {0}")]
    InvalidSolverConfig(String),

    #[error("no initial guesses could be evaluated")]
    NoUsableStart,

    #[error("cannot aggregate an empty list of errors")]
    EmptyAggregate,
}
