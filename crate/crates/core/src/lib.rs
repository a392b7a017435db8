//! Permanent-magnet localization from 3-axis magnetometer array readings.
//!
//! The crate covers the full desk-scale pipeline:
//!
//! - [`field_model`] — magnetic dipole forward model and its analytic
//!   Jacobian with respect to the magnet pose;
//! - [`sensor_array`] — planar grid layouts and the plain-text array file
//!   format;
//! - [`measurement`] — synthetic readings (noise, quantization, saturation),
//!   warmup trimming, moving-average filtering, and the stream CSV format;
//! - [`localization`] — the constrained Levenberg-Marquardt estimator with
//!   multistart initialization;
//! - [`metrics`] — position / orientation error metrics and aggregates.
//!
//! Everything is SI internally (meters, tesla, A/m); millimeter and
//! microtesla conversions belong at the presentation boundary. The numeric
//! code is generic over the [`Real`] scalar; the `F64` aliases below cover
//! the common case.

pub mod error;
pub mod field_model;
pub mod localization;
pub mod measurement;
pub mod metrics;
pub mod scalar;
pub mod sensor_array;
pub mod vec3;

pub use error::{Error, Result};
pub use scalar::Real;
pub use vec3::{Mat3, Vec3};

/// Concrete double-precision aliases for the main domain types.
pub type Vec3F64 = Vec3<f64>;
pub type MagnetSpecF64 = field_model::MagnetSpec<f64>;
pub type MagnetPoseF64 = field_model::MagnetPose<f64>;
pub type FluxVectorF64 = field_model::FluxVector<f64>;
pub type SensorArrayF64 = sensor_array::SensorArray<f64>;
pub type SensorModelF64 = measurement::SensorModel<f64>;
pub type ReadingSetF64 = measurement::ReadingSet<f64>;
pub type ReadingStreamF64 = measurement::ReadingStream<f64>;
pub type SolverConfigF64 = localization::SolverConfig<f64>;
pub type EstimateReportF64 = localization::EstimateReport<f64>;
pub type PoseErrorF64 = metrics::PoseError<f64>;
