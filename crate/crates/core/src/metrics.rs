//! Error metrics between an estimated and a true magnet pose.
//!
//! Three metrics are reported: the Euclidean position error, the Euclidean
//! distance between the two unit orientation vectors, and the folded angle
//! between the orientation axes (insensitive to the sign of either vector,
//! range 0..pi/2).

use crate::error::{Error, Result};
use crate::field_model::MagnetPose;
use crate::scalar::Real;
use crate::vec3::Vec3;

/// Tolerance on |orientation| - 1 accepted by [`orientation_error`].
pub const UNIT_INPUT_TOL: f64 = 1e-6;

/// The three pose error metrics for one trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseError<T> {
    /// Euclidean distance between positions, meters.
    pub position_error: T,
    /// Euclidean distance between unit orientation vectors, dimensionless,
    /// range 0..2.
    pub orientation_error: T,
    /// Folded angle between orientation axes, radians, range 0..pi/2.
    pub orientation_angle: T,
}

/// Euclidean distance between the two pose positions, meters.
pub fn position_error<T: Real>(calc: &MagnetPose<T>, truth: &MagnetPose<T>) -> T {
    (calc.position() - truth.position()).norm()
}

/// Euclidean distance between two unit orientation vectors.
///
/// Rejects inputs whose norm deviates from 1 by more than [`UNIT_INPUT_TOL`].
pub fn orientation_error<T: Real>(calc: Vec3<T>, truth: Vec3<T>) -> Result<T> {
    for v in [calc, truth] {
        let deviation = (v.norm() - T::one()).abs();
        if !v.is_finite() || deviation > T::lit(UNIT_INPUT_TOL) {
            return Err(Error::NonUnitOrientation {
                deviation: deviation.as_f64(),
            });
        }
    }
    Ok((calc - truth).norm())
}

/// Folded angle between two orientation axes, radians.
///
/// `arccos |calc . truth| / (|calc| |truth|)`; antipodal vectors fold to 0.
pub fn orientation_angle<T: Real>(calc: Vec3<T>, truth: Vec3<T>) -> Result<T> {
    let nc = calc.norm();
    let nt = truth.norm();
    let valid = nc > T::zero() && nt > T::zero() && calc.is_finite() && truth.is_finite();
    if !valid {
        return Err(Error::ZeroOrientation);
    }
    let cosine = (calc.dot(truth) / (nc * nt)).abs().min(T::one());
    Ok(cosine.acos())
}

/// All three metrics for one estimated pose against the truth.
pub fn pose_error<T: Real>(calc: &MagnetPose<T>, truth: &MagnetPose<T>) -> Result<PoseError<T>> {
    Ok(PoseError {
        position_error: position_error(calc, truth),
        orientation_error: orientation_error(calc.orientation(), truth.orientation())?,
        orientation_angle: orientation_angle(calc.orientation(), truth.orientation())?,
    })
}

/// Mean / max / min of one metric over a set of trials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregate<T> {
    pub mean: T,
    pub max: T,
    pub min: T,
}

/// Per-metric aggregates over a set of trials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseErrorAggregate<T> {
    pub position_error: Aggregate<T>,
    pub orientation_error: Aggregate<T>,
    pub orientation_angle: Aggregate<T>,
}

fn aggregate_one<T: Real>(values: impl Iterator<Item = T> + Clone, n: T) -> Aggregate<T> {
    let mean = values.clone().fold(T::zero(), |acc, v| acc + v) / n;
    let max = values
        .clone()
        .fold(T::neg_infinity(), |acc, v| acc.max(v));
    let min = values.fold(T::infinity(), |acc, v| acc.min(v));
    Aggregate { mean, max, min }
}

/// Arithmetic mean, maximum, and minimum of each metric.
pub fn aggregate<T: Real>(errors: &[PoseError<T>]) -> Result<PoseErrorAggregate<T>> {
    if errors.is_empty() {
        return Err(Error::EmptyAggregate);
    }
    let n = T::from_usize(errors.len()).unwrap();
    Ok(PoseErrorAggregate {
        position_error: aggregate_one(errors.iter().map(|e| e.position_error), n),
        orientation_error: aggregate_one(errors.iter().map(|e| e.orientation_error), n),
        orientation_angle: aggregate_one(errors.iter().map(|e| e.orientation_angle), n),
    })
}
