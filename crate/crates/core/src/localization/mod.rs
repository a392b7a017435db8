//! Constrained nonlinear least-squares pose estimation.
//!
//! The estimator fits the six pose unknowns to a frame of array readings by
//! minimizing the summed squared flux error over all sensors and axes. The
//! unit-orientation constraint is enforced exactly by a spherical-angle
//! parameterization (five free parameters); the minimization is damped least
//! squares run from several starting points, keeping the lowest-cost result.
//!
//! Everything here is pure and deterministic: the same readings, array, and
//! configuration always produce the same report.

mod config;
mod init;
mod lm;
mod objective;
mod params;

pub use config::{InitStrategy, SolverConfig, WorkspaceBounds};
pub use init::{initial_guess, on_axis_distance};
pub use lm::{lm_solve, EstimateReport, TerminationReason};
pub use objective::{objective, objective_components, residuals, residuals_and_jacobian};
pub use params::{Anchor, PoseParams, REANCHOR_SIN_THETA};

use crate::error::{Error, Result};
use crate::field_model::MagnetSpec;
use crate::measurement::ReadingSet;
use crate::scalar::Real;
use crate::sensor_array::SensorArray;

/// Run the solver from every configured starting point and keep the report
/// with the lowest final cost (ties broken by start order).
pub fn localize<T: Real>(
    readings: &ReadingSet<T>,
    array: &SensorArray<T>,
    spec: &MagnetSpec<T>,
    config: &SolverConfig<T>,
) -> Result<EstimateReport<T>> {
    config.validate()?;
    let starts = initial_guess(readings, array, spec, config.init_strategy, config)?;
    localize_from(&starts, readings, array, spec, config)
}

/// Best-of-N solve from explicit starting points.
pub fn localize_from<T: Real>(
    starts: &[PoseParams<T>],
    readings: &ReadingSet<T>,
    array: &SensorArray<T>,
    spec: &MagnetSpec<T>,
    config: &SolverConfig<T>,
) -> Result<EstimateReport<T>> {
    let mut best: Option<EstimateReport<T>> = None;
    let mut first_error: Option<Error> = None;
    for start in starts {
        match lm_solve(*start, readings, array, spec, config) {
            Ok(report) => {
                let better = best
                    .as_ref()
                    .is_none_or(|b| report.final_cost < b.final_cost);
                if better {
                    best = Some(report);
                }
            }
            Err(err) => {
                if first_error.is_none() {
                    first_error = Some(err);
                }
            }
        }
    }
    match best {
        Some(report) => Ok(report),
        None => Err(first_error.unwrap_or(Error::NoUsableStart)),
    }
}
