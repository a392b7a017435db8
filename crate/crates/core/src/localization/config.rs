//! Solver configuration.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::sensor_array::SensorArray;
use crate::vec3::Vec3;

/// How initial guesses are produced; see
/// [`initial_guess`](super::initial_guess).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitStrategy {
    /// Magnitude-weighted centroid lifted by a height heuristic, fanned out
    /// across orientation seeds.
    Centroid,
    /// Coarse position grid over the workspace crossed with axis directions,
    /// keeping the lowest-objective candidates.
    Grid,
}

/// Axis-aligned box the magnet is assumed to live in.
///
/// Used by the grid initialization strategy. The z interval is treated as
/// half-open above the sensing plane: grid heights are placed strictly above
/// `min.z`, up to and including `max.z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkspaceBounds<T> {
    pub min: Vec3<T>,
    pub max: Vec3<T>,
}

impl<T: Real> WorkspaceBounds<T> {
    /// Default workspace: the array bounding box expanded 250 mm laterally,
    /// with heights up to 250 mm above the topmost sensor.
    pub fn from_array(array: &SensorArray<T>) -> Self {
        let (min, max) = array.bounding_box();
        let lateral = T::lit(0.25);
        let vertical = T::lit(0.25);
        Self {
            min: Vec3::new(min.x - lateral, min.y - lateral, max.z),
            max: Vec3::new(max.x + lateral, max.y + lateral, max.z + vertical),
        }
    }
}

/// Levenberg-Marquardt and multistart settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig<T> {
    /// Candidate steps (accepted or rejected) before giving up.
    pub max_iterations: usize,
    /// Initial damping parameter λ.
    pub initial_damping: T,
    /// λ growth factor on a rejected step (> 1).
    pub damping_up: T,
    /// λ shrink factor on an accepted step (in (0, 1)).
    pub damping_down: T,
    /// Convergence when the gradient infinity-norm falls below this, tesla²
    /// scale.
    pub gradient_tol: T,
    /// Convergence when the step norm falls below
    /// `step_tol * (1 + |params|)`.
    pub step_tol: T,
    /// Convergence when an accepted step's relative cost decrease falls
    /// below this.
    pub cost_tol: T,
    /// Number of starting points the multistart keeps.
    pub multistart_count: usize,
    /// How starting points are generated.
    pub init_strategy: InitStrategy,
    /// Grid-initialization workspace; derived from the array when `None`.
    pub workspace: Option<WorkspaceBounds<T>>,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            initial_damping: T::lit(1e-3),
            damping_up: T::lit(10.0),
            damping_down: T::lit(0.1),
            gradient_tol: T::lit(1e-18),
            step_tol: T::lit(1e-10),
            cost_tol: T::lit(1e-12),
            multistart_count: 8,
            init_strategy: InitStrategy::Grid,
            workspace: None,
        }
    }
}

impl<T: Real> SolverConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidSolverConfig(
                "max_iterations must be at least 1".to_string(),
            ));
        }
        if self.multistart_count == 0 {
            return Err(Error::InvalidSolverConfig(
                "multistart_count must be at least 1".to_string(),
            ));
        }
        for (name, value) in [
            ("initial_damping", self.initial_damping),
            ("gradient_tol", self.gradient_tol),
            ("step_tol", self.step_tol),
            ("cost_tol", self.cost_tol),
        ] {
            if !(value.is_finite() && value > T::zero()) {
                return Err(Error::InvalidSolverConfig(format!(
                    "{name} must be positive, got {value}"
                )));
            }
        }
        let up_ok = self.damping_up > T::one();
        if !up_ok {
            return Err(Error::InvalidSolverConfig(format!(
                "damping_up must exceed 1, got {}",
                self.damping_up
            )));
        }
        let down_ok = self.damping_down > T::zero() && self.damping_down < T::one();
        if !down_ok {
            return Err(Error::InvalidSolverConfig(format!(
                "damping_down must lie in (0, 1), got {}",
                self.damping_down
            )));
        }
        if let Some(ws) = &self.workspace {
            if !(ws.min.is_finite()
                && ws.max.is_finite()
                && ws.max.x > ws.min.x
                && ws.max.y > ws.min.y
                && ws.max.z > ws.min.z)
            {
                return Err(Error::InvalidSolverConfig(
                    "workspace bounds must be finite with max > min".to_string(),
                ));
            }
        }
        Ok(())
    }
}
