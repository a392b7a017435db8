//! Starting-point generation for the multistart solver.
//!
//! The linear bootstrap used with real hardware lives in other systems; here
//! two self-contained strategies stand in for it. The centroid strategy puts
//! the position at the reading-magnitude-weighted centroid of the sensors,
//! lifted by the distance at which the strongest reading would match the
//! on-axis dipole field, and fans orientation seeds over a hemisphere. The
//! grid strategy scores a coarse position/direction lattice by the objective
//! and keeps the best candidates.

use crate::error::{Error, Result};
use crate::field_model::MagnetSpec;
use crate::measurement::ReadingSet;
use crate::scalar::Real;
use crate::sensor_array::SensorArray;
use crate::vec3::Vec3;

use super::config::{InitStrategy, SolverConfig, WorkspaceBounds};
use super::objective::objective;
use super::params::PoseParams;

/// Grid resolution per axis for the grid strategy.
const GRID_DIM: usize = 5;

/// Clamp range for the height heuristic, meters.
const HEIGHT_MIN_M: f64 = 1e-3;
const HEIGHT_MAX_M: f64 = 0.25;

/// Produce up to `config.multistart_count` starting points, best first.
pub fn initial_guess<T: Real>(
    readings: &ReadingSet<T>,
    array: &SensorArray<T>,
    spec: &MagnetSpec<T>,
    strategy: InitStrategy,
    config: &SolverConfig<T>,
) -> Result<Vec<PoseParams<T>>> {
    if readings.len() != array.len() {
        return Err(Error::ReadingCountMismatch {
            readings: readings.len(),
            sensors: array.len(),
        });
    }
    if readings.all_saturated() {
        return Err(Error::AllSaturated);
    }
    match strategy {
        InitStrategy::Centroid => centroid_guess(readings, array, spec, config),
        InitStrategy::Grid => grid_guess(readings, array, spec, config),
    }
}

/// Height at which the on-axis field `2 B_T / R³` equals `magnitude`.
pub fn on_axis_distance<T: Real>(spec: &MagnetSpec<T>, magnitude: T) -> T {
    let two = T::lit(2.0);
    (two * spec.dipole_strength() / magnitude).cbrt()
}

fn centroid_guess<T: Real>(
    readings: &ReadingSet<T>,
    array: &SensorArray<T>,
    spec: &MagnetSpec<T>,
    config: &SolverConfig<T>,
) -> Result<Vec<PoseParams<T>>> {
    let mut weight_sum = T::zero();
    let mut weighted = Vec3::zero();
    let mut max_magnitude = T::zero();
    for ((reading, &saturated), &sensor) in readings
        .readings()
        .iter()
        .zip(readings.saturated())
        .zip(array.positions())
    {
        let magnitude = reading.norm();
        weighted = weighted + sensor * magnitude;
        weight_sum += magnitude;
        if !saturated {
            max_magnitude = max_magnitude.max(magnitude);
        }
    }
    let centroid = if weight_sum > T::zero() {
        weighted / weight_sum
    } else {
        array.centroid()
    };
    // Height heuristic, clamped so zero readings still give a usable start.
    let lift = on_axis_distance(spec, max_magnitude)
        .max(T::lit(HEIGHT_MIN_M))
        .min(T::lit(HEIGHT_MAX_M));
    let position = centroid + Vec3::new(T::zero(), T::zero(), lift);

    hemisphere_directions(config.multistart_count)
        .into_iter()
        .map(|dir| PoseParams::from_position_direction(position, dir))
        .collect()
}

/// Evenly spread directions over the upper hemisphere (golden-angle spiral).
fn hemisphere_directions<T: Real>(count: usize) -> Vec<Vec3<T>> {
    let golden_angle = T::PI() * (T::lit(3.0) - T::lit(5.0).sqrt());
    (0..count)
        .map(|i| {
            let idx = T::from_usize(i).unwrap();
            let z = (idx + T::lit(0.5)) / T::from_usize(count).unwrap();
            let radius = (T::one() - z * z).max(T::zero()).sqrt();
            let azimuth = golden_angle * idx;
            Vec3::new(radius * azimuth.cos(), radius * azimuth.sin(), z)
        })
        .collect()
}

fn axis_directions<T: Real>() -> [Vec3<T>; 6] {
    let one = T::one();
    [
        Vec3::new(one, T::zero(), T::zero()),
        Vec3::new(-one, T::zero(), T::zero()),
        Vec3::new(T::zero(), one, T::zero()),
        Vec3::new(T::zero(), -one, T::zero()),
        Vec3::new(T::zero(), T::zero(), one),
        Vec3::new(T::zero(), T::zero(), -one),
    ]
}

fn grid_guess<T: Real>(
    readings: &ReadingSet<T>,
    array: &SensorArray<T>,
    spec: &MagnetSpec<T>,
    config: &SolverConfig<T>,
) -> Result<Vec<PoseParams<T>>> {
    let bounds = config
        .workspace
        .unwrap_or_else(|| WorkspaceBounds::from_array(array));
    let dim = T::from_usize(GRID_DIM).unwrap();
    let lateral = |lo: T, hi: T, i: usize| -> T {
        if GRID_DIM == 1 {
            (lo + hi) / T::lit(2.0)
        } else {
            lo + (hi - lo) * T::from_usize(i).unwrap() / (dim - T::one())
        }
    };

    let mut scored: Vec<(T, usize, PoseParams<T>)> = Vec::new();
    let mut index = 0usize;
    for ix in 0..GRID_DIM {
        let x = lateral(bounds.min.x, bounds.max.x, ix);
        for iy in 0..GRID_DIM {
            let y = lateral(bounds.min.y, bounds.max.y, iy);
            for iz in 0..GRID_DIM {
                // Heights are strictly above the workspace floor.
                let z = bounds.min.z
                    + (bounds.max.z - bounds.min.z) * T::from_usize(iz + 1).unwrap() / dim;
                let position = Vec3::new(x, y, z);
                for dir in axis_directions::<T>() {
                    let params = PoseParams::from_position_direction(position, dir)
                        .expect("axis directions are unit vectors");
                    // Grid nodes coinciding with a sensor are simply skipped.
                    if let Ok(score) = objective(&params, readings, array, spec) {
                        if score.is_finite() {
                            scored.push((score, index, params));
                        }
                    }
                    index += 1;
                }
            }
        }
    }
    if scored.is_empty() {
        return Err(Error::NoUsableStart);
    }
    scored.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.1.cmp(&b.1))
    });
    scored.truncate(config.multistart_count);
    Ok(scored.into_iter().map(|(_, _, p)| p).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_model::{flux_at, MagnetPose};
    use crate::measurement::{simulate_readings, SensorModel};
    use crate::sensor_array::{paper_layouts, LayoutFamily, PaperLayoutOptions};

    fn spec() -> MagnetSpec<f64> {
        MagnetSpec::small_cylinder(8e5).unwrap()
    }

    #[test]
    fn height_heuristic_inverts_the_on_axis_field() {
        let spec = spec();
        let height = 0.07f64;
        let magnitude = 2.0 * spec.dipole_strength() / height.powi(3);
        assert!((on_axis_distance(&spec, magnitude) - height).abs() < 1e-12);
    }

    #[test]
    fn single_sensor_under_z_magnet_recovers_height() {
        let spec = spec();
        let array = SensorArray::new(vec![Vec3::zero()], "single").unwrap();
        let height = 0.05;
        let pose =
            MagnetPose::new(Vec3::new(0.0, 0.0, height), Vec3::new(0.0, 0.0, 1.0)).unwrap();
        let flux = flux_at(&pose, &spec, Vec3::zero()).unwrap();
        let readings = ReadingSet::from_readings(vec![flux]);
        let config = SolverConfig::default();
        let starts =
            initial_guess(&readings, &array, &spec, InitStrategy::Centroid, &config).unwrap();
        assert_eq!(starts.len(), config.multistart_count);
        for start in &starts {
            assert!((start.position - Vec3::new(0.0, 0.0, height)).norm() < 1e-9);
        }
    }

    #[test]
    fn symmetric_readings_center_the_guess() {
        let spec = spec();
        let array =
            paper_layouts(LayoutFamily::FourByM, 5, PaperLayoutOptions::default()).unwrap();
        let pose = MagnetPose::new(Vec3::new(0.0, 0.0, 0.03), Vec3::new(0.0, 0.0, 1.0)).unwrap();
        let model = SensorModel::default().with_quantization(false);
        let readings = simulate_readings(&array, &pose, &spec, &model, 0).unwrap();
        let starts = initial_guess(
            &readings,
            &array,
            &spec,
            InitStrategy::Centroid,
            &SolverConfig::default(),
        )
        .unwrap();
        let p = starts[0].position;
        assert!(p.x.abs() < 1e-6);
        assert!(p.y.abs() < 1e-6);
    }

    #[test]
    fn grid_candidates_are_sorted_and_bounded() {
        let spec = spec();
        let array =
            paper_layouts(LayoutFamily::FourByM, 5, PaperLayoutOptions::default()).unwrap();
        let pose = MagnetPose::new(Vec3::new(0.01, 0.02, 0.05), Vec3::new(0.0, 0.0, 1.0)).unwrap();
        let model = SensorModel::default().with_quantization(false);
        let readings = simulate_readings(&array, &pose, &spec, &model, 0).unwrap();
        let config = SolverConfig::default();
        let starts =
            initial_guess(&readings, &array, &spec, InitStrategy::Grid, &config).unwrap();
        assert!(!starts.is_empty());
        assert!(starts.len() <= config.multistart_count);
        let scores: Vec<f64> = starts
            .iter()
            .map(|s| objective(s, &readings, &array, &spec).unwrap())
            .collect();
        for pair in scores.windows(2) {
            assert!(pair[0] <= pair[1], "grid candidates not sorted: {scores:?}");
        }
    }

    #[test]
    fn all_saturated_readings_are_rejected() {
        let spec = spec();
        let array = SensorArray::new(vec![Vec3::zero()], "single").unwrap();
        let readings = ReadingSet::new(vec![Vec3::new(0.044, 0.0, 0.0)], vec![true]).unwrap();
        let err = initial_guess(
            &readings,
            &array,
            &spec,
            InitStrategy::Centroid,
            &SolverConfig::default(),
        );
        assert!(matches!(err, Err(Error::AllSaturated)));
    }

    #[test]
    fn hemisphere_directions_are_unit_and_upper() {
        let dirs = hemisphere_directions::<f64>(8);
        assert_eq!(dirs.len(), 8);
        for d in dirs {
            assert!((d.norm() - 1.0).abs() < 1e-12);
            assert!(d.z > 0.0);
        }
    }

    #[test]
    fn zero_readings_still_produce_candidates() {
        let spec = spec();
        let array =
            paper_layouts(LayoutFamily::FourByM, 5, PaperLayoutOptions::default()).unwrap();
        let readings = ReadingSet::from_readings(vec![Vec3::zero(); array.len()]);
        for strategy in [InitStrategy::Centroid, InitStrategy::Grid] {
            let starts = initial_guess(
                &readings,
                &array,
                &spec,
                strategy,
                &SolverConfig::default(),
            )
            .unwrap();
            assert!(!starts.is_empty());
            assert!(starts.iter().all(|s| s.is_finite()));
        }
    }
}
