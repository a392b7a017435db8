//! Least-squares objective over all sensors and axes, and its stacked
//! residual / Jacobian form.
//!
//! The objective is the per-axis sum of squared differences between measured
//! and model flux, summed over the three axes. Residuals are stacked
//! sensor-major (sensor 0 x, y, z; sensor 1 x, y, z; ...) with the sign
//! convention `model - measured`; the 3N x 5 Jacobian chains the analytic
//! field derivatives through the angle parameterization.

use crate::error::{Error, Result};
use crate::field_model::{flux_at, flux_jacobian, MagnetSpec};
use crate::measurement::ReadingSet;
use crate::scalar::Real;
use crate::sensor_array::SensorArray;

use super::params::PoseParams;

fn check_counts<T: Real>(readings: &ReadingSet<T>, array: &SensorArray<T>) -> Result<()> {
    if readings.len() != array.len() {
        return Err(Error::ReadingCountMismatch {
            readings: readings.len(),
            sensors: array.len(),
        });
    }
    Ok(())
}

/// Per-axis sums of squared errors `[E_x, E_y, E_z]`, tesla².
pub fn objective_components<T: Real>(
    params: &PoseParams<T>,
    readings: &ReadingSet<T>,
    array: &SensorArray<T>,
    spec: &MagnetSpec<T>,
) -> Result<[T; 3]> {
    check_counts(readings, array)?;
    let pose = params.to_pose();
    let mut sums = [T::zero(); 3];
    for (reading, &sensor) in readings.readings().iter().zip(array.positions()) {
        let model = flux_at(&pose, spec, sensor)?;
        let d = model - *reading;
        sums[0] += d.x * d.x;
        sums[1] += d.y * d.y;
        sums[2] += d.z * d.z;
    }
    Ok(sums)
}

/// Total objective `E = E_x + E_y + E_z`, tesla².
pub fn objective<T: Real>(
    params: &PoseParams<T>,
    readings: &ReadingSet<T>,
    array: &SensorArray<T>,
    spec: &MagnetSpec<T>,
) -> Result<T> {
    let [ex, ey, ez] = objective_components(params, readings, array, spec)?;
    Ok(ex + ey + ez)
}

/// Stacked residual vector (length 3N), `model - measured`.
pub fn residuals<T: Real>(
    params: &PoseParams<T>,
    readings: &ReadingSet<T>,
    array: &SensorArray<T>,
    spec: &MagnetSpec<T>,
) -> Result<Vec<T>> {
    check_counts(readings, array)?;
    let pose = params.to_pose();
    let mut out = Vec::with_capacity(3 * array.len());
    for (reading, &sensor) in readings.readings().iter().zip(array.positions()) {
        let model = flux_at(&pose, spec, sensor)?;
        let d = model - *reading;
        out.extend_from_slice(&[d.x, d.y, d.z]);
    }
    Ok(out)
}

/// Residual vector plus its 3N x 5 Jacobian in (x, y, z, theta, phi) order.
pub fn residuals_and_jacobian<T: Real>(
    params: &PoseParams<T>,
    readings: &ReadingSet<T>,
    array: &SensorArray<T>,
    spec: &MagnetSpec<T>,
) -> Result<(Vec<T>, Vec<[T; 5]>)> {
    check_counts(readings, array)?;
    let pose = params.to_pose();
    let (d_theta, d_phi) = params.orientation_jacobian();
    let mut res = Vec::with_capacity(3 * array.len());
    let mut jac = Vec::with_capacity(3 * array.len());
    for (reading, &sensor) in readings.readings().iter().zip(array.positions()) {
        let model = flux_at(&pose, spec, sensor)?;
        let field_jac = flux_jacobian(&pose, spec, sensor)?;
        let d = model - *reading;
        for (axis, diff) in [d.x, d.y, d.z].into_iter().enumerate() {
            res.push(diff);
            let pos_row = field_jac.d_position.row(axis);
            let ori_row = field_jac.d_orientation.row(axis);
            jac.push([
                pos_row.x,
                pos_row.y,
                pos_row.z,
                ori_row.dot(d_theta),
                ori_row.dot(d_phi),
            ]);
        }
    }
    Ok((res, jac))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_model::MagnetPose;
    use crate::measurement::{simulate_readings, SensorModel};
    use crate::sensor_array::{paper_layouts, LayoutFamily, PaperLayoutOptions};
    use crate::vec3::Vec3;

    fn setup() -> (
        SensorArray<f64>,
        MagnetPose<f64>,
        MagnetSpec<f64>,
        ReadingSet<f64>,
    ) {
        let array =
            paper_layouts(LayoutFamily::FourByM, 5, PaperLayoutOptions::default()).unwrap();
        let pose = MagnetPose::new(Vec3::new(0.01, -0.02, 0.04), Vec3::new(0.6, 0.0, 0.8)).unwrap();
        let spec = MagnetSpec::small_cylinder(8e5).unwrap();
        let model = SensorModel::default().with_quantization(false);
        let readings = simulate_readings(&array, &pose, &spec, &model, 0).unwrap();
        (array, pose, spec, readings)
    }

    #[test]
    fn objective_is_zero_at_the_generating_pose() {
        let (array, pose, spec, _) = setup();
        // Generate the readings from the parameterized pose so the model fit
        // is exact, not just within the angle round-trip wobble.
        let params = PoseParams::from_pose(&pose);
        let model = SensorModel::default().with_quantization(false);
        let readings =
            simulate_readings(&array, &params.to_pose(), &spec, &model, 0).unwrap();
        assert_eq!(objective(&params, &readings, &array, &spec).unwrap(), 0.0);
    }

    #[test]
    fn objective_of_single_microtesla_residual() {
        // One sensor reading zero while the model predicts 1 uT on z.
        let array = SensorArray::new(vec![Vec3::new(0.0f64, 0.0, 0.0)], "single").unwrap();
        let spec = MagnetSpec::small_cylinder(8e5f64).unwrap();
        // Magnet on the z-axis at the distance where the on-axis field is 1 uT.
        let bt = spec.dipole_strength();
        let r = (2.0 * bt / 1e-6).cbrt();
        let pose = MagnetPose::new(Vec3::new(0.0, 0.0, -r), Vec3::new(0.0, 0.0, 1.0)).unwrap();
        let readings = ReadingSet::from_readings(vec![Vec3::zero()]);
        let params = PoseParams::from_pose(&pose);
        let e = objective(&params, &readings, &array, &spec).unwrap();
        assert!((e - 1e-12).abs() / 1e-12 < 1e-9, "E = {e:e}");
    }

    #[test]
    fn objective_equals_sum_of_components_exactly() {
        let (array, _, spec, readings) = setup();
        let probe = PoseParams::from_position_direction(
            Vec3::new(0.005, 0.005, 0.05),
            Vec3::new(1.0, 1.0, 1.0),
        )
        .unwrap();
        let [ex, ey, ez] = objective_components(&probe, &readings, &array, &spec).unwrap();
        let total = objective(&probe, &readings, &array, &spec).unwrap();
        assert_eq!(total, ex + ey + ez);
        assert!(total > 0.0);
    }

    #[test]
    fn residuals_vanish_at_perfect_fit_and_have_length_3n() {
        let (array, pose, spec, _) = setup();
        let params = PoseParams::from_pose(&pose);
        let model = SensorModel::default().with_quantization(false);
        let readings =
            simulate_readings(&array, &params.to_pose(), &spec, &model, 0).unwrap();
        let r = residuals(&params, &readings, &array, &spec).unwrap();
        assert_eq!(r.len(), 3 * array.len());
        assert!(r.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn count_mismatch_is_rejected() {
        let (array, pose, spec, _) = setup();
        let params = PoseParams::from_pose(&pose);
        let short = ReadingSet::from_readings(vec![Vec3::zero(); 3]);
        assert!(matches!(
            objective(&params, &short, &array, &spec),
            Err(Error::ReadingCountMismatch { .. })
        ));
        assert!(matches!(
            residuals_and_jacobian(&params, &short, &array, &spec),
            Err(Error::ReadingCountMismatch { .. })
        ));
    }

    #[test]
    fn jacobian_matches_central_differences_of_residuals() {
        use rand::{Rng, SeedableRng};
        let (array, _, spec, readings) = setup();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(51);
        for _ in 0..100 {
            let params = PoseParams::from_position_direction(
                Vec3::new(
                    rng.random_range(-0.05..0.05),
                    rng.random_range(-0.05..0.05),
                    rng.random_range(0.02..0.15),
                ),
                Vec3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                ),
            )
            .unwrap_or_else(|_| {
                PoseParams::from_position_direction(
                    Vec3::new(0.0, 0.0, 0.05),
                    Vec3::new(0.0, 0.0, 1.0),
                )
                .unwrap()
            });
            let (_, jac) = residuals_and_jacobian(&params, &readings, &array, &spec).unwrap();
            let mut max_abs = 0.0f64;
            let mut max_dev = 0.0f64;
            for col in 0..5 {
                let step = 1e-7 * params.param_norm().max(1.0);
                let mut delta = [0.0; 5];
                delta[col] = step;
                let plus = residuals(&params.apply_step(&delta), &readings, &array, &spec).unwrap();
                delta[col] = -step;
                let minus =
                    residuals(&params.apply_step(&delta), &readings, &array, &spec).unwrap();
                for (row, (p, m)) in plus.iter().zip(&minus).enumerate() {
                    let fd = (p - m) / (2.0 * step);
                    let analytic = jac[row][col];
                    max_abs = max_abs.max(analytic.abs()).max(fd.abs());
                    max_dev = max_dev.max((analytic - fd).abs());
                }
            }
            assert!(
                max_dev / max_abs < 1e-5,
                "residual jacobian vs finite differences: {max_dev:e} at scale {max_abs:e}"
            );
        }
    }
}
