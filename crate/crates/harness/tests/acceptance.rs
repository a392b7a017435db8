//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with its runtime (run with `--nocapture` to see them).
//!
//! Every tolerance is pinned here, not computed. The Monte Carlo criteria
//! run the shipped presets at their full trial counts.

use std::time::{Duration, Instant};

use magloc_core::field_model::{flux_at, MagnetPose, MagnetSpec};
use magloc_core::localization::{
    localize, residuals, residuals_and_jacobian, PoseParams, SolverConfig,
};
use magloc_core::measurement::{simulate_readings, ReadingSet, SensorModel};
use magloc_core::metrics;
use magloc_core::sensor_array::{paper_layouts, LayoutFamily, PaperLayoutOptions, SensorArray};
use magloc_core::Vec3;
use magloc_harness::output::{render_results_csv, write_run_dir};
use magloc_harness::presets::load_preset;
use magloc_harness::run_config;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pass(criterion: u32, what: &str, started: Instant, budget: Duration) {
    let elapsed = started.elapsed();
    assert!(
        elapsed < budget,
        "[criterion {criterion}] {what}: FAIL — took {elapsed:?}, budget {budget:?}"
    );
    println!(
        "[criterion {criterion}] {what}: PASS ({:.2}s)",
        elapsed.as_secs_f64()
    );
}

fn spec() -> MagnetSpec<f64> {
    MagnetSpec::small_cylinder(8e5).unwrap()
}

fn wide_array() -> SensorArray<f64> {
    paper_layouts(LayoutFamily::FourByM, 5, PaperLayoutOptions::default()).unwrap()
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3<f64> {
    loop {
        let v = Vec3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

#[test]
fn criterion_01_noiseless_round_trip() {
    let started = Instant::now();
    let spec = spec();
    let array = wide_array();
    let (min, max) = array.bounding_box();
    let model = SensorModel::default().with_quantization(false);
    let config = SolverConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(777);
    let mut max_ep = 0.0f64;
    let mut max_theta = 0.0f64;
    for trial in 0..100u64 {
        let truth = MagnetPose::new(
            Vec3::new(
                rng.random_range(min.x..max.x),
                rng.random_range(min.y..max.y),
                rng.random_range(0.03..0.2),
            ),
            random_unit(&mut rng),
        )
        .unwrap();
        let readings = simulate_readings(&array, &truth, &spec, &model, trial).unwrap();
        let report = localize(&readings, &array, &spec, &config).unwrap();
        assert!(
            report.converged,
            "[criterion 1] trial {trial} failed to converge at {truth:?}"
        );
        max_ep = max_ep.max(metrics::position_error(&report.pose, &truth));
        max_theta = max_theta.max(
            metrics::orientation_angle(report.pose.orientation(), truth.orientation()).unwrap(),
        );
    }
    assert!(
        max_ep < 1e-6,
        "[criterion 1] max position error {max_ep:e} m exceeds 1e-6"
    );
    assert!(
        max_theta < 1e-5,
        "[criterion 1] max orientation angle {max_theta:e} rad exceeds 1e-5"
    );
    pass(
        1,
        "noiseless round trip (100 poses, 20 sensors)",
        started,
        Duration::from_secs(30),
    );
}

#[test]
fn criterion_02_jacobian_matches_finite_differences() {
    let started = Instant::now();
    let spec = spec();
    let mut rng = ChaCha8Rng::seed_from_u64(778);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let sensor = Vec3::new(
            rng.random_range(-0.15..0.15),
            rng.random_range(-0.15..0.15),
            rng.random_range(-0.05..0.05),
        );
        let array = SensorArray::new(vec![sensor], "probe").unwrap();
        let readings = ReadingSet::from_readings(vec![Vec3::zero()]);
        let position = Vec3::new(
            rng.random_range(-0.1..0.1),
            rng.random_range(-0.1..0.1),
            rng.random_range(-0.1..0.1),
        );
        if (sensor - position).norm() < 0.02 {
            continue;
        }
        let params =
            PoseParams::from_position_direction(position, random_unit(&mut rng)).unwrap();
        let (_, jac) = residuals_and_jacobian(&params, &readings, &array, &spec).unwrap();
        let mut max_abs = 0.0f64;
        let mut max_dev = 0.0f64;
        for col in 0..5 {
            let step = 1e-7 * params.param_norm().max(1.0);
            let mut delta = [0.0; 5];
            delta[col] = step;
            let plus = residuals(&params.apply_step(&delta), &readings, &array, &spec).unwrap();
            delta[col] = -step;
            let minus = residuals(&params.apply_step(&delta), &readings, &array, &spec).unwrap();
            for (row, (p, m)) in plus.iter().zip(&minus).enumerate() {
                let fd = (p - m) / (2.0 * step);
                max_abs = max_abs.max(jac[row][col].abs()).max(fd.abs());
                max_dev = max_dev.max((jac[row][col] - fd).abs());
            }
        }
        worst = worst.max(max_dev / max_abs);
    }
    assert!(
        worst < 1e-5,
        "[criterion 2] max relative Jacobian deviation {worst:e} exceeds 1e-5"
    );
    pass(
        2,
        "analytic Jacobian vs central differences (1000 configs)",
        started,
        Duration::from_secs(10),
    );
}

/// Field of a uniformly magnetized cylinder, summed from >= 1e4 volume
/// elements on an exact cylindrical grid. Independent of the production
/// dipole path: only elementary point-dipole terms are used.
fn cylinder_field_oracle(
    center: Vec3<f64>,
    axis: Vec3<f64>,
    length: f64,
    radius: f64,
    magnetization: f64,
    at: Vec3<f64>,
) -> Vec3<f64> {
    let (n_rho, n_phi, n_z) = (20usize, 32usize, 20usize); // 12800 elements
    let d_rho = radius / n_rho as f64;
    let d_phi = std::f64::consts::TAU / n_phi as f64;
    let d_z = length / n_z as f64;
    // Orthonormal frame around the cylinder axis.
    let helper = if axis.z.abs() < 0.9 {
        Vec3::new(0.0, 0.0, 1.0)
    } else {
        Vec3::new(1.0, 0.0, 0.0)
    };
    let e1 = axis.cross(helper).normalized().unwrap();
    let e2 = axis.cross(e1);
    let mu0 = 4.0 * std::f64::consts::PI * 1e-7;
    let mut field = Vec3::zero();
    for i in 0..n_rho {
        let rho = (i as f64 + 0.5) * d_rho;
        let dv = rho * d_rho * d_phi * d_z;
        let moment = magnetization * dv; // axial magnetization
        for j in 0..n_phi {
            let phi = (j as f64 + 0.5) * d_phi;
            let radial = e1 * (rho * phi.cos()) + e2 * (rho * phi.sin());
            for k in 0..n_z {
                let z = (k as f64 + 0.5) * d_z - length / 2.0;
                let source = center + radial + axis * z;
                let offset = at - source;
                let dist2 = offset.norm_squared();
                let dist = dist2.sqrt();
                let d3 = dist2 * dist;
                let d5 = d3 * dist2;
                let axial = axis.dot(offset);
                field = field
                    + (offset * (3.0 * axial / d5) - axis / d3) * (mu0 * moment / (4.0 * std::f64::consts::PI));
            }
        }
    }
    field
}

#[test]
fn criterion_03_dipole_approximation_vs_discretized_cylinder() {
    let started = Instant::now();
    let spec = spec();
    let mut rng = ChaCha8Rng::seed_from_u64(779);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let axis = random_unit(&mut rng);
        let pose = MagnetPose::new(Vec3::zero(), axis).unwrap();
        let direction = random_unit(&mut rng);
        let distance = rng.random_range(0.03..0.08);
        let at = direction * distance;
        let dipole = flux_at(&pose, &spec, at).unwrap();
        let cylinder = cylinder_field_oracle(
            Vec3::zero(),
            axis,
            spec.length_m(),
            spec.radius_m(),
            spec.magnetization_a_per_m(),
            at,
        );
        let rel = (dipole.norm() - cylinder.norm()).abs() / cylinder.norm();
        worst = worst.max(rel);
    }
    assert!(
        worst < 0.01,
        "[criterion 3] dipole vs cylinder magnitude error {worst:e} exceeds 1%"
    );
    pass(
        3,
        "dipole model vs discretized cylinder (12800 elements, 100 points)",
        started,
        Duration::from_secs(60),
    );
}

fn preset_scenario_means(preset: &str, metric: impl Fn(&magloc_harness::AggregateRow) -> Option<f64>) -> Vec<(String, f64)> {
    let config = load_preset(preset).unwrap();
    assert!(config.trials >= 200, "preset {preset} must keep >= 200 trials");
    let output = run_config(&config).unwrap();
    output
        .table
        .aggregates
        .iter()
        .filter(|a| a.pose_id == "all")
        .map(|a| (a.scenario.clone(), metric(a).expect("aggregate has data")))
        .collect()
}

#[test]
fn criterion_04_sensor_count_trend() {
    let started = Instant::now();
    let means = preset_scenario_means("sensor_count", |a| a.ep_mm_mean);
    assert_eq!(means.len(), 4, "[criterion 4] expected 4 array sizes");
    for pair in means.windows(2) {
        assert!(
            pair[1].1 < pair[0].1,
            "[criterion 4] mean Ep not strictly decreasing with sensor count: {means:?}"
        );
    }
    pass(
        4,
        "mean Ep strictly decreasing over the 4xm family",
        started,
        Duration::from_secs(300),
    );
}

#[test]
fn criterion_05_center_position_superiority() {
    let started = Instant::now();
    let config = load_preset("five_positions").unwrap();
    assert!(config.trials >= 200);
    let output = run_config(&config).unwrap();
    let poses: Vec<_> = output
        .table
        .aggregates
        .iter()
        .filter(|a| a.pose_id != "all")
        .collect();
    assert_eq!(poses.len(), 5, "[criterion 5] expected five positions");
    let center = poses.iter().find(|a| a.pose_id == "No.3").unwrap();
    for other in poses.iter().filter(|a| a.pose_id != "No.3") {
        assert!(
            center.ep_mm_mean.unwrap() < other.ep_mm_mean.unwrap(),
            "[criterion 5] center mean Ep {:?} not below {} ({:?})",
            center.ep_mm_mean,
            other.pose_id,
            other.ep_mm_mean
        );
        assert!(
            center.theta_deg_mean.unwrap() < other.theta_deg_mean.unwrap(),
            "[criterion 5] center mean theta {:?} not below {} ({:?})",
            center.theta_deg_mean,
            other.pose_id,
            other.theta_deg_mean
        );
    }
    pass(
        5,
        "center position has smallest mean Ep and theta",
        started,
        Duration::from_secs(300),
    );
}

#[test]
fn criterion_06_filter_benefit() {
    let started = Instant::now();
    let config = load_preset("filter_compare").unwrap();
    assert!(config.trials >= 200);
    let output = run_config(&config).unwrap();
    let filtered = output
        .table
        .scenario_aggregate("filter_compare/filtered")
        .unwrap()
        .ep_mm_mean
        .unwrap();
    let raw = output
        .table
        .scenario_aggregate("filter_compare/raw")
        .unwrap()
        .ep_mm_mean
        .unwrap();
    assert!(
        filtered < raw,
        "[criterion 6] filtered mean Ep {filtered} not below raw {raw}"
    );
    pass(
        6,
        &format!("filter benefit (filtered {filtered:.3} mm < raw {raw:.3} mm)"),
        started,
        Duration::from_secs(300),
    );
}

#[test]
fn criterion_07_height_trend() {
    let started = Instant::now();
    let config = load_preset("height_sweep").unwrap();
    assert!(config.trials >= 200);
    let output = run_config(&config).unwrap();
    let heights = ["h=50mm", "h=100mm", "h=150mm", "h=200mm"];
    let means: Vec<f64> = heights
        .iter()
        .map(|h| {
            output
                .table
                .pose_aggregate("height_sweep", h)
                .unwrap()
                .ep_mm_mean
                .unwrap()
        })
        .collect();
    for pair in means.windows(2) {
        assert!(
            pair[1] >= pair[0],
            "[criterion 7] mean Ep decreasing with height: {means:?}"
        );
    }
    pass(
        7,
        "mean Ep non-decreasing with height",
        started,
        Duration::from_secs(300),
    );
}

#[test]
fn criterion_08_quantization_bound() {
    let started = Instant::now();
    let spec = spec();
    let model = SensorModel::default(); // sigma = 0, quantization on
    let half_lsb = model.resolution_t() / 2.0;
    let mut rng = ChaCha8Rng::seed_from_u64(780);
    let mut checked = 0usize;
    while checked < 10_000 {
        let sensors: Vec<Vec3<f64>> = (0..10)
            .map(|_| {
                Vec3::new(
                    rng.random_range(-0.1..0.1),
                    rng.random_range(-0.1..0.1),
                    rng.random_range(-0.02..0.02),
                )
            })
            .collect();
        let position = Vec3::new(
            rng.random_range(-0.1..0.1),
            rng.random_range(-0.1..0.1),
            rng.random_range(0.05..0.2),
        );
        if sensors.iter().any(|s| (*s - position).norm() < 0.02) {
            continue;
        }
        let Ok(array) = SensorArray::new(sensors, "probe") else {
            continue;
        };
        let truth = MagnetPose::new(position, random_unit(&mut rng)).unwrap();
        let readings = simulate_readings(&array, &truth, &spec, &model, checked as u64).unwrap();
        for (reading, &sensor) in readings.readings().iter().zip(array.positions()) {
            let ideal = flux_at(&truth, &spec, sensor).unwrap();
            let diff = *reading - ideal;
            for component in [diff.x, diff.y, diff.z] {
                assert!(
                    component.abs() <= half_lsb * (1.0 + 1e-9),
                    "[criterion 8] quantization error {component:e} exceeds half LSB {half_lsb:e}"
                );
            }
            checked += 1;
        }
    }
    pass(
        8,
        "quantized readings within half an LSB of truth (1e4 components)",
        started,
        Duration::from_secs(10),
    );
}

#[test]
fn criterion_09_preset_determinism() {
    let started = Instant::now();
    let config = load_preset("filter_compare").unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for target in [&a, &b] {
        let output = run_config(&config).unwrap();
        write_run_dir(target, &config, &output).unwrap();
    }
    for file in ["results.csv", "aggregates.csv", "meta.json"] {
        let left = std::fs::read(a.join(file)).unwrap();
        let right = std::fs::read(b.join(file)).unwrap();
        assert!(
            left == right,
            "[criterion 9] {file} differs between identical runs"
        );
    }
    pass(
        9,
        "byte-identical artifacts across repeated preset runs",
        started,
        Duration::from_secs(600),
    );
}

#[test]
fn criterion_10_metric_unit_examples() {
    let started = Instant::now();
    let x = Vec3::new(1.0, 0.0, 0.0);
    let y = Vec3::new(0.0, 1.0, 0.0);
    // exact trivial values
    assert_eq!(metrics::orientation_error(x, x).unwrap(), 0.0);
    assert!((metrics::orientation_error(x, y).unwrap() - 2.0f64.sqrt()).abs() < 1e-15);
    assert_eq!(metrics::orientation_error(x, -x).unwrap(), 2.0);
    assert_eq!(
        metrics::orientation_angle(x, y).unwrap().to_degrees(),
        90.0
    );
    assert_eq!(metrics::orientation_angle(x, -x).unwrap(), 0.0);
    let a = MagnetPose::new(Vec3::zero(), x).unwrap();
    let b = MagnetPose::new(Vec3::new(0.003, 0.004, 0.0), x).unwrap();
    assert!((metrics::position_error(&a, &b) - 0.005).abs() < 1e-15);
    pass(
        10,
        "metric trivial examples (0, sqrt(2), 2, 90 deg, antipodal fold)",
        started,
        Duration::from_secs(5),
    );
}

/// Sanity companion to criterion 9: the CSV written by one run parses back
/// into the very rows that produced it.
#[test]
fn results_csv_round_trips() {
    let mut config = load_preset("five_positions").unwrap();
    config.trials = 2;
    let output = run_config(&config).unwrap();
    let text = render_results_csv(&output.table).unwrap();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<magloc_harness::TrialRow> =
        reader.deserialize().collect::<Result<_, _>>().unwrap();
    assert_eq!(rows, output.table.rows);
}
