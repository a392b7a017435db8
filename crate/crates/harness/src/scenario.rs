//! Resolve a [`RunConfig`](crate::config::RunConfig) into SI-typed domain
//! objects ready to run.

use magloc_core::field_model::MagnetPose;
use magloc_core::localization::{InitStrategy, SolverConfig};
use magloc_core::sensor_array::{
    load_array, make_grid, paper_layouts, GridLayoutSpec, LayoutFamily, PaperLayoutOptions,
};
use magloc_core::{
    MagnetPoseF64, MagnetSpecF64, SensorArrayF64, SensorModelF64, SolverConfigF64, Vec3F64,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{
    ArrayConfig, ArrayLayoutConfig, FilterConfig, LayoutFamilyConfig, MagnetConfig, PosesConfig,
    RunConfig, SensorConfig, SolverSection, StrategyConfig, StreamConfig,
};
use crate::error::{HarnessError, Result};
use crate::seeding::derived_seed;

const MM: f64 = 1e-3;
const UT: f64 = 1e-6;

/// One true pose with the label used in result tables.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPose {
    pub label: String,
    pub pose: MagnetPoseF64,
}

/// A fully resolved, runnable scenario (SI units).
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub array: SensorArrayF64,
    pub magnet: MagnetSpecF64,
    pub poses: Vec<LabeledPose>,
    pub sensor: SensorModelF64,
    /// Frames simulated per trial.
    pub frames: usize,
    /// Frames trimmed from the start of each stream.
    pub warmup: usize,
    pub filter_enabled: bool,
    pub filter_window: usize,
    pub solver: SolverConfigF64,
    pub trials: u32,
    pub master_seed: u64,
}

impl Scenario {
    /// Resolve a config into a runnable scenario.
    pub fn from_config(config: &RunConfig) -> Result<Self> {
        let array = build_array(&config.array)?;
        let magnet = build_magnet(&config.magnet)?;
        let sensor = build_sensor(&config.sensor)?;
        let solver = build_solver(&config.solver)?;
        let (filter_enabled, filter_window) = build_filter(&config.filter)?;
        let (frames, warmup) =
            build_stream(&config.stream, filter_enabled, filter_window)?;
        let poses = match &config.poses {
            Some(poses) => resolve_poses(poses, &array, config.seed)?,
            None => default_center_pose(&array),
        };
        let scenario = Self {
            name: config.name.clone(),
            array,
            magnet,
            poses,
            sensor,
            frames,
            warmup,
            filter_enabled,
            filter_window,
            solver,
            trials: config.trials,
            master_seed: config.seed,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(HarnessError::Config(
                "trials must be at least 1".to_string(),
            ));
        }
        if self.poses.is_empty() {
            return Err(HarnessError::Config(
                "the pose set must contain at least one pose".to_string(),
            ));
        }
        check_unique_labels(&self.poses)?;
        if self.frames == 0 {
            return Err(HarnessError::Config(
                "frames must be at least 1".to_string(),
            ));
        }
        if self.warmup >= self.frames {
            return Err(HarnessError::Config(format!(
                "warmup ({}) must leave at least one of the {} frames",
                self.warmup, self.frames
            )));
        }
        if self.filter_window == 0 {
            return Err(HarnessError::Config(
                "filter window must be at least 1".to_string(),
            ));
        }
        self.solver.validate()?;
        Ok(())
    }

    /// Copy of this scenario with a different name and pose set.
    pub fn with_poses(&self, name: String, poses: Vec<LabeledPose>) -> Self {
        Self {
            name,
            poses,
            ..self.clone()
        }
    }
}

pub(crate) fn check_unique_labels(poses: &[LabeledPose]) -> Result<()> {
    for (i, pose) in poses.iter().enumerate() {
        if poses[..i].iter().any(|p| p.label == pose.label) {
            return Err(HarnessError::DuplicateLabel(pose.label.clone()));
        }
    }
    Ok(())
}

pub(crate) fn build_array(config: &ArrayConfig) -> Result<SensorArrayF64> {
    match config.layout {
        ArrayLayoutConfig::File => {
            let path = config.file.as_ref().ok_or_else(|| {
                HarnessError::Config("layout = \"file\" needs an array file path".to_string())
            })?;
            Ok(load_array(path)?)
        }
        ArrayLayoutConfig::TwoByN | ArrayLayoutConfig::FourByM => {
            let family = match config.layout {
                ArrayLayoutConfig::TwoByN => LayoutFamily::TwoByN,
                _ => LayoutFamily::FourByM,
            };
            Ok(paper_layouts(
                family,
                config.size,
                PaperLayoutOptions {
                    origin: Vec3F64::zero(),
                    permissive: config.permissive,
                    pitch_override: config.pitch_mm.map(|p| p * MM),
                },
            )?)
        }
    }
}

pub(crate) fn layout_family(config: LayoutFamilyConfig) -> LayoutFamily {
    match config {
        LayoutFamilyConfig::TwoByN => LayoutFamily::TwoByN,
        LayoutFamilyConfig::FourByM => LayoutFamily::FourByM,
    }
}

fn build_magnet(config: &MagnetConfig) -> Result<MagnetSpecF64> {
    Ok(MagnetSpecF64::new(
        config.length_mm * MM,
        config.radius_mm * MM,
        config.magnetization_a_per_m,
        config.mu_r,
    )?)
}

fn build_sensor(config: &SensorConfig) -> Result<SensorModelF64> {
    let sigma = config.sensor_sigma_t();
    Ok(
        SensorModelF64::new(config.resolution_ut * UT, config.full_scale_ut * UT)?
            .with_noise_sigma_axes(sigma)?
            .with_quantization(config.quantization),
    )
}

impl SensorConfig {
    pub(crate) fn sensor_sigma_t(&self) -> [f64; 3] {
        let ut = self.noise_sigma_ut.axes_ut();
        [ut[0] * UT, ut[1] * UT, ut[2] * UT]
    }
}

fn build_solver(config: &SolverSection) -> Result<SolverConfigF64> {
    let solver = SolverConfig {
        max_iterations: config.max_iterations,
        initial_damping: config.initial_damping,
        damping_up: config.damping_up,
        damping_down: config.damping_down,
        gradient_tol: config.gradient_tol,
        step_tol: config.step_tol,
        cost_tol: config.cost_tol,
        multistart_count: config.multistart,
        init_strategy: match config.strategy {
            StrategyConfig::Centroid => InitStrategy::Centroid,
            StrategyConfig::Grid => InitStrategy::Grid,
        },
        workspace: None,
    };
    solver.validate()?;
    Ok(solver)
}

fn build_filter(config: &FilterConfig) -> Result<(bool, usize)> {
    if config.window == 0 {
        return Err(HarnessError::Config(
            "filter window must be at least 1".to_string(),
        ));
    }
    Ok((config.enabled, config.window))
}

fn build_stream(
    config: &StreamConfig,
    filter_enabled: bool,
    filter_window: usize,
) -> Result<(usize, usize)> {
    let frames = config.frames.unwrap_or(if filter_enabled {
        2 * filter_window
    } else {
        1
    });
    Ok((frames, config.warmup))
}

fn unit_direction(raw: [f64; 3]) -> Result<Vec3F64> {
    Vec3F64::from_array(raw)
        .normalized()
        .ok_or_else(|| HarnessError::Config("orientation must be a non-zero vector".to_string()))
}

fn labeled(label: String, position: Vec3F64, direction: Vec3F64) -> Result<LabeledPose> {
    Ok(LabeledPose {
        label,
        pose: MagnetPose::from_direction(position, direction)?,
    })
}

fn default_center_pose(array: &SensorArrayF64) -> Vec<LabeledPose> {
    let (_, max) = array.bounding_box();
    let centroid = array.centroid();
    let position = Vec3F64::new(centroid.x, centroid.y, max.z + 0.03);
    vec![LabeledPose {
        label: "center".to_string(),
        pose: MagnetPose::from_direction(position, Vec3F64::new(0.0, 0.0, 1.0))
            .expect("z is a unit direction"),
    }]
}

/// The five-position comparison set: the array center plus one point
/// `margin` outside each edge midpoint, all at the same height. `No.3` is
/// the center.
pub fn five_positions(
    array: &SensorArrayF64,
    height_m: f64,
    margin_m: f64,
    direction: Vec3F64,
) -> Result<Vec<LabeledPose>> {
    let (min, max) = array.bounding_box();
    let center = array.centroid();
    let z = max.z + height_m;
    let spots = [
        ("No.1", Vec3F64::new(min.x - margin_m, center.y, z)),
        ("No.2", Vec3F64::new(center.x, max.y + margin_m, z)),
        ("No.3", Vec3F64::new(center.x, center.y, z)),
        ("No.4", Vec3F64::new(max.x + margin_m, center.y, z)),
        ("No.5", Vec3F64::new(center.x, min.y - margin_m, z)),
    ];
    spots
        .into_iter()
        .map(|(label, position)| labeled(label.to_string(), position, direction))
        .collect()
}

/// Poses above the array center at each height.
pub fn vertical_sweep_poses(
    array: &SensorArrayF64,
    heights_m: &[f64],
    direction: Vec3F64,
) -> Result<Vec<LabeledPose>> {
    let (_, max) = array.bounding_box();
    let center = array.centroid();
    heights_m
        .iter()
        .map(|&h| {
            if h <= 0.0 {
                return Err(HarnessError::NonPositiveOffset(h));
            }
            labeled(
                format!("h={}mm", h / MM),
                Vec3F64::new(center.x, center.y, max.z + h),
                direction,
            )
        })
        .collect()
}

/// Poses displaced along +x from the array's +x edge at a fixed height, so
/// a horizontal offset and a vertical height mean the same sensor-to-magnet
/// distance scale.
pub fn horizontal_sweep_poses(
    array: &SensorArrayF64,
    offsets_m: &[f64],
    height_m: f64,
    direction: Vec3F64,
) -> Result<Vec<LabeledPose>> {
    let (_, max) = array.bounding_box();
    let center = array.centroid();
    offsets_m
        .iter()
        .map(|&d| {
            if d <= 0.0 {
                return Err(HarnessError::NonPositiveOffset(d));
            }
            labeled(
                format!("d={}mm", d / MM),
                Vec3F64::new(max.x + d, center.y, max.z + height_m),
                direction,
            )
        })
        .collect()
}

/// Seeded random poses over the array footprint.
pub fn random_poses(
    array: &SensorArrayF64,
    count: usize,
    height_range_m: [f64; 2],
    fixed_direction: Option<Vec3F64>,
    seed: u64,
) -> Result<Vec<LabeledPose>> {
    if count == 0 {
        return Err(HarnessError::Config(
            "random pose count must be at least 1".to_string(),
        ));
    }
    let [h_lo, h_hi] = height_range_m;
    if !(h_lo > 0.0 && h_hi >= h_lo) {
        return Err(HarnessError::Config(format!(
            "height range must satisfy 0 < lo <= hi, got [{h_lo}, {h_hi}]"
        )));
    }
    let (min, max) = array.bounding_box();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut poses = Vec::with_capacity(count);
    for index in 0..count {
        let position = Vec3F64::new(
            sample_range(&mut rng, min.x, max.x),
            sample_range(&mut rng, min.y, max.y),
            max.z + sample_range(&mut rng, h_lo, h_hi),
        );
        let direction = match fixed_direction {
            Some(dir) => dir,
            None => random_unit(&mut rng),
        };
        poses.push(labeled(format!("pose-{index}"), position, direction)?);
    }
    Ok(poses)
}

fn sample_range(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3F64 {
    loop {
        let v = Vec3F64::new(
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

pub(crate) fn resolve_poses(
    config: &PosesConfig,
    array: &SensorArrayF64,
    master_seed: u64,
) -> Result<Vec<LabeledPose>> {
    let poses = match config {
        PosesConfig::Explicit { list } => list
            .iter()
            .enumerate()
            .map(|(index, entry)| {
                let label = entry
                    .label
                    .clone()
                    .unwrap_or_else(|| format!("pose-{index}"));
                labeled(
                    label,
                    Vec3F64::from_array(entry.position_mm) * MM,
                    unit_direction(entry.orientation)?,
                )
            })
            .collect::<Result<Vec<_>>>()?,
        PosesConfig::VerticalSweep {
            heights_mm,
            orientation,
        } => {
            let heights: Vec<f64> = heights_mm.iter().map(|h| h * MM).collect();
            vertical_sweep_poses(array, &heights, unit_direction(*orientation)?)?
        }
        PosesConfig::HorizontalSweep {
            offsets_mm,
            height_mm,
            orientation,
        } => {
            let offsets: Vec<f64> = offsets_mm.iter().map(|d| d * MM).collect();
            horizontal_sweep_poses(
                array,
                &offsets,
                height_mm * MM,
                unit_direction(*orientation)?,
            )?
        }
        PosesConfig::FivePositions {
            height_mm,
            margin_mm,
            orientation,
        } => five_positions(
            array,
            height_mm * MM,
            margin_mm * MM,
            unit_direction(*orientation)?,
        )?,
        PosesConfig::Random {
            count,
            height_range_mm,
            orientation,
        } => {
            let fixed = orientation
                .fixed_direction()?
                .map(unit_direction)
                .transpose()?;
            random_poses(
                array,
                *count,
                [height_range_mm[0] * MM, height_range_mm[1] * MM],
                fixed,
                derived_seed(master_seed, "poses"),
            )?
        }
    };
    check_unique_labels(&poses)?;
    Ok(poses)
}

/// Build an uncentered grid directly (used by tests and the CLI).
pub fn grid_array(rows: usize, cols: usize, pitch_m: f64) -> Result<SensorArrayF64> {
    Ok(make_grid(&GridLayoutSpec {
        rows,
        cols,
        pitch_x: pitch_m,
        pitch_y: pitch_m,
        origin: Vec3F64::zero(),
        plane_z: 0.0,
        centered: false,
    })?)
}
