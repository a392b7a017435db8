//! Declarative run configuration.
//!
//! Configs are TOML with boundary units in the field names: lengths in
//! millimeters (`*_mm`), field values in microtesla (`*_ut`), magnetization
//! in A/m. [`crate::scenario`] converts everything to SI when resolving a
//! [`RunConfig`] into a runnable scenario. Every field has a default, so a
//! minimal config is just a name and whatever deviates from the defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

/// Top-level config file: one experiment over one base scenario.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Scenario name; becomes the `scenario` column prefix and salts the
    /// per-trial seeds.
    pub name: String,
    /// Master seed for the whole run.
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Monte Carlo trials per pose.
    #[serde(default = "default_trials")]
    pub trials: u32,
    #[serde(default)]
    pub experiment: ExperimentConfig,
    #[serde(default)]
    pub array: ArrayConfig,
    #[serde(default)]
    pub magnet: MagnetConfig,
    #[serde(default)]
    pub sensor: SensorConfig,
    #[serde(default)]
    pub stream: StreamConfig,
    #[serde(default)]
    pub filter: FilterConfig,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub poses: Option<PosesConfig>,
}

fn default_seed() -> u64 {
    42
}

fn default_trials() -> u32 {
    1
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).map_err(|source| HarnessError::io(path, source))?;
        Self::from_toml(&text)
    }
}

/// Which experiment the run performs.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExperimentConfig {
    /// Plain scenario over the configured pose set.
    #[default]
    Scenario,
    /// Same pose set and noise across several array sizes of one family.
    SensorCount {
        family: LayoutFamilyConfig,
        sizes: Vec<usize>,
    },
    /// Sweep the magnet along the vertical or horizontal axis.
    Geometry {
        axis: GeometryAxisConfig,
        offsets_mm: Vec<f64>,
        /// Fixed height for horizontal sweeps.
        #[serde(default = "default_height_mm")]
        height_mm: f64,
    },
    /// The five-position comparison around the array.
    Positions {
        #[serde(default = "default_height_mm")]
        height_mm: f64,
        /// Lateral distance outside each array edge midpoint.
        #[serde(default = "default_height_mm")]
        margin_mm: f64,
    },
    /// Paired filtered-vs-raw branches over identical noise realizations.
    FilterCompare,
}

fn default_height_mm() -> f64 {
    30.0
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum GeometryAxisConfig {
    VerticalHeight,
    HorizontalDistance,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum LayoutFamilyConfig {
    TwoByN,
    FourByM,
}

/// Sensor array geometry: a layout family or an array file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayConfig {
    #[serde(default = "default_layout")]
    pub layout: ArrayLayoutConfig,
    /// Family count (n or m); unused for file layouts.
    #[serde(default = "default_array_size")]
    pub size: usize,
    /// Path to an array file when `layout = "file"`.
    #[serde(default)]
    pub file: Option<String>,
    /// Override the family pitch, millimeters.
    #[serde(default)]
    pub pitch_mm: Option<f64>,
    /// Allow counts outside the studied sets.
    #[serde(default)]
    pub permissive: bool,
}

fn default_layout() -> ArrayLayoutConfig {
    ArrayLayoutConfig::FourByM
}

fn default_array_size() -> usize {
    5
}

impl Default for ArrayConfig {
    fn default() -> Self {
        Self {
            layout: default_layout(),
            size: default_array_size(),
            file: None,
            pitch_mm: None,
            permissive: false,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ArrayLayoutConfig {
    TwoByN,
    FourByM,
    File,
}

/// Source magnet: cylinder geometry and magnetization.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MagnetConfig {
    #[serde(default = "default_length_mm")]
    pub length_mm: f64,
    #[serde(default = "default_radius_mm")]
    pub radius_mm: f64,
    #[serde(default = "default_magnetization")]
    pub magnetization_a_per_m: f64,
    #[serde(default = "default_mu_r")]
    pub mu_r: f64,
}

fn default_length_mm() -> f64 {
    2.0
}

fn default_radius_mm() -> f64 {
    1.0
}

fn default_magnetization() -> f64 {
    8e5
}

fn default_mu_r() -> f64 {
    1.0
}

impl Default for MagnetConfig {
    fn default() -> Self {
        Self {
            length_mm: default_length_mm(),
            radius_mm: default_radius_mm(),
            magnetization_a_per_m: default_magnetization(),
            mu_r: default_mu_r(),
        }
    }
}

/// Per-axis noise sigma: a scalar applies to all three axes.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum NoiseSigmaUt {
    Isotropic(f64),
    PerAxis([f64; 3]),
}

impl NoiseSigmaUt {
    pub fn axes_ut(&self) -> [f64; 3] {
        match *self {
            NoiseSigmaUt::Isotropic(s) => [s; 3],
            NoiseSigmaUt::PerAxis(a) => a,
        }
    }
}

/// Sensor ADC model plus the synthetic noise level.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorConfig {
    #[serde(default = "default_resolution_ut")]
    pub resolution_ut: f64,
    #[serde(default = "default_full_scale_ut")]
    pub full_scale_ut: f64,
    #[serde(default = "default_noise_sigma")]
    pub noise_sigma_ut: NoiseSigmaUt,
    #[serde(default = "default_true")]
    pub quantization: bool,
}

fn default_resolution_ut() -> f64 {
    0.161
}

fn default_full_scale_ut() -> f64 {
    44_000.0
}

fn default_noise_sigma() -> NoiseSigmaUt {
    NoiseSigmaUt::Isotropic(0.0)
}

fn default_true() -> bool {
    true
}

impl Default for SensorConfig {
    fn default() -> Self {
        Self {
            resolution_ut: default_resolution_ut(),
            full_scale_ut: default_full_scale_ut(),
            noise_sigma_ut: default_noise_sigma(),
            quantization: true,
        }
    }
}

/// Frames simulated per trial and the warmup trim.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct StreamConfig {
    /// Frames per trial; defaults to 2x the filter window when filtering,
    /// else 1.
    #[serde(default)]
    pub frames: Option<usize>,
    /// Frames dropped from the start of each stream.
    #[serde(default)]
    pub warmup: usize,
}

/// The moving-average filter stage.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterConfig {
    #[serde(default)]
    pub enabled: bool,
    #[serde(default = "default_window")]
    pub window: usize,
}

fn default_window() -> usize {
    4
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            window: default_window(),
        }
    }
}

/// Levenberg-Marquardt and multistart settings (mirrors the solver's
/// defaults).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_initial_damping")]
    pub initial_damping: f64,
    #[serde(default = "default_damping_up")]
    pub damping_up: f64,
    #[serde(default = "default_damping_down")]
    pub damping_down: f64,
    #[serde(default = "default_gradient_tol")]
    pub gradient_tol: f64,
    #[serde(default = "default_step_tol")]
    pub step_tol: f64,
    #[serde(default = "default_cost_tol")]
    pub cost_tol: f64,
    #[serde(default = "default_multistart")]
    pub multistart: usize,
    #[serde(default = "default_strategy")]
    pub strategy: StrategyConfig,
}

fn default_max_iterations() -> usize {
    200
}

fn default_initial_damping() -> f64 {
    1e-3
}

fn default_damping_up() -> f64 {
    10.0
}

fn default_damping_down() -> f64 {
    0.1
}

fn default_gradient_tol() -> f64 {
    1e-18
}

fn default_step_tol() -> f64 {
    1e-10
}

fn default_cost_tol() -> f64 {
    1e-12
}

fn default_multistart() -> usize {
    8
}

fn default_strategy() -> StrategyConfig {
    StrategyConfig::Grid
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            max_iterations: default_max_iterations(),
            initial_damping: default_initial_damping(),
            damping_up: default_damping_up(),
            damping_down: default_damping_down(),
            gradient_tol: default_gradient_tol(),
            step_tol: default_step_tol(),
            cost_tol: default_cost_tol(),
            multistart: default_multistart(),
            strategy: default_strategy(),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum StrategyConfig {
    Centroid,
    Grid,
}

/// True magnet pose set for the run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum PosesConfig {
    /// Fully explicit labeled poses.
    Explicit { list: Vec<PoseEntry> },
    /// Magnet above the array center at each height.
    VerticalSweep {
        heights_mm: Vec<f64>,
        #[serde(default = "default_orientation")]
        orientation: [f64; 3],
    },
    /// Magnet displaced laterally (+x) from the array center at fixed height.
    HorizontalSweep {
        offsets_mm: Vec<f64>,
        #[serde(default = "default_height_mm")]
        height_mm: f64,
        #[serde(default = "default_orientation")]
        orientation: [f64; 3],
    },
    /// Center plus four points outside the array edge midpoints.
    FivePositions {
        #[serde(default = "default_height_mm")]
        height_mm: f64,
        #[serde(default = "default_height_mm")]
        margin_mm: f64,
        #[serde(default = "default_orientation")]
        orientation: [f64; 3],
    },
    /// Seeded random poses over the array footprint.
    Random {
        count: usize,
        #[serde(default = "default_height_range")]
        height_range_mm: [f64; 2],
        /// `"random"` or a fixed `[m, n, p]` direction.
        #[serde(default)]
        orientation: OrientationConfig,
    },
}

fn default_orientation() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

fn default_height_range() -> [f64; 2] {
    [30.0, 200.0]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseEntry {
    #[serde(default)]
    pub label: Option<String>,
    pub position_mm: [f64; 3],
    #[serde(default = "default_orientation")]
    pub orientation: [f64; 3],
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum OrientationConfig {
    Keyword(String),
    Fixed([f64; 3]),
}

impl Default for OrientationConfig {
    fn default() -> Self {
        OrientationConfig::Keyword("random".to_string())
    }
}

impl OrientationConfig {
    /// `None` means sample a random unit direction per pose.
    pub fn fixed_direction(&self) -> Result<Option<[f64; 3]>> {
        match self {
            OrientationConfig::Keyword(word) if word == "random" => Ok(None),
            OrientationConfig::Keyword(word) => Err(HarnessError::Config(format!(
                "orientation must be \"random\" or a 3-vector, got {word:?}"
            ))),
            OrientationConfig::Fixed(dir) => Ok(Some(*dir)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let config = RunConfig::from_toml("name = \"demo\"").unwrap();
        assert_eq!(config.name, "demo");
        assert_eq!(config.seed, 42);
        assert_eq!(config.trials, 1);
        assert!(matches!(config.experiment, ExperimentConfig::Scenario));
        assert_eq!(config.array.size, 5);
        assert_eq!(config.magnet.magnetization_a_per_m, 8e5);
        assert_eq!(config.sensor.resolution_ut, 0.161);
        assert!(!config.filter.enabled);
        assert!(config.poses.is_none());
    }

    #[test]
    fn unknown_top_level_keys_are_rejected() {
        assert!(RunConfig::from_toml("name = \"x\"\nbogus = 1").is_err());
    }

    #[test]
    fn noise_sigma_accepts_scalar_and_triple() {
        let iso = RunConfig::from_toml("name=\"x\"\n[sensor]\nnoise_sigma_ut = 1.5").unwrap();
        assert_eq!(iso.sensor.noise_sigma_ut.axes_ut(), [1.5; 3]);
        let axes = RunConfig::from_toml(
            "name=\"x\"\n[sensor]\nnoise_sigma_ut = [0.13, 1.735, 1.153]",
        )
        .unwrap();
        assert_eq!(axes.sensor.noise_sigma_ut.axes_ut(), [0.13, 1.735, 1.153]);
    }

    #[test]
    fn experiment_sections_parse() {
        let text = r#"
name = "sweep"
[experiment]
kind = "sensor_count"
family = "four_by_m"
sizes = [2, 3, 4, 5]
"#;
        let config = RunConfig::from_toml(text).unwrap();
        match config.experiment {
            ExperimentConfig::SensorCount { family, ref sizes } => {
                assert_eq!(family, LayoutFamilyConfig::FourByM);
                assert_eq!(sizes, &[2, 3, 4, 5]);
            }
            other => panic!("wrong experiment: {other:?}"),
        }
    }

    #[test]
    fn pose_modes_parse() {
        let text = r#"
name = "poses"
[poses]
mode = "explicit"
list = [
  { label = "No.1", position_mm = [0.0, 0.0, 30.0], orientation = [0.0, 0.0, 1.0] },
  { position_mm = [10.0, 0.0, 30.0] },
]
"#;
        let config = RunConfig::from_toml(text).unwrap();
        match config.poses.unwrap() {
            PosesConfig::Explicit { list } => {
                assert_eq!(list.len(), 2);
                assert_eq!(list[0].label.as_deref(), Some("No.1"));
                assert_eq!(list[1].orientation, [0.0, 0.0, 1.0]);
            }
            other => panic!("wrong poses: {other:?}"),
        }

        let random = r#"
name = "poses"
[poses]
mode = "random"
count = 10
orientation = "random"
"#;
        let config = RunConfig::from_toml(random).unwrap();
        match config.poses.unwrap() {
            PosesConfig::Random {
                count, orientation, ..
            } => {
                assert_eq!(count, 10);
                assert_eq!(orientation.fixed_direction().unwrap(), None);
            }
            other => panic!("wrong poses: {other:?}"),
        }
    }
}
