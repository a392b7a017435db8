//! The comparison experiments: sensor-count sweep, geometry sweeps, the
//! five-position study, and the paired filter comparison.

use magloc_core::measurement::noise_residual_stats;
use magloc_core::sensor_array::{paper_layouts, LayoutFamily, PaperLayoutOptions};
use magloc_core::Vec3F64;

use crate::config::{ExperimentConfig, GeometryAxisConfig, RunConfig};
use crate::error::{HarnessError, Result};
use crate::runner::{run_scenario, score_frame, trial_stream};
use crate::scenario::{
    check_unique_labels, horizontal_sweep_poses, layout_family, vertical_sweep_poses,
    five_positions, LabeledPose, Scenario,
};
use crate::table::ResultTable;

/// Result of one experiment: the merged table plus experiment-specific
/// extras.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub table: ResultTable,
    /// Mean absolute raw-minus-filtered residual per axis (tesla); present
    /// for the filter comparison.
    pub noise_residual_t: Option<[f64; 3]>,
}

impl ExperimentOutput {
    fn plain(table: ResultTable) -> Self {
        Self {
            table,
            noise_residual_t: None,
        }
    }
}

/// Which axis a geometry sweep moves along.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeometryAxis {
    VerticalHeight,
    HorizontalDistance,
}

/// Run the same pose set and noise model across several array sizes of one
/// family. Each size contributes a sub-scenario named
/// `<base>/<family><size>`.
pub fn experiment_sensor_count(
    family: LayoutFamily,
    sizes: &[usize],
    base: &Scenario,
) -> Result<ExperimentOutput> {
    if sizes.is_empty() {
        return Err(HarnessError::EmptySizes);
    }
    let mut tables = Vec::with_capacity(sizes.len());
    for &size in sizes {
        let array = paper_layouts(
            family,
            size,
            PaperLayoutOptions {
                origin: Vec3F64::zero(),
                permissive: false,
                pitch_override: None,
            },
        )?;
        let mut scenario = base.with_poses(
            format!("{}/{}-{}", base.name, family.label(), size),
            base.poses.clone(),
        );
        scenario.array = array;
        tables.push(run_scenario(&scenario)?);
    }
    Ok(ExperimentOutput::plain(ResultTable::concat(tables)))
}

/// Sweep the magnet vertically above the array center, or horizontally away
/// from it at a fixed height.
pub fn experiment_geometry(
    axis: GeometryAxis,
    offsets_m: &[f64],
    fixed_height_m: f64,
    base: &Scenario,
) -> Result<ExperimentOutput> {
    let direction = Vec3F64::new(0.0, 0.0, 1.0);
    let poses = match axis {
        GeometryAxis::VerticalHeight => vertical_sweep_poses(&base.array, offsets_m, direction)?,
        GeometryAxis::HorizontalDistance => {
            horizontal_sweep_poses(&base.array, offsets_m, fixed_height_m, direction)?
        }
    };
    let scenario = base.with_poses(base.name.clone(), poses);
    Ok(ExperimentOutput::plain(run_scenario(&scenario)?))
}

/// Compare localization accuracy across an explicit labeled pose set
/// (canonically the five positions around the array).
pub fn experiment_positions(
    positions: Vec<LabeledPose>,
    base: &Scenario,
) -> Result<ExperimentOutput> {
    if positions.is_empty() {
        return Err(HarnessError::Config(
            "positions experiment needs at least one pose".to_string(),
        ));
    }
    check_unique_labels(&positions)?;
    let scenario = base.with_poses(base.name.clone(), positions);
    Ok(ExperimentOutput::plain(run_scenario(&scenario)?))
}

/// Feed identical noise realizations to a filtered and an unfiltered branch
/// and emit the paired tables plus the raw-vs-filtered residual stats.
pub fn experiment_filter_comparison(base: &Scenario) -> Result<ExperimentOutput> {
    // Both branches share the simulation seeds (derived from the base name);
    // only the conditioning differs. A window of 1 degenerates to identical
    // branches.
    let mut source = base.clone();
    source.filter_enabled = false;

    let filtered_name = format!("{}/filtered", base.name);
    let raw_name = format!("{}/raw", base.name);
    let mut filtered_rows = Vec::new();
    let mut raw_rows = Vec::new();
    let mut residual_sums = [0.0f64; 3];
    let mut residual_count = 0u64;

    for (pose_index, pose) in source.poses.iter().enumerate() {
        for trial in 0..source.trials {
            match trial_stream(&source, pose, pose_index as u32, trial) {
                Ok(raw_stream) => {
                    let filtered_stream = magloc_core::measurement::moving_average_filter(
                        &raw_stream,
                        base.filter_window,
                    )?;
                    if let Ok(stats) = noise_residual_stats(&raw_stream, &filtered_stream) {
                        for (sum, axis) in residual_sums.iter_mut().zip(stats) {
                            *sum += axis;
                        }
                        residual_count += 1;
                    }
                    let raw_frame = raw_stream.last_frame().expect("frames >= 1").clone();
                    let filtered_frame =
                        filtered_stream.last_frame().expect("frames >= 1").clone();
                    let mut filtered_row =
                        score_frame(&source, pose, trial, &filtered_frame);
                    filtered_row.scenario = filtered_name.clone();
                    filtered_rows.push(filtered_row);
                    let mut raw_row = score_frame(&source, pose, trial, &raw_frame);
                    raw_row.scenario = raw_name.clone();
                    raw_rows.push(raw_row);
                }
                Err(err) => {
                    for (name, rows) in [
                        (&filtered_name, &mut filtered_rows),
                        (&raw_name, &mut raw_rows),
                    ] {
                        rows.push(crate::table::TrialRow {
                            scenario: name.clone(),
                            pose_id: pose.label.clone(),
                            trial,
                            ep_mm: None,
                            eo: None,
                            theta_deg: None,
                            converged: false,
                            iterations: 0,
                            final_cost: None,
                            error: Some(err.to_string()),
                        });
                    }
                }
            }
        }
    }

    let noise_residual_t = (residual_count > 0).then(|| {
        let n = residual_count as f64;
        [
            residual_sums[0] / n,
            residual_sums[1] / n,
            residual_sums[2] / n,
        ]
    });
    filtered_rows.extend(raw_rows);
    Ok(ExperimentOutput {
        table: ResultTable::from_rows(filtered_rows),
        noise_residual_t,
    })
}

const MM: f64 = 1e-3;

/// Resolve and run whatever experiment the config describes.
pub fn run_config(config: &RunConfig) -> Result<ExperimentOutput> {
    let base = Scenario::from_config(config)?;
    match &config.experiment {
        ExperimentConfig::Scenario => Ok(ExperimentOutput::plain(run_scenario(&base)?)),
        ExperimentConfig::SensorCount { family, sizes } => {
            experiment_sensor_count(layout_family(*family), sizes, &base)
        }
        ExperimentConfig::Geometry {
            axis,
            offsets_mm,
            height_mm,
        } => {
            let offsets: Vec<f64> = offsets_mm.iter().map(|d| d * MM).collect();
            let axis = match axis {
                GeometryAxisConfig::VerticalHeight => GeometryAxis::VerticalHeight,
                GeometryAxisConfig::HorizontalDistance => GeometryAxis::HorizontalDistance,
            };
            experiment_geometry(axis, &offsets, height_mm * MM, &base)
        }
        ExperimentConfig::Positions {
            height_mm,
            margin_mm,
        } => {
            let positions = five_positions(
                &base.array,
                height_mm * MM,
                margin_mm * MM,
                Vec3F64::new(0.0, 0.0, 1.0),
            )?;
            experiment_positions(positions, &base)
        }
        ExperimentConfig::FilterCompare => experiment_filter_comparison(&base),
    }
}
