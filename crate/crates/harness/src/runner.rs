//! Trial execution: simulate, condition, localize, score.

use magloc_core::localization::localize;
use magloc_core::measurement::{
    moving_average_filter, simulate_stream, warmup_trim, ReadingStream,
};
use magloc_core::metrics;
use magloc_core::ReadingSetF64;

use crate::error::Result;
use crate::scenario::{LabeledPose, Scenario};
use crate::seeding::trial_seed;
use crate::table::{ResultTable, TrialRow};

const MM: f64 = 1e-3;

/// Run every (pose, trial) cell of a scenario.
///
/// Per-trial errors are recorded as failed rows; they never abort the table.
/// The output is fully determined by the scenario and its master seed.
pub fn run_scenario(scenario: &Scenario) -> Result<ResultTable> {
    scenario.validate()?;
    let mut rows = Vec::with_capacity(scenario.poses.len() * scenario.trials as usize);
    for (pose_index, labeled) in scenario.poses.iter().enumerate() {
        for trial in 0..scenario.trials {
            rows.push(run_trial(scenario, labeled, pose_index as u32, trial));
        }
    }
    Ok(ResultTable::from_rows(rows))
}

/// Simulate one trial's stream, apply the conditioning stages, and return
/// the frame the solver sees (after optional warmup trim and filtering).
pub fn trial_stream(
    scenario: &Scenario,
    pose: &LabeledPose,
    pose_index: u32,
    trial: u32,
) -> Result<ReadingStream<f64>> {
    let seed = trial_seed(scenario.master_seed, &scenario.name, pose_index, trial);
    let mut stream = simulate_stream(
        &scenario.array,
        &pose.pose,
        &scenario.magnet,
        &scenario.sensor,
        scenario.frames,
        seed,
    )?;
    if scenario.warmup > 0 {
        stream = warmup_trim(&stream, scenario.warmup)?;
    }
    if scenario.filter_enabled {
        stream = moving_average_filter(&stream, scenario.filter_window)?;
    }
    Ok(stream)
}

/// Localize one frame and score it against the truth.
pub fn score_frame(
    scenario: &Scenario,
    pose: &LabeledPose,
    trial: u32,
    frame: &ReadingSetF64,
) -> TrialRow {
    let outcome = localize(frame, &scenario.array, &scenario.magnet, &scenario.solver)
        .and_then(|report| {
            let errors = metrics::pose_error(&report.pose, &pose.pose)?;
            Ok((report, errors))
        });
    match outcome {
        Ok((report, errors)) => TrialRow {
            scenario: scenario.name.clone(),
            pose_id: pose.label.clone(),
            trial,
            ep_mm: Some(errors.position_error / MM),
            eo: Some(errors.orientation_error),
            theta_deg: Some(errors.orientation_angle.to_degrees()),
            converged: report.converged,
            iterations: report.iterations as u32,
            final_cost: Some(report.final_cost),
            error: None,
        },
        Err(err) => TrialRow {
            scenario: scenario.name.clone(),
            pose_id: pose.label.clone(),
            trial,
            ep_mm: None,
            eo: None,
            theta_deg: None,
            converged: false,
            iterations: 0,
            final_cost: None,
            error: Some(err.to_string()),
        },
    }
}

fn run_trial(scenario: &Scenario, pose: &LabeledPose, pose_index: u32, trial: u32) -> TrialRow {
    match trial_stream(scenario, pose, pose_index, trial) {
        Ok(stream) => {
            let frame = stream
                .last_frame()
                .expect("scenario validation guarantees at least one frame")
                .clone();
            score_frame(scenario, pose, trial, &frame)
        }
        Err(err) => TrialRow {
            scenario: scenario.name.clone(),
            pose_id: pose.label.clone(),
            trial,
            ep_mm: None,
            eo: None,
            theta_deg: None,
            converged: false,
            iterations: 0,
            final_cost: None,
            error: Some(err.to_string()),
        },
    }
}
