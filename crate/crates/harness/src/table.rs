//! Result tables: one row per trial plus per-pose and per-scenario
//! aggregates.
//!
//! Rows carry boundary units (millimeters, degrees) so the emitted CSV
//! matches what the tables in reports use; aggregates are computed directly
//! over the row values in row order, which keeps an independent recompute
//! from the CSV bit-exact.

use serde::{Deserialize, Serialize};

/// One (scenario, pose, trial) cell. Metric fields are empty on failed
/// trials; `error` says why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub scenario: String,
    pub pose_id: String,
    pub trial: u32,
    /// Position error, millimeters.
    pub ep_mm: Option<f64>,
    /// Orientation vector error, dimensionless.
    pub eo: Option<f64>,
    /// Folded orientation angle, degrees.
    pub theta_deg: Option<f64>,
    pub converged: bool,
    pub iterations: u32,
    pub final_cost: Option<f64>,
    #[serde(default)]
    pub error: Option<String>,
}

/// Mean / max / min block for one pose (or the whole scenario when
/// `pose_id = "all"`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub scenario: String,
    pub pose_id: String,
    /// Rows aggregated (failed rows excluded).
    pub rows: u32,
    pub failed: u32,
    pub converged: u32,
    pub ep_mm_mean: Option<f64>,
    pub ep_mm_max: Option<f64>,
    pub ep_mm_min: Option<f64>,
    pub eo_mean: Option<f64>,
    pub eo_max: Option<f64>,
    pub eo_min: Option<f64>,
    pub theta_deg_mean: Option<f64>,
    pub theta_deg_max: Option<f64>,
    pub theta_deg_min: Option<f64>,
}

/// All rows of a run plus their aggregate blocks.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultTable {
    pub rows: Vec<TrialRow>,
    pub aggregates: Vec<AggregateRow>,
}

impl ResultTable {
    pub fn from_rows(rows: Vec<TrialRow>) -> Self {
        let aggregates = aggregate_rows(&rows);
        Self { rows, aggregates }
    }

    /// Concatenate tables (rows in order) and rebuild the aggregates.
    pub fn concat(tables: impl IntoIterator<Item = ResultTable>) -> Self {
        let rows: Vec<TrialRow> = tables.into_iter().flat_map(|t| t.rows).collect();
        Self::from_rows(rows)
    }

    /// Aggregate block for one (scenario, pose) pair.
    pub fn pose_aggregate(&self, scenario: &str, pose_id: &str) -> Option<&AggregateRow> {
        self.aggregates
            .iter()
            .find(|a| a.scenario == scenario && a.pose_id == pose_id)
    }

    /// Scenario-level aggregate (`pose_id = "all"`).
    pub fn scenario_aggregate(&self, scenario: &str) -> Option<&AggregateRow> {
        self.pose_aggregate(scenario, "all")
    }
}

#[derive(Default)]
struct Accumulator {
    rows: u32,
    failed: u32,
    converged: u32,
    ep: Stats,
    eo: Stats,
    theta: Stats,
}

#[derive(Default)]
struct Stats {
    count: u32,
    sum: f64,
    max: f64,
    min: f64,
}

impl Stats {
    fn push(&mut self, value: f64) {
        if self.count == 0 {
            self.max = value;
            self.min = value;
        } else {
            self.max = self.max.max(value);
            self.min = self.min.min(value);
        }
        self.sum += value;
        self.count += 1;
    }

    fn mean(&self) -> Option<f64> {
        (self.count > 0).then(|| self.sum / f64::from(self.count))
    }

    fn max(&self) -> Option<f64> {
        (self.count > 0).then_some(self.max)
    }

    fn min(&self) -> Option<f64> {
        (self.count > 0).then_some(self.min)
    }
}

impl Accumulator {
    fn push(&mut self, row: &TrialRow) {
        self.rows += 1;
        if row.error.is_some() {
            self.failed += 1;
            return;
        }
        if row.converged {
            self.converged += 1;
        }
        if let Some(v) = row.ep_mm {
            self.ep.push(v);
        }
        if let Some(v) = row.eo {
            self.eo.push(v);
        }
        if let Some(v) = row.theta_deg {
            self.theta.push(v);
        }
    }

    fn finish(self, scenario: String, pose_id: String) -> AggregateRow {
        AggregateRow {
            scenario,
            pose_id,
            rows: self.rows - self.failed,
            failed: self.failed,
            converged: self.converged,
            ep_mm_mean: self.ep.mean(),
            ep_mm_max: self.ep.max(),
            ep_mm_min: self.ep.min(),
            eo_mean: self.eo.mean(),
            eo_max: self.eo.max(),
            eo_min: self.eo.min(),
            theta_deg_mean: self.theta.mean(),
            theta_deg_max: self.theta.max(),
            theta_deg_min: self.theta.min(),
        }
    }
}

/// Per-(scenario, pose) aggregates in first-appearance order, followed by a
/// per-scenario `all` block.
pub fn aggregate_rows(rows: &[TrialRow]) -> Vec<AggregateRow> {
    let mut pose_keys: Vec<(String, String)> = Vec::new();
    let mut pose_accs: Vec<Accumulator> = Vec::new();
    let mut scenario_keys: Vec<String> = Vec::new();
    let mut scenario_accs: Vec<Accumulator> = Vec::new();
    for row in rows {
        let pose_key = (row.scenario.clone(), row.pose_id.clone());
        let pose_slot = match pose_keys.iter().position(|k| *k == pose_key) {
            Some(i) => i,
            None => {
                pose_keys.push(pose_key);
                pose_accs.push(Accumulator::default());
                pose_keys.len() - 1
            }
        };
        pose_accs[pose_slot].push(row);
        let scenario_slot = match scenario_keys.iter().position(|k| *k == row.scenario) {
            Some(i) => i,
            None => {
                scenario_keys.push(row.scenario.clone());
                scenario_accs.push(Accumulator::default());
                scenario_keys.len() - 1
            }
        };
        scenario_accs[scenario_slot].push(row);
    }
    let mut out: Vec<AggregateRow> = pose_keys
        .into_iter()
        .zip(pose_accs)
        .map(|((scenario, pose_id), acc)| acc.finish(scenario, pose_id))
        .collect();
    out.extend(
        scenario_keys
            .into_iter()
            .zip(scenario_accs)
            .map(|(scenario, acc)| acc.finish(scenario, "all".to_string())),
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(scenario: &str, pose: &str, trial: u32, ep: f64) -> TrialRow {
        TrialRow {
            scenario: scenario.to_string(),
            pose_id: pose.to_string(),
            trial,
            ep_mm: Some(ep),
            eo: Some(0.1),
            theta_deg: Some(1.0),
            converged: true,
            iterations: 10,
            final_cost: Some(1e-18),
            error: None,
        }
    }

    fn failed_row(scenario: &str, pose: &str, trial: u32) -> TrialRow {
        TrialRow {
            scenario: scenario.to_string(),
            pose_id: pose.to_string(),
            trial,
            ep_mm: None,
            eo: None,
            theta_deg: None,
            converged: false,
            iterations: 0,
            final_cost: None,
            error: Some("boom".to_string()),
        }
    }

    #[test]
    fn aggregates_are_per_pose_and_per_scenario() {
        let table = ResultTable::from_rows(vec![
            row("s", "a", 0, 1.0),
            row("s", "a", 1, 3.0),
            row("s", "b", 0, 5.0),
        ]);
        assert_eq!(table.aggregates.len(), 3); // a, b, all
        let a = table.pose_aggregate("s", "a").unwrap();
        assert_eq!(a.ep_mm_mean, Some(2.0));
        assert_eq!(a.ep_mm_max, Some(3.0));
        assert_eq!(a.ep_mm_min, Some(1.0));
        let all = table.scenario_aggregate("s").unwrap();
        assert_eq!(all.rows, 3);
        assert_eq!(all.ep_mm_mean, Some(3.0));
    }

    #[test]
    fn failed_rows_do_not_contaminate_aggregates() {
        let table = ResultTable::from_rows(vec![
            row("s", "a", 0, 2.0),
            failed_row("s", "a", 1),
        ]);
        let a = table.pose_aggregate("s", "a").unwrap();
        assert_eq!(a.rows, 1);
        assert_eq!(a.failed, 1);
        assert_eq!(a.ep_mm_mean, Some(2.0));
        assert_eq!(a.ep_mm_max, Some(2.0));
    }

    #[test]
    fn concat_preserves_row_order() {
        let t1 = ResultTable::from_rows(vec![row("s1", "a", 0, 1.0)]);
        let t2 = ResultTable::from_rows(vec![row("s2", "a", 0, 2.0)]);
        let merged = ResultTable::concat([t1, t2]);
        assert_eq!(merged.rows.len(), 2);
        assert_eq!(merged.rows[0].scenario, "s1");
        assert_eq!(merged.rows[1].scenario, "s2");
        assert!(merged.scenario_aggregate("s1").is_some());
        assert!(merged.scenario_aggregate("s2").is_some());
    }
}
