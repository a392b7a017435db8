//! Run-directory artifacts: `results.csv`, `aggregates.csv`, `meta.json`.
//!
//! Rendering is fully deterministic — floats are written in their shortest
//! round-trippable form and nothing time- or environment-dependent goes into
//! the files — so identical runs produce byte-identical artifacts.

use std::path::Path;

use serde_json::json;

use crate::config::RunConfig;
use crate::error::{HarnessError, Result};
use crate::experiments::ExperimentOutput;
use crate::table::ResultTable;

/// Render the per-trial rows as CSV.
pub fn render_results_csv(table: &ResultTable) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in &table.rows {
        writer.serialize(row)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| HarnessError::Config(format!("csv flush failed: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Render the aggregate blocks as CSV.
pub fn render_aggregates_csv(table: &ResultTable) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in &table.aggregates {
        writer.serialize(row)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| HarnessError::Config(format!("csv flush failed: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Render the config echo + seed + version metadata.
pub fn render_meta_json(config: &RunConfig, output: &ExperimentOutput) -> Result<String> {
    let failed: u32 = output
        .table
        .aggregates
        .iter()
        .filter(|a| a.pose_id == "all")
        .map(|a| a.failed)
        .sum();
    let mut meta = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "master_seed": config.seed,
        "rows": output.table.rows.len(),
        "failed_rows": failed,
        "config": serde_json::to_value(config)?,
    });
    if let Some(stats) = output.noise_residual_t {
        meta["noise_residual_stats_ut"] = json!({
            "x": stats[0] / 1e-6,
            "y": stats[1] / 1e-6,
            "z": stats[2] / 1e-6,
        });
    }
    Ok(format!("{}\n", serde_json::to_string_pretty(&meta)?))
}

/// Write all three artifacts into `dir` (created if missing).
pub fn write_run_dir(
    dir: impl AsRef<Path>,
    config: &RunConfig,
    output: &ExperimentOutput,
) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let results = render_results_csv(&output.table)?;
    let aggregates = render_aggregates_csv(&output.table)?;
    let meta = render_meta_json(config, output)?;
    for (name, content) in [
        ("results.csv", results),
        ("aggregates.csv", aggregates),
        ("meta.json", meta),
    ] {
        let path = dir.join(name);
        std::fs::write(&path, content).map_err(|e| HarnessError::io(path.clone(), e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::run_config;

    #[test]
    fn results_csv_has_header_and_rows() {
        let config = RunConfig::from_toml("name = \"csv\"\ntrials = 2").unwrap();
        let output = run_config(&config).unwrap();
        let csv_text = render_results_csv(&output.table).unwrap();
        let mut lines = csv_text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "scenario,pose_id,trial,ep_mm,eo,theta_deg,converged,iterations,final_cost,error"
        );
        assert_eq!(lines.count(), 2);
    }

    #[test]
    fn meta_contains_seed_and_config_echo() {
        let config = RunConfig::from_toml("name = \"meta\"\nseed = 99").unwrap();
        let output = run_config(&config).unwrap();
        let meta = render_meta_json(&config, &output).unwrap();
        let value: serde_json::Value = serde_json::from_str(&meta).unwrap();
        assert_eq!(value["master_seed"], 99);
        assert_eq!(value["config"]["name"], "meta");
        assert_eq!(value["rows"], 1);
    }

    #[test]
    fn rendered_outputs_are_deterministic() {
        let config =
            RunConfig::from_toml("name = \"det\"\ntrials = 2\n[sensor]\nnoise_sigma_ut = 1.0")
                .unwrap();
        let a = run_config(&config).unwrap();
        let b = run_config(&config).unwrap();
        assert_eq!(
            render_results_csv(&a.table).unwrap(),
            render_results_csv(&b.table).unwrap()
        );
        assert_eq!(
            render_aggregates_csv(&a.table).unwrap(),
            render_aggregates_csv(&b.table).unwrap()
        );
        assert_eq!(
            render_meta_json(&config, &a).unwrap(),
            render_meta_json(&config, &b).unwrap()
        );
    }
}
