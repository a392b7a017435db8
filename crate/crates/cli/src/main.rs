//! `magloc`: simulate magnetometer-array readings, localize a magnet from a
//! recorded stream, and run the built-in comparison experiments.
//!
//! Boundary units are millimeters, microtesla, and degrees; file formats and
//! the library stay SI.

use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use magloc_core::field_model::MagnetPose;
use magloc_core::localization::{localize, InitStrategy, SolverConfig};
use magloc_core::measurement::{
    load_stream, moving_average_filter, save_stream, simulate_stream, warmup_trim,
};
use magloc_core::metrics;
use magloc_core::sensor_array::{
    load_array, paper_layouts, save_array, LayoutFamily, PaperLayoutOptions,
};
use magloc_core::{MagnetSpecF64, SensorArrayF64, SensorModelF64, Vec3F64};
use magloc_harness::config::{ExperimentConfig, NoiseSigmaUt, RunConfig};
use magloc_harness::output::write_run_dir;
use magloc_harness::presets::{load_preset, preset_names};
use magloc_harness::run_config;

const MM: f64 = 1e-3;
const UT: f64 = 1e-6;

#[derive(Parser)]
#[command(
    name = "magloc",
    about = "Magnet localization from magnetometer arrays: simulator, solver, experiments",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a stream of synthetic readings and write it as CSV.
    Simulate(SimulateArgs),
    /// Estimate the magnet pose from a recorded reading stream.
    Localize(LocalizeArgs),
    /// Run an experiment preset or config file into a run directory.
    Experiment(ExperimentArgs),
    /// Run the paired filtered-vs-raw comparison.
    FilterCompare(FilterCompareArgs),
}

#[derive(Args)]
struct ArrayArgs {
    /// Grid layout as family:count, e.g. four_by_m:5 or two_by_n:8.
    #[arg(long, default_value = "four_by_m:5", conflicts_with = "array_file")]
    layout: String,
    /// Load the array from a file instead (one "x y z" meters per line).
    #[arg(long)]
    array_file: Option<PathBuf>,
    /// Allow layout counts outside the studied sets.
    #[arg(long)]
    permissive: bool,
}

impl ArrayArgs {
    fn build(&self) -> anyhow::Result<SensorArrayF64> {
        if let Some(path) = &self.array_file {
            return Ok(load_array(path)?);
        }
        let (family, count) = parse_layout(&self.layout)?;
        Ok(paper_layouts(
            family,
            count,
            PaperLayoutOptions {
                origin: Vec3F64::zero(),
                permissive: self.permissive,
                pitch_override: None,
            },
        )?)
    }
}

#[derive(Args)]
struct MagnetArgs {
    /// Cylinder length, millimeters.
    #[arg(long, default_value_t = 2.0)]
    length_mm: f64,
    /// Cylinder radius, millimeters.
    #[arg(long, default_value_t = 1.0)]
    radius_mm: f64,
    /// Axial magnetization, A/m.
    #[arg(long, default_value_t = 8e5)]
    magnetization: f64,
    /// Relative permeability of the medium.
    #[arg(long, default_value_t = 1.0)]
    mu_r: f64,
}

impl MagnetArgs {
    fn build(&self) -> anyhow::Result<MagnetSpecF64> {
        Ok(MagnetSpecF64::new(
            self.length_mm * MM,
            self.radius_mm * MM,
            self.magnetization,
            self.mu_r,
        )?)
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    array: ArrayArgs,
    #[command(flatten)]
    magnet: MagnetArgs,
    /// True magnet position as x,y,z in millimeters.
    #[arg(long, value_parser = parse_triple, default_value = "0,0,30")]
    position_mm: [f64; 3],
    /// True magnet orientation as m,n,p (normalized internally).
    #[arg(long, value_parser = parse_triple, default_value = "0,0,1")]
    orientation: [f64; 3],
    /// Per-axis Gaussian noise sigma, microtesla.
    #[arg(long, default_value_t = 0.0)]
    noise_sigma: f64,
    /// Disable ADC quantization.
    #[arg(long)]
    no_quantization: bool,
    /// ADC resolution, microtesla per LSB.
    #[arg(long, default_value_t = 0.161)]
    resolution: f64,
    /// Full-scale range, microtesla.
    #[arg(long, default_value_t = 44000.0)]
    full_scale: f64,
    /// Number of frames to simulate.
    #[arg(long, default_value_t = 1)]
    frames: usize,
    /// RNG seed.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the generated array to this file.
    #[arg(long)]
    save_array: Option<PathBuf>,
}

#[derive(Args)]
struct LocalizeArgs {
    /// Reading stream CSV (as written by `simulate`).
    #[arg(long)]
    readings: PathBuf,
    #[command(flatten)]
    array: ArrayArgs,
    #[command(flatten)]
    magnet: MagnetArgs,
    /// Drop this many warmup frames before anything else.
    #[arg(long, default_value_t = 0)]
    warmup: usize,
    /// Apply a moving-average filter with this window (1 = off).
    #[arg(long, default_value_t = 1)]
    filter_window: usize,
    /// Initialization strategy: grid or centroid.
    #[arg(long, default_value = "grid")]
    strategy: String,
    /// Multistart count.
    #[arg(long, default_value_t = 8)]
    multistart: usize,
    /// Maximum solver iterations per start.
    #[arg(long, default_value_t = 200)]
    max_iterations: usize,
    /// True position x,y,z in millimeters (enables error metrics).
    #[arg(long, value_parser = parse_triple)]
    truth_position_mm: Option<[f64; 3]>,
    /// True orientation m,n,p (enables error metrics).
    #[arg(long, value_parser = parse_triple)]
    truth_orientation: Option<[f64; 3]>,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Preset name or path to a config file.
    config: String,
    #[command(flatten)]
    overrides: RunOverrides,
}

#[derive(Args)]
struct FilterCompareArgs {
    /// Preset name or config file; defaults to the filter_compare preset.
    #[arg(default_value = "filter_compare")]
    config: String,
    #[command(flatten)]
    overrides: RunOverrides,
}

#[derive(Args)]
struct RunOverrides {
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the per-axis noise sigma, microtesla.
    #[arg(long)]
    noise_sigma: Option<f64>,
    /// Override the trials per pose.
    #[arg(long)]
    trials: Option<u32>,
    /// Run directory for results.csv / aggregates.csv / meta.json.
    #[arg(long, default_value = "runs")]
    out_dir: PathBuf,
}

impl RunOverrides {
    fn apply(&self, config: &mut RunConfig) {
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(sigma) = self.noise_sigma {
            config.sensor.noise_sigma_ut = NoiseSigmaUt::Isotropic(sigma);
        }
        if let Some(trials) = self.trials {
            config.trials = trials;
        }
    }
}

fn parse_triple(text: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected x,y,z — got {text:?}"));
    }
    let mut out = [0.0; 3];
    for (slot, part) in out.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse()
            .map_err(|_| format!("cannot parse {part:?} as a number"))?;
    }
    Ok(out)
}

fn parse_layout(text: &str) -> anyhow::Result<(LayoutFamily, usize)> {
    let (family, count) = text
        .split_once(':')
        .with_context(|| format!("layout must be family:count, got {text:?}"))?;
    let family = match family {
        "four_by_m" | "4xm" => LayoutFamily::FourByM,
        "two_by_n" | "2xn" => LayoutFamily::TwoByN,
        other => bail!("unknown layout family {other:?} (use four_by_m or two_by_n)"),
    };
    let count: usize = count
        .parse()
        .with_context(|| format!("bad layout count in {text:?}"))?;
    Ok((family, count))
}

fn load_run_config(source: &str) -> anyhow::Result<RunConfig> {
    if preset_names().contains(&source) {
        return Ok(load_preset(source)?);
    }
    let path = PathBuf::from(source);
    if path.exists() {
        return Ok(RunConfig::from_path(&path)?);
    }
    bail!(
        "{source:?} is neither a preset ({}) nor a config file",
        preset_names().join(", ")
    );
}

fn run_simulate(args: SimulateArgs) -> anyhow::Result<()> {
    let array = args.array.build()?;
    let magnet = args.magnet.build()?;
    let pose = MagnetPose::from_direction(
        Vec3F64::from_array(args.position_mm) * MM,
        Vec3F64::from_array(args.orientation),
    )?;
    let model = SensorModelF64::new(args.resolution * UT, args.full_scale * UT)?
        .with_noise_sigma(args.noise_sigma * UT)?
        .with_quantization(!args.no_quantization);
    let stream = simulate_stream(&array, &pose, &magnet, &model, args.frames, args.seed)?;
    if let Some(path) = &args.save_array {
        save_array(&array, path)?;
    }
    match &args.out {
        Some(path) => {
            save_stream(&stream, path)?;
            eprintln!(
                "wrote {} frames x {} sensors to {}",
                stream.len(),
                array.len(),
                path.display()
            );
        }
        None => print!("{}", magloc_core::measurement::stream_to_csv(&stream)),
    }
    Ok(())
}

fn run_localize(args: LocalizeArgs) -> anyhow::Result<()> {
    let array = args.array.build()?;
    let magnet = args.magnet.build()?;
    let mut stream = load_stream::<f64>(&args.readings)?;
    if stream.sensor_count() != array.len() {
        bail!(
            "stream has {} sensors but the array has {}",
            stream.sensor_count(),
            array.len()
        );
    }
    if args.warmup > 0 {
        stream = warmup_trim(&stream, args.warmup)?;
    }
    if args.filter_window > 1 {
        stream = moving_average_filter(&stream, args.filter_window)?;
    }
    let frame = stream
        .last_frame()
        .context("the stream contains no frames")?;

    let config = SolverConfig {
        max_iterations: args.max_iterations,
        multistart_count: args.multistart,
        init_strategy: match args.strategy.as_str() {
            "grid" => InitStrategy::Grid,
            "centroid" => InitStrategy::Centroid,
            other => bail!("unknown strategy {other:?} (use grid or centroid)"),
        },
        ..SolverConfig::default()
    };
    let report = localize(frame, &array, &magnet, &config)?;

    let truth = match (args.truth_position_mm, args.truth_orientation) {
        (Some(p), Some(o)) => Some(MagnetPose::from_direction(
            Vec3F64::from_array(p) * MM,
            Vec3F64::from_array(o),
        )?),
        (None, None) => None,
        _ => bail!("provide both --truth-position-mm and --truth-orientation, or neither"),
    };
    let errors = truth
        .as_ref()
        .map(|t| metrics::pose_error(&report.pose, t))
        .transpose()?;

    let position = report.pose.position();
    let orientation = report.pose.orientation();
    if args.json {
        let mut value = serde_json::json!({
            "position_mm": [position.x / MM, position.y / MM, position.z / MM],
            "orientation": [orientation.x, orientation.y, orientation.z],
            "converged": report.converged,
            "termination": format!("{:?}", report.termination_reason),
            "iterations": report.iterations,
            "final_cost": report.final_cost,
            "residual_rms_ut": report.residual_rms / UT,
        });
        if let Some(e) = errors {
            value["error"] = serde_json::json!({
                "ep_mm": e.position_error / MM,
                "eo": e.orientation_error,
                "theta_deg": e.orientation_angle.to_degrees(),
            });
        }
        println!("{}", serde_json::to_string_pretty(&value)?);
    } else {
        println!(
            "position  [{:+.3}, {:+.3}, {:+.3}] mm",
            position.x / MM,
            position.y / MM,
            position.z / MM
        );
        println!(
            "direction [{:+.6}, {:+.6}, {:+.6}]",
            orientation.x, orientation.y, orientation.z
        );
        println!(
            "converged {} ({:?}) after {} iterations, cost {:.3e} T^2, residual rms {:.4} uT",
            report.converged,
            report.termination_reason,
            report.iterations,
            report.final_cost,
            report.residual_rms / UT
        );
        if let Some(e) = errors {
            println!(
                "vs truth: Ep {:.4} mm, Eo {:.6}, theta {:.4} deg",
                e.position_error / MM,
                e.orientation_error,
                e.orientation_angle.to_degrees()
            );
        }
    }
    if !report.converged {
        eprintln!("warning: solver did not converge");
    }
    Ok(())
}

fn run_experiment(source: &str, overrides: &RunOverrides, force_filter: bool) -> anyhow::Result<()> {
    let mut config = load_run_config(source)?;
    if force_filter {
        config.experiment = ExperimentConfig::FilterCompare;
        config.filter.enabled = true;
    }
    overrides.apply(&mut config);
    let output = run_config(&config)?;
    let dir = overrides.out_dir.join(&config.name);
    write_run_dir(&dir, &config, &output)?;
    println!("run {} -> {}", config.name, dir.display());
    for aggregate in &output.table.aggregates {
        if aggregate.pose_id == "all" && output.table.aggregates.len() > 2 {
            continue;
        }
        let ep = aggregate
            .ep_mm_mean
            .map_or("-".to_string(), |v| format!("{v:.4}"));
        let theta = aggregate
            .theta_deg_mean
            .map_or("-".to_string(), |v| format!("{v:.4}"));
        println!(
            "  {:<28} {:>5} rows  mean Ep {:>10} mm  mean theta {:>9} deg  ({} failed, {} converged)",
            format!("{}:{}", aggregate.scenario, aggregate.pose_id),
            aggregate.rows,
            ep,
            theta,
            aggregate.failed,
            aggregate.converged
        );
    }
    Ok(())
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Simulate(args) => run_simulate(args),
        Command::Localize(args) => run_localize(args),
        Command::Experiment(args) => run_experiment(&args.config, &args.overrides, false),
        Command::FilterCompare(args) => run_experiment(&args.config, &args.overrides, true),
    }
}
