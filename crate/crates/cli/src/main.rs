use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

mod commands;
mod manifest;
mod plot;

/// Kinematics, gear-train, scaling and validation tools for metachronal
/// swimmer mechanisms.
#[derive(Debug, Parser)]
#[command(name = "metaswim", version)]
struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (output file for `plot`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for randomized inputs.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Suppress progress output.
    #[arg(long, short, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tip trajectories and angle traces for every appendage.
    Simulate(SimulateArgs),
    /// Gear sizing report.
    Gears(GearsArgs),
    /// Fixed-rate servo command schedule.
    Schedule(ScheduleArgs),
    /// Reynolds-number scaling between animal and model.
    Scale(ScaleArgs),
    /// Compare marker-derived angles with reference traces.
    Validate(ValidateArgs),
    /// Render CSV files to SVG.
    Plot(PlotArgs),
}

#[derive(Debug, Args, Serialize)]
struct SimulateArgs {
    /// Samples per period, first and last one period apart.
    #[arg(long, default_value_t = 200)]
    samples: usize,
    /// Phase lag between neighbouring appendages, cycles.
    #[arg(long)]
    lag: Option<f64>,
    /// Beat frequency, Hz.
    #[arg(long)]
    frequency: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
struct GearsArgs {
    /// Protopodite length, m.
    #[arg(long, default_value_t = metaswim_core::kinematics::P1_X1_M)]
    x1: f64,
    /// Gears in the chain.
    #[arg(long, default_value_t = 4)]
    n_gears: u32,
    /// Tooth count, or one count per gear separated by commas.
    #[arg(long, value_delimiter = ',', default_value = "12")]
    teeth: Vec<u32>,
}

#[derive(Debug, Args, Serialize)]
struct ScheduleArgs {
    /// Schedule length, s. Defaults to one beat period.
    #[arg(long)]
    duration: Option<f64>,
    /// Controller period, ms.
    #[arg(long)]
    dt_ms: Option<f64>,
    /// Gear-up between the β servo and the first distal gear.
    #[arg(long)]
    amp: Option<f64>,
    /// Gear-up between the α servo and the protopodite.
    #[arg(long)]
    alpha_amp: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Preset {
    Krill,
}

#[derive(Debug, Args, Serialize)]
struct ScaleArgs {
    #[arg(long, value_enum, default_value_t = Preset::Krill)]
    preset: Preset,
    /// Length multiplier from animal to model.
    #[arg(long, default_value_t = 10.0)]
    factor: f64,
    /// Stroke amplitude override, degrees.
    #[arg(long)]
    theta_deg: Option<f64>,
    /// Beat frequency override, Hz.
    #[arg(long)]
    frequency: Option<f64>,
    /// Appendage length override, m.
    #[arg(long)]
    length: Option<f64>,
    /// Kinematic viscosity override, m²/s.
    #[arg(long)]
    viscosity: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
struct ValidateArgs {
    /// Marker CSV (t,bx1,by1,bx2,by2,ax,ay,bx,by,tx,ty).
    #[arg(long, required_unless_present = "synthetic")]
    markers: Option<PathBuf>,
    /// Reference α trace (t,angle_deg).
    #[arg(long)]
    ref_alpha: Option<PathBuf>,
    /// Reference β trace (t,angle_deg).
    #[arg(long)]
    ref_beta: Option<PathBuf>,
    /// Generate markers and references from the configured gait first.
    #[arg(long, conflicts_with_all = ["markers", "ref_alpha", "ref_beta"])]
    synthetic: bool,
    /// Appendage used for synthetic data, 1-based.
    #[arg(long, default_value_t = 1)]
    appendage: usize,
    /// Synthetic frame count.
    #[arg(long, default_value_t = 1000)]
    frames: usize,
    /// Synthetic frame rate, Hz.
    #[arg(long, default_value_t = 100.0)]
    fps: f64,
    /// Compare only the first complete stroke cycle of the measurement.
    #[arg(long)]
    one_cycle: bool,
    /// Shift the references so their first α maximum meets the measured one.
    #[arg(long)]
    align_max: bool,
}

#[derive(Debug, Args, Serialize)]
struct PlotArgs {
    /// CSV files; `t,x,y` files draw as closed loops, others as traces
    /// against their first column.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    title: Option<String>,
    #[arg(long, default_value_t = 640)]
    width: u32,
    #[arg(long, default_value_t = 400)]
    height: u32,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand) {
                e.exit();
            }
            let message = e.kind().to_string();
            let detail = e.to_string();
            let first = detail
                .lines()
                .find(|l| !l.trim().is_empty())
                .map(|l| l.trim_start_matches("error: ").to_string())
                .unwrap_or(message);
            report_error("usage", &first);
            return ExitCode::from(2);
        }
    };

    env_logger::Builder::new()
        .filter_level(if cli.quiet {
            log::LevelFilter::Error
        } else {
            log::LevelFilter::Warn
        })
        .format_timestamp(None)
        .init();

    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report_error(error_kind(&e), &single_line(&e));
            ExitCode::FAILURE
        }
    }
}

fn error_kind(e: &anyhow::Error) -> &'static str {
    for cause in e.chain() {
        if let Some(core) = cause.downcast_ref::<metaswim_core::Error>() {
            return core.kind();
        }
        if cause.is::<std::io::Error>() {
            return "io";
        }
        if cause.is::<serde_json::Error>() {
            return "io";
        }
    }
    "input"
}

fn single_line(e: &anyhow::Error) -> String {
    format!("{e:#}").replace(['\n', '\r'], " ")
}

/// One JSON object on one line of stderr.
fn report_error(kind: &str, message: &str) {
    let line = serde_json::json!({ "error": kind, "message": message });
    eprintln!("{line}");
}
