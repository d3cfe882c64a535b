use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use metaswim_core::csvio::{format_table, write_file};
use metaswim_core::geartrain::{apply_backlash, GearChain};
use metaswim_core::kinematics::{gamma_profile, pleopod_tip};
use metaswim_core::scaling::{length_for_reynolds, reynolds, scaled_params, tip_speed, KRILL_APPENDAGE_RE};
use metaswim_core::schedule::{build_schedule, export_schedule};
use metaswim_core::validation::{angles_from_markers, compare_traces, cycle_bounds, markers_for_pose, read_markers};
use metaswim_core::waveforms::{alpha_profile, beta_profile};
use metaswim_core::{
    AngleTrace, GearSizing, MarkerTrace, ReConvention, SimConfig, SwimmerParams, TipTrajectory, TraceMetrics, Vec2,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::manifest::RunManifest;
use crate::plot;
use crate::{Cli, Command, GearsArgs, PlotArgs, Preset, ScaleArgs, ScheduleArgs, SimulateArgs, ValidateArgs};

const ANGLES_HEADER: [&str; 4] = ["t", "alpha_deg", "beta_deg", "gamma_deg"];

struct Ctx<'a> {
    cli: &'a Cli,
    config: SimConfig,
}

impl Ctx<'_> {
    fn out_dir(&self) -> Result<PathBuf> {
        let dir = self.cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
        std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(dir)
    }

    fn manifest(&self, args: &impl Serialize) -> Result<RunManifest> {
        let name = match self.cli.command {
            Command::Simulate(_) => "simulate",
            Command::Gears(_) => "gears",
            Command::Schedule(_) => "schedule",
            Command::Scale(_) => "scale",
            Command::Validate(_) => "validate",
            Command::Plot(_) => "plot",
        };
        Ok(RunManifest::new(
            name,
            self.cli.seed,
            self.cli.config.clone(),
            self.config.clone(),
            serde_json::to_value(args)?,
        ))
    }

    fn say(&self, text: &str) {
        if !self.cli.quiet {
            print!("{text}");
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let config = match &cli.config {
        Some(path) => SimConfig::load(path)?,
        None => SimConfig::default(),
    };
    let ctx = Ctx { cli, config };
    match &cli.command {
        Command::Simulate(a) => simulate(&ctx, a),
        Command::Gears(a) => gears(&ctx, a),
        Command::Schedule(a) => schedule(&ctx, a),
        Command::Scale(a) => scale(&ctx, a),
        Command::Validate(a) => validate(&ctx, a),
        Command::Plot(a) => plot_cmd(&ctx, a),
    }
}

fn simulate(ctx: &Ctx, args: &SimulateArgs) -> Result<()> {
    if args.samples < 2 {
        bail!("--samples must be at least 2, got {}", args.samples);
    }
    let mut cfg = ctx.config.clone();
    if let Some(lag) = args.lag {
        cfg.gait.lag_cycles = lag;
    }
    if let Some(f) = args.frequency {
        cfg.gait.frequency_hz = f;
    }
    cfg.gait.validate()?;

    let dir = ctx.out_dir()?;
    let mut manifest = ctx.manifest(args)?;
    manifest.config = cfg.clone();
    manifest.inputs.extend(ctx.cli.config.clone());
    let mut summary = String::new();
    let n = args.samples;
    for k in 1..=cfg.gait.n_appendages {
        let a = alpha_profile(k, &cfg.gait)?;
        let b = beta_profile(k, &cfg.gait)?;
        let geom = cfg.appendage_geometry(k)?;
        let period = a.period();
        let times: Vec<f64> = (0..n).map(|i| period * i as f64 / (n - 1) as f64).collect();
        let alpha: Vec<f64> = times.iter().map(|&t| a.sample(t)).collect();
        let mut beta: Vec<f64> = times.iter().map(|&t| b.sample(t)).collect();
        if cfg.backlash_deg > 0.0 {
            beta = periodic_backlash(&beta, cfg.backlash_deg)?;
        }

        let samples = times
            .iter()
            .zip(alpha.iter().zip(&beta))
            .map(|(&t, (&al, &be))| Ok((t, pleopod_tip(&geom, al, be)?)))
            .collect::<metaswim_core::Result<Vec<(f64, Vec2)>>>()?;
        let traj = TipTrajectory { samples, period };
        let traj_path = dir.join(format!("p{k}_trajectory.csv"));
        traj.write_csv(&traj_path)?;

        let rows = times
            .iter()
            .zip(alpha.iter().zip(&beta))
            .map(|(&t, (&al, &be))| Ok([t, al, be, gamma_profile(a.stroke_phase(t), &cfg.gamma)?]))
            .collect::<metaswim_core::Result<Vec<[f64; 4]>>>()?;
        let angles_path = dir.join(format!("p{k}_angles.csv"));
        write_file(&angles_path, &format_table(&ANGLES_HEADER, rows.iter().map(|r| &r[..])))?;

        writeln!(
            summary,
            "P{k}: closure_gap_m={:.3e} max_radius_m={:.6}",
            traj.closure_gap(),
            traj.max_radius()
        )?;
        manifest.outputs.push(traj_path);
        manifest.outputs.push(angles_path);
    }
    manifest.write(&dir.join("simulate.manifest.json"))?;
    ctx.say(&summary);
    Ok(())
}

/// Steady-state backlash response over one sampled period whose last sample
/// repeats the first: the play operator is run over one extra cycle first.
fn periodic_backlash(trace: &[f64], deadband: f64) -> Result<Vec<f64>> {
    let warm: Vec<f64> = trace[..trace.len() - 1].iter().chain(trace).copied().collect();
    let out = apply_backlash(&warm, deadband)?;
    Ok(out[trace.len() - 1..].to_vec())
}

fn gears(ctx: &Ctx, args: &GearsArgs) -> Result<()> {
    let teeth = match args.teeth.as_slice() {
        [one] => vec![*one; args.n_gears as usize],
        list if list.len() == args.n_gears as usize => list.to_vec(),
        list => bail!("--teeth has {} values, expected 1 or {}", list.len(), args.n_gears),
    };
    let sizing = GearSizing::new(args.x1, args.n_gears, teeth[0])?;
    let chain = GearChain::from_teeth(&teeth, sizing.modulus)?;
    let ratio = chain.composite_ratio();
    let sign = if ratio < 0.0 { "negative" } else { "positive" };

    let mut report = String::new();
    writeln!(report, "x1_m = {}", args.x1)?;
    writeln!(report, "n_gears = {}", args.n_gears)?;
    writeln!(
        report,
        "teeth = {}",
        teeth.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
    )?;
    writeln!(report, "primitive_radius_m = {}", sizing.primitive_radius)?;
    writeln!(report, "modulus_mm = {}", sizing.modulus * 1e3)?;
    writeln!(report, "composite_ratio = {ratio}")?;
    writeln!(report, "composite_sign = {sign}")?;
    print!("{report}");

    if ctx.cli.out.is_some() {
        let dir = ctx.out_dir()?;
        let path = dir.join("gears.txt");
        write_file(&path, &report)?;
        let mut manifest = ctx.manifest(args)?;
        manifest.outputs.push(path);
        manifest.write(&dir.join("gears.manifest.json"))?;
    }
    Ok(())
}

fn schedule(ctx: &Ctx, args: &ScheduleArgs) -> Result<()> {
    let cfg = &ctx.config;
    let mut opts = cfg.schedule;
    if let Some(ms) = args.dt_ms {
        opts.dt = ms * 1e-3;
    }
    if let Some(amp) = args.amp {
        opts.beta_amplification = amp;
    }
    if let Some(amp) = args.alpha_amp {
        opts.alpha_amplification = amp;
    }
    let duration = args.duration.unwrap_or(1.0 / cfg.gait.frequency_hz);
    let s = build_schedule(&cfg.gait, &cfg.chains, duration, &opts)?;

    let dir = ctx.out_dir()?;
    let path = dir.join("schedule.csv");
    export_schedule(&s, &path)?;
    let mut manifest = ctx.manifest(args)?;
    manifest.config.schedule = opts;
    manifest.inputs.extend(ctx.cli.config.clone());
    manifest.outputs.push(path.clone());
    manifest.write(&dir.join("schedule.manifest.json"))?;
    ctx.say(&format!(
        "{} rows at dt={} ms for {} appendages -> {}\n",
        s.rows.len(),
        opts.dt * 1e3,
        s.n_appendages,
        path.display()
    ));
    Ok(())
}

/// Rounds to `digits` significant digits for display.
fn sig(v: f64, digits: usize) -> f64 {
    format!("{:.*e}", digits.saturating_sub(1), v).parse().unwrap_or(v)
}

fn scale(ctx: &Ctx, args: &ScaleArgs) -> Result<()> {
    let Preset::Krill = args.preset;
    let preset = SwimmerParams::krill();
    let theta = args.theta_deg.map(f64::to_radians).unwrap_or(preset.stroke_amplitude);
    let frequency = args.frequency.unwrap_or(preset.frequency);
    let viscosity = args.viscosity.unwrap_or(preset.kinematic_viscosity);
    let length = match args.length {
        Some(l) => l,
        None => length_for_reynolds(theta, frequency, viscosity, KRILL_APPENDAGE_RE, ReConvention::Dimensional)?,
    };
    let base = SwimmerParams::new(theta, frequency, length, viscosity)?;

    let conventions = [ReConvention::AsWritten, ReConvention::Dimensional];
    let scaled = conventions
        .iter()
        .map(|&c| scaled_params(&base, args.factor, c))
        .collect::<metaswim_core::Result<Vec<_>>>()?;

    let mut report = String::new();
    writeln!(report, "preset = krill")?;
    writeln!(report, "stroke_amplitude_deg = {}", sig(theta.to_degrees(), 6))?;
    writeln!(report, "base_frequency_hz = {}", sig(frequency, 6))?;
    writeln!(report, "base_length_m = {}", sig(length, 6))?;
    writeln!(report, "viscosity_m2_s = {}", sig(viscosity, 6))?;
    writeln!(report, "length_factor = {}", sig(args.factor, 6))?;
    writeln!(report, "base_tip_speed_m_s = {}", sig(tip_speed(&base), 6))?;
    writeln!(report)?;
    let row = |name: &str, f: &dyn Fn(usize) -> f64| {
        let cells: String = (0..conventions.len()).map(|i| format!("{:>14}", sig(f(i), 6))).collect();
        format!("{name:<20}{cells}\n")
    };
    let head: String = conventions.iter().map(|c| format!("{:>14}", c.name())).collect();
    writeln!(report, "{:<20}{head}", "")?;
    report.push_str(&row("model_frequency_hz", &|i| scaled[i].frequency));
    report.push_str(&row("model_length_m", &|i| scaled[i].pleopod_length));
    report.push_str(&row("re_animal", &|i| reynolds(&base, conventions[i])));
    report.push_str(&row("re_model", &|i| reynolds(&scaled[i], conventions[i])));
    report.push_str(&row("model_tip_speed_m_s", &|i| tip_speed(&scaled[i])));
    print!("{report}");

    if ctx.cli.out.is_some() {
        let dir = ctx.out_dir()?;
        let path = dir.join("scale.txt");
        write_file(&path, &report)?;
        let mut manifest = ctx.manifest(args)?;
        manifest.outputs.push(path);
        manifest.write(&dir.join("scale.manifest.json"))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ValidationReport {
    window_s: Option<(f64, f64)>,
    reference_shift_s: f64,
    alpha: Option<TraceMetrics>,
    beta: Option<TraceMetrics>,
}

fn validate(ctx: &Ctx, args: &ValidateArgs) -> Result<()> {
    let dir = ctx.out_dir()?;
    let mut manifest = ctx.manifest(args)?;
    let (markers_path, ref_alpha, ref_beta) = if args.synthetic {
        let paths = write_synthetic(ctx, args, &dir)?;
        manifest.outputs.extend([paths.0.clone(), paths.1.clone(), paths.2.clone()]);
        (paths.0, Some(paths.1), Some(paths.2))
    } else {
        let markers = args.markers.clone().context("--markers is required")?;
        if args.ref_alpha.is_none() && args.ref_beta.is_none() {
            bail!("give --ref-alpha and/or --ref-beta");
        }
        (markers, args.ref_alpha.clone(), args.ref_beta.clone())
    };
    manifest.inputs.push(markers_path.clone());
    manifest.inputs.extend(ref_alpha.iter().chain(&ref_beta).cloned());

    let (mut alpha, mut beta) = angles_from_markers(&read_markers(&markers_path)?)?;
    let mut ref_a = ref_alpha.as_deref().map(AngleTrace::read_csv).transpose()?;
    let mut ref_b = ref_beta.as_deref().map(AngleTrace::read_csv).transpose()?;

    let mut shift = 0.0;
    if args.align_max {
        let Some(ra) = &ref_a else {
            bail!("--align-max needs --ref-alpha");
        };
        shift = cycle_bounds(&alpha)?.0 - cycle_bounds(ra)?.0;
        ref_a = ref_a.map(|r| r.shifted(shift));
        ref_b = ref_b.map(|r| r.shifted(shift));
    }
    let mut window = None;
    if args.one_cycle {
        let (t0, t1) = cycle_bounds(&alpha)?;
        alpha = alpha.window(t0, t1);
        beta = beta.window(t0, t1);
        window = Some((t0, t1));
    }

    let report = ValidationReport {
        window_s: window,
        reference_shift_s: shift,
        alpha: ref_a.as_ref().map(|r| compare_traces(&alpha, r)).transpose()?,
        beta: ref_b.as_ref().map(|r| compare_traces(&beta, r)).transpose()?,
    };
    let path = dir.join("metrics.json");
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    write_file(&path, &text)?;
    manifest.outputs.push(path);
    manifest.write(&dir.join("validate.manifest.json"))?;

    let mut summary = String::new();
    for (name, m) in [("alpha", &report.alpha), ("beta", &report.beta)] {
        if let Some(m) = m {
            writeln!(
                summary,
                "{name}: mean_abs_diff_deg={:.6} max_abs_diff_deg={:.6} pkpk_measured_deg={:.3} percent_error={:.3}% n={}",
                m.mean_abs_diff, m.max_abs_diff, m.pkpk_measured, m.percent_error, m.n_points
            )?;
        }
    }
    print!("{summary}");
    Ok(())
}

/// Markers for the configured gait under a random camera similarity per
/// frame, plus the exact angle traces they were generated from.
fn write_synthetic(ctx: &Ctx, args: &ValidateArgs, dir: &Path) -> Result<(PathBuf, PathBuf, PathBuf)> {
    if args.frames == 0 || !(args.fps.is_finite() && args.fps > 0.0) {
        bail!("--frames must be > 0 and --fps must be > 0");
    }
    let cfg = &ctx.config;
    let a = alpha_profile(args.appendage, &cfg.gait)?;
    let b = beta_profile(args.appendage, &cfg.gait)?;
    let geom = cfg.appendage_geometry(args.appendage)?;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.cli.seed);
    let times: Vec<f64> = (0..args.frames).map(|i| i as f64 / args.fps).collect();
    let frames = times
        .iter()
        .map(|&t| {
            let f = markers_for_pose(&geom, a.sample(t), b.sample(t), t)?;
            let rotation = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
            let scale = rng.gen_range(500.0..5000.0);
            let offset = Vec2::new(rng.gen_range(-500.0..500.0), rng.gen_range(-500.0..500.0));
            Ok(f.transformed(rotation, scale, offset))
        })
        .collect::<metaswim_core::Result<Vec<_>>>()?;

    let markers = dir.join("markers.csv");
    write_file(&markers, &MarkerTrace { frames }.to_csv())?;
    let ref_alpha = dir.join("reference_alpha.csv");
    write_file(&ref_alpha, &AngleTrace::from_fn(times.iter().copied(), |t| a.sample(t))?.to_csv())?;
    let ref_beta = dir.join("reference_beta.csv");
    write_file(&ref_beta, &AngleTrace::from_fn(times.iter().copied(), |t| b.sample(t))?.to_csv())?;
    Ok((markers, ref_alpha, ref_beta))
}

fn plot_cmd(ctx: &Ctx, args: &PlotArgs) -> Result<()> {
    let chart = plot::load_chart(&args.inputs, args.title.clone())?;
    let svg = plot::render_svg(&chart, args.width, args.height)?;
    let out = match &ctx.cli.out {
        Some(p) if p.is_dir() => p.join("plot.svg"),
        Some(p) => p.clone(),
        None => PathBuf::from("plot.svg"),
    };
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    write_file(&out, &svg)?;
    let mut manifest = ctx.manifest(args)?;
    manifest.inputs = args.inputs.clone();
    manifest.outputs.push(out.clone());
    manifest.write(&out.with_extension("manifest.json"))?;
    ctx.say(&format!("{} series -> {}\n", chart.series.len(), out.display()));
    Ok(())
}
