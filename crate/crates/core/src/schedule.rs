//! Fixed-rate servo command schedules.
//!
//! Every `dt` seconds each appendage receives two servo targets: the
//! protopodite servo (α) and the servo driving the first gear of the
//! distal train (ψ1). Both servo outputs are geared up before reaching the
//! links, so a commanded angle is the required link-side rotation divided
//! by that branch's amplification.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::csvio;
use crate::error::{Error, Result};
use crate::geartrain::{pose_for_servo_angles, servo_angles_for_pose, GearChain};
use crate::waveforms::{alpha_profile, beta_profile, MetachronalConfig, StrokeProfile};

pub const DEFAULT_DT: f64 = 0.010;
pub const DEFAULT_AMPLIFICATION: f64 = 2.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleOptions {
    /// Controller period, seconds.
    pub dt: f64,
    /// Gear-up between the α servo and the protopodite.
    pub alpha_amplification: f64,
    /// Gear-up between the β servo and the first distal gear.
    pub beta_amplification: f64,
    /// Servo travel limits, degrees.
    pub servo_min: f64,
    pub servo_max: f64,
}

impl Default for ScheduleOptions {
    fn default() -> Self {
        Self {
            dt: DEFAULT_DT,
            alpha_amplification: 1.0,
            beta_amplification: DEFAULT_AMPLIFICATION,
            servo_min: 0.0,
            servo_max: 180.0,
        }
    }
}

impl ScheduleOptions {
    fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::domain(format!("dt must be > 0, got {}", self.dt)));
        }
        for (name, v) in [
            ("alpha amplification", self.alpha_amplification),
            ("beta amplification", self.beta_amplification),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(format!("{name} must be > 0, got {v}")));
            }
        }
        if !(self.servo_min.is_finite() && self.servo_max.is_finite() && self.servo_min < self.servo_max) {
            return Err(Error::domain(format!(
                "invalid servo limits [{}, {}]",
                self.servo_min, self.servo_max
            )));
        }
        Ok(())
    }
}

/// Servo targets for one appendage, degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ServoCommand {
    pub alpha: f64,
    pub psi1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleRow {
    pub t: f64,
    /// One entry per appendage, P1 first.
    pub commands: Vec<ServoCommand>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServoSchedule {
    pub n_appendages: usize,
    pub options: ScheduleOptions,
    pub rows: Vec<ScheduleRow>,
}

impl ServoSchedule {
    pub fn empty(n_appendages: usize, options: ScheduleOptions) -> Self {
        Self {
            n_appendages,
            options,
            rows: Vec::new(),
        }
    }

    pub fn header(n_appendages: usize) -> Vec<String> {
        std::iter::once("t".to_string())
            .chain((1..=n_appendages).flat_map(|k| [format!("a{k}_alpha"), format!("a{k}_psi")]))
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let header = Self::header(self.n_appendages);
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let rows: Vec<Vec<f64>> = self
            .rows
            .iter()
            .map(|r| {
                std::iter::once(r.t)
                    .chain(r.commands.iter().flat_map(|c| [c.alpha, c.psi1]))
                    .collect()
            })
            .collect();
        csvio::format_table(&header, rows.iter().map(Vec::as_slice))
    }

    /// Parses a schedule written by [`ServoSchedule::to_csv`]. The file does
    /// not record the options, so they are supplied by the caller.
    pub fn from_csv(text: &str, source_name: &str, options: ScheduleOptions) -> Result<Self> {
        let table = csvio::parse_table(text, source_name, None)?;
        let n_cols = table.header.len();
        if n_cols < 1 || (n_cols - 1) % 2 != 0 {
            return Err(Error::Parse {
                source_name: source_name.into(),
                row: 1,
                message: format!("expected t plus alpha/psi pairs, found {n_cols} columns"),
            });
        }
        let n_appendages = (n_cols - 1) / 2;
        let expected = Self::header(n_appendages);
        if table.header != expected {
            return Err(Error::Parse {
                source_name: source_name.into(),
                row: 1,
                message: format!("expected header `{}`", expected.join(",")),
            });
        }
        let rows = table
            .rows
            .iter()
            .map(|r| ScheduleRow {
                t: r[0],
                commands: r[1..]
                    .chunks(2)
                    .map(|c| ServoCommand { alpha: c[0], psi1: c[1] })
                    .collect(),
            })
            .collect();
        Ok(Self {
            n_appendages,
            options,
            rows,
        })
    }

    /// Joint angles (t, α, β) in degrees that appendage `appendage` reaches
    /// when the commands drive an ideal transmission.
    pub fn reconstruct_pose(&self, appendage: usize, chain: &GearChain) -> Result<Vec<(f64, f64, f64)>> {
        if appendage == 0 || appendage > self.n_appendages {
            return Err(Error::domain(format!(
                "appendage index {appendage} outside 1..={}",
                self.n_appendages
            )));
        }
        self.rows
            .iter()
            .map(|r| {
                let c = r.commands[appendage - 1];
                let (alpha, beta) = pose_for_servo_angles(
                    c.alpha * self.options.alpha_amplification,
                    c.psi1 * self.options.beta_amplification,
                    chain,
                )?;
                Ok((r.t, alpha, beta))
            })
            .collect()
    }
}

/// Number of samples `0, dt, 2 dt, …` strictly below `duration`.
pub fn sample_count(duration: f64, dt: f64) -> usize {
    // Tolerance keeps t = k dt from counting when it rounds just below
    // an exact multiple of the duration.
    let limit = duration - dt * 1e-9;
    let mut n = (duration / dt).floor().max(0.0) as usize;
    while n > 0 && (n - 1) as f64 * dt >= limit {
        n -= 1;
    }
    while (n as f64) * dt < limit {
        n += 1;
    }
    n
}

/// Compiles the gait into servo commands sampled on `[0, duration)`.
pub fn build_schedule(
    cfg: &MetachronalConfig,
    chains: &[GearChain],
    duration: f64,
    options: &ScheduleOptions,
) -> Result<ServoSchedule> {
    cfg.validate()?;
    options.validate()?;
    if !(duration.is_finite() && duration > 0.0) {
        return Err(Error::domain(format!("duration must be > 0, got {duration}")));
    }
    if chains.len() != cfg.n_appendages {
        return Err(Error::domain(format!(
            "{} gear chains supplied for {} appendages",
            chains.len(),
            cfg.n_appendages
        )));
    }
    let profiles: Vec<(StrokeProfile, StrokeProfile)> = (1..=cfg.n_appendages)
        .map(|k| Ok((alpha_profile(k, cfg)?, beta_profile(k, cfg)?)))
        .collect::<Result<_>>()?;

    let check = |appendage: usize, t: f64, value: f64| -> Result<f64> {
        if value < options.servo_min || value > options.servo_max || !value.is_finite() {
            Err(Error::ServoLimit {
                appendage,
                t,
                value,
                min: options.servo_min,
                max: options.servo_max,
            })
        } else {
            Ok(value)
        }
    };

    let n = sample_count(duration, options.dt);
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 * options.dt;
        let commands = profiles
            .iter()
            .zip(chains)
            .enumerate()
            .map(|(k, ((a, b), chain))| {
                let (alpha, psi1) = servo_angles_for_pose(a.sample(t), b.sample(t), chain)?;
                Ok(ServoCommand {
                    alpha: check(k + 1, t, alpha / options.alpha_amplification)?,
                    psi1: check(k + 1, t, psi1 / options.beta_amplification)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(ScheduleRow { t, commands });
    }
    Ok(ServoSchedule {
        n_appendages: cfg.n_appendages,
        options: *options,
        rows,
    })
}

pub fn export_schedule(schedule: &ServoSchedule, path: &Path) -> Result<()> {
    csvio::write_file(path, &schedule.to_csv())
}

pub fn import_schedule(path: &Path, options: ScheduleOptions) -> Result<ServoSchedule> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ServoSchedule::from_csv(&text, &path.display().to_string(), options)
}
