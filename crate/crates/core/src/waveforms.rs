//! Sinusoidal stroke waveforms for α and β and the metachronal phase lag
//! between appendages.
//!
//! Appendages are numbered 1 (anterior) to `n_appendages` (posterior). The
//! beat starts at the posterior appendage: appendage `k` repeats the motion
//! of the posterior one `(n - k) * lag` cycles later.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

/// Beat frequency of the 10x scaled robot, Hz.
pub const ROBOT_FREQUENCY_HZ: f64 = 0.57;
/// Mean beat frequency of live krill, Hz.
pub const KRILL_FREQUENCY_HZ: f64 = 5.7;

/// Average minimum and maximum of α over the appendages, degrees.
pub const ALPHA_RANGE_DEG: (f64, f64) = (14.0, 103.0);
/// Average minimum and maximum of β over the appendages, degrees.
pub const BETA_RANGE_DEG: (f64, f64) = (105.0, 162.0);
/// Peak-to-peak α of the anterior (P1) and posterior (P5) appendages.
pub const ALPHA_PKPK_ENDPOINTS_DEG: (f64, f64) = (78.0, 106.0);
/// Peak-to-peak β of the anterior (P1) and posterior (P5) appendages.
pub const BETA_PKPK_ENDPOINTS_DEG: (f64, f64) = (48.0, 71.0);

/// Placeholder lag between neighbouring appendages, cycles. Not a measured
/// value; override it for any quantitative study.
pub const DEFAULT_LAG_CYCLES: f64 = 0.2;

/// `angle(t) = mean + (peak_to_peak / 2) * sin(2π (f t + phase_offset))`,
/// all angles in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrokeProfile {
    mean: f64,
    peak_to_peak: f64,
    frequency: f64,
    phase_offset: f64,
}

impl StrokeProfile {
    pub fn new(mean: f64, peak_to_peak: f64, frequency: f64, phase_offset: f64) -> Result<Self> {
        ensure_finite("mean", mean)?;
        if !(peak_to_peak.is_finite() && peak_to_peak >= 0.0) {
            return Err(Error::domain(format!("peak_to_peak must be >= 0, got {peak_to_peak}")));
        }
        if !(frequency.is_finite() && frequency > 0.0) {
            return Err(Error::domain(format!("frequency must be > 0, got {frequency}")));
        }
        check_cycle_fraction("phase_offset", phase_offset)?;
        Ok(Self {
            mean,
            peak_to_peak,
            frequency,
            phase_offset,
        })
    }

    /// Zero-amplitude profile holding `mean`.
    pub fn constant(mean: f64, frequency: f64) -> Result<Self> {
        Self::new(mean, 0.0, frequency, 0.0)
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn peak_to_peak(&self) -> f64 {
        self.peak_to_peak
    }

    pub fn amplitude(&self) -> f64 {
        0.5 * self.peak_to_peak
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn phase_offset(&self) -> f64 {
        self.phase_offset
    }

    pub fn period(&self) -> f64 {
        1.0 / self.frequency
    }

    pub fn min(&self) -> f64 {
        self.mean - self.amplitude()
    }

    pub fn max(&self) -> f64 {
        self.mean + self.amplitude()
    }

    /// Angle at time `t`, degrees.
    pub fn sample(&self, t: f64) -> f64 {
        let cycles = self.frequency * t + self.phase_offset;
        // Reduce before scaling by 2π to keep the sine argument small.
        let frac = cycles - cycles.floor();
        self.mean + self.amplitude() * (TAU * frac).sin()
    }

    /// Fraction of the stroke cycle elapsed since the most recent maximum,
    /// in `[0, 1)`. Phase 0 is the maximum, where the power stroke begins.
    pub fn stroke_phase(&self, t: f64) -> f64 {
        let p = (self.frequency * t + self.phase_offset - 0.25).rem_euclid(1.0);
        // rem_euclid can round up to exactly 1.0 for tiny negative inputs.
        if p >= 1.0 {
            0.0
        } else {
            p
        }
    }

    /// Same profile shifted later in time by `lag` cycles.
    pub fn delayed(&self, lag: f64) -> Self {
        Self {
            phase_offset: wrap_cycle(self.phase_offset - lag),
            ..*self
        }
    }
}

/// Gait parameters shared by all appendages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetachronalConfig {
    pub n_appendages: usize,
    /// Phase lag between neighbouring appendages, cycles in `[0, 1)`.
    pub lag_cycles: f64,
    pub frequency_hz: f64,
    /// Peak-to-peak α per appendage, P1 first.
    pub alpha_pkpk_deg: Vec<f64>,
    /// Peak-to-peak β per appendage, P1 first.
    pub beta_pkpk_deg: Vec<f64>,
    pub alpha_mean_deg: f64,
    pub beta_mean_deg: f64,
    /// Phase of β relative to α, cycles. 0.5 puts β at its minimum when α
    /// peaks.
    pub alpha_beta_phase_cycles: f64,
}

impl Default for MetachronalConfig {
    fn default() -> Self {
        let n = 5;
        Self {
            n_appendages: n,
            lag_cycles: DEFAULT_LAG_CYCLES,
            frequency_hz: ROBOT_FREQUENCY_HZ,
            alpha_pkpk_deg: linear_table(ALPHA_PKPK_ENDPOINTS_DEG, n),
            beta_pkpk_deg: linear_table(BETA_PKPK_ENDPOINTS_DEG, n),
            alpha_mean_deg: 0.5 * (ALPHA_RANGE_DEG.0 + ALPHA_RANGE_DEG.1),
            beta_mean_deg: 0.5 * (BETA_RANGE_DEG.0 + BETA_RANGE_DEG.1),
            alpha_beta_phase_cycles: 0.5,
        }
    }
}

impl MetachronalConfig {
    /// Live-animal preset: same angles at the unscaled beat frequency.
    pub fn krill() -> Self {
        Self {
            frequency_hz: KRILL_FREQUENCY_HZ,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_appendages == 0 {
            return Err(Error::domain("n_appendages must be at least 1"));
        }
        check_cycle_fraction("lag_cycles", self.lag_cycles)?;
        if !(self.frequency_hz.is_finite() && self.frequency_hz > 0.0) {
            return Err(Error::domain(format!(
                "frequency_hz must be > 0, got {}",
                self.frequency_hz
            )));
        }
        for (name, table) in [("alpha_pkpk_deg", &self.alpha_pkpk_deg), ("beta_pkpk_deg", &self.beta_pkpk_deg)] {
            if table.len() != self.n_appendages {
                return Err(Error::domain(format!(
                    "{name} has {} entries, expected {}",
                    table.len(),
                    self.n_appendages
                )));
            }
            if let Some(bad) = table.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                return Err(Error::domain(format!("{name} entries must be >= 0, got {bad}")));
            }
        }
        ensure_finite("alpha_mean_deg", self.alpha_mean_deg)?;
        ensure_finite("beta_mean_deg", self.beta_mean_deg)?;
        ensure_finite("alpha_beta_phase_cycles", self.alpha_beta_phase_cycles)?;
        Ok(())
    }

    fn check_index(&self, appendage: usize) -> Result<()> {
        if appendage == 0 || appendage > self.n_appendages {
            return Err(Error::domain(format!(
                "appendage index {appendage} outside 1..={}",
                self.n_appendages
            )));
        }
        Ok(())
    }

    /// Delay of `appendage` behind the posterior appendage, cycles in `[0, 1)`.
    pub fn appendage_lag(&self, appendage: usize) -> Result<f64> {
        self.check_index(appendage)?;
        Ok(wrap_cycle((self.n_appendages - appendage) as f64 * self.lag_cycles))
    }
}

/// α profile of appendage `appendage` (1-based, P1 anterior).
pub fn alpha_profile(appendage: usize, cfg: &MetachronalConfig) -> Result<StrokeProfile> {
    cfg.validate()?;
    let lag = cfg.appendage_lag(appendage)?;
    StrokeProfile::new(
        cfg.alpha_mean_deg,
        cfg.alpha_pkpk_deg[appendage - 1],
        cfg.frequency_hz,
        0.0,
    )
    .map(|p| p.delayed(lag))
}

/// β profile of appendage `appendage`; shares the α timing plus
/// `alpha_beta_phase_cycles`.
pub fn beta_profile(appendage: usize, cfg: &MetachronalConfig) -> Result<StrokeProfile> {
    cfg.validate()?;
    let lag = cfg.appendage_lag(appendage)?;
    StrokeProfile::new(
        cfg.beta_mean_deg,
        cfg.beta_pkpk_deg[appendage - 1],
        cfg.frequency_hz,
        wrap_cycle(cfg.alpha_beta_phase_cycles),
    )
    .map(|p| p.delayed(lag))
}

/// Per-appendage delays ordered from the posterior appendage to P1.
pub fn metachronal_offsets(cfg: &MetachronalConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    (1..=cfg.n_appendages)
        .rev()
        .map(|k| cfg.appendage_lag(k))
        .collect()
}

/// `n` values evenly spaced from `endpoints.0` to `endpoints.1`.
pub fn linear_table(endpoints: (f64, f64), n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![endpoints.0],
        _ => (0..n)
            .map(|i| {
                let s = i as f64 / (n - 1) as f64;
                endpoints.0 + s * (endpoints.1 - endpoints.0)
            })
            .collect(),
    }
}

fn wrap_cycle(x: f64) -> f64 {
    let w = x.rem_euclid(1.0);
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}

fn check_cycle_fraction(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && (0.0..1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be in [0, 1), got {value}")))
    }
}
