//! Key-value configuration shared by every command.
//!
//! The file is TOML with flat keys, for example:
//!
//! ```toml
//! frequency_hz = 0.57
//! lag_cycles = 0.2
//! alpha_pkpk_deg = [78, 85, 92, 99, 106]
//! beta_pkpk_deg = [48, 53.75, 59.5, 65.25, 71]
//! gear_teeth = [12, 12, 12, 12]
//! ```
//!
//! Every key is optional; missing keys take the robot defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geartrain::{modulus, primitive_radius, robot_chains, GearChain};
use crate::kinematics::{AppendageGeometry, GammaParams, CUPPING_DEG, P1_X1_M, P1_X2_M};
use crate::schedule::ScheduleOptions;
use crate::waveforms::{linear_table, MetachronalConfig, ALPHA_PKPK_ENDPOINTS_DEG, BETA_PKPK_ENDPOINTS_DEG};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    n_appendages: Option<usize>,
    frequency_hz: Option<f64>,
    lag_cycles: Option<f64>,
    alpha_pkpk_deg: Option<Vec<f64>>,
    beta_pkpk_deg: Option<Vec<f64>>,
    alpha_mean_deg: Option<f64>,
    beta_mean_deg: Option<f64>,
    alpha_beta_phase_cycles: Option<f64>,

    gear_teeth: Option<Vec<u32>>,
    gear_radii_m: Option<Vec<f64>>,

    x1_m: Option<f64>,
    x2_m: Option<f64>,
    zeta_deg: Option<f64>,

    gamma_max_deg: Option<f64>,
    gamma_ramp_cycles: Option<f64>,
    gamma_power_fraction: Option<f64>,
    gamma_abduction_phase: Option<f64>,

    dt_ms: Option<f64>,
    amplification: Option<f64>,
    alpha_amplification: Option<f64>,
    servo_min_deg: Option<f64>,
    servo_max_deg: Option<f64>,
    backlash_deg: Option<f64>,
}

/// Fully resolved settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub gait: MetachronalConfig,
    /// Link geometry shared by all appendages.
    pub geometry: AppendageGeometry,
    /// Gear train per appendage, P1 first.
    pub chains: Vec<GearChain>,
    pub gamma: GammaParams,
    pub schedule: ScheduleOptions,
    /// Transmission play applied to simulated β traces, degrees.
    pub backlash_deg: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        let gait = MetachronalConfig::default();
        let chains = robot_chains(gait.n_appendages);
        Self {
            gait,
            geometry: AppendageGeometry::robot_p1(),
            chains,
            gamma: GammaParams::default(),
            schedule: ScheduleOptions::default(),
            backlash_deg: 0.0,
        }
    }
}

impl SimConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_str(&text)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn from_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config {
            line: e.span().map(|s| line_of_offset(text, s.start)).unwrap_or(1),
            message: e.message().to_string(),
        })?;
        let at = |key: &str, e: Error| Error::Config {
            line: line_of_key(text, key),
            message: match e {
                Error::Domain(m) => m,
                other => other.to_string(),
            },
        };

        let n = raw.n_appendages.unwrap_or(5);
        let defaults = MetachronalConfig::default();
        let gait = MetachronalConfig {
            n_appendages: n,
            lag_cycles: raw.lag_cycles.unwrap_or(defaults.lag_cycles),
            frequency_hz: raw.frequency_hz.unwrap_or(defaults.frequency_hz),
            alpha_pkpk_deg: raw
                .alpha_pkpk_deg
                .unwrap_or_else(|| linear_table(ALPHA_PKPK_ENDPOINTS_DEG, n)),
            beta_pkpk_deg: raw
                .beta_pkpk_deg
                .unwrap_or_else(|| linear_table(BETA_PKPK_ENDPOINTS_DEG, n)),
            alpha_mean_deg: raw.alpha_mean_deg.unwrap_or(defaults.alpha_mean_deg),
            beta_mean_deg: raw.beta_mean_deg.unwrap_or(defaults.beta_mean_deg),
            alpha_beta_phase_cycles: raw.alpha_beta_phase_cycles.unwrap_or(defaults.alpha_beta_phase_cycles),
        };
        gait.validate().map_err(|e| {
            let key = match &e {
                Error::Domain(m) => ["n_appendages", "lag_cycles", "frequency_hz", "alpha_pkpk_deg", "beta_pkpk_deg", "alpha_mean_deg", "beta_mean_deg", "alpha_beta_phase_cycles"]
                    .into_iter()
                    .find(|k| m.starts_with(k))
                    .unwrap_or("n_appendages"),
                _ => "n_appendages",
            };
            at(key, e)
        })?;

        let x1 = raw.x1_m.unwrap_or(P1_X1_M);
        let chains = match (raw.gear_teeth, raw.gear_radii_m) {
            (Some(_), Some(_)) => {
                return Err(at("gear_radii_m", Error::domain("give either gear_teeth or gear_radii_m, not both")))
            }
            (Some(teeth), None) => {
                let chain = (|| {
                    let n_gears = u32::try_from(teeth.len()).unwrap_or(u32::MAX);
                    let rp = primitive_radius(x1, n_gears)?;
                    let first = *teeth.first().ok_or_else(|| Error::domain("gear_teeth is empty"))?;
                    GearChain::from_teeth(&teeth, modulus(rp, first)?)
                })()
                .map_err(|e| at("gear_teeth", e))?;
                vec![chain; n]
            }
            (None, Some(radii)) => vec![GearChain::from_radii(radii).map_err(|e| at("gear_radii_m", e))?; n],
            (None, None) => robot_chains(n),
        };

        let geometry = AppendageGeometry::new(
            x1,
            raw.x2_m.unwrap_or(P1_X2_M),
            raw.zeta_deg.unwrap_or(CUPPING_DEG),
            chains[0].clone(),
        )
        .map_err(|e| {
            let key = match &e {
                Error::Domain(m) if m.starts_with("x2") => "x2_m",
                Error::Domain(m) if m.starts_with("zeta") => "zeta_deg",
                _ => "x1_m",
            };
            at(key, e)
        })?;

        let gd = GammaParams::default();
        let gamma = GammaParams {
            max_angle: raw.gamma_max_deg.unwrap_or(gd.max_angle),
            ramp_width: raw.gamma_ramp_cycles.unwrap_or(gd.ramp_width),
            power_fraction: raw.gamma_power_fraction.unwrap_or(gd.power_fraction),
            abduction_phase: raw.gamma_abduction_phase.unwrap_or(gd.abduction_phase),
        };
        gamma.validate().map_err(|e| {
            let key = match &e {
                Error::Domain(m) if m.contains("ramp_width") => "gamma_ramp_cycles",
                Error::Domain(m) if m.contains("power_fraction") => "gamma_power_fraction",
                Error::Domain(m) if m.contains("abduction_phase") => "gamma_abduction_phase",
                _ => "gamma_max_deg",
            };
            at(key, e)
        })?;

        let sd = ScheduleOptions::default();
        let schedule = ScheduleOptions {
            dt: raw.dt_ms.map(|ms| ms * 1e-3).unwrap_or(sd.dt),
            alpha_amplification: raw.alpha_amplification.unwrap_or(sd.alpha_amplification),
            beta_amplification: raw.amplification.unwrap_or(sd.beta_amplification),
            servo_min: raw.servo_min_deg.unwrap_or(sd.servo_min),
            servo_max: raw.servo_max_deg.unwrap_or(sd.servo_max),
        };

        let backlash_deg = raw.backlash_deg.unwrap_or(0.0);
        if !(backlash_deg.is_finite() && backlash_deg >= 0.0) {
            return Err(at("backlash_deg", Error::domain(format!("backlash_deg must be >= 0, got {backlash_deg}"))));
        }

        Ok(Self {
            gait,
            geometry,
            chains,
            gamma,
            schedule,
            backlash_deg,
        })
    }

    /// Geometry of appendage `k` (1-based): shared link lengths with that
    /// appendage's gear train.
    pub fn appendage_geometry(&self, appendage: usize) -> Result<AppendageGeometry> {
        let chain = self
            .chains
            .get(appendage.wrapping_sub(1))
            .ok_or_else(|| Error::domain(format!("appendage index {appendage} out of range")))?;
        AppendageGeometry::new(
            self.geometry.x1(),
            self.geometry.x2(),
            self.geometry.zeta(),
            chain.clone(),
        )
    }
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// 1-based line where `key` is assigned, or 1 if absent.
fn line_of_key(text: &str, key: &str) -> usize {
    text.lines()
        .position(|l| {
            let l = l.trim_start();
            l.strip_prefix(key)
                .is_some_and(|rest| rest.trim_start().starts_with('='))
        })
        .map(|i| i + 1)
        .unwrap_or(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(SimConfig::from_str("").unwrap(), SimConfig::default());
    }

    #[test]
    fn reads_all_gait_keys() {
        let text = "frequency_hz = 5.7\nlag_cycles = 0.25\nalpha_pkpk_deg = [1, 2, 3, 4, 5]\nbeta_pkpk_deg = [5, 4, 3, 2, 1]\nalpha_mean_deg = 60\nbeta_mean_deg = 130\nalpha_beta_phase_cycles = 0.4\n";
        let c = SimConfig::from_str(text).unwrap();
        assert_eq!(c.gait.frequency_hz, 5.7);
        assert_eq!(c.gait.lag_cycles, 0.25);
        assert_eq!(c.gait.alpha_pkpk_deg, vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(c.gait.beta_pkpk_deg[0], 5.0);
        assert_eq!(c.gait.alpha_mean_deg, 60.0);
        assert_eq!(c.gait.beta_mean_deg, 130.0);
        assert_eq!(c.gait.alpha_beta_phase_cycles, 0.4);
    }

    #[test]
    fn gear_keys() {
        let c = SimConfig::from_str("gear_teeth = [12, 24, 12]\n").unwrap();
        assert!(c.chains.iter().all(|ch| ch.len() == 3));
        assert_eq!(c.chains[0].radii()[1], 2.0 * c.chains[0].radii()[0]);
        let c = SimConfig::from_str("gear_radii_m = [0.005, 0.005]\n").unwrap();
        assert_eq!(c.chains[4].radii(), &[0.005, 0.005]);
        let default = SimConfig::default();
        assert_eq!(default.chains.iter().map(GearChain::len).collect::<Vec<_>>(), vec![4, 4, 4, 3, 3]);
        assert!(SimConfig::from_str("gear_teeth = [12]\ngear_radii_m = [1.0, 1.0]\n").is_err());
    }

    #[test]
    fn syntax_error_has_line() {
        let err = SimConfig::from_str("frequency_hz = 0.57\nlag_cycles = = 3\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 2, .. }), "{err}");
    }

    #[test]
    fn unknown_key_has_line() {
        let err = SimConfig::from_str("\n\nbogus = 1\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 3, .. }), "{err}");
    }

    #[test]
    fn semantic_error_points_at_key() {
        let err = SimConfig::from_str("frequency_hz = 0.57\nalpha_pkpk_deg = [1, 2]\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 2, .. }), "{err}");
        let err = SimConfig::from_str("# c\nlag_cycles = 1.5\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 2, .. }), "{err}");
        let err = SimConfig::from_str("x2_m = -1\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 1, .. }), "{err}");
        let err = SimConfig::from_str("a = 1\n").unwrap_err();
        assert!(err.to_string().contains("line 1"));
    }

    #[test]
    fn schedule_keys() {
        let c = SimConfig::from_str("dt_ms = 20\namplification = 3\nbacklash_deg = 1.5\n").unwrap();
        assert!((c.schedule.dt - 0.02).abs() < 1e-15);
        assert_eq!(c.schedule.beta_amplification, 3.0);
        assert_eq!(c.backlash_deg, 1.5);
    }
}
