//! Reynolds-number scaling between the animal and the robot.
//!
//! The appendage Reynolds number uses the tip speed `U_tip = 2 θ n L` for a
//! stroke amplitude θ (radians), beat frequency n and appendage length L.
//! `Re = U_tip L / ν` is dimensionless, but the literal shortcut
//! `Re = 2 θ n L / ν` is not; the latter is the form under which a 10x
//! larger model at a tenth of the frequency keeps Re unchanged. Both are
//! offered and the caller picks one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Kinematic viscosity of water near room temperature, m²/s.
pub const WATER_KINEMATIC_VISCOSITY: f64 = 1.0e-6;
/// Appendage Reynolds number of live krill.
pub const KRILL_APPENDAGE_RE: f64 = 600.0;
/// Body Reynolds number of live krill; display only.
pub const KRILL_BODY_RE: f64 = 10_000.0;
/// Average peak-to-peak α stroke amplitude, degrees.
pub const KRILL_STROKE_AMPLITUDE_DEG: f64 = 89.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReConvention {
    /// `Re = U_tip L / ν`, with `U_tip = 2 θ n L`.
    #[default]
    Dimensional,
    /// `Re = 2 θ n L / ν`.
    AsWritten,
}

impl ReConvention {
    pub const ALL: [ReConvention; 2] = [ReConvention::Dimensional, ReConvention::AsWritten];

    pub fn name(&self) -> &'static str {
        match self {
            ReConvention::Dimensional => "dimensional",
            ReConvention::AsWritten => "as-written",
        }
    }

    /// Power of the length scale in Re.
    fn length_power(&self) -> i32 {
        match self {
            ReConvention::Dimensional => 2,
            ReConvention::AsWritten => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwimmerParams {
    /// Peak-to-peak stroke amplitude, radians.
    pub stroke_amplitude: f64,
    /// Beat frequency, Hz.
    pub frequency: f64,
    /// Appendage length, meters.
    pub pleopod_length: f64,
    /// m²/s
    pub kinematic_viscosity: f64,
}

impl SwimmerParams {
    pub fn new(stroke_amplitude: f64, frequency: f64, pleopod_length: f64, kinematic_viscosity: f64) -> Result<Self> {
        let p = Self {
            stroke_amplitude,
            frequency,
            pleopod_length,
            kinematic_viscosity,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("stroke_amplitude", self.stroke_amplitude),
            ("frequency", self.frequency),
            ("pleopod_length", self.pleopod_length),
            ("kinematic_viscosity", self.kinematic_viscosity),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Live krill in water: 89° stroke at 5.7 Hz, with the appendage length
    /// chosen so the dimensional Re is 600.
    pub fn krill() -> Self {
        let theta = KRILL_STROKE_AMPLITUDE_DEG.to_radians();
        let n = crate::waveforms::KRILL_FREQUENCY_HZ;
        let nu = WATER_KINEMATIC_VISCOSITY;
        let length = length_for_reynolds(theta, n, nu, KRILL_APPENDAGE_RE, ReConvention::Dimensional)
            .expect("valid constants");
        Self::new(theta, n, length, nu).expect("valid constants")
    }
}

/// Tip speed `2 θ n L`, m/s. Zero amplitude gives zero speed.
pub fn tip_speed(p: &SwimmerParams) -> f64 {
    2.0 * p.stroke_amplitude * p.frequency * p.pleopod_length
}

pub fn reynolds(p: &SwimmerParams, conv: ReConvention) -> f64 {
    match conv {
        ReConvention::Dimensional => tip_speed(p) * p.pleopod_length / p.kinematic_viscosity,
        ReConvention::AsWritten => tip_speed(p) / p.kinematic_viscosity,
    }
}

/// Beat frequency that keeps Re fixed when every length is multiplied by
/// `length_scale`.
pub fn scaled_frequency(base: &SwimmerParams, length_scale: f64, conv: ReConvention) -> Result<f64> {
    if !(length_scale.is_finite() && length_scale > 0.0) {
        return Err(Error::domain(format!("length scale must be > 0, got {length_scale}")));
    }
    Ok(base.frequency / length_scale.powi(conv.length_power()))
}

/// `base` with lengths scaled and frequency adjusted to keep Re.
pub fn scaled_params(base: &SwimmerParams, length_scale: f64, conv: ReConvention) -> Result<SwimmerParams> {
    let frequency = scaled_frequency(base, length_scale, conv)?;
    SwimmerParams::new(
        base.stroke_amplitude,
        frequency,
        base.pleopod_length * length_scale,
        base.kinematic_viscosity,
    )
}

/// Appendage length that gives Reynolds number `re`.
pub fn length_for_reynolds(theta: f64, frequency: f64, nu: f64, re: f64, conv: ReConvention) -> Result<f64> {
    for (name, v) in [("theta", theta), ("frequency", frequency), ("viscosity", nu), ("re", re)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::domain(format!("{name} must be > 0, got {v}")));
        }
    }
    let per_length = re * nu / (2.0 * theta * frequency);
    Ok(match conv {
        ReConvention::Dimensional => per_length.sqrt(),
        ReConvention::AsWritten => per_length,
    })
}
