//! Planar forward kinematics of one pleopod and the passive γ/ζ pose model.
//!
//! Frame: the body axis is +x of the stroke plane, +y points dorsally, +z is
//! lateral. The protopodite sits at angle `θ1 = 2π - α`, the distal link at
//! `θ2 = θ1 - (π - β) = π + β - α`; both are global angles from +x.

use std::f64::consts::{PI, TAU};
use std::path::Path;

use nalgebra::{Rotation2, Rotation3, Unit, Vector3};
use serde::{Deserialize, Serialize};

use crate::csvio;
use crate::error::{ensure_finite, Error, Result};
use crate::geartrain::{primitive_radius, GearChain};
use crate::waveforms::StrokeProfile;
use crate::Vec2;

/// Protopodite length of the anterior robotic pleopod, meters.
pub const P1_X1_M: f64 = 0.032;
/// Endopodite length of the anterior robotic pleopod, meters.
pub const P1_X2_M: f64 = 0.0495;
/// Cupping angle between the rami midplanes, degrees.
pub const CUPPING_DEG: f64 = 37.0;
/// Maximum exopodite abduction, degrees.
pub const GAMMA_MAX_DEG: f64 = 77.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppendageGeometry {
    x1: f64,
    x2: f64,
    zeta: f64,
    gear_chain: GearChain,
}

impl AppendageGeometry {
    /// `x1`, `x2` in meters, `zeta` in degrees.
    pub fn new(x1: f64, x2: f64, zeta: f64, gear_chain: GearChain) -> Result<Self> {
        if !(x1.is_finite() && x1 > 0.0) {
            return Err(Error::domain(format!("x1 must be > 0, got {x1}")));
        }
        if !(x2.is_finite() && x2 > 0.0) {
            return Err(Error::domain(format!("x2 must be > 0, got {x2}")));
        }
        if !(zeta.is_finite() && (0.0..90.0).contains(&zeta)) {
            return Err(Error::domain(format!("zeta must be in [0, 90), got {zeta}")));
        }
        Ok(Self {
            x1,
            x2,
            zeta,
            gear_chain,
        })
    }

    /// Anterior robotic pleopod: four equal gears sized to the protopodite.
    pub fn robot_p1() -> Self {
        let r = primitive_radius(P1_X1_M, 4).expect("valid constants");
        Self::new(
            P1_X1_M,
            P1_X2_M,
            CUPPING_DEG,
            GearChain::equal(4, r).expect("valid constants"),
        )
        .expect("valid constants")
    }

    pub fn x1(&self) -> f64 {
        self.x1
    }

    pub fn x2(&self) -> f64 {
        self.x2
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    pub fn gear_chain(&self) -> &GearChain {
        &self.gear_chain
    }

    pub fn reach(&self) -> f64 {
        self.x1 + self.x2
    }
}

/// Joint angles of one appendage at time `t`; all angles in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KinematicState {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub t: f64,
}

impl KinematicState {
    pub fn new(alpha: f64, beta: f64, gamma: f64, t: f64) -> Result<Self> {
        ensure_finite("alpha", alpha)?;
        ensure_finite("beta", beta)?;
        ensure_finite("t", t)?;
        if !(gamma.is_finite() && (0.0..=90.0).contains(&gamma)) {
            return Err(Error::domain(format!("gamma must be in [0, 90], got {gamma}")));
        }
        Ok(Self { alpha, beta, gamma, t })
    }
}

/// Global link angles, radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkAngles {
    pub theta1: f64,
    pub theta2: f64,
}

impl LinkAngles {
    /// Relative rotation `θ1 - θ2 = π - β`.
    pub fn delta(&self) -> f64 {
        self.theta1 - self.theta2
    }
}

/// Link angles for joint angles `alpha`, `beta` (degrees). The result is
/// not wrapped: α = 0 gives θ1 = 2π.
pub fn link_angles(alpha: f64, beta: f64) -> Result<LinkAngles> {
    ensure_finite("alpha", alpha)?;
    ensure_finite("beta", beta)?;
    let a = alpha.to_radians();
    let b = beta.to_radians();
    Ok(LinkAngles {
        theta1: TAU - a,
        theta2: PI + b - a,
    })
}

/// Tip of the distal link relative to the protopodite pivot, meters.
pub fn pleopod_tip(geom: &AppendageGeometry, alpha: f64, beta: f64) -> Result<Vec2> {
    let links = link_angles(alpha, beta)?;
    Ok(tip_from_links(geom, &links))
}

/// Distal joint (end of the protopodite), meters.
pub fn distal_joint(geom: &AppendageGeometry, alpha: f64) -> Result<Vec2> {
    let links = link_angles(alpha, 180.0)?;
    Ok(Rotation2::new(links.theta1) * Vec2::new(geom.x1, 0.0))
}

fn tip_from_links(geom: &AppendageGeometry, links: &LinkAngles) -> Vec2 {
    Rotation2::new(links.theta1) * Vec2::new(geom.x1, 0.0)
        + Rotation2::new(links.theta2) * Vec2::new(geom.x2, 0.0)
}

/// Sampled tip path over one stroke period.
#[derive(Debug, Clone, PartialEq)]
pub struct TipTrajectory {
    pub samples: Vec<(f64, Vec2)>,
    pub period: f64,
}

pub const TRAJECTORY_HEADER: [&str; 3] = ["t", "x", "y"];

impl TipTrajectory {
    pub fn to_csv(&self) -> String {
        let rows: Vec<[f64; 3]> = self.samples.iter().map(|(t, p)| [*t, p.x, p.y]).collect();
        csvio::format_table(&TRAJECTORY_HEADER, rows.iter().map(|r| r.as_slice()))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        csvio::write_file(path, &self.to_csv())
    }

    /// Distance between first and last sample.
    pub fn closure_gap(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some((_, a)), Some((_, b))) => (a - b).norm(),
            _ => 0.0,
        }
    }

    pub fn max_radius(&self) -> f64 {
        self.samples.iter().map(|(_, p)| p.norm()).fold(0.0, f64::max)
    }
}

/// Samples `n_samples` tip positions uniformly over one period, first and
/// last sample exactly one period apart.
pub fn tip_trajectory(
    geom: &AppendageGeometry,
    alpha_profile: &StrokeProfile,
    beta_profile: &StrokeProfile,
    n_samples: usize,
) -> Result<TipTrajectory> {
    if n_samples < 2 {
        return Err(Error::domain(format!("n_samples must be >= 2, got {n_samples}")));
    }
    let (fa, fb) = (alpha_profile.frequency(), beta_profile.frequency());
    if (fa - fb).abs() > 1e-12 * fa.max(fb) {
        return Err(Error::domain(format!(
            "alpha and beta frequencies differ ({fa} Hz vs {fb} Hz)"
        )));
    }
    let period = alpha_profile.period();
    let samples = (0..n_samples)
        .map(|i| {
            let t = period * i as f64 / (n_samples - 1) as f64;
            let links = link_angles(alpha_profile.sample(t), beta_profile.sample(t))?;
            Ok((t, tip_from_links(geom, &links)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TipTrajectory { samples, period })
}

/// Phase-keyed trapezoid for the passively actuated abduction angle γ.
///
/// Phase 0 is the α maximum, where the power stroke begins. γ ramps up to
/// `max_angle` over `ramp_width` cycles starting at `abduction_phase`, holds
/// through the power stroke, and ramps back to 0 starting
/// `power_fraction` cycles later.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaParams {
    pub max_angle: f64,
    pub ramp_width: f64,
    pub power_fraction: f64,
    pub abduction_phase: f64,
}

impl Default for GammaParams {
    fn default() -> Self {
        Self {
            max_angle: GAMMA_MAX_DEG,
            ramp_width: 0.1,
            power_fraction: 0.5,
            abduction_phase: 0.0,
        }
    }
}

impl GammaParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.max_angle.is_finite() && self.max_angle > 0.0 && self.max_angle <= 90.0) {
            return Err(Error::domain(format!(
                "gamma max_angle must be in (0, 90], got {}",
                self.max_angle
            )));
        }
        if !(self.ramp_width > 0.0 && self.ramp_width < 0.25) {
            return Err(Error::domain(format!(
                "gamma ramp_width must be in (0, 0.25), got {}",
                self.ramp_width
            )));
        }
        let pf = self.power_fraction;
        if !(pf >= self.ramp_width && pf <= 1.0 - self.ramp_width) {
            return Err(Error::domain(format!(
                "gamma power_fraction must be in [ramp_width, 1 - ramp_width], got {pf}"
            )));
        }
        if !(self.abduction_phase.is_finite() && (0.0..1.0).contains(&self.abduction_phase)) {
            return Err(Error::domain(format!(
                "gamma abduction_phase must be in [0, 1), got {}",
                self.abduction_phase
            )));
        }
        Ok(())
    }
}

/// γ in degrees at stroke `phase` in `[0, 1)`.
pub fn gamma_profile(phase: f64, params: &GammaParams) -> Result<f64> {
    if !(phase.is_finite() && (0.0..1.0).contains(&phase)) {
        return Err(Error::domain(format!("phase must be in [0, 1), got {phase}")));
    }
    params.validate()?;
    let local = (phase - params.abduction_phase).rem_euclid(1.0);
    let w = params.ramp_width;
    let pf = params.power_fraction;
    let level = if local < w {
        smooth_ramp(local / w)
    } else if local < pf {
        1.0
    } else if local < pf + w {
        1.0 - smooth_ramp((local - pf) / w)
    } else {
        0.0
    };
    Ok(params.max_angle * level)
}

/// Monotone 0→1 on [0, 1] with zero slope at both ends; 0.5 at the midpoint.
fn smooth_ramp(s: f64) -> f64 {
    0.5 * (1.0 - (PI * s.clamp(0.0, 1.0)).cos())
}

/// Full kinematic state at time `t`, keying γ to the α stroke phase.
pub fn state_at(
    alpha: &StrokeProfile,
    beta: &StrokeProfile,
    gamma: &GammaParams,
    t: f64,
) -> Result<KinematicState> {
    let g = gamma_profile(alpha.stroke_phase(t), gamma)?;
    KinematicState::new(alpha.sample(t), beta.sample(t), g, t)
}

/// Orientation of both distal rami. Each frame's columns are the ramus long
/// axis, its in-plane normal, and its midplane normal (see
/// [`PleopodPose::midplane_normal`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PleopodPose {
    pub endopodite: Rotation3<f64>,
    pub exopodite: Rotation3<f64>,
}

impl PleopodPose {
    pub fn long_axis(frame: &Rotation3<f64>) -> Vector3<f64> {
        frame * Vector3::x()
    }

    /// Normal of the ramus midplane (the plane holding the paddle).
    pub fn midplane_normal(frame: &Rotation3<f64>) -> Vector3<f64> {
        frame * Vector3::y()
    }
}

/// Composes the planar pose with γ abduction and ζ cupping.
///
/// The endopodite frame is the stroke-plane rotation by θ2 about +z. The
/// exopodite frame applies, in its own axes, abduction by γ about the axis
/// perpendicular to both the hinge axis (z) and the long axis, swinging the
/// long axis toward +z, then a ζ tilt about its long axis.
pub fn pleopod_pose_3d(geom: &AppendageGeometry, state: &KinematicState) -> Result<PleopodPose> {
    let links = link_angles(state.alpha, state.beta)?;
    let endopodite = Rotation3::from_axis_angle(&Vector3::z_axis(), links.theta2);
    let abduction_axis = Unit::new_unchecked(-Vector3::y());
    let abduct = Rotation3::from_axis_angle(&abduction_axis, state.gamma.to_radians());
    let cup = Rotation3::from_axis_angle(&Vector3::x_axis(), geom.zeta.to_radians());
    Ok(PleopodPose {
        endopodite,
        exopodite: endopodite * abduct * cup,
    })
}
