//! Epicyclic gear-train algebra.
//!
//! The protopodite is the arm of an epicyclic train. The first gear is
//! driven by the β servo; the last gear is fixed to the distal link. For a
//! gear pair sharing an arm that turns by `Δφ_arm`, the driven gear obeys
//!
//! ```text
//! (Δφ_next - Δφ_arm) / (Δφ_prev - Δφ_arm) = -N_prev / N_next
//! ```
//!
//! Chaining the pairs along the arm gives a composite ratio of
//! `(-1)^(K-1) * r_1 / r_K` between the first and last gear, relative to
//! the arm.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::kinematics::link_angles;

/// Fewest teeth used for any printed gear.
pub const MIN_TEETH: u32 = 12;

/// Ordered gear train on one protopodite, stored as primitive radii.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GearChain {
    radii: Vec<f64>,
    /// Initial rotations ψ_{k,0} of gears 1..K-1, radians. Gear K is the
    /// distal link and uses `theta2_offset`.
    psi_offsets: Vec<f64>,
    theta1_offset: f64,
    theta2_offset: f64,
}

impl GearChain {
    pub fn from_radii(radii: Vec<f64>) -> Result<Self> {
        if radii.len() < 2 {
            return Err(Error::domain(format!(
                "a gear chain needs at least 2 gears, got {}",
                radii.len()
            )));
        }
        if let Some(r) = radii.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(Error::domain(format!("gear radii must be > 0, got {r}")));
        }
        let k = radii.len();
        Ok(Self {
            radii,
            psi_offsets: vec![0.0; k - 1],
            theta1_offset: 0.0,
            theta2_offset: 0.0,
        })
    }

    /// Builds a chain from tooth counts; radii follow from `r = m N / 2`.
    pub fn from_teeth(teeth: &[u32], modulus: f64) -> Result<Self> {
        if !(modulus.is_finite() && modulus > 0.0) {
            return Err(Error::domain(format!("modulus must be > 0, got {modulus}")));
        }
        if teeth.contains(&0) {
            return Err(Error::domain("tooth counts must be > 0"));
        }
        Self::from_radii(teeth.iter().map(|&n| 0.5 * modulus * n as f64).collect())
    }

    /// `n_gears` identical gears.
    pub fn equal(n_gears: usize, radius: f64) -> Result<Self> {
        Self::from_radii(vec![radius; n_gears])
    }

    /// Sets the reference pose (radians) from which displacements are measured.
    pub fn with_offsets(mut self, theta1_offset: f64, theta2_offset: f64, psi_offsets: Vec<f64>) -> Result<Self> {
        if psi_offsets.len() != self.radii.len() - 1 {
            return Err(Error::domain(format!(
                "expected {} gear offsets, got {}",
                self.radii.len() - 1,
                psi_offsets.len()
            )));
        }
        ensure_finite("theta1_offset", theta1_offset)?;
        ensure_finite("theta2_offset", theta2_offset)?;
        for p in &psi_offsets {
            ensure_finite("psi offset", *p)?;
        }
        self.theta1_offset = theta1_offset;
        self.theta2_offset = theta2_offset;
        self.psi_offsets = psi_offsets;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn theta1_offset(&self) -> f64 {
        self.theta1_offset
    }

    pub fn theta2_offset(&self) -> f64 {
        self.theta2_offset
    }

    pub fn psi_offsets(&self) -> &[f64] {
        &self.psi_offsets
    }

    /// Consecutive ratios `r_k / r_{k+1}`.
    pub fn ratios(&self) -> impl Iterator<Item = f64> + '_ {
        self.radii.windows(2).map(|w| w[0] / w[1])
    }

    /// Signed ratio `(Δθ2 - Δθ1) / (Δψ1 - Δθ1)`.
    pub fn composite_ratio(&self) -> f64 {
        let sign = if self.radii.len().is_multiple_of(2) { -1.0 } else { 1.0 };
        sign * self.radii[0] / self.radii[self.radii.len() - 1]
    }

    /// Displacements of every gear, first to last, for a driving-gear
    /// displacement `dpsi1` and arm displacement `dtheta1` (radians). The last
    /// entry is the distal link displacement.
    pub fn gear_displacements(&self, dpsi1: f64, dtheta1: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.radii.len());
        out.push(dpsi1);
        let mut prev = dpsi1;
        for re in self.ratios() {
            prev = dtheta1 - re * (prev - dtheta1);
            out.push(prev);
        }
        out
    }
}

/// Default trains for `n` appendages: four equal gears, except the two
/// posterior appendages, whose short protopodites fit only three.
pub fn robot_chains(n_appendages: usize) -> Vec<GearChain> {
    let radius = primitive_radius(crate::kinematics::P1_X1_M, 4).expect("valid constants");
    (1..=n_appendages)
        .map(|k| {
            let gears = if n_appendages >= 3 && k + 2 > n_appendages { 3 } else { 4 };
            GearChain::equal(gears, radius).expect("valid constants")
        })
        .collect()
}

/// One epicyclic pair: displacement of the driven gear given the driving
/// gear, the arm, and the two tooth counts (radii work equally well).
pub fn epicyclic_step(dphi_prev: f64, dphi_arm: f64, n_prev: f64, n_next: f64) -> Result<f64> {
    if !(n_prev.is_finite() && n_prev > 0.0 && n_next.is_finite() && n_next > 0.0) {
        return Err(Error::domain(format!(
            "tooth counts must be > 0, got {n_prev} and {n_next}"
        )));
    }
    Ok(dphi_arm - (n_prev / n_next) * (dphi_prev - dphi_arm))
}

/// Distal-link displacement Δθ2 from driving-gear displacement Δψ1 and arm
/// displacement Δθ1, radians.
pub fn chain_forward(dpsi1: f64, dtheta1: f64, chain: &GearChain) -> f64 {
    dtheta1 + chain.composite_ratio() * (dpsi1 - dtheta1)
}

/// Driving-gear displacement Δψ1 that yields distal displacement Δθ2.
pub fn chain_inverse(dtheta2: f64, dtheta1: f64, chain: &GearChain) -> f64 {
    dtheta1 + (dtheta2 - dtheta1) / chain.composite_ratio()
}

/// Servo targets (degrees) for a pose: α drives the protopodite directly;
/// the β servo sets the absolute driving-gear angle ψ1.
pub fn servo_angles_for_pose(alpha: f64, beta: f64, chain: &GearChain) -> Result<(f64, f64)> {
    let links = link_angles(alpha, beta)?;
    let dtheta1 = links.theta1 - chain.theta1_offset;
    let dtheta2 = links.theta2 - chain.theta2_offset;
    let psi1 = chain.psi_offsets[0] + chain_inverse(dtheta2, dtheta1, chain);
    Ok((alpha, psi1.to_degrees()))
}

/// Inverse of [`servo_angles_for_pose`]: (α, β) in degrees reached for
/// servo targets (α, ψ1) in degrees.
pub fn pose_for_servo_angles(servo_alpha: f64, servo_psi1: f64, chain: &GearChain) -> Result<(f64, f64)> {
    ensure_finite("servo_alpha", servo_alpha)?;
    ensure_finite("servo_psi1", servo_psi1)?;
    let theta1 = std::f64::consts::TAU - servo_alpha.to_radians();
    let dtheta1 = theta1 - chain.theta1_offset;
    let dpsi1 = servo_psi1.to_radians() - chain.psi_offsets[0];
    let theta2 = chain.theta2_offset + chain_forward(dpsi1, dtheta1, chain);
    // θ2 = π + β - α
    let beta = (theta2 - std::f64::consts::PI).to_degrees() + servo_alpha;
    Ok((servo_alpha, beta))
}

/// Primitive radius that fits `n_gears` meshing gears along a link of
/// length `x1`: the link spans `2 n - 2` radii between first and last axis.
pub fn primitive_radius(x1: f64, n_gears: u32) -> Result<f64> {
    if !(x1.is_finite() && x1 > 0.0) {
        return Err(Error::domain(format!("link length must be > 0, got {x1}")));
    }
    if n_gears < 2 {
        return Err(Error::domain(format!("need at least 2 gears, got {n_gears}")));
    }
    Ok(x1 / (2 * n_gears - 2) as f64)
}

/// Gear modulus `2 r_p / N`.
pub fn modulus(primitive_radius: f64, teeth: u32) -> Result<f64> {
    if teeth == 0 {
        return Err(Error::domain("tooth count must be > 0"));
    }
    if !(primitive_radius.is_finite() && primitive_radius > 0.0) {
        return Err(Error::domain(format!(
            "primitive radius must be > 0, got {primitive_radius}"
        )));
    }
    if teeth < MIN_TEETH {
        log::warn!("{teeth} teeth is below the {MIN_TEETH}-tooth minimum");
    }
    Ok(2.0 * primitive_radius / teeth as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GearSizing {
    pub primitive_radius: f64,
    pub teeth: u32,
    pub modulus: f64,
}

impl GearSizing {
    /// Sizes the gears of a train with `n_gears` gears on a link of length `x1`.
    pub fn new(x1: f64, n_gears: u32, teeth: u32) -> Result<Self> {
        if teeth < MIN_TEETH {
            return Err(Error::domain(format!(
                "gears need at least {MIN_TEETH} teeth, got {teeth}"
            )));
        }
        let primitive_radius = primitive_radius(x1, n_gears)?;
        Ok(Self {
            primitive_radius,
            teeth,
            modulus: modulus(primitive_radius, teeth)?,
        })
    }
}

/// Play (dead-zone) operator for transmission backlash.
///
/// The output stays within `[input - deadband, input]`. It starts at the
/// first input and moves only when the input pushes it against either edge.
#[derive(Debug, Clone, Copy)]
pub struct Backlash {
    deadband: f64,
    output: Option<f64>,
}

impl Backlash {
    pub fn new(deadband: f64) -> Result<Self> {
        if !(deadband.is_finite() && deadband >= 0.0) {
            return Err(Error::domain(format!("deadband must be >= 0, got {deadband}")));
        }
        Ok(Self {
            deadband,
            output: None,
        })
    }

    pub fn update(&mut self, input: f64) -> f64 {
        let y = match self.output {
            None => input,
            Some(prev) => prev.clamp(input - self.deadband, input),
        };
        self.output = Some(y);
        y
    }
}

/// Runs [`Backlash`] over a sampled angle trace (degrees).
pub fn apply_backlash(trace: &[f64], deadband: f64) -> Result<Vec<f64>> {
    let mut op = Backlash::new(deadband)?;
    Ok(trace.iter().map(|&x| op.update(x)).collect())
}
