//! Kinematics toolkit for metachronal, drag-based swimmer mechanisms.
//!
//! The crate models one pleopod as a two-link planar chain (protopodite and
//! distal segment) whose second link is driven through an epicyclic gear
//! train riding on the first link. Around that core it provides sinusoidal
//! stroke waveforms with metachronal phase lags, Reynolds-number scaling,
//! fixed-rate servo schedules, and marker-based validation metrics.
//!
//! Angles are degrees at every public interface unless a function says
//! otherwise (the gear-chain algebra works on radian displacements).

pub mod config;
pub mod csvio;
pub mod error;
pub mod geartrain;
pub mod kinematics;
pub mod scaling;
pub mod schedule;
pub mod validation;
pub mod waveforms;

pub use config::SimConfig;
pub use error::{Error, Result};
pub use geartrain::{GearChain, GearSizing};
pub use kinematics::{
    AppendageGeometry, GammaParams, KinematicState, LinkAngles, PleopodPose, TipTrajectory,
};
pub use scaling::{ReConvention, SwimmerParams};
pub use schedule::{ScheduleOptions, ServoSchedule};
pub use validation::{AngleTrace, MarkerFrame, MarkerTrace, TraceMetrics};
pub use waveforms::{MetachronalConfig, StrokeProfile};

/// 2D point or vector in the stroke plane.
pub type Vec2 = nalgebra::Vector2<f64>;
