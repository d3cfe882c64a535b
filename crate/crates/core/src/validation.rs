//! Joint-angle reconstruction from tracked markers and trace comparison.
//!
//! Each video frame provides two points on the body axis and three points
//! along the pleopod: the protopodite pivot (joint A), the distal joint
//! (joint B), and the distal tip. Angles are recovered from vector
//! directions only, so the input may be in pixels or meters.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::csvio;
use crate::error::{Error, Result};
use crate::kinematics::{distal_joint, pleopod_tip, AppendageGeometry};
use crate::Vec2;

pub const MARKER_HEADER: [&str; 11] = ["t", "bx1", "by1", "bx2", "by2", "ax", "ay", "bx", "by", "tx", "ty"];
pub const ANGLE_HEADER: [&str; 2] = ["t", "angle_deg"];

/// Time series of one angle, degrees, with strictly increasing times.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AngleTrace {
    samples: Vec<(f64, f64)>,
}

impl AngleTrace {
    pub fn new(samples: Vec<(f64, f64)>) -> Result<Self> {
        if let Some((t, v)) = samples.iter().find(|(t, v)| !(t.is_finite() && v.is_finite())) {
            return Err(Error::domain(format!("non-finite sample ({t}, {v})")));
        }
        if let Some(w) = samples.windows(2).find(|w| w[1].0 <= w[0].0) {
            return Err(Error::domain(format!(
                "sample times must increase strictly ({} then {})",
                w[0].0, w[1].0
            )));
        }
        Ok(Self { samples })
    }

    pub fn from_fn(times: impl IntoIterator<Item = f64>, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(times.into_iter().map(|t| (t, f(t))).collect())
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.1)
    }

    pub fn start(&self) -> Option<f64> {
        self.samples.first().map(|s| s.0)
    }

    pub fn end(&self) -> Option<f64> {
        self.samples.last().map(|s| s.0)
    }

    /// Linear interpolation; `t` must lie within the sampled range.
    pub fn interpolate(&self, t: f64) -> Option<f64> {
        let (t0, t1) = (self.start()?, self.end()?);
        if t < t0 || t > t1 {
            return None;
        }
        let i = self.samples.partition_point(|s| s.0 <= t);
        if i == 0 {
            return Some(self.samples[0].1);
        }
        let (ta, va) = self.samples[i - 1];
        if ta == t || i == self.samples.len() {
            return Some(va);
        }
        let (tb, vb) = self.samples[i];
        Some(va + (vb - va) * (t - ta) / (tb - ta))
    }

    /// Samples with `t0 <= t <= t1`.
    pub fn window(&self, t0: f64, t1: f64) -> Self {
        Self {
            samples: self.samples.iter().copied().filter(|s| s.0 >= t0 && s.0 <= t1).collect(),
        }
    }

    /// Same values, times shifted by `dt`.
    pub fn shifted(&self, dt: f64) -> Self {
        Self {
            samples: self.samples.iter().map(|(t, v)| (t + dt, *v)).collect(),
        }
    }

    fn mean_spacing(&self) -> f64 {
        match (self.start(), self.end()) {
            (Some(a), Some(b)) if self.samples.len() > 1 => (b - a) / (self.samples.len() - 1) as f64,
            _ => f64::INFINITY,
        }
    }

    pub fn to_csv(&self) -> String {
        let rows: Vec<[f64; 2]> = self.samples.iter().map(|(t, v)| [*t, *v]).collect();
        csvio::format_table(&ANGLE_HEADER, rows.iter().map(|r| r.as_slice()))
    }

    pub fn from_csv(text: &str, source_name: &str) -> Result<Self> {
        let table = csvio::parse_table(text, source_name, Some(&ANGLE_HEADER))?;
        Self::new(table.rows.iter().map(|r| (r[0], r[1])).collect())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let table = csvio::read_table(path, Some(&ANGLE_HEADER))?;
        Self::new(table.rows.iter().map(|r| (r[0], r[1])).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkerFrame {
    pub t: f64,
    /// Rear and front points on the body axis; the axis points from the
    /// first to the second.
    pub body_a: Vec2,
    pub body_b: Vec2,
    pub joint_a: Vec2,
    pub joint_b: Vec2,
    pub tip: Vec2,
}

impl MarkerFrame {
    fn to_row(self) -> [f64; 11] {
        [
            self.t,
            self.body_a.x,
            self.body_a.y,
            self.body_b.x,
            self.body_b.y,
            self.joint_a.x,
            self.joint_a.y,
            self.joint_b.x,
            self.joint_b.y,
            self.tip.x,
            self.tip.y,
        ]
    }

    fn from_row(r: &[f64]) -> Self {
        Self {
            t: r[0],
            body_a: Vec2::new(r[1], r[2]),
            body_b: Vec2::new(r[3], r[4]),
            joint_a: Vec2::new(r[5], r[6]),
            joint_b: Vec2::new(r[7], r[8]),
            tip: Vec2::new(r[9], r[10]),
        }
    }

    /// Applies `p -> scale * R(rotation) p + offset` to every point.
    pub fn transformed(&self, rotation: f64, scale: f64, offset: Vec2) -> Self {
        let rot = nalgebra::Rotation2::new(rotation);
        let f = |p: Vec2| rot * p * scale + offset;
        Self {
            t: self.t,
            body_a: f(self.body_a),
            body_b: f(self.body_b),
            joint_a: f(self.joint_a),
            joint_b: f(self.joint_b),
            tip: f(self.tip),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MarkerTrace {
    pub frames: Vec<MarkerFrame>,
}

impl MarkerTrace {
    pub fn to_csv(&self) -> String {
        let rows: Vec<[f64; 11]> = self.frames.iter().map(|f| f.to_row()).collect();
        csvio::format_table(&MARKER_HEADER, rows.iter().map(|r| r.as_slice()))
    }

    pub fn from_csv(text: &str, source_name: &str) -> Result<Self> {
        let table = csvio::parse_table(text, source_name, Some(&MARKER_HEADER))?;
        Ok(Self {
            frames: table.rows.iter().map(|r| MarkerFrame::from_row(r)).collect(),
        })
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let table = csvio::read_table(path, Some(&MARKER_HEADER))?;
        Ok(Self {
            frames: table.rows.iter().map(|r| MarkerFrame::from_row(r)).collect(),
        })
    }
}

/// Marker positions for a known pose: body axis along +x, joint A at the
/// origin.
pub fn markers_for_pose(geom: &AppendageGeometry, alpha: f64, beta: f64, t: f64) -> Result<MarkerFrame> {
    Ok(MarkerFrame {
        t,
        body_a: Vec2::new(-0.05, 0.01),
        body_b: Vec2::new(0.05, 0.01),
        joint_a: Vec2::zeros(),
        joint_b: distal_joint(geom, alpha)?,
        tip: pleopod_tip(geom, alpha, beta)?,
    })
}

/// Counter-clockwise angle from `from` to `to`, radians in (-π, π].
fn signed_angle(from: &Vec2, to: &Vec2) -> f64 {
    let cross = from.x * to.y - from.y * to.x;
    cross.atan2(from.dot(to))
}

fn wrap_degrees(x: f64, lo: f64) -> f64 {
    let w = (x - lo).rem_euclid(360.0) + lo;
    if w >= lo + 360.0 {
        lo
    } else {
        w
    }
}

/// Recovers α and β (degrees) for every frame.
///
/// α is the clockwise angle from the body axis to the protopodite, in
/// (-180°, 180°]. β is the interior angle at the distal joint, 180° for
/// straight links, in [0°, 360°).
pub fn angles_from_markers(m: &MarkerTrace) -> Result<(AngleTrace, AngleTrace)> {
    let mut alpha = Vec::with_capacity(m.frames.len());
    let mut beta = Vec::with_capacity(m.frames.len());
    for (i, f) in m.frames.iter().enumerate() {
        if i > 0 && f.t <= m.frames[i - 1].t {
            return Err(Error::MarkerFrame {
                frame: i,
                message: format!("time {} does not follow {}", f.t, m.frames[i - 1].t),
            });
        }
        let scale = [f.body_a, f.body_b, f.joint_a, f.joint_b, f.tip]
            .iter()
            .map(|p| p.amax())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        let vector = |from: Vec2, to: Vec2, what: &str| {
            let v = to - from;
            if v.norm() <= scale * 1e-12 {
                Err(Error::MarkerFrame {
                    frame: i,
                    message: format!("{what} points coincide"),
                })
            } else {
                Ok(v)
            }
        };
        let body = vector(f.body_a, f.body_b, "body axis")?;
        let proto = vector(f.joint_a, f.joint_b, "joint A and joint B")?;
        let distal = vector(f.joint_b, f.tip, "joint B and distal tip")?;

        let a = signed_angle(&proto, &body).to_degrees();
        let b = 180.0 + signed_angle(&proto, &distal).to_degrees();
        alpha.push((f.t, a));
        beta.push((f.t, wrap_degrees(b, 0.0)));
    }
    Ok((AngleTrace { samples: alpha }, AngleTrace { samples: beta }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceMetrics {
    pub mean_abs_diff: f64,
    pub max_abs_diff: f64,
    /// `mean_abs_diff / pkpk_measured * 100`.
    pub percent_error: f64,
    pub pkpk_measured: f64,
    pub pkpk_reference: f64,
    /// Grid points compared.
    pub n_points: usize,
}

pub fn peak_to_peak(trace: &AngleTrace) -> Result<f64> {
    peak_to_peak_values(trace.values())
}

pub fn peak_to_peak_values(values: impl IntoIterator<Item = f64>) -> Result<f64> {
    let (lo, hi) = values
        .into_iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if lo > hi {
        return Err(Error::domain("peak-to-peak of an empty trace"));
    }
    Ok(hi - lo)
}

/// Values of `trace` inside `[lo, hi]`, including interpolated endpoints.
fn clipped_values(trace: &AngleTrace, lo: f64, hi: f64) -> Vec<f64> {
    let mut v: Vec<f64> = trace.window(lo, hi).values().collect();
    v.extend(trace.interpolate(lo));
    v.extend(trace.interpolate(hi));
    v
}

/// Compares two traces over their common time range.
///
/// Both are evaluated by linear interpolation on the sample times of the
/// coarser trace that fall inside the overlap.
pub fn compare_traces(measured: &AngleTrace, reference: &AngleTrace) -> Result<TraceMetrics> {
    let (Some(m0), Some(m1), Some(r0), Some(r1)) = (measured.start(), measured.end(), reference.start(), reference.end())
    else {
        return Err(Error::domain("cannot compare empty traces"));
    };
    let lo = m0.max(r0);
    let hi = m1.min(r1);
    if lo > hi {
        return Err(Error::domain(format!(
            "traces do not overlap ([{m0}, {m1}] vs [{r0}, {r1}])"
        )));
    }
    let coarser = if measured.mean_spacing() >= reference.mean_spacing() {
        measured
    } else {
        reference
    };
    let mut grid: Vec<f64> = coarser.window(lo, hi).samples().iter().map(|s| s.0).collect();
    if grid.is_empty() {
        grid = if lo == hi { vec![lo] } else { vec![lo, hi] };
    }

    let diffs: Vec<f64> = grid
        .iter()
        .map(|&t| {
            // Grid points lie inside both ranges by construction.
            (measured.interpolate(t).unwrap() - reference.interpolate(t).unwrap()).abs()
        })
        .collect();
    let mean_abs_diff = diffs.iter().sum::<f64>() / diffs.len() as f64;
    let max_abs_diff = diffs.iter().copied().fold(0.0, f64::max);
    let pkpk_measured = peak_to_peak_values(clipped_values(measured, lo, hi))?;
    let pkpk_reference = peak_to_peak_values(clipped_values(reference, lo, hi))?;
    Ok(TraceMetrics {
        mean_abs_diff,
        max_abs_diff,
        percent_error: percent_error(mean_abs_diff, pkpk_measured),
        pkpk_measured,
        pkpk_reference,
        n_points: grid.len(),
    })
}

/// Mean difference as a percentage of the measured peak-to-peak amplitude.
pub fn percent_error(mean_abs_diff: f64, pkpk_measured: f64) -> f64 {
    if mean_abs_diff == 0.0 {
        0.0
    } else if pkpk_measured == 0.0 {
        f64::INFINITY
    } else {
        mean_abs_diff / pkpk_measured * 100.0
    }
}

/// Times of the first two major maxima, delimiting one stroke cycle.
///
/// A major maximum is the highest sample of a run of samples above the
/// trace's mid-range; runs touching either end of the trace are ignored.
pub fn cycle_bounds(alpha: &AngleTrace) -> Result<(f64, f64)> {
    let s = alpha.samples();
    let pkpk = peak_to_peak(alpha)?;
    let lo = alpha.values().fold(f64::INFINITY, f64::min);
    let threshold = lo + 0.5 * pkpk;
    let mut peaks = Vec::new();
    let mut i = 0;
    while i < s.len() {
        if s[i].1 > threshold {
            let start = i;
            while i < s.len() && s[i].1 > threshold {
                i += 1;
            }
            if start > 0 && i < s.len() {
                let best = (start..i).fold(start, |b, j| if s[j].1 > s[b].1 { j } else { b });
                peaks.push(s[best].0);
            }
        } else {
            i += 1;
        }
    }
    match peaks.as_slice() {
        [a, b, ..] => Ok((*a, *b)),
        _ => Err(Error::domain("trace does not contain a complete cycle")),
    }
}

pub fn read_markers(path: &Path) -> Result<MarkerTrace> {
    MarkerTrace::read_csv(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn frame(body: (Vec2, Vec2), a: Vec2, b: Vec2, tip: Vec2) -> MarkerFrame {
        MarkerFrame {
            t: 0.0,
            body_a: body.0,
            body_b: body.1,
            joint_a: a,
            joint_b: b,
            tip,
        }
    }

    #[test]
    fn collinear_body_and_protopodite() {
        let f = frame(
            (Vec2::new(-1.0, 0.0), Vec2::new(0.0, 0.0)),
            Vec2::new(0.0, 0.0),
            Vec2::new(3.0, 0.0),
            Vec2::new(5.0, 0.0),
        );
        let (a, b) = angles_from_markers(&MarkerTrace { frames: vec![f] }).unwrap();
        assert_eq!(a.samples()[0].1, 0.0);
        assert_eq!(b.samples()[0].1, 180.0);
    }

    #[test]
    fn recovers_known_pose() {
        let g = AppendageGeometry::robot_p1();
        let f = markers_for_pose(&g, 30.0, 150.0, 0.0).unwrap();
        let (a, b) = angles_from_markers(&MarkerTrace { frames: vec![f] }).unwrap();
        assert_abs_diff_eq!(a.samples()[0].1, 30.0, epsilon = 1e-9);
        assert_abs_diff_eq!(b.samples()[0].1, 150.0, epsilon = 1e-9);
    }

    #[test]
    fn invariant_under_similarity_transforms() {
        let g = AppendageGeometry::robot_p1();
        let f = markers_for_pose(&g, 71.0, 121.0, 0.0).unwrap();
        for (rot, scale, off) in [(1.0, 1.0, Vec2::zeros()), (-2.5, 640.0, Vec2::new(300.0, -20.0)), (3.0, 1e-3, Vec2::new(1.0, 1.0))] {
            let tf = f.transformed(rot, scale, off);
            let (a, b) = angles_from_markers(&MarkerTrace { frames: vec![tf] }).unwrap();
            assert_abs_diff_eq!(a.samples()[0].1, 71.0, epsilon = 1e-9);
            assert_abs_diff_eq!(b.samples()[0].1, 121.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn coincident_points_report_frame() {
        let g = AppendageGeometry::robot_p1();
        let mut frames: Vec<_> = (0..3).map(|i| markers_for_pose(&g, 40.0, 130.0, i as f64).unwrap()).collect();
        frames[2].tip = frames[2].joint_b;
        match angles_from_markers(&MarkerTrace { frames }) {
            Err(Error::MarkerFrame { frame, .. }) => assert_eq!(frame, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn marker_csv_round_trip() {
        let g = AppendageGeometry::robot_p1();
        let trace = MarkerTrace {
            frames: (0..4).map(|i| markers_for_pose(&g, 20.0 + i as f64, 140.0, i as f64 * 0.002).unwrap()).collect(),
        };
        let text = trace.to_csv();
        assert!(text.starts_with("t,bx1,by1,bx2,by2,ax,ay,bx,by,tx,ty\n"));
        assert_eq!(MarkerTrace::from_csv(&text, "mem").unwrap(), trace);
    }

    fn sine(pkpk: f64, offset: f64, dt: f64, n: usize) -> AngleTrace {
        AngleTrace::from_fn((0..n).map(|i| i as f64 * dt), |t| {
            offset + 0.5 * pkpk * (std::f64::consts::TAU * t).sin()
        })
        .unwrap()
    }

    #[test]
    fn identical_traces() {
        let a = sine(78.0, 58.5, 0.01, 101);
        let m = compare_traces(&a, &a).unwrap();
        assert_eq!(m.mean_abs_diff, 0.0);
        assert_eq!(m.max_abs_diff, 0.0);
        assert_eq!(m.percent_error, 0.0);
    }

    #[test]
    fn constant_offset() {
        let measured = sine(40.0, 130.0, 0.002, 501);
        let reference = sine(40.0, 132.0, 0.01, 101);
        let m = compare_traces(&measured, &reference).unwrap();
        assert_abs_diff_eq!(m.mean_abs_diff, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.max_abs_diff, 2.0, epsilon = 1e-12);
        // Coarser grid is the reference.
        assert_eq!(m.n_points, 101);
    }

    #[test]
    fn percent_definition() {
        assert_abs_diff_eq!(percent_error(3.5, 44.4), 7.882882882882883, epsilon = 1e-12);
        assert_abs_diff_eq!(percent_error(2.1, 77.0), 2.727272727272727, epsilon = 1e-12);
        assert_eq!(percent_error(0.0, 0.0), 0.0);
        assert!(percent_error(1.0, 0.0).is_infinite());
    }

    #[test]
    fn non_overlapping_rejected() {
        let a = AngleTrace::new(vec![(0.0, 1.0), (1.0, 2.0)]).unwrap();
        let b = AngleTrace::new(vec![(2.0, 1.0), (3.0, 2.0)]).unwrap();
        assert!(matches!(compare_traces(&a, &b), Err(Error::Domain(_))));
        assert!(compare_traces(&a, &AngleTrace::default()).is_err());
    }

    #[test]
    fn partial_overlap_uses_common_range() {
        let a = AngleTrace::new(vec![(0.0, 0.0), (1.0, 10.0), (2.0, 20.0)]).unwrap();
        let b = AngleTrace::new(vec![(0.5, 6.0), (1.5, 16.0), (2.5, 26.0)]).unwrap();
        let m = compare_traces(&a, &b).unwrap();
        // Same spacing: measured grid {1.0} ∪ ... within [0.5, 2.0].
        assert_abs_diff_eq!(m.mean_abs_diff, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.pkpk_measured, 15.0, epsilon = 1e-12);
    }

    #[test]
    fn trace_validation() {
        assert!(AngleTrace::new(vec![(0.0, 1.0), (0.0, 2.0)]).is_err());
        assert!(AngleTrace::new(vec![(0.0, f64::NAN)]).is_err());
        assert!(AngleTrace::from_csv("t,angle_deg\n0,1\n1,2\n", "mem").is_ok());
        assert!(AngleTrace::from_csv("t,deg\n0,1\n", "mem").is_err());
    }

    #[test]
    fn peak_to_peak_examples() {
        assert!(peak_to_peak(&AngleTrace::default()).is_err());
        let flat = AngleTrace::from_fn((0..10).map(f64::from), |_| 42.0).unwrap();
        assert_eq!(peak_to_peak(&flat).unwrap(), 0.0);
        let s = sine(78.0, 0.0, 0.001, 1001);
        assert_abs_diff_eq!(peak_to_peak(&s).unwrap(), 78.0, epsilon = 1e-9);
        // Servo saturation clips the top of the stroke.
        let clipped = AngleTrace::from_fn((0..1000).map(|i| i as f64 * 0.001), |t| {
            (150.0 + 53.0 * (std::f64::consts::TAU * t).sin()).min(180.0)
        })
        .unwrap();
        let direct = clipped.values().fold(f64::NEG_INFINITY, f64::max) - clipped.values().fold(f64::INFINITY, f64::min);
        assert_eq!(peak_to_peak(&clipped).unwrap(), direct);
        assert!(direct < 106.0);
    }

    #[test]
    fn interpolation() {
        let a = AngleTrace::new(vec![(0.0, 0.0), (1.0, 10.0), (3.0, 30.0)]).unwrap();
        assert_eq!(a.interpolate(0.0), Some(0.0));
        assert_eq!(a.interpolate(0.5), Some(5.0));
        assert_eq!(a.interpolate(2.0), Some(20.0));
        assert_eq!(a.interpolate(3.0), Some(30.0));
        assert_eq!(a.interpolate(3.1), None);
    }

    #[test]
    fn cycle_bounds_between_maxima() {
        // maxima of sin(2π t) at t = 0.25, 1.25, ...
        let s = sine(80.0, 50.0, 0.01, 301);
        let (a, b) = cycle_bounds(&s).unwrap();
        assert_abs_diff_eq!(a, 0.25, epsilon = 1e-9);
        assert_abs_diff_eq!(b, 1.25, epsilon = 1e-9);
        assert!(cycle_bounds(&sine(80.0, 50.0, 0.01, 80)).is_err());
    }
}
