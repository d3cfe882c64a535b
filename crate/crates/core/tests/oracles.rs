//! Cross-checks of the library against independently written references.

use metaswim_core::geartrain::{chain_forward, epicyclic_step, robot_chains, GearChain};
use metaswim_core::kinematics::{pleopod_tip, tip_trajectory, AppendageGeometry};
use metaswim_core::schedule::{build_schedule, export_schedule, import_schedule, ScheduleOptions};
use metaswim_core::validation::{angles_from_markers, compare_traces, markers_for_pose, AngleTrace, MarkerTrace};
use metaswim_core::waveforms::{alpha_profile, beta_profile, MetachronalConfig, StrokeProfile};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Tip position from explicit 2x2 rotation matrices.
fn tip_oracle(x1: f64, x2: f64, alpha_deg: f64, beta_deg: f64) -> (f64, f64) {
    let d = std::f64::consts::PI / 180.0;
    let t1 = 2.0 * std::f64::consts::PI - alpha_deg * d;
    let t2 = std::f64::consts::PI + beta_deg * d - alpha_deg * d;
    let rot = |t: f64| [[t.cos(), -t.sin()], [t.sin(), t.cos()]];
    let (r1, r2) = (rot(t1), rot(t2));
    (
        r1[0][0] * x1 + r1[0][1] * 0.0 + r2[0][0] * x2 + r2[0][1] * 0.0,
        r1[1][0] * x1 + r1[1][1] * 0.0 + r2[1][0] * x2 + r2[1][1] * 0.0,
    )
}

#[test]
fn tip_matches_rotation_matrix_oracle() {
    let geom = AppendageGeometry::robot_p1();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let a: f64 = rng.gen_range(-360.0..360.0);
        let b: f64 = rng.gen_range(-360.0..360.0);
        let tip = pleopod_tip(&geom, a, b).unwrap();
        let (x, y) = tip_oracle(geom.x1(), geom.x2(), a, b);
        assert!((tip.x - x).abs() < 1e-12 && (tip.y - y).abs() < 1e-12);
    }
}

proptest! {
    #[test]
    fn tip_within_reach(a in -720.0f64..720.0, b in -720.0f64..720.0) {
        let geom = AppendageGeometry::robot_p1();
        let tip = pleopod_tip(&geom, a, b).unwrap();
        prop_assert!(tip.norm() <= geom.reach() + 1e-15);
    }

    #[test]
    fn link_angle_identity(a in -720.0f64..720.0, b in -720.0f64..720.0) {
        let l = metaswim_core::kinematics::link_angles(a, b).unwrap();
        prop_assert!((l.delta() - (std::f64::consts::PI - b.to_radians())).abs() < 1e-12);
    }

    #[test]
    fn chain_forward_equals_cascaded_pairs(
        radii in prop::collection::vec(0.002f64..0.03, 2..=6),
        dpsi1 in -6.0f64..6.0,
        dtheta1 in -6.0f64..6.0,
    ) {
        let chain = GearChain::from_radii(radii.clone()).unwrap();
        let mut prev = dpsi1;
        for w in radii.windows(2) {
            prev = epicyclic_step(prev, dtheta1, w[0], w[1]).unwrap();
        }
        prop_assert!((chain_forward(dpsi1, dtheta1, &chain) - prev).abs() < 1e-12);
    }
}

#[test]
fn reference_trajectory_closes() {
    let geom = AppendageGeometry::robot_p1();
    let a = StrokeProfile::new(58.5, 78.0, 0.57, 0.0).unwrap();
    let b = StrokeProfile::new(133.5, 48.0, 0.57, 0.5).unwrap();
    let traj = tip_trajectory(&geom, &a, &b, 500).unwrap();
    assert!(traj.closure_gap() < 1e-9);
    assert!(traj.max_radius() <= 0.0815);
    assert!(traj.samples.windows(2).all(|w| w[1].0 > w[0].0));
    // Exact antiphase ties β to α, so the tip retraces a single arc.
    assert!(loop_area(&traj) < 1e-12);

    // A quarter-cycle β lag extends the distal link through the power
    // stroke and opens the path into a loop.
    let lagged = StrokeProfile::new(133.5, 48.0, 0.57, 0.75).unwrap();
    let traj = tip_trajectory(&geom, &a, &lagged, 500).unwrap();
    assert!(traj.closure_gap() < 1e-9);
    assert!(loop_area(&traj) > 1e-4, "area {}", loop_area(&traj));
}

/// Shoelace area of the closed sample polygon, m².
fn loop_area(traj: &metaswim_core::TipTrajectory) -> f64 {
    traj.samples
        .windows(2)
        .map(|w| w[0].1.x * w[1].1.y - w[1].1.x * w[0].1.y)
        .sum::<f64>()
        .abs()
        * 0.5
}

#[test]
fn schedule_reconstructs_commanded_angles() {
    let cfg = MetachronalConfig::default();
    let chains = robot_chains(5);
    let opts = ScheduleOptions::default();
    let s = build_schedule(&cfg, &chains, 2.0 / 0.57, &opts).unwrap();
    for k in 1..=5 {
        let a = alpha_profile(k, &cfg).unwrap();
        let b = beta_profile(k, &cfg).unwrap();
        for (row, (t, alpha, beta)) in s.rows.iter().zip(s.reconstruct_pose(k, &chains[k - 1]).unwrap()) {
            assert_eq!(row.t, t);
            assert!((row.commands[k - 1].alpha - a.sample(t)).abs() < 1e-9);
            assert!((alpha - a.sample(t)).abs() < 1e-9);
            assert!((beta - b.sample(t)).abs() < 1e-9, "P{k} t={t}: {beta} vs {}", b.sample(t));
        }
    }
}

#[test]
fn schedule_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    let cfg = MetachronalConfig::default();
    let opts = ScheduleOptions::default();
    let s = build_schedule(&cfg, &robot_chains(5), 1.0, &opts).unwrap();
    export_schedule(&s, &path).unwrap();
    let first = std::fs::read(&path).unwrap();
    assert_eq!(import_schedule(&path, opts).unwrap(), s);
    export_schedule(&s, &path).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), first);
}

#[test]
fn marker_round_trip_zero_error() {
    let geom = AppendageGeometry::robot_p1();
    let a = StrokeProfile::new(58.5, 78.0, 0.57, 0.0).unwrap();
    let b = StrokeProfile::new(133.5, 48.0, 0.57, 0.5).unwrap();
    let times: Vec<f64> = (0..900).map(|i| i as f64 / 500.0).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let frames = times
        .iter()
        .map(|&t| {
            let f = markers_for_pose(&geom, a.sample(t), b.sample(t), t).unwrap();
            let off = metaswim_core::Vec2::new(rng.gen_range(-500.0..500.0), rng.gen_range(-500.0..500.0));
            f.transformed(rng.gen_range(-3.0..3.0), rng.gen_range(0.5..2000.0), off)
        })
        .collect();
    let (alpha, beta) = angles_from_markers(&MarkerTrace { frames }).unwrap();
    let ref_a = AngleTrace::from_fn(times.iter().copied(), |t| a.sample(t)).unwrap();
    let ref_b = AngleTrace::from_fn(times.iter().copied(), |t| b.sample(t)).unwrap();
    for (got, want) in alpha.values().zip(ref_a.values()).chain(beta.values().zip(ref_b.values())) {
        assert!((got - want).abs() < 1e-9);
    }
    let m = compare_traces(&alpha, &ref_a).unwrap();
    assert!(m.percent_error < 1e-9);
    assert!((m.pkpk_measured - m.pkpk_reference).abs() < 1e-9);
}
