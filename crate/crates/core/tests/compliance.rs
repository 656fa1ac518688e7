use std::f64::consts::FRAC_PI_2;

use colav_core::compliance::{check_compliance, ComplianceParams};
use colav_core::env::{MoverSpec, ObstacleSpec};
use colav_core::geometry::Vec2;
use colav_core::trajectory::TrajectoryRow;

/// Own ship northbound along y = 0 at 5 m/s.
fn northbound(duration: f64) -> Vec<TrajectoryRow> {
    (0..=(duration * 10.0) as usize)
        .map(|k| {
            let t = k as f64 * 0.1;
            TrajectoryRow {
                t,
                x: 5.0 * t,
                y: 0.0,
                psi: 0.0,
                u: 5.0,
                v: 0.0,
                r: 0.0,
                Tu: 0.0,
                Tr: 0.0,
                reward: 0.0,
                cri_max: 0.0,
                cte: 0.0,
            }
        })
        .collect()
}

/// Target coming from starboard, heading west along x = 1000.
fn westbound_target(speed: f64) -> ObstacleSpec {
    ObstacleSpec {
        movers: vec![MoverSpec::linear(0, Vec2::new(1000.0, 300.0), -FRAC_PI_2, speed, 20.0)],
        ..Default::default()
    }
}

#[test]
fn crossing_ahead_of_starboard_target_within_limit_is_flagged() {
    // own ship reaches x = 1000 at t = 200 while the target is still 100 m east
    let flags = check_compliance(&northbound(300.0), &westbound_target(1.0), &ComplianceParams::default());
    assert!(!flags.collision);
    assert!(!flags.crossing_starboard);
    let sep = flags.min_separation.unwrap();
    assert!(sep > 2.0 * ComplianceParams::default().collision_radius && sep < 320.0, "{sep}");
}

#[test]
fn passing_astern_of_starboard_target_is_compliant() {
    // the target clears the own ship's track first
    let flags = check_compliance(&northbound(300.0), &westbound_target(3.0), &ComplianceParams::default());
    assert!(!flags.collision);
    assert!(flags.crossing_starboard);
    assert!(flags.min_separation.unwrap() < 320.0);
}

#[test]
fn crossing_ahead_beyond_limit_is_compliant() {
    let mut obstacles = westbound_target(1.0);
    obstacles.movers[0] = MoverSpec::linear(0, Vec2::new(1000.0, 800.0), -FRAC_PI_2, 1.0, 20.0);
    let flags = check_compliance(&northbound(300.0), &obstacles, &ComplianceParams::default());
    assert!(flags.crossing_starboard);
}

#[test]
fn stand_on_vessel_holding_course_is_compliant() {
    let port = ObstacleSpec {
        movers: vec![MoverSpec::linear(0, Vec2::new(1000.0, -300.0), FRAC_PI_2, 3.0, 20.0)],
        ..Default::default()
    };
    let flags = check_compliance(&northbound(300.0), &port, &ComplianceParams::default());
    assert!(flags.crossing_port);
    assert_eq!(flags.first_course_change, None);
}
