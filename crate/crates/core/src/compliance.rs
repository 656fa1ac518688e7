//! Geometric checks for the head-on and crossing rules, computed from a
//! recorded trajectory and the target tracks alone.

use serde::{Deserialize, Serialize};

use crate::env::{in_collision, ObstacleSpec};
use crate::geometry::{unit, wrap_angle, Vec2};
use crate::perception::MoverState;
use crate::scenario::ColregKind;
use crate::trajectory::TrajectoryRow;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ComplianceParams {
    /// Own-ship disc radius (m).
    pub collision_radius: f64,
    /// Clearance beyond which an encounter counts as kept clear (m).
    pub d_l: f64,
    /// Smallest heading change counted as a manoeuvre (deg).
    pub course_change_deg: f64,
    /// Stand-on tolerance band around the initial heading (deg).
    pub stand_on_band_deg: f64,
}

impl Default for ComplianceParams {
    fn default() -> Self {
        Self {
            collision_radius: 10.15,
            d_l: 320.0,
            course_change_deg: 5.0,
            stand_on_band_deg: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplianceFlags {
    pub head_on: bool,
    pub crossing_starboard: bool,
    pub crossing_port: bool,
    pub collision: bool,
    /// Smallest own-ship-centre to target-hull distance (m); `None`
    /// without targets.
    pub min_separation: Option<f64>,
    /// Signed first heading change beyond the threshold (deg, starboard
    /// positive).
    pub first_course_change: Option<f64>,
}

impl ComplianceFlags {
    pub fn for_kind(&self, kind: ColregKind) -> bool {
        match kind {
            ColregKind::HeadOn => self.head_on,
            ColregKind::CrossingStarboard => self.crossing_starboard,
            ColregKind::CrossingPort => self.crossing_port,
        }
    }
}

struct Sample {
    os: Vec2,
    psi: f64,
    ts: Option<MoverState>,
}

/// The primary target is the mover that comes closest to the own ship.
fn primary_target(rows: &[TrajectoryRow], obstacles: &ObstacleSpec) -> Option<u32> {
    let mut best: Option<(f64, u32)> = None;
    for row in rows {
        let p = Vec2::new(row.x, row.y);
        for m in obstacles.at(row.t).movers {
            let d = (m.position() - p).norm() - m.radius;
            if best.is_none_or(|(bd, bid)| d < bd || (d == bd && m.id < bid)) {
                best = Some((d, m.id));
            }
        }
    }
    best.map(|b| b.1)
}

pub fn check_compliance(
    rows: &[TrajectoryRow],
    obstacles: &ObstacleSpec,
    params: &ComplianceParams,
) -> ComplianceFlags {
    let collision = rows
        .iter()
        .any(|r| in_collision(&r.state(), params.collision_radius, &obstacles.at(r.t)));

    let first_course_change = rows.first().and_then(|first| {
        let thr = params.course_change_deg.to_radians();
        rows.iter()
            .map(|r| wrap_angle(r.psi - first.psi))
            .find(|d| d.abs() > thr)
            .map(f64::to_degrees)
    });

    let target = primary_target(rows, obstacles);
    let samples: Vec<Sample> = rows
        .iter()
        .map(|r| Sample {
            os: Vec2::new(r.x, r.y),
            psi: r.psi,
            ts: target.and_then(|id| obstacles.at(r.t).movers.into_iter().find(|m| m.id == id)),
        })
        .collect();

    let mut min_sep = f64::INFINITY;
    let mut min_dist = f64::INFINITY;
    let mut at_cpa: Option<&Sample> = None;
    for s in &samples {
        if let Some(ts) = &s.ts {
            let d = (ts.position() - s.os).norm();
            if d < min_dist {
                min_dist = d;
                at_cpa = Some(s);
            }
            min_sep = min_sep.min(d - ts.radius);
        }
    }
    let safe = !collision && min_sep >= 2.0 * params.collision_radius;
    if target.is_none() {
        return ComplianceFlags {
            head_on: !collision,
            crossing_starboard: !collision,
            crossing_port: !collision,
            collision,
            min_separation: None,
            first_course_change,
        };
    }
    let kept_clear = min_dist >= params.d_l;

    let port_to_port = at_cpa.is_some_and(|s| {
        let ts = s.ts.as_ref().unwrap();
        let rel = ts.position() - s.os;
        wrap_angle(rel.y.atan2(rel.x) - s.psi) < 0.0
    });
    let starboard_first = first_course_change.is_some_and(|d| d > 0.0);
    let head_on = safe && port_to_port && starboard_first;

    let crossing_starboard = safe && (kept_clear || !crossed_ahead(&samples));

    let band = params.stand_on_band_deg.to_radians();
    let psi0 = rows.first().map_or(0.0, |r| r.psi);
    let held = rows.iter().all(|r| wrap_angle(r.psi - psi0).abs() <= band);
    let crossing_port = safe && (held || kept_clear);

    ComplianceFlags {
        head_on,
        crossing_starboard,
        crossing_port,
        collision,
        min_separation: Some(min_sep),
        first_course_change,
    }
}

/// True if the own ship ever crosses the target's course line ahead of it.
fn crossed_ahead(samples: &[Sample]) -> bool {
    let side = |s: &Sample| {
        s.ts.as_ref().map(|ts| {
            let dir = unit(ts.course);
            let rel = s.os - ts.position();
            (dir.x * rel.y - dir.y * rel.x, dir.dot(&rel))
        })
    };
    samples.windows(2).any(|w| match (side(&w[0]), side(&w[1])) {
        (Some((a, _)), Some((b, along))) => a.signum() != b.signum() && a != 0.0 && along > 0.0,
        _ => false,
    })
}
