use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{unit, Circle, Polygon, Vec2};
use crate::perception::{MoverState, ObstacleSet};

/// How a target ship moves. Movers never react to the own ship.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Motion {
    /// Constant velocity from `position` at t = 0.
    Linear {
        position: [f64; 2],
        course: f64,
        speed: f64,
    },
    /// Piecewise-linear replay of `[t, x, y]` fixes; present only between
    /// the first and last fix.
    Track { track: Vec<[f64; 3]> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoverSpec {
    pub id: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub radius: f64,
    #[serde(flatten)]
    pub motion: Motion,
}

impl MoverSpec {
    pub fn linear(id: u32, position: Vec2, course: f64, speed: f64, radius: f64) -> Self {
        Self {
            id,
            name: None,
            radius,
            motion: Motion::Linear {
                position: [position.x, position.y],
                course,
                speed,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0) {
            return Err(Error::config(format!("mover {} needs a positive radius", self.id)));
        }
        match &self.motion {
            Motion::Linear { speed, .. } if *speed < 0.0 => Err(Error::config(format!(
                "mover {} has negative speed",
                self.id
            ))),
            Motion::Track { track } => {
                if track.is_empty() {
                    return Err(Error::config(format!("mover {} has an empty track", self.id)));
                }
                for w in track.windows(2) {
                    if !(w[1][0] > w[0][0]) {
                        return Err(Error::config(format!(
                            "mover {} track times must strictly increase",
                            self.id
                        )));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Snapshot at time `t`, or `None` if the mover is not present.
    pub fn state_at(&self, t: f64) -> Option<MoverState> {
        let (pos, vel) = match &self.motion {
            Motion::Linear {
                position,
                course,
                speed,
            } => {
                let v = unit(*course) * *speed;
                (Vec2::new(position[0], position[1]) + v * t, v)
            }
            Motion::Track { track } => track_state(track, t)?,
        };
        let speed = vel.norm();
        let course = if speed > 0.0 { vel.y.atan2(vel.x) } else { 0.0 };
        Some(MoverState {
            id: self.id,
            position: [pos.x, pos.y],
            course,
            speed,
            radius: self.radius,
        })
    }
}

/// Position and segment velocity of a piecewise-linear track.
pub fn track_state(track: &[[f64; 3]], t: f64) -> Option<(Vec2, Vec2)> {
    let first = track.first()?;
    let last = track.last()?;
    if t < first[0] || t > last[0] {
        return None;
    }
    if track.len() == 1 {
        return Some((Vec2::new(first[1], first[2]), Vec2::zeros()));
    }
    // segment whose start is the last fix at or before t
    let k = track.partition_point(|f| f[0] <= t).clamp(1, track.len() - 1);
    let (a, b) = (track[k - 1], track[k]);
    let dt = b[0] - a[0];
    let vel = Vec2::new(b[1] - a[1], b[2] - a[2]) / dt;
    let pos = Vec2::new(a[1], a[2]) + vel * (t - a[0]);
    Some((pos, vel))
}

/// Obstacle description as stored in configs and obstacle files.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleSpec {
    #[serde(default)]
    pub circles: Vec<Circle>,
    #[serde(default)]
    pub polygons: Vec<Polygon>,
    #[serde(default)]
    pub movers: Vec<MoverSpec>,
}

impl ObstacleSpec {
    pub fn validate(&self) -> Result<()> {
        let statics = ObstacleSet {
            circles: self.circles.clone(),
            polygons: self.polygons.clone(),
            movers: Vec::new(),
        };
        statics.validate()?;
        let mut ids: Vec<u32> = self.movers.iter().map(|m| m.id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::config("mover ids must be unique"));
        }
        self.movers.iter().try_for_each(MoverSpec::validate)
    }

    pub fn at(&self, t: f64) -> ObstacleSet {
        ObstacleSet {
            circles: self.circles.clone(),
            polygons: self.polygons.clone(),
            movers: self.movers.iter().filter_map(|m| m.state_at(t)).collect(),
        }
    }
}
