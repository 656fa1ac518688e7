//! Seeded scenario generation: randomized training layouts and the three
//! canonical COLREG encounters.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::VesselParams;
use crate::env::{EpisodeConfig, MoverSpec, ObstacleSpec};
use crate::error::{Error, Result};
use crate::geometry::{unit, Circle, Vec2};
use crate::path::{PathSpec, Waypoints};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainingKnobs {
    pub path_length: f64,
    pub n_waypoints: usize,
    /// Largest heading change between consecutive legs (deg).
    pub max_turn_deg: f64,
    pub n_static: usize,
    pub static_radius: [f64; 2],
    pub n_movers: usize,
    pub mover_speed: [f64; 2],
    pub mover_length: [f64; 2],
    /// No obstacle may come within this distance of the start or goal (m).
    pub endpoint_clearance: f64,
}

impl Default for TrainingKnobs {
    fn default() -> Self {
        Self {
            path_length: 4000.0,
            n_waypoints: 5,
            max_turn_deg: 35.0,
            n_static: 6,
            static_radius: [40.0, 200.0],
            n_movers: 3,
            mover_speed: [2.0, 7.0],
            mover_length: [40.0, 250.0],
            endpoint_clearance: 300.0,
        }
    }
}

impl TrainingKnobs {
    pub fn validate(&self) -> Result<()> {
        if !(self.path_length > 0.0) || self.n_waypoints < 2 {
            return Err(Error::config("training path needs positive length and two waypoints"));
        }
        let ordered = |r: [f64; 2]| r[0] > 0.0 && r[0] <= r[1];
        if !ordered(self.static_radius) || !ordered(self.mover_speed) || !ordered(self.mover_length) {
            return Err(Error::config("training ranges must be positive and ordered"));
        }
        if !(self.endpoint_clearance >= 0.0) {
            return Err(Error::config("endpoint_clearance must be non-negative"));
        }
        Ok(())
    }
}

/// Collision hull radius of a ship with length `l` and beam `w`.
pub fn hull_radius(l: f64, w: f64) -> f64 {
    (l / 2.0).max(w)
}

fn max_steps_for(length: f64, vessel: &VesselParams, dt: f64) -> usize {
    // twice the cruise time plus a spin-up allowance
    ((2.0 * length / vessel.U_max + 300.0) / dt).ceil() as usize
}

pub fn generate_training_scenario(seed: u64, knobs: &TrainingKnobs) -> Result<EpisodeConfig> {
    knobs.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let leg = knobs.path_length / (knobs.n_waypoints - 1) as f64;
    let max_turn = knobs.max_turn_deg.to_radians();
    let mut heading: f64 = rng.random_range(-PI..PI);
    let mut p = Vec2::zeros();
    let mut wps = vec![p];
    for _ in 1..knobs.n_waypoints {
        p += unit(heading) * leg;
        wps.push(p);
        heading += rng.random_range(-max_turn..=max_turn);
    }
    let path = PathSpec::new(wps)?;
    let length = path.length();
    let start = path.point(0.0);
    let goal = path.point(length);
    let clear = |c: Vec2, r: f64| {
        (c - start).norm() >= r + knobs.endpoint_clearance && (c - goal).norm() >= r + knobs.endpoint_clearance
    };

    let mut circles = Vec::with_capacity(knobs.n_static);
    for _ in 0..knobs.n_static {
        for _attempt in 0..100 {
            let r = rng.random_range(knobs.static_radius[0]..=knobs.static_radius[1]);
            let s = rng.random_range(0.1 * length..0.9 * length);
            let side = rng.random_range(-1.0..1.0) * (r + 400.0);
            let normal = unit(path.angle(s) + FRAC_PI_2);
            let c = path.point(s) + normal * side;
            if clear(c, r) {
                circles.push(Circle::new(c, r));
                break;
            }
        }
    }

    let vessel = VesselParams::cybership2_full_scale();
    let mut movers = Vec::with_capacity(knobs.n_movers);
    for id in 0..knobs.n_movers as u32 {
        for _attempt in 0..100 {
            let l = rng.random_range(knobs.mover_length[0]..=knobs.mover_length[1]);
            let radius = hull_radius(l, l / 6.0);
            let speed = rng.random_range(knobs.mover_speed[0]..=knobs.mover_speed[1]);
            let s = rng.random_range(0.2 * length..0.9 * length);
            let rel = rng.random_range(-PI..PI);
            let course = path.angle(s) + rel;
            // arrive at the meeting point roughly when the own ship does
            let t_meet = s / (0.8 * vessel.U_max) + rng.random_range(-60.0..60.0);
            let origin = path.point(s) - unit(course) * speed * t_meet.max(0.0);
            if (origin - start).norm() >= radius + knobs.endpoint_clearance {
                movers.push(MoverSpec::linear(id, origin, course, speed, radius));
                break;
            }
        }
    }

    let mut cfg = EpisodeConfig::new(Waypoints::from(&path));
    cfg.name = "training".into();
    cfg.seed = seed;
    cfg.max_steps = max_steps_for(length, &vessel, cfg.dt);
    cfg.obstacles = ObstacleSpec {
        circles,
        polygons: Vec::new(),
        movers,
    };
    cfg.vessel = vessel;
    Ok(cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColregKind {
    HeadOn,
    CrossingStarboard,
    CrossingPort,
}

impl ColregKind {
    pub const ALL: [ColregKind; 3] = [
        ColregKind::HeadOn,
        ColregKind::CrossingStarboard,
        ColregKind::CrossingPort,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ColregKind::HeadOn => "head_on",
            ColregKind::CrossingStarboard => "crossing_starboard",
            ColregKind::CrossingPort => "crossing_port",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

impl std::fmt::Display for ColregKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

pub const COLREG_PATH_LENGTH: f64 = 5000.0;
pub const COLREG_TS_SPEED: f64 = 5.0;
pub const COLREG_TS_LENGTH: f64 = 250.0;
pub const COLREG_TS_BEAM: f64 = 40.0;
const HEAD_ON_RANGE: f64 = 3500.0;
const CROSSING_POINT: f64 = 2500.0;
/// Rough own-ship spin-up delay before cruise speed (s).
const SPIN_UP: f64 = 60.0;

/// Canonical encounter on a straight northbound path. With a seed, the
/// target's initial bearing and course are each perturbed by up to ±5°.
pub fn colreg_scenario(kind: ColregKind, seed: Option<u64>) -> EpisodeConfig {
    let (d_bearing, d_course) = match seed {
        Some(s) => {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let lim = 5f64.to_radians();
            (rng.random_range(-lim..=lim), rng.random_range(-lim..=lim))
        }
        None => (0.0, 0.0),
    };
    let vessel = VesselParams::cybership2_full_scale();
    let radius = hull_radius(COLREG_TS_LENGTH, COLREG_TS_BEAM);
    let (start, course) = match kind {
        ColregKind::HeadOn => (Vec2::new(HEAD_ON_RANGE, 0.0), PI),
        ColregKind::CrossingStarboard | ColregKind::CrossingPort => {
            let side = if kind == ColregKind::CrossingStarboard { 1.0 } else { -1.0 };
            let t_meet = CROSSING_POINT / vessel.U_max + SPIN_UP;
            (
                Vec2::new(CROSSING_POINT, side * COLREG_TS_SPEED * t_meet),
                -side * FRAC_PI_2,
            )
        }
    };
    let rot = nalgebra::Rotation2::new(d_bearing);
    let start = rot * start;
    let ts = MoverSpec::linear(0, start, course + d_course, COLREG_TS_SPEED, radius);

    let path = Waypoints(vec![[0.0, 0.0], [COLREG_PATH_LENGTH, 0.0]]);
    let mut cfg = EpisodeConfig::new(path);
    cfg.name = kind.as_str().into();
    cfg.seed = seed.unwrap_or(0);
    cfg.max_steps = max_steps_for(COLREG_PATH_LENGTH, &vessel, cfg.dt);
    cfg.obstacles.movers.push(ts);
    cfg.vessel = vessel;
    cfg
}

/// A straight obstacle-free route.
pub fn empty_scenario(length: f64) -> EpisodeConfig {
    let vessel = VesselParams::cybership2_full_scale();
    let mut cfg = EpisodeConfig::new(Waypoints(vec![[0.0, 0.0], [length, 0.0]]));
    cfg.name = "empty".into();
    cfg.max_steps = max_steps_for(length, &vessel, cfg.dt);
    cfg
}

/// How each episode's configuration is produced from its seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scenario", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScenarioSpec {
    Empty {
        #[serde(default = "default_empty_length")]
        length: f64,
    },
    Training {
        #[serde(default)]
        knobs: TrainingKnobs,
    },
    HeadOn {
        #[serde(default = "yes")]
        perturb: bool,
    },
    CrossingStarboard {
        #[serde(default = "yes")]
        perturb: bool,
    },
    CrossingPort {
        #[serde(default = "yes")]
        perturb: bool,
    },
    /// Fixed configuration; the seed is recorded but changes nothing.
    Config {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        file: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        config: Option<Box<EpisodeConfig>>,
    },
}

fn default_empty_length() -> f64 {
    3000.0
}

fn yes() -> bool {
    true
}

impl ScenarioSpec {
    /// Parses a CLI scenario name.
    pub fn from_name(name: &str) -> Result<Self> {
        Ok(match name {
            "empty" => ScenarioSpec::Empty {
                length: default_empty_length(),
            },
            "training" => ScenarioSpec::Training {
                knobs: TrainingKnobs::default(),
            },
            other => match ColregKind::from_name(other) {
                Some(k) => Self::colreg(k, true),
                None => {
                    return Err(Error::config(format!(
                        "unknown scenario `{other}` (expected empty, training, head_on, crossing_starboard or crossing_port)"
                    )))
                }
            },
        })
    }

    pub fn colreg(kind: ColregKind, perturb: bool) -> Self {
        match kind {
            ColregKind::HeadOn => ScenarioSpec::HeadOn { perturb },
            ColregKind::CrossingStarboard => ScenarioSpec::CrossingStarboard { perturb },
            ColregKind::CrossingPort => ScenarioSpec::CrossingPort { perturb },
        }
    }

    pub fn colreg_kind(&self) -> Option<ColregKind> {
        match self {
            ScenarioSpec::HeadOn { .. } => Some(ColregKind::HeadOn),
            ScenarioSpec::CrossingStarboard { .. } => Some(ColregKind::CrossingStarboard),
            ScenarioSpec::CrossingPort { .. } => Some(ColregKind::CrossingPort),
            ScenarioSpec::Config { config: Some(c), .. } => ColregKind::from_name(&c.name),
            _ => None,
        }
    }

    pub fn name(&self) -> String {
        match self {
            ScenarioSpec::Empty { .. } => "empty".into(),
            ScenarioSpec::Training { .. } => "training".into(),
            ScenarioSpec::Config { config: Some(c), .. } if !c.name.is_empty() => c.name.clone(),
            ScenarioSpec::Config { .. } => "config".into(),
            other => other.colreg_kind().map(|k| k.as_str().into()).unwrap_or_default(),
        }
    }

    /// Loads a referenced config file once so later builds are pure.
    pub fn resolved(self) -> Result<Self> {
        match self {
            ScenarioSpec::Config {
                file: Some(f),
                config: None,
            } => {
                let cfg = EpisodeConfig::load(&f)?;
                Ok(ScenarioSpec::Config {
                    file: Some(f),
                    config: Some(Box::new(cfg)),
                })
            }
            ScenarioSpec::Config {
                file: None,
                config: None,
            } => Err(Error::config("config scenario needs `file` or `config`")),
            other => Ok(other),
        }
    }

    pub fn build(&self, seed: u64) -> Result<EpisodeConfig> {
        let perturbed = |kind, perturb: bool| colreg_scenario(kind, perturb.then_some(seed));
        let mut cfg = match self {
            ScenarioSpec::Empty { length } => empty_scenario(*length),
            ScenarioSpec::Training { knobs } => generate_training_scenario(seed, knobs)?,
            ScenarioSpec::HeadOn { perturb } => perturbed(ColregKind::HeadOn, *perturb),
            ScenarioSpec::CrossingStarboard { perturb } => perturbed(ColregKind::CrossingStarboard, *perturb),
            ScenarioSpec::CrossingPort { perturb } => perturbed(ColregKind::CrossingPort, *perturb),
            ScenarioSpec::Config { config: Some(c), .. } => (**c).clone(),
            ScenarioSpec::Config { file: Some(f), .. } => EpisodeConfig::load(f)?,
            ScenarioSpec::Config { .. } => return Err(Error::config("config scenario needs `file` or `config`")),
        };
        cfg.seed = seed;
        Ok(cfg)
    }
}
