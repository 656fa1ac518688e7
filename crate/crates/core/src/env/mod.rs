//! Episode handle: own ship, path, obstacles, perception, risk and reward
//! advanced one fixed step at a time.

pub mod ais;
pub mod config;
pub mod mover;

use serde::{Deserialize, Serialize};

use crate::dynamics::{self, ActuatorLimits, ControlInput, VesselModel, VesselState};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geometry::wrap_angle;
use crate::guidance::{NavigationFeatures, PathTracker};
use crate::path::PathSpec;
use crate::perception::{ObstacleSet, Perception, SensorFrame};
use crate::reward::{r_colav_dyn, r_colav_stat, r_path, total_reward, RewardBreakdown};
use crate::risk::{assess, RiskReport, TargetShip};

pub use config::EpisodeConfig;
pub use mover::{Motion, MoverSpec, ObstacleSpec};

/// Normalized action `[surge, yaw]`, each in `[-1, 1]`.
pub type Action = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    #[default]
    None,
    Collision,
    Goal,
    Timeout,
}

impl Termination {
    pub fn is_done(self) -> bool {
        self != Termination::None
    }

    /// Collision and goal end the episode; timeout truncates it.
    pub fn is_terminal(self) -> bool {
        matches!(self, Termination::Collision | Termination::Goal)
    }

    pub fn is_truncated(self) -> bool {
        self == Termination::Timeout
    }
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Termination::None => "running",
            Termination::Collision => "collision",
            Termination::Goal => "goal",
            Termination::Timeout => "timeout",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub nav: NavigationFeatures,
    /// `(closeness, vx, vy)` per sector.
    pub sectors: Vec<f64>,
}

impl Observation {
    pub fn len(&self) -> usize {
        NavigationFeatures::LEN + self.sectors.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.len());
        v.extend_from_slice(&self.nav.to_array());
        v.extend_from_slice(&self.sectors);
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    pub t: f64,
    pub step: usize,
    pub state: VesselState,
    /// Physical actuator command applied during the step.
    pub control: ControlInput,
    pub omega: f64,
    pub progress: f64,
    pub risk: Vec<RiskReport>,
    pub cri_max: f64,
    pub termination: Termination,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: RewardBreakdown,
    pub info: StepInfo,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EpisodeStats {
    pub steps: usize,
    pub termination: Termination,
    pub collisions: usize,
    /// Final closest-point parameter over path length.
    pub progress: f64,
    pub cumulative_reward: f64,
    pub cte_rms: f64,
}

/// Maps `a ∈ [-1, 1]` to force: positive values scale the upper limit,
/// negative values the lower one, so zero is always zero force.
pub fn scale_action(action: Action, limits: &ActuatorLimits) -> ControlInput {
    let scale = |a: f64, lim: [f64; 2]| {
        let a = a.clamp(-1.0, 1.0);
        if a >= 0.0 {
            a * lim[1]
        } else {
            -a * lim[0]
        }
    };
    ControlInput::new(scale(action[0], limits.surge), scale(action[1], limits.yaw))
}

/// Own-ship disc against every obstacle present at the current time.
pub fn in_collision(os: &VesselState, radius: f64, obstacles: &ObstacleSet) -> bool {
    let p = os.position();
    obstacles.circles.iter().any(|c| (p - c.center()).norm() < c.radius + radius)
        || obstacles
            .polygons
            .iter()
            .any(|poly| poly.contains(&p) || poly.distance_to(&p) < radius)
        || obstacles
            .movers
            .iter()
            .any(|m| (p - m.position()).norm() < m.radius + radius)
}

#[derive(Debug, Clone)]
pub struct Env {
    cfg: EpisodeConfig,
    path: PathSpec,
    model: VesselModel,
    perception: Perception,
    /// Ray angles wrapped to (−π, π] for the bearing weights.
    ray_bearings: Vec<f64>,
    state: VesselState,
    tracker: PathTracker,
    t: f64,
    steps: usize,
    termination: Termination,
    stats: EpisodeStats,
    cte_sq: f64,
}

impl Env {
    pub fn new(cfg: EpisodeConfig) -> Result<Self> {
        cfg.validate()?;
        let path = cfg.path.build()?;
        let model = VesselModel::new(cfg.vessel.clone())?;
        let perception = Perception::new(cfg.perception)?.with_execution(Execution::Sequential);
        let ray_bearings = perception.ray_angles().iter().map(|&a| wrap_angle(a)).collect();
        let mut env = Self {
            cfg,
            path,
            model,
            perception,
            ray_bearings,
            state: VesselState::default(),
            tracker: PathTracker::default(),
            t: 0.0,
            steps: 0,
            termination: Termination::None,
            stats: EpisodeStats::default(),
            cte_sq: 0.0,
        };
        env.place_at_start();
        Ok(env)
    }

    /// Ray casting per step is small; parallel execution pays off only for
    /// very dense ray sets.
    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.perception = self.perception.with_execution(exec);
        self
    }

    fn place_at_start(&mut self) {
        self.state = VesselState::at_rest(self.path.point(0.0), self.path.angle(0.0));
        self.tracker = PathTracker::new(0.0);
        self.t = 0.0;
        self.steps = 0;
        self.termination = Termination::None;
        self.stats = EpisodeStats::default();
        self.cte_sq = 0.0;
    }

    pub fn reset(&mut self) -> Observation {
        self.place_at_start();
        let obstacles = self.cfg.obstacles.at(0.0);
        let frame = self.perception.sense(&self.state, &obstacles, self.cfg.vessel.width);
        let nav = self.tracker.features(&self.path, &self.state, self.cfg.lookahead());
        Observation {
            nav,
            sectors: frame.features(),
        }
    }

    pub fn config(&self) -> &EpisodeConfig {
        &self.cfg
    }

    pub fn path(&self) -> &PathSpec {
        &self.path
    }

    pub fn model(&self) -> &VesselModel {
        &self.model
    }

    pub fn perception(&self) -> &Perception {
        &self.perception
    }

    pub fn state(&self) -> &VesselState {
        &self.state
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn termination(&self) -> Termination {
        self.termination
    }

    pub fn stats(&self) -> EpisodeStats {
        self.stats
    }

    pub fn obstacles_now(&self) -> ObstacleSet {
        self.cfg.obstacles.at(self.t)
    }

    pub fn observation_size(&self) -> usize {
        NavigationFeatures::LEN + 3 * self.cfg.perception.n_sectors
    }

    /// Risk reports for movers whose centre lies within sensor range.
    pub fn assess_targets(&self, obstacles: &ObstacleSet) -> Vec<RiskReport> {
        let range = self.cfg.perception.sensor_range;
        let p = self.state.position();
        obstacles
            .movers
            .iter()
            .filter(|m| (m.position() - p).norm() <= range)
            .map(|m| {
                let ts = TargetShip {
                    position: m.position,
                    course: m.course,
                    speed: m.speed,
                };
                assess(m.id, &self.state, &ts, &self.cfg.risk)
            })
            .collect()
    }

    pub fn step(&mut self, action: Action) -> Result<StepResult> {
        if self.termination.is_done() {
            return Err(Error::EpisodeDone(self.termination.to_string()));
        }
        if !action.iter().all(|a| a.is_finite()) {
            return Err(Error::config(format!("non-finite action {action:?}")));
        }
        let control = scale_action(action, self.model.limits());
        self.state = dynamics::step(&self.state, &control, &self.model, self.cfg.dt)?;
        self.steps += 1;
        self.t = self.steps as f64 * self.cfg.dt;

        let obstacles = self.cfg.obstacles.at(self.t);
        let frame: SensorFrame = self.perception.sense(&self.state, &obstacles, self.cfg.vessel.width);
        let nav = self.tracker.features(&self.path, &self.state, self.cfg.lookahead());
        let risk = self.assess_targets(&obstacles);
        let collided = in_collision(&self.state, self.cfg.collision_radius(), &obstacles);

        let rc = &self.cfg.reward;
        let rp = r_path(nav.u, nav.heading_err, nav.cte, self.cfg.vessel.U_max, rc);
        let rs = r_colav_stat(&frame.raw, &self.ray_bearings, self.cfg.perception.sensor_range, rc);
        let cris: Vec<f64> = risk.iter().map(|r| r.cri).collect();
        let rd = r_colav_dyn(&cris, rc.beta_cri);
        let reward = total_reward(rp, rs, rd, collided, rc);

        let omega = self.tracker.omega();
        let length = self.path.length();
        self.termination = if collided {
            Termination::Collision
        } else if omega >= length - self.cfg.vessel.L_pp {
            Termination::Goal
        } else if self.steps >= self.cfg.max_steps {
            Termination::Timeout
        } else {
            Termination::None
        };

        self.cte_sq += nav.cte * nav.cte;
        self.stats = EpisodeStats {
            steps: self.steps,
            termination: self.termination,
            collisions: self.stats.collisions + collided as usize,
            progress: omega / length,
            cumulative_reward: self.stats.cumulative_reward + reward.total,
            cte_rms: (self.cte_sq / self.steps as f64).sqrt(),
        };

        let cri_max = cris.iter().copied().fold(0.0, f64::max);
        Ok(StepResult {
            observation: Observation {
                nav,
                sectors: frame.features(),
            },
            reward,
            info: StepInfo {
                t: self.t,
                step: self.steps,
                state: self.state,
                control,
                omega,
                progress: omega / length,
                risk,
                cri_max,
                termination: self.termination,
            },
        })
    }
}

/// Builds the episode and returns its first observation.
pub fn reset(cfg: EpisodeConfig) -> Result<(Observation, Env)> {
    let mut env = Env::new(cfg)?;
    let obs = env.reset();
    Ok((obs, env))
}
