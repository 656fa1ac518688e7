//! Multi-episode runs, reports and trajectory replay.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::compliance::{check_compliance, ComplianceFlags, ComplianceParams};
use crate::env::{in_collision, Env, EpisodeConfig, EpisodeStats, StepInfo, Termination};
use crate::error::Result;
use crate::exec::{self, Execution};
use crate::guidance::PathTracker;
use crate::policy::{Policy, PolicySpec};
use crate::scenario::{ColregKind, ScenarioSpec};
use crate::trajectory::TrajectoryRow;

/// Everything that determines a run; embedded verbatim in its report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub scenario: ScenarioSpec,
    pub policy: PolicySpec,
    pub episodes: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeReport {
    pub seed: u64,
    pub scenario: String,
    pub stats: EpisodeStats,
    pub compliance: ComplianceFlags,
    pub success: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Summary {
    pub episodes: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub collisions: usize,
    pub goals: usize,
    pub timeouts: usize,
    pub mean_progress: f64,
    pub mean_reward: f64,
    pub mean_cte_rms: f64,
}

impl Summary {
    pub fn of<'a>(episodes: impl IntoIterator<Item = &'a EpisodeReport>) -> Self {
        let mut s = Summary::default();
        for e in episodes {
            s.episodes += 1;
            s.successes += e.success as usize;
            s.collisions += e.stats.collisions;
            s.goals += (e.stats.termination == Termination::Goal) as usize;
            s.timeouts += (e.stats.termination == Termination::Timeout) as usize;
            s.mean_progress += e.stats.progress;
            s.mean_reward += e.stats.cumulative_reward;
            s.mean_cte_rms += e.stats.cte_rms;
        }
        if s.episodes > 0 {
            let n = s.episodes as f64;
            s.success_rate = s.successes as f64 / n;
            s.mean_progress /= n;
            s.mean_reward /= n;
            s.mean_cte_rms /= n;
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub invocation: RunSpec,
    pub summary: Summary,
    pub by_scenario: BTreeMap<String, Summary>,
    pub episodes: Vec<EpisodeReport>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone)]
pub struct EpisodeOutcome {
    pub config: EpisodeConfig,
    pub report: EpisodeReport,
    pub rows: Vec<TrajectoryRow>,
}

pub fn compliance_params(cfg: &EpisodeConfig) -> ComplianceParams {
    ComplianceParams {
        collision_radius: cfg.collision_radius(),
        d_l: cfg.risk.d_l,
        ..ComplianceParams::default()
    }
}

fn judge(cfg: &EpisodeConfig, stats: &EpisodeStats, flags: &ComplianceFlags) -> bool {
    let rule = ColregKind::from_name(&cfg.name).is_none_or(|k| flags.for_kind(k));
    stats.termination == Termination::Goal && stats.collisions == 0 && !flags.collision && rule
}

/// Runs one episode to termination and evaluates it from its trajectory.
pub fn run_episode(cfg: EpisodeConfig, policy: &mut dyn Policy) -> Result<EpisodeOutcome> {
    let mut env = Env::new(cfg)?;
    let mut obs = env.reset();
    policy.reset();
    let mut rows = Vec::with_capacity(env.config().max_steps.min(100_000));
    let mut last: Option<StepInfo> = None;
    loop {
        let action = policy.act(&obs, last.as_ref())?;
        let step = env.step(action)?;
        rows.push(TrajectoryRow::from_step(&step));
        obs = step.observation;
        let done = step.info.termination.is_done();
        last = Some(step.info);
        if done {
            break;
        }
    }
    let cfg = env.config().clone();
    let stats = env.stats();
    let compliance = check_compliance(&rows, &cfg.obstacles, &compliance_params(&cfg));
    let success = judge(&cfg, &stats, &compliance);
    Ok(EpisodeOutcome {
        report: EpisodeReport {
            seed: cfg.seed,
            scenario: if cfg.name.is_empty() { "config".into() } else { cfg.name.clone() },
            stats,
            compliance,
            success,
        },
        config: cfg,
        rows,
    })
}

/// Runs seeds `seed..seed + episodes`. Episodes are independent and may run
/// in parallel; results are merged in seed order.
pub fn run(spec: &RunSpec, exec: Execution, keep_trajectories: bool) -> Result<(RunReport, Vec<EpisodeOutcome>)> {
    let scenario = spec.scenario.clone().resolved()?;
    let exec = if spec.policy.is_streaming() {
        Execution::Sequential
    } else {
        exec
    };
    let results = exec::map_range(exec, spec.episodes, |i| -> Result<EpisodeOutcome> {
        let seed = spec.seed.wrapping_add(i as u64);
        let cfg = scenario.build(seed)?;
        let mut policy = spec.policy.build()?;
        let mut out = run_episode(cfg, policy.as_mut())?;
        if !keep_trajectories {
            out.rows = Vec::new();
        }
        Ok(out)
    });
    let outcomes: Vec<EpisodeOutcome> = results.into_iter().collect::<Result<_>>()?;
    let episodes: Vec<EpisodeReport> = outcomes.iter().map(|o| o.report.clone()).collect();
    let mut grouped: BTreeMap<String, Vec<&EpisodeReport>> = BTreeMap::new();
    for e in &episodes {
        grouped.entry(e.scenario.clone()).or_default().push(e);
    }
    let report = RunReport {
        invocation: spec.clone(),
        summary: Summary::of(&episodes),
        by_scenario: grouped
            .into_iter()
            .map(|(k, v)| (k, Summary::of(v)))
            .collect(),
        episodes,
    };
    Ok((report, outcomes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub stats: EpisodeStats,
    pub compliance: ComplianceFlags,
    pub success: bool,
}

/// Recomputes statistics and compliance from a recorded trajectory.
pub fn replay(rows: &[TrajectoryRow], cfg: &EpisodeConfig) -> Result<ReplayReport> {
    cfg.validate()?;
    let path = cfg.path.build()?;
    let radius = cfg.collision_radius();
    let mut tracker = PathTracker::new(0.0);
    tracker.update(&path, &path.point(0.0));
    let mut cte_sq = 0.0;
    let mut reward = 0.0;
    let mut collisions = 0;
    for row in rows {
        tracker.update(&path, &crate::geometry::Vec2::new(row.x, row.y));
        cte_sq += row.cte * row.cte;
        reward += row.reward;
        collisions += in_collision(&row.state(), radius, &cfg.obstacles.at(row.t)) as usize;
    }
    let length = path.length();
    let steps = rows.len();
    let termination = if steps == 0 {
        Termination::None
    } else if collisions > 0 {
        Termination::Collision
    } else if tracker.omega() >= length - cfg.vessel.L_pp {
        Termination::Goal
    } else if steps >= cfg.max_steps {
        Termination::Timeout
    } else {
        Termination::None
    };
    let stats = EpisodeStats {
        steps,
        termination,
        collisions,
        progress: tracker.omega() / length,
        cumulative_reward: reward,
        cte_rms: if steps > 0 { (cte_sq / steps as f64).sqrt() } else { 0.0 },
    };
    let compliance = check_compliance(rows, &cfg.obstacles, &compliance_params(cfg));
    let success = judge(cfg, &stats, &compliance);
    Ok(ReplayReport {
        stats,
        compliance,
        success,
    })
}
