//! Episodic reset/step surface for external trainers and language bindings.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::env::{Action, Env, EpisodeConfig, Termination};
use crate::error::{read_to_string, Error, Result};
use crate::reward::RewardBreakdown;
use crate::scenario::ScenarioSpec;

pub const ACTION_SIZE: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetRisk {
    pub id: u32,
    pub cri: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GymInfo {
    pub t: f64,
    pub termination: Termination,
    pub reward: RewardBreakdown,
    pub risk: Vec<TargetRisk>,
    pub progress: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GymStep {
    pub observation: Vec<f64>,
    pub reward: f64,
    /// Collision or goal.
    pub terminated: bool,
    /// Timeout.
    pub truncated: bool,
    pub info: GymInfo,
}

/// One environment instance. Not shareable between threads while stepping;
/// vectorize by creating several.
#[derive(Debug)]
pub struct GymEnv {
    spec: ScenarioSpec,
    default_seed: u64,
    observation_size: usize,
    env: Option<Env>,
}

impl GymEnv {
    /// Accepts either a full episode config or a scenario spec (an object
    /// with a `scenario` key).
    pub fn make(json: &str) -> Result<Self> {
        Self::from_value(serde_json::from_str(json)?, None)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_value(serde_json::from_str(&read_to_string(path)?)?, path.parent())
    }

    fn from_value(value: Value, base: Option<&Path>) -> Result<Self> {
        let (spec, default_seed) = if value.get("scenario").is_some() {
            let spec: ScenarioSpec = serde_json::from_value(value)?;
            (spec.resolved()?, 0)
        } else {
            let cfg = EpisodeConfig::from_value(value, base)?;
            let seed = cfg.seed;
            (
                ScenarioSpec::Config {
                    file: None,
                    config: Some(Box::new(cfg)),
                },
                seed,
            )
        };
        let probe = spec.build(default_seed)?;
        probe.validate()?;
        Ok(Self {
            observation_size: crate::guidance::NavigationFeatures::LEN + 3 * probe.perception.n_sectors,
            spec,
            default_seed,
            env: None,
        })
    }

    pub fn observation_size(&self) -> usize {
        self.observation_size
    }

    pub fn action_size(&self) -> usize {
        ACTION_SIZE
    }

    /// `(low, high)` for each action component.
    pub fn action_bounds(&self) -> ([f64; ACTION_SIZE], [f64; ACTION_SIZE]) {
        ([-1.0; ACTION_SIZE], [1.0; ACTION_SIZE])
    }

    pub fn env(&self) -> Option<&Env> {
        self.env.as_ref()
    }

    pub fn reset(&mut self, seed: Option<u64>) -> Result<Vec<f64>> {
        let cfg = self.spec.build(seed.unwrap_or(self.default_seed))?;
        let mut env = Env::new(cfg)?;
        let obs = env.reset().to_vec();
        self.env = Some(env);
        Ok(obs)
    }

    pub fn step(&mut self, action: Action) -> Result<GymStep> {
        let env = self
            .env
            .as_mut()
            .ok_or_else(|| Error::EpisodeDone("not started".into()))?;
        let step = env.step(action)?;
        let term = step.info.termination;
        Ok(GymStep {
            observation: step.observation.to_vec(),
            reward: step.reward.total,
            terminated: term.is_terminal(),
            truncated: term.is_truncated(),
            info: GymInfo {
                t: step.info.t,
                termination: term,
                reward: step.reward,
                risk: step
                    .info
                    .risk
                    .iter()
                    .map(|r| TargetRisk { id: r.target, cri: r.cri })
                    .collect(),
                progress: step.info.progress,
            },
        })
    }
}
