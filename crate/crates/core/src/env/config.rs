use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dynamics::{VesselParams, DEFAULT_DT};
use crate::error::{read_to_string, Error, Result};
use crate::path::Waypoints;
use crate::perception::PerceptionConfig;
use crate::reward::RewardConfig;
use crate::risk::RiskParams;

use super::ais::{load_ais_scenario, AisSource};
use super::mover::ObstacleSpec;

pub const DEFAULT_MAX_STEPS: usize = 10_000;

/// Everything needed to reproduce one episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpisodeConfig {
    /// Free-form label; COLREG scenarios use their kind here.
    #[serde(default)]
    pub name: String,
    pub path: Waypoints,
    #[serde(default)]
    pub obstacles: ObstacleSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    /// Look-ahead distance along the path (m); defaults to `4 L_pp`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lookahead: Option<f64>,
    /// Own-ship collision disc radius (m); defaults to half the beam.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collision_radius: Option<f64>,
    #[serde(default)]
    pub perception: PerceptionConfig,
    #[serde(default)]
    pub risk: RiskParams,
    #[serde(default)]
    pub reward: RewardConfig,
    #[serde(default = "VesselParams::cybership2_full_scale")]
    pub vessel: VesselParams,
}

fn default_dt() -> f64 {
    DEFAULT_DT
}

fn default_max_steps() -> usize {
    DEFAULT_MAX_STEPS
}

/// Keys whose value may be `{"file": "relative/or/absolute.json"}`.
const FILE_KEYS: [&str; 6] = ["path", "obstacles", "perception", "risk", "reward", "vessel"];

impl EpisodeConfig {
    pub fn new(path: Waypoints) -> Self {
        Self {
            name: String::new(),
            path,
            obstacles: ObstacleSpec::default(),
            seed: 0,
            dt: DEFAULT_DT,
            max_steps: DEFAULT_MAX_STEPS,
            lookahead: None,
            collision_radius: None,
            perception: PerceptionConfig::default(),
            risk: RiskParams::default(),
            reward: RewardConfig::default(),
            vessel: VesselParams::cybership2_full_scale(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_value(serde_json::from_str(text)?, None)
    }

    /// Reads a config file. File references and the optional `ais` section
    /// resolve relative to the config's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let value: Value = serde_json::from_str(&read_to_string(path)?)?;
        Self::from_value(value, path.parent())
    }

    pub fn from_value(mut value: Value, base: Option<&Path>) -> Result<Self> {
        let obj = value
            .as_object_mut()
            .ok_or_else(|| Error::config("episode config must be a JSON object"))?;
        for key in FILE_KEYS {
            if let Some(v) = obj.get_mut(key) {
                if let Some(file) = file_ref(v) {
                    let resolved = resolve(base, &file);
                    *v = serde_json::from_str(&read_to_string(&resolved)?)?;
                }
            }
        }
        let ais = obj.remove("ais");
        let mut cfg: EpisodeConfig = serde_json::from_value(value)?;
        if let Some(ais) = ais {
            let mut src: AisSource = serde_json::from_value(ais)?;
            src.rebase(base);
            let imported = load_ais_scenario(&src)?;
            cfg.obstacles.polygons.extend(imported.polygons);
            let next_id = cfg.obstacles.movers.iter().map(|m| m.id + 1).max().unwrap_or(0);
            for mut m in imported.movers {
                m.id += next_id;
                cfg.obstacles.movers.push(m);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::config("dt must be positive"));
        }
        if self.max_steps == 0 {
            return Err(Error::config("max_steps must be positive"));
        }
        if let Some(la) = self.lookahead {
            if !(la > 0.0) {
                return Err(Error::config("lookahead must be positive"));
            }
        }
        if let Some(r) = self.collision_radius {
            if !(r > 0.0) {
                return Err(Error::config("collision_radius must be positive"));
            }
        }
        self.path.build()?;
        self.obstacles.validate()?;
        self.perception.validate()?;
        self.risk.validate()?;
        self.reward.validate()
    }

    pub fn lookahead(&self) -> f64 {
        self.lookahead.unwrap_or(4.0 * self.vessel.L_pp)
    }

    pub fn collision_radius(&self) -> f64 {
        self.collision_radius.unwrap_or(self.vessel.width / 2.0)
    }
}

fn file_ref(v: &Value) -> Option<String> {
    let obj = v.as_object()?;
    if obj.len() != 1 {
        return None;
    }
    obj.get("file")?.as_str().map(str::to_owned)
}

pub(crate) fn resolve(base: Option<&Path>, file: &str) -> PathBuf {
    let p = PathBuf::from(file);
    match base {
        Some(b) if p.is_relative() => b.join(p),
        _ => p,
    }
}
