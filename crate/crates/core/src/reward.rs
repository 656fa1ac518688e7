//! Per-step reward: path adherence, static-obstacle proximity, risk-based
//! penalty for target ships, collision and living penalties.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RewardConfig {
    pub gamma_r: f64,
    pub gamma_eps: f64,
    pub gamma_theta_stat: f64,
    pub gamma_x: f64,
    pub alpha_x: f64,
    /// Path-following vs collision-avoidance trade-off in `[0, 1]`.
    pub lambda: f64,
    pub r_collision: f64,
    pub r_exists: f64,
    pub beta_cri: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            gamma_r: 1.0,
            gamma_eps: 0.05,
            gamma_theta_stat: 1.0,
            gamma_x: 0.005,
            alpha_x: 75.0,
            lambda: 0.5,
            r_collision: -1000.0,
            r_exists: -1.0,
            beta_cri: 10.0,
        }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::config("reward.lambda must lie in [0, 1]"));
        }
        if !(self.beta_cri > 0.0) {
            return Err(Error::config("reward.beta_cri must be positive"));
        }
        if !(self.r_collision < self.r_exists && self.r_exists < 0.0) {
            return Err(Error::config("reward needs r_collision < r_exists < 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub r_path: f64,
    pub r_colav_stat: f64,
    pub r_colav_dyn: f64,
    pub r_exists: f64,
    pub total: f64,
    pub collided: bool,
}

/// Velocity term times cross-track term. Peaks at `1 + 2γ_r` when moving at
/// `u_max` straight at the look-ahead point on the path.
pub fn r_path(u: f64, heading_err: f64, cte: f64, u_max: f64, cfg: &RewardConfig) -> f64 {
    let g = cfg.gamma_r;
    (u / u_max * heading_err.cos() + g) * ((-cfg.gamma_eps * cte.abs()).exp() + g) - g * g
}

/// Bearing-weighted exponential proximity penalty over all rays. Rays that
/// reach `sensor_range` saw nothing and add no penalty.
pub fn r_colav_stat(distances: &[f64], angles: &[f64], sensor_range: f64, cfg: &RewardConfig) -> f64 {
    debug_assert_eq!(distances.len(), angles.len());
    let mut num = 0.0;
    let mut den = 0.0;
    for (&x, &theta) in distances.iter().zip(angles) {
        let w = 1.0 / (1.0 + cfg.gamma_theta_stat * theta.abs());
        den += w;
        if x < sensor_range {
            num += w * cfg.alpha_x * (-cfg.gamma_x * x).exp();
        }
    }
    if den == 0.0 {
        0.0
    } else {
        -num / den
    }
}

pub fn r_colav_dyn(cri: &[f64], beta_cri: f64) -> f64 {
    -cri.iter().map(|c| beta_cri * c).sum::<f64>()
}

pub fn total_reward(
    r_path: f64,
    r_colav_stat: f64,
    r_colav_dyn: f64,
    collided: bool,
    cfg: &RewardConfig,
) -> RewardBreakdown {
    let total = if collided {
        cfg.r_collision
    } else {
        cfg.lambda * r_path + (1.0 - cfg.lambda) * (r_colav_stat + r_colav_dyn) + cfg.r_exists
    };
    RewardBreakdown {
        r_path,
        r_colav_stat,
        r_colav_dyn,
        r_exists: cfg.r_exists,
        total,
        collided,
    }
}
