//! Collision risk index from closest-point-of-approach kinematics and five
//! fuzzy membership functions.
//!
//! Conventions: courses and bearings are clockwise from North; the relative
//! course χ_R is the course of `v_TS − v_OS`. The reported bearing `theta_t`
//! is relative to the own-ship heading, starboard positive.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dynamics::VesselState;
use crate::error::{Error, Result};
use crate::geometry::{sin_cos, unit, wrap_angle, Vec2};

/// Relative speeds at or below this are treated as parallel tracks.
pub const MIN_RELATIVE_SPEED: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RiskParams {
    /// Minimal safe encounter distance (m).
    pub d_l: f64,
    /// Absolute safe encounter distance (m).
    pub d_u: f64,
    pub beta_rl: f64,
    pub beta_ru: f64,
    pub theta_pu_deg: f64,
    pub theta_pl_deg: f64,
    pub theta_nu_deg: f64,
    pub theta_nl_deg: f64,
    pub alpha_cpa: f64,
    pub alpha_theta: f64,
    pub alpha_r: f64,
    pub alpha_v: f64,
    /// Own-ship length between perpendiculars (m); scales the range bounds.
    pub l_pp: f64,
}

impl Default for RiskParams {
    fn default() -> Self {
        Self {
            d_l: 320.0,
            d_u: 1500.0,
            beta_rl: 8.0,
            beta_ru: 18.0,
            theta_pu_deg: 180.0,
            theta_pl_deg: 45.0,
            theta_nu_deg: 90.0,
            theta_nl_deg: 22.5,
            alpha_cpa: 0.3,
            alpha_theta: 0.2,
            alpha_r: 0.3,
            alpha_v: 0.2,
            l_pp: 87.85,
        }
    }
}

impl RiskParams {
    pub fn validate(&self) -> Result<()> {
        let weights = self.alpha_cpa + self.alpha_theta + self.alpha_r + self.alpha_v;
        if (weights - 1.0).abs() > 1e-9 {
            return Err(Error::config(format!("risk weights must sum to 1, got {weights}")));
        }
        if [self.alpha_cpa, self.alpha_theta, self.alpha_r, self.alpha_v]
            .iter()
            .any(|&a| a < 0.0)
        {
            return Err(Error::config("risk weights must be non-negative"));
        }
        if !(0.0 < self.d_l && self.d_l < self.d_u) {
            return Err(Error::config("risk bounds need 0 < d_l < d_u"));
        }
        if !(0.0 < self.beta_rl && self.beta_rl < self.beta_ru) {
            return Err(Error::config("risk bounds need 0 < beta_rl < beta_ru"));
        }
        if !(self.theta_pl_deg < self.theta_pu_deg && self.theta_nl_deg < self.theta_nu_deg) {
            return Err(Error::config("bearing bounds need theta_pl < theta_pu and theta_nl < theta_nu"));
        }
        if !(self.l_pp > 0.0) {
            return Err(Error::config("risk.l_pp must be positive"));
        }
        Ok(())
    }

    pub fn range_bounds(&self) -> (f64, f64) {
        (self.beta_rl * self.l_pp, self.beta_ru * self.l_pp)
    }
}

/// Target ship kinematics at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetShip {
    pub position: [f64; 2],
    /// Course over ground (rad).
    pub course: f64,
    /// Speed over ground (m/s).
    pub speed: f64,
}

impl TargetShip {
    pub fn position(&self) -> Vec2 {
        Vec2::new(self.position[0], self.position[1])
    }

    pub fn velocity(&self) -> Vec2 {
        unit(self.course) * self.speed
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EncounterGeometry {
    pub r: f64,
    pub v_r: f64,
    pub chi_r: f64,
    pub chi_os: f64,
    pub theta_t: f64,
    /// Target speed component toward the own ship.
    pub v_toward: f64,
    pub v_abs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cpa {
    /// Signed distance at closest approach; the magnitude is the miss distance.
    pub dcpa: f64,
    /// Time to closest approach (s); negative once passed, `+∞` for parallel tracks.
    pub tcpa: f64,
    pub geometry: EncounterGeometry,
}

pub fn cpa(os: &VesselState, ts: &TargetShip) -> Cpa {
    let rel = ts.position() - os.position();
    let r = rel.norm();
    let bearing = rel.y.atan2(rel.x);
    let v_rel = ts.velocity() - os.velocity();
    let v_r = v_rel.norm();
    let chi_r = v_rel.y.atan2(v_rel.x);
    let chi_os = os.course();
    // bearing measured from the course, so χ_OS + θ is the absolute bearing
    let theta_course = wrap_angle(bearing - chi_os);
    let v_abs = ts.speed.abs();
    let v_toward = if r > 0.0 { -ts.velocity().dot(&rel) / r } else { 0.0 };
    let geometry = EncounterGeometry {
        r,
        v_r,
        chi_r,
        chi_os,
        theta_t: wrap_angle(bearing - os.psi),
        v_toward,
        v_abs,
    };
    if v_r <= MIN_RELATIVE_SPEED {
        return Cpa {
            dcpa: r,
            tcpa: f64::INFINITY,
            geometry,
        };
    }
    let (s, c) = sin_cos(chi_r - chi_os - theta_course - PI);
    Cpa {
        dcpa: r * s,
        tcpa: r / v_r * c,
        geometry,
    }
}

fn quadratic_falloff(x: f64, lower: f64, upper: f64) -> f64 {
    if x <= lower {
        1.0
    } else if x >= upper {
        0.0
    } else {
        ((upper - x) / (upper - lower)).powi(2)
    }
}

pub fn u_dcpa(dcpa: f64, p: &RiskParams) -> f64 {
    quadratic_falloff(dcpa.abs(), p.d_l, p.d_u)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TcpaBounds {
    /// Lower bound as given by the distance geometry; negative when
    /// `|DCPA| > d_L`. [`u_tcpa`] floors it at zero.
    pub t_l: f64,
    pub t_u: f64,
    /// Cut-off for negative TCPA.
    pub t_nl: f64,
}

pub fn tcpa_bounds(dcpa: f64, v_r: f64, p: &RiskParams) -> TcpaBounds {
    let d = dcpa.abs().min(p.d_u);
    let t_l = if d <= p.d_l {
        (p.d_l * p.d_l - d * d).sqrt() / v_r
    } else {
        (p.d_l - d) / v_r
    };
    TcpaBounds {
        t_l,
        t_u: (p.d_u * p.d_u - d * d).sqrt() / v_r,
        t_nl: p.d_l / v_r,
    }
}

pub fn u_tcpa(tcpa: f64, b: &TcpaBounds) -> f64 {
    if !tcpa.is_finite() {
        return 0.0;
    }
    if tcpa >= 0.0 {
        quadratic_falloff(tcpa, b.t_l.max(0.0), b.t_u)
    } else if tcpa <= -b.t_nl {
        0.0
    } else {
        ((b.t_nl - tcpa.abs()) / b.t_nl).powi(2)
    }
}

pub fn u_r(r: f64, p: &RiskParams) -> f64 {
    let (lo, hi) = p.range_bounds();
    quadratic_falloff(r, lo, hi)
}

/// Bearing membership, peaking on the starboard bow.
pub fn u_theta(theta_t: f64, p: &RiskParams) -> f64 {
    let deg = theta_t.to_degrees();
    let ratio = if deg >= 0.0 {
        (p.theta_pu_deg - deg) / (p.theta_pu_deg - p.theta_pl_deg)
    } else {
        (p.theta_nu_deg - deg.abs()) / (p.theta_nu_deg - p.theta_nl_deg)
    };
    // clip before squaring so bearings past the upper bound give zero
    ratio.clamp(0.0, 1.0).powi(2)
}

pub fn u_v(v_toward: f64, v_abs: f64) -> f64 {
    if v_abs <= 1e-9 {
        0.0
    } else {
        (v_toward / v_abs).clamp(-1.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Memberships {
    pub u_dcpa: f64,
    pub u_tcpa: f64,
    pub u_r: f64,
    pub u_theta: f64,
    pub u_v: f64,
}

pub fn cri(m: &Memberships, p: &RiskParams) -> f64 {
    let score = p.alpha_cpa * (m.u_dcpa * m.u_tcpa).sqrt()
        + p.alpha_theta * m.u_theta
        + p.alpha_r * m.u_r
        + p.alpha_v * m.u_v;
    score.max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub target: u32,
    pub dcpa: f64,
    pub tcpa: f64,
    pub r: f64,
    pub theta_t: f64,
    pub u_dcpa: f64,
    pub u_tcpa: f64,
    pub u_r: f64,
    pub u_theta: f64,
    pub u_v: f64,
    pub cri: f64,
}

impl RiskReport {
    pub fn memberships(&self) -> Memberships {
        Memberships {
            u_dcpa: self.u_dcpa,
            u_tcpa: self.u_tcpa,
            u_r: self.u_r,
            u_theta: self.u_theta,
            u_v: self.u_v,
        }
    }
}

/// Full risk evaluation of one target.
pub fn assess(target: u32, os: &VesselState, ts: &TargetShip, p: &RiskParams) -> RiskReport {
    let c = cpa(os, ts);
    let g = &c.geometry;
    let m = Memberships {
        u_dcpa: u_dcpa(c.dcpa, p),
        u_tcpa: if c.tcpa.is_finite() {
            u_tcpa(c.tcpa, &tcpa_bounds(c.dcpa, g.v_r, p))
        } else {
            0.0
        },
        u_r: u_r(g.r, p),
        u_theta: u_theta(g.theta_t, p),
        u_v: u_v(g.v_toward, g.v_abs),
    };
    RiskReport {
        target,
        dcpa: c.dcpa,
        tcpa: c.tcpa,
        r: g.r,
        theta_t: g.theta_t,
        u_dcpa: m.u_dcpa,
        u_tcpa: m.u_tcpa,
        u_r: m.u_r,
        u_theta: m.u_theta,
        u_v: m.u_v,
        cri: cri(&m, p),
    }
}
