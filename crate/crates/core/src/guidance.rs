//! Path-following features: closest-point tracking, cross-track error and
//! the two look-ahead heading errors.

use serde::{Deserialize, Serialize};

use crate::dynamics::VesselState;
use crate::geometry::{wrap_angle, Vec2};
use crate::path::PathSpec;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NavigationFeatures {
    pub u: f64,
    pub v: f64,
    pub r: f64,
    /// Cross-track error (m), non-negative.
    pub cte: f64,
    /// Heading error toward the look-ahead point (rad).
    pub heading_err: f64,
    /// Path angle at the look-ahead point minus heading (rad).
    pub la_heading_err: f64,
}

impl NavigationFeatures {
    pub const LEN: usize = 6;

    pub fn to_array(&self) -> [f64; 6] {
        [
            self.u,
            self.v,
            self.r,
            self.cte,
            self.heading_err,
            self.la_heading_err,
        ]
    }
}

pub fn cross_track_error(path: &PathSpec, pos: &Vec2, omega: f64) -> f64 {
    (pos - path.point(omega)).norm()
}

/// Returns `(ψ̃, ψ̃_LA)` for the look-ahead point `lookahead` metres past `omega`.
pub fn heading_errors(path: &PathSpec, state: &VesselState, omega: f64, lookahead: f64) -> (f64, f64) {
    let la = (omega + lookahead).min(path.length());
    let target = path.point(la);
    let los = (target.y - state.y).atan2(target.x - state.x);
    let heading_err = wrap_angle(los - state.psi);
    let la_heading_err = wrap_angle(path.angle(la) - state.psi);
    (heading_err, la_heading_err)
}

/// Keeps the closest-point parameter between steps so each query is a warm
/// start. Lives in the episode, not the path.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PathTracker {
    omega: f64,
}

impl PathTracker {
    pub fn new(omega: f64) -> Self {
        Self { omega }
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn update(&mut self, path: &PathSpec, pos: &Vec2) -> f64 {
        self.omega = path.closest_param(pos, self.omega);
        self.omega
    }

    pub fn features(
        &mut self,
        path: &PathSpec,
        state: &VesselState,
        lookahead: f64,
    ) -> NavigationFeatures {
        let omega = self.update(path, &state.position());
        navigation_features_at(path, state, omega, lookahead)
    }
}

/// Assembles the feature vector for an already-resolved closest parameter.
pub fn navigation_features_at(
    path: &PathSpec,
    state: &VesselState,
    omega: f64,
    lookahead: f64,
) -> NavigationFeatures {
    let (heading_err, la_heading_err) = heading_errors(path, state, omega, lookahead);
    NavigationFeatures {
        u: state.u,
        v: state.v,
        r: state.r,
        cte: cross_track_error(path, &state.position(), omega),
        heading_err,
        la_heading_err,
    }
}
