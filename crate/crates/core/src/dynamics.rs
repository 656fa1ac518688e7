//! 3-DOF surge/sway/yaw vessel model
//!
//! ```text
//! η̇ = R(ψ) ν
//! M ν̇ + C(ν) ν + D(ν) ν = B f
//! ```
//!
//! with η = [x, y, ψ] in NED and ν = [u, v, r] in the body frame. `M` is the
//! rigid-body plus added mass, `C(ν)` the skew-symmetric Coriolis/centripetal
//! matrix generated from `M`, and `D(ν)` linear plus diagonal quadratic
//! damping. Integration is classical fixed-step RK4.

use std::path::Path;

use nalgebra::{Matrix3, Matrix3x2, Vector2, Vector3, Vector6};
use serde::{Deserialize, Serialize};

use crate::error::{read_to_string, Error, Result};
use crate::geometry::{sin_cos, wrap_angle, Vec2};

const CYBERSHIP2: &str = include_str!("../data/cybership2.json");
const CYBERSHIP2_FULL_SCALE: &str = include_str!("../data/cybership2_full_scale.json");

pub const DEFAULT_DT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VesselState {
    /// North position (m).
    pub x: f64,
    /// East position (m).
    pub y: f64,
    /// Heading (rad), kept in `(-π, π]`.
    pub psi: f64,
    /// Surge velocity (m/s).
    pub u: f64,
    /// Sway velocity (m/s).
    pub v: f64,
    /// Yaw rate (rad/s).
    pub r: f64,
}

impl VesselState {
    pub fn at_rest(position: Vec2, psi: f64) -> Self {
        Self {
            x: position.x,
            y: position.y,
            psi: wrap_angle(psi),
            ..Self::default()
        }
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    pub fn nu(&self) -> Vector3<f64> {
        Vector3::new(self.u, self.v, self.r)
    }

    pub fn to_vector(&self) -> Vector6<f64> {
        Vector6::new(self.x, self.y, self.psi, self.u, self.v, self.r)
    }

    fn from_vector(s: &Vector6<f64>) -> Self {
        Self {
            x: s[0],
            y: s[1],
            psi: wrap_angle(s[2]),
            u: s[3],
            v: s[4],
            r: s[5],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_vector().iter().all(|c| c.is_finite())
    }

    /// Ground velocity in NED.
    pub fn velocity(&self) -> Vec2 {
        let (s, c) = sin_cos(self.psi);
        Vec2::new(c * self.u - s * self.v, s * self.u + c * self.v)
    }

    /// Course over ground; falls back to heading when not moving.
    pub fn course(&self) -> f64 {
        let vel = self.velocity();
        if vel.norm() < 1e-9 {
            self.psi
        } else {
            vel.y.atan2(vel.x)
        }
    }

    pub fn speed(&self) -> f64 {
        self.u.hypot(self.v)
    }
}

/// Surge force and yaw moment.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlInput {
    pub surge: f64,
    pub yaw: f64,
}

impl ControlInput {
    pub fn new(surge: f64, yaw: f64) -> Self {
        Self { surge, yaw }
    }

    pub fn clamped(self, limits: &ActuatorLimits) -> Self {
        Self {
            surge: self.surge.clamp(limits.surge[0], limits.surge[1]),
            yaw: self.yaw.clamp(limits.yaw[0], limits.yaw[1]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActuatorLimits {
    /// `[min, max]` surge force (N).
    pub surge: [f64; 2],
    /// `[min, max]` yaw moment (N·m).
    pub yaw: [f64; 2],
}

/// Vessel parameter file contents. Matrices are row-major.
#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VesselParams {
    #[serde(default)]
    pub name: String,
    /// Rigid-body mass matrix.
    pub M: [f64; 9],
    /// Added mass, positive convention (`-X_u̇`, ...).
    pub added_mass: [f64; 9],
    /// Linear damping, positive convention.
    pub damping_linear: [f64; 9],
    /// Diagonal quadratic damping coefficients multiplying `|u|`, `|v|`, `|r|`.
    pub damping_quadratic: [f64; 3],
    /// 3×2 actuator configuration.
    pub B: [f64; 6],
    pub L_pp: f64,
    pub width: f64,
    pub U_max: f64,
    pub actuator_limits: ActuatorLimits,
}

impl VesselParams {
    /// CyberShip II at model scale (1:70).
    pub fn cybership2() -> Self {
        serde_json::from_str(CYBERSHIP2).expect("bundled parameter file")
    }

    /// CyberShip II Froude-scaled to full size.
    pub fn cybership2_full_scale() -> Self {
        serde_json::from_str(CYBERSHIP2_FULL_SCALE).expect("bundled parameter file")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&read_to_string(path)?)
    }

    /// Froude scaling by geometric `ratio`: lengths ×λ, velocities ×√λ,
    /// forces ×λ³, moments ×λ⁴.
    pub fn froude_scaled(&self, ratio: f64) -> Self {
        // exponents per DOF for generalized force, acceleration and velocity
        const FORCE: [f64; 3] = [3.0, 3.0, 4.0];
        const ACCEL: [f64; 3] = [0.0, 0.0, -1.0];
        const VEL: [f64; 3] = [0.5, 0.5, -0.5];
        const INPUT: [f64; 2] = [3.0, 4.0];
        let s = |e: f64| ratio.powf(e);
        let by_accel = |m: &[f64; 9]| {
            std::array::from_fn(|k| m[k] * s(FORCE[k / 3] - ACCEL[k % 3]))
        };
        Self {
            name: format!("{}_x{}", self.name, ratio),
            M: by_accel(&self.M),
            added_mass: by_accel(&self.added_mass),
            damping_linear: std::array::from_fn(|k| {
                self.damping_linear[k] * s(FORCE[k / 3] - VEL[k % 3])
            }),
            damping_quadratic: std::array::from_fn(|i| {
                self.damping_quadratic[i] * s(FORCE[i] - 2.0 * VEL[i])
            }),
            B: std::array::from_fn(|k| self.B[k] * s(FORCE[k / 2] - INPUT[k % 2])),
            L_pp: self.L_pp * ratio,
            width: self.width * ratio,
            U_max: self.U_max * s(0.5),
            actuator_limits: ActuatorLimits {
                surge: self.actuator_limits.surge.map(|f| f * s(INPUT[0])),
                yaw: self.actuator_limits.yaw.map(|q| q * s(INPUT[1])),
            },
        }
    }
}

/// Validated model with cached inverse mass matrix.
#[derive(Debug, Clone)]
pub struct VesselModel {
    params: VesselParams,
    mass: Matrix3<f64>,
    mass_inv: Matrix3<f64>,
    damping_linear: Matrix3<f64>,
    actuator: Matrix3x2<f64>,
}

impl VesselModel {
    pub fn new(params: VesselParams) -> Result<Self> {
        let rigid = Matrix3::from_row_slice(&params.M);
        let added = Matrix3::from_row_slice(&params.added_mass);
        let mass = rigid + added;
        let damping_linear = Matrix3::from_row_slice(&params.damping_linear);
        let actuator = Matrix3x2::from_row_slice(&params.B);

        let dims = [params.L_pp, params.width, params.U_max];
        let mut all = params
            .M
            .iter()
            .chain(&params.added_mass)
            .chain(&params.damping_linear)
            .chain(&params.damping_quadratic)
            .chain(&params.B)
            .chain(&dims);
        if !all.all(|x| x.is_finite()) {
            return Err(Error::config("vessel parameters must be finite"));
        }
        if (mass - mass.transpose()).amax() > 1e-9 * mass.amax() {
            return Err(Error::config("mass matrix M + added_mass is not symmetric"));
        }
        if mass.cholesky().is_none() {
            return Err(Error::config("mass matrix M + added_mass is not positive definite"));
        }
        let sym = (damping_linear + damping_linear.transpose()) * 0.5;
        let min_eig = sym.symmetric_eigenvalues().min();
        if min_eig < -1e-12 * sym.amax().max(1.0) {
            return Err(Error::config(format!(
                "linear damping is not dissipative (symmetric part has eigenvalue {min_eig})"
            )));
        }
        if params.damping_quadratic.iter().any(|&d| d < 0.0) {
            return Err(Error::config("quadratic damping coefficients must be non-negative"));
        }
        if params.L_pp <= 0.0 || params.width <= 0.0 || params.U_max <= 0.0 {
            return Err(Error::config("L_pp, width and U_max must be positive"));
        }
        let lim = &params.actuator_limits;
        if lim.surge[0] > lim.surge[1] || lim.yaw[0] > lim.yaw[1] {
            return Err(Error::config("actuator limits must be ordered [min, max]"));
        }
        let mass_inv = mass
            .try_inverse()
            .ok_or_else(|| Error::config("mass matrix is singular"))?;
        Ok(Self {
            params,
            mass,
            mass_inv,
            damping_linear,
            actuator,
        })
    }

    pub fn params(&self) -> &VesselParams {
        &self.params
    }

    pub fn mass(&self) -> &Matrix3<f64> {
        &self.mass
    }

    pub fn limits(&self) -> &ActuatorLimits {
        &self.params.actuator_limits
    }

    /// `C(ν)` built from the total mass matrix; skew-symmetric for any ν.
    pub fn coriolis(&self, nu: &Vector3<f64>) -> Matrix3<f64> {
        let m = &self.mass;
        let a = m[(1, 0)] * nu[0] + m[(1, 1)] * nu[1] + m[(1, 2)] * nu[2];
        let b = m[(0, 0)] * nu[0] + m[(0, 1)] * nu[1] + m[(0, 2)] * nu[2];
        Matrix3::new(0.0, 0.0, -a, 0.0, 0.0, b, a, -b, 0.0)
    }

    pub fn damping(&self, nu: &Vector3<f64>) -> Matrix3<f64> {
        let q = &self.params.damping_quadratic;
        self.damping_linear
            + Matrix3::from_diagonal(&Vector3::new(
                q[0] * nu[0].abs(),
                q[1] * nu[1].abs(),
                q[2] * nu[2].abs(),
            ))
    }

    /// ½ νᵀ M ν.
    pub fn kinetic_energy(&self, state: &VesselState) -> f64 {
        let nu = state.nu();
        0.5 * nu.dot(&(self.mass * nu))
    }
}

/// Planar rotation about the down axis.
pub fn rotation_z(psi: f64) -> Matrix3<f64> {
    let (s, c) = sin_cos(psi);
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

fn derivative_vec(s: &Vector6<f64>, tau: &Vector3<f64>, model: &VesselModel) -> Vector6<f64> {
    let nu = Vector3::new(s[3], s[4], s[5]);
    let eta_dot = rotation_z(s[2]) * nu;
    let nu_dot =
        model.mass_inv * (tau - model.coriolis(&nu) * nu - model.damping(&nu) * nu);
    Vector6::new(eta_dot[0], eta_dot[1], eta_dot[2], nu_dot[0], nu_dot[1], nu_dot[2])
}

fn generalized_force(f: &ControlInput, model: &VesselModel) -> Vector3<f64> {
    model.actuator * Vector2::new(f.surge, f.yaw)
}

/// `[η̇; ν̇]` for the given state and (unclamped) input.
pub fn derivative(state: &VesselState, f: &ControlInput, model: &VesselModel) -> Vector6<f64> {
    derivative_vec(&state.to_vector(), &generalized_force(f, model), model)
}

/// One RK4 step of length `dt`. The input is held constant over the step.
pub fn step(
    state: &VesselState,
    f: &ControlInput,
    model: &VesselModel,
    dt: f64,
) -> Result<VesselState> {
    debug_assert!(dt > 0.0);
    let tau = generalized_force(f, model);
    let s = state.to_vector();
    let k1 = derivative_vec(&s, &tau, model);
    let k2 = derivative_vec(&(s + k1 * (dt / 2.0)), &tau, model);
    let k3 = derivative_vec(&(s + k2 * (dt / 2.0)), &tau, model);
    let k4 = derivative_vec(&(s + k3 * dt), &tau, model);
    let next = s + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
    let out = VesselState::from_vector(&next);
    if !out.is_finite() {
        return Err(Error::Diverged(out));
    }
    Ok(out)
}
