//! Simulation core for risk-aware collision avoidance of a surface vessel
//! following a desired path: 3-DOF dynamics, path guidance, rangefinder
//! perception, fuzzy collision-risk index, reward shaping and the episode
//! environment.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod batch;
pub mod compliance;
pub mod curves;
pub mod dynamics;
pub mod env;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod guidance;
pub mod gym;
pub mod path;
pub mod perception;
pub mod policy;
pub mod reward;
pub mod risk;
pub mod scenario;
pub mod trajectory;

pub use dynamics::{ControlInput, VesselModel, VesselParams, VesselState};
pub use env::{Action, Env, EpisodeConfig, EpisodeStats, Observation, StepInfo, StepResult, Termination};
pub use error::{Error, Result};
pub use exec::Execution;
pub use path::PathSpec;
pub use risk::{RiskParams, RiskReport};
pub use scenario::{ColregKind, ScenarioSpec, TrainingKnobs};
