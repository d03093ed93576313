//! Six-degree-of-freedom underwater vehicle simulation with path-following
//! guidance, classical PI/PID autopilots, and an actor-critic PPO learner
//! that can train end-to-end or one actuator at a time with autopilot
//! assistance.
//!
//! Layers, bottom up:
//! - [`kinematics`]: frame transforms and the pose differential equation
//! - [`kinetics`]: mass, Coriolis, damping, restoring and actuator forces
//! - [`simulator`]: fixed-step RK4 integration plus the current disturbance
//! - [`guidance`]: waypoint paths, tracking errors, look-ahead steering
//! - [`control`]: PI/PID autopilots and agent/autopilot actuator routing
//! - [`environment`]: observations, rewards and episode lifecycle
//! - [`policy`]: a small tanh MLP actor-critic with exact gradients
//! - [`ppo`]: rollout collection, advantage estimation and the clipped
//!   surrogate update

pub mod control;
pub mod environment;
pub mod error;
pub mod guidance;
pub mod kinematics;
pub mod kinetics;
pub mod policy;
pub mod ppo;
pub mod simulator;

pub use error::{Error, Result};
