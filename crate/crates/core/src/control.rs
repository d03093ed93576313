//! Classical PI/PID autopilots and the actuator router that mixes agent
//! and autopilot outputs per training mode.
//!
//! Three loops: a PI controller on surge speed driving the propeller, and
//! PID controllers on course and elevation driving rudder and elevator,
//! both with rate feedback as the derivative term. Integrators are
//! clamped for anti-windup and every output is saturated to its actuator
//! bound. Deliberately non-aggressive defaults keep exploration wide when
//! a policy trains against them.

use crate::error::{Error, Result};
use crate::kinematics::wrap_angle;

/// Gains and limits for one control loop.
#[derive(Debug, Clone, Copy)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    pub integral_limit: f64,
    pub output_limit: f64,
}

/// Default gains for the three loops, tuned on the shipped coefficient set.
#[derive(Debug, Clone, Copy)]
pub struct AutopilotGains {
    pub surge: PidGains,
    pub heading: PidGains,
    pub pitch: PidGains,
}

impl Default for AutopilotGains {
    fn default() -> Self {
        Self {
            surge: PidGains {
                kp: 2.0,
                ki: 0.5,
                kd: 0.0,
                integral_limit: 2.0,
                output_limit: 1.0,
            },
            heading: PidGains {
                kp: 1.5,
                ki: 0.1,
                kd: 0.5,
                integral_limit: 1.0,
                output_limit: 1.0,
            },
            pitch: PidGains {
                kp: 1.5,
                ki: 0.1,
                kd: 0.5,
                integral_limit: 1.0,
                output_limit: 1.0,
            },
        }
    }
}

/// Normalized actuator command: propeller in [0, 1], fins in [-1, 1]
/// (scaled to the physical fin limit downstream). Saturated on
/// construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActuatorCommand {
    pub n: f64,
    pub delta_r: f64,
    pub delta_s: f64,
}

impl ActuatorCommand {
    pub fn new(n: f64, delta_r: f64, delta_s: f64) -> Self {
        Self {
            n: n.clamp(0.0, 1.0),
            delta_r: delta_r.clamp(-1.0, 1.0),
            delta_s: delta_s.clamp(-1.0, 1.0),
        }
    }

    pub fn zero() -> Self {
        Self {
            n: 0.0,
            delta_r: 0.0,
            delta_s: 0.0,
        }
    }
}

/// PI loop on surge speed; the surge subsystem is close to first order
/// so no derivative action is used.
#[derive(Debug, Clone)]
pub struct PiSurge {
    gains: PidGains,
    integral: f64,
}

impl PiSurge {
    pub fn new(gains: PidGains) -> Self {
        Self {
            gains,
            integral: 0.0,
        }
    }

    pub fn reset(&mut self) {
        self.integral = 0.0;
    }

    /// Propeller command in [0, 1] for the speed error u_d - u.
    pub fn update(&mut self, u_d: f64, u: f64, dt: f64) -> f64 {
        let error = u_d - u;
        self.integral = (self.integral + error * dt)
            .clamp(-self.gains.integral_limit, self.gains.integral_limit);
        let out = self.gains.kp * error + self.gains.ki * self.integral;
        out.clamp(0.0, self.gains.output_limit)
    }
}

/// PID loop on a wrapped angle error with rate feedback as the derivative
/// term. Used for both the course (rudder) and elevation (elevator) loops.
#[derive(Debug, Clone)]
pub struct PidAngle {
    gains: PidGains,
    integral: f64,
}

impl PidAngle {
    pub fn new(gains: PidGains) -> Self {
        Self {
            gains,
            integral: 0.0,
        }
    }

    pub fn reset(&mut self) {
        self.integral = 0.0;
    }

    /// Fin command in [-1, 1] for the angle error (desired - actual),
    /// wrapped to (-pi, pi], with rate feedback.
    pub fn update(&mut self, desired: f64, actual: f64, rate: f64, dt: f64) -> f64 {
        let error = wrap_angle(desired - actual);
        self.integral = (self.integral + error * dt)
            .clamp(-self.gains.integral_limit, self.gains.integral_limit);
        let out = self.gains.kp * error + self.gains.ki * self.integral - self.gains.kd * rate;
        out.clamp(-self.gains.output_limit, self.gains.output_limit)
    }
}

/// Which actuators the agent commands; the rest fall to the autopilots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActuatorMode {
    /// Agent commands all three actuators.
    EndToEnd,
    /// Agent commands the rudder; PI surge and PID elevation assist.
    PidAssistRudder,
    /// Agent commands the elevator; PI surge and PID course assist.
    PidAssistElevator,
    /// Agent commands the propeller; fins stay centered.
    VelocityOnly,
    /// Deployment: rudder and elevator policies plus the PI surge loop.
    Combined,
    /// Baseline: all three actuators classical.
    PidOnly,
}

impl ActuatorMode {
    /// Dimension of the agent action vector for this mode.
    pub fn action_dim(&self) -> usize {
        match self {
            ActuatorMode::EndToEnd => 3,
            ActuatorMode::PidAssistRudder | ActuatorMode::PidAssistElevator => 1,
            ActuatorMode::VelocityOnly => 1,
            ActuatorMode::Combined => 2,
            ActuatorMode::PidOnly => 0,
        }
    }
}

/// Autopilot outputs computed this step, consumed by the router.
#[derive(Debug, Clone, Copy)]
pub struct AutopilotOutputs {
    pub n: f64,
    pub delta_r: f64,
    pub delta_s: f64,
}

/// Mix the agent action with the autopilot outputs per mode. Propeller
/// actions arrive in [-1, 1] and are shifted to [0, 1]; fin actions pass
/// through. Dimension mismatches are a config error.
pub fn route_actuators(
    mode: ActuatorMode,
    agent_action: &[f64],
    autopilot: &AutopilotOutputs,
) -> Result<ActuatorCommand> {
    if agent_action.len() != mode.action_dim() {
        return Err(Error::Config(format!(
            "mode expects {} action values, got {}",
            mode.action_dim(),
            agent_action.len()
        )));
    }
    let cmd = match mode {
        ActuatorMode::EndToEnd => ActuatorCommand::new(
            (agent_action[0] + 1.0) / 2.0,
            agent_action[1],
            agent_action[2],
        ),
        ActuatorMode::PidAssistRudder => {
            ActuatorCommand::new(autopilot.n, agent_action[0], autopilot.delta_s)
        }
        ActuatorMode::PidAssistElevator => {
            ActuatorCommand::new(autopilot.n, autopilot.delta_r, agent_action[0])
        }
        ActuatorMode::VelocityOnly => {
            ActuatorCommand::new((agent_action[0] + 1.0) / 2.0, 0.0, 0.0)
        }
        ActuatorMode::Combined => {
            ActuatorCommand::new(autopilot.n, agent_action[0], agent_action[1])
        }
        ActuatorMode::PidOnly => {
            ActuatorCommand::new(autopilot.n, autopilot.delta_r, autopilot.delta_s)
        }
    };
    Ok(cmd)
}
