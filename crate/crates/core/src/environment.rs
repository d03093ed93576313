//! The reinforcement-learning task wrapper: episode lifecycle, observation
//! assembly and normalization, reward functions for every training setup,
//! and termination handling.
//!
//! Observations are normalized by fixed maxima and clamped to [-1, 1].
//! Rewards are non-positive combinations of non-negative terms, so each
//! reward function is bounded above by zero.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, UnitSphere};
use std::f64::consts::PI;
use std::io::Write;

use crate::control::{
    route_actuators, ActuatorCommand, ActuatorMode, AutopilotGains, AutopilotOutputs, PiSurge,
    PidAngle,
};
use crate::error::{Error, Result};
use crate::guidance::{course_elevation_of_velocity, desired_angles, Path, TrackingError};
use crate::kinematics::{rotation_body_to_ned, wrap_angle, BodyVelocity, EulerAngles, Pose};
use crate::kinetics::{ControlInput, HydroModel};
use crate::simulator::{step as sim_step, CurrentState, SimState, DEFAULT_DT};

/// Observation normalization maxima.
pub const ANGLE_MAX: f64 = PI;
pub const ROLL_RATE_MAX: f64 = 1.2;
pub const PITCH_RATE_MAX: f64 = 0.4;
pub const YAW_RATE_MAX: f64 = 0.4;
pub const SPEED_MAX: f64 = 2.0;
pub const TRACK_ERROR_MAX: f64 = 25.0;
pub const REL_SWAY_MAX: f64 = 0.3;
pub const REL_HEAVE_MAX: f64 = 0.3;

/// Observation sizes per mode family.
pub const PF_OBS_DIM: usize = 11;
pub const TT_OBS_DIM: usize = 16;

fn clamp_unit(x: f64) -> f64 {
    x.clamp(-1.0, 1.0)
}

/// Reward coefficients. Every entry must be non-positive so rewards stay
/// at or below zero.
#[derive(Debug, Clone)]
pub struct RewardWeights {
    /// End-to-end: roll, pitch, yaw.
    pub attitude: [f64; 3],
    /// End-to-end: roll, pitch, yaw rates.
    pub rates: [f64; 3],
    /// End-to-end: surge, course, elevation, cross-track, vertical-track
    /// errors.
    pub errors: [f64; 5],
    /// Cross-track task: course error, cross-track error, rudder use.
    pub cross_track: [f64; 3],
    /// Vertical-track task: elevation error, vertical-track error,
    /// elevator use.
    pub vertical_track: [f64; 3],
}

impl Default for RewardWeights {
    fn default() -> Self {
        Self {
            attitude: [-5e-3, 0.0, 0.0],
            rates: [-5e-3, -5e-4, -5e-4],
            errors: [-5e-3, -2.5e-3, -2.5e-3, -5e-3, -5e-3],
            cross_track: [-2e-2, -5e-2, -1e-2],
            vertical_track: [-2e-2, -5e-2, -1e-2],
        }
    }
}

impl RewardWeights {
    pub fn validate(&self) -> Result<()> {
        let all = self
            .attitude
            .iter()
            .chain(self.rates.iter())
            .chain(self.errors.iter())
            .chain(self.cross_track.iter())
            .chain(self.vertical_track.iter());
        for &alpha in all {
            if alpha > 0.0 {
                return Err(Error::Config(
                    "reward coefficients must be non-positive".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Shape of the tracking-task reward.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RewardShape {
    Gaussian,
    Quadratic,
}

/// Episode configuration.
#[derive(Debug, Clone)]
pub struct EpisodeConfig {
    pub mode: ActuatorMode,
    pub u_d: f64,
    pub init_radius: f64,
    pub max_steps: usize,
    pub min_cumulative_reward: f64,
    pub current_enabled: bool,
    pub dt: f64,
    pub lookahead: f64,
    pub n_waypoints: usize,
    /// Fixed path for test simulations; `None` generates a fresh random
    /// path every episode.
    pub fixed_path: Option<Path>,
    /// Reward shape for the rudder task (Gaussian by default) and the
    /// elevator task (Quadratic by default).
    pub rudder_reward_shape: RewardShape,
    pub elevator_reward_shape: RewardShape,
    pub weights: RewardWeights,
    pub gains: AutopilotGains,
}

impl EpisodeConfig {
    pub fn new(mode: ActuatorMode) -> Self {
        Self {
            mode,
            u_d: 1.5,
            init_radius: 5.0,
            max_steps: 2000,
            min_cumulative_reward: -500.0,
            current_enabled: false,
            dt: DEFAULT_DT,
            lookahead: crate::guidance::DEFAULT_LOOKAHEAD,
            n_waypoints: 5,
            fixed_path: None,
            rudder_reward_shape: RewardShape::Gaussian,
            elevator_reward_shape: RewardShape::Quadratic,
            weights: RewardWeights::default(),
            gains: AutopilotGains::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_steps == 0 {
            return Err(Error::Config("max_steps must be positive".into()));
        }
        if self.dt <= 0.0 {
            return Err(Error::Config("dt must be positive".into()));
        }
        if self.lookahead <= 0.0 {
            return Err(Error::Config("lookahead must be positive".into()));
        }
        self.weights.validate()
    }
}

/// Path-following observation vector (11 values):
/// roll, pitch, yaw, roll rate, pitch rate, yaw rate, surge error, course
/// error, elevation error, cross-track error, vertical-track error.
#[allow(clippy::too_many_arguments)]
pub fn pf_observation(
    attitude: &EulerAngles,
    rates: &Vector3<f64>,
    surge_error: f64,
    course_error: f64,
    elevation_error: f64,
    cross_track: f64,
    vertical_track: f64,
) -> Vec<f64> {
    vec![
        clamp_unit(attitude.phi / ANGLE_MAX),
        clamp_unit(attitude.theta / ANGLE_MAX),
        clamp_unit(attitude.psi / ANGLE_MAX),
        clamp_unit(rates.x / ROLL_RATE_MAX),
        clamp_unit(rates.y / PITCH_RATE_MAX),
        clamp_unit(rates.z / YAW_RATE_MAX),
        clamp_unit(surge_error / SPEED_MAX),
        clamp_unit(course_error / ANGLE_MAX),
        clamp_unit(elevation_error / ANGLE_MAX),
        clamp_unit(cross_track / TRACK_ERROR_MAX),
        clamp_unit(vertical_track / TRACK_ERROR_MAX),
    ]
}

/// Which fin a tracking-task agent observes (the one it does not command).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObservedFin {
    Rudder,
    Elevator,
}

/// Tracking-task observation vector (16 values): relative speeds, attitude,
/// rates, all control errors, the propeller command and the other fin's
/// position.
#[allow(clippy::too_many_arguments)]
pub fn tt_observation(
    relative_linear: &Vector3<f64>,
    attitude: &EulerAngles,
    rates: &Vector3<f64>,
    surge_error: f64,
    course_error: f64,
    elevation_error: f64,
    cross_track: f64,
    vertical_track: f64,
    propeller: f64,
    observed_fin: f64,
) -> Vec<f64> {
    vec![
        clamp_unit(relative_linear.x / SPEED_MAX),
        clamp_unit(relative_linear.y / REL_SWAY_MAX),
        clamp_unit(relative_linear.z / REL_HEAVE_MAX),
        clamp_unit(attitude.phi / ANGLE_MAX),
        clamp_unit(attitude.theta / ANGLE_MAX),
        clamp_unit(attitude.psi / ANGLE_MAX),
        clamp_unit(rates.x / ROLL_RATE_MAX),
        clamp_unit(rates.y / PITCH_RATE_MAX),
        clamp_unit(rates.z / YAW_RATE_MAX),
        clamp_unit(surge_error / SPEED_MAX),
        clamp_unit(course_error / ANGLE_MAX),
        clamp_unit(elevation_error / ANGLE_MAX),
        clamp_unit(cross_track / TRACK_ERROR_MAX),
        clamp_unit(vertical_track / TRACK_ERROR_MAX),
        clamp_unit(propeller),
        clamp_unit(observed_fin),
    ]
}

/// End-to-end reward: non-positive weighted sum of element-wise absolute
/// values of the normalized attitude, rate and error observations.
pub fn reward_end_to_end(observation: &[f64], weights: &RewardWeights) -> f64 {
    let alphas = weights
        .attitude
        .iter()
        .chain(weights.rates.iter())
        .chain(weights.errors.iter());
    alphas
        .zip(observation)
        .map(|(alpha, component)| alpha * component.abs())
        .sum()
}

/// Velocity-task reward: the surge-error term of the end-to-end reward.
pub fn reward_velocity(surge_error_o: f64, weights: &RewardWeights) -> f64 {
    weights.errors[0] * surge_error_o.abs()
}

/// Cross-track reward, Gaussian shape:
/// a1 (1 - exp(-5 x^2)) + a2 (1 - exp(-5 e^2)) + a3 (1 - exp(-5 d^2)).
pub fn reward_cross_track(
    course_error_o: f64,
    cross_track_o: f64,
    rudder: f64,
    weights: &RewardWeights,
) -> f64 {
    let [a1, a2, a3] = weights.cross_track;
    let bump = |x: f64| 1.0 - (-5.0 * x * x).exp();
    a1 * bump(course_error_o) + a2 * bump(cross_track_o) + a3 * bump(rudder)
}

/// Vertical-track reward, quadratic shape: a1 x^2 + a2 h^2 + a3 d^2.
pub fn reward_vertical_track(
    elevation_error_o: f64,
    vertical_track_o: f64,
    elevator: f64,
    weights: &RewardWeights,
) -> f64 {
    let [a1, a2, a3] = weights.vertical_track;
    a1 * elevation_error_o * elevation_error_o
        + a2 * vertical_track_o * vertical_track_o
        + a3 * elevator * elevator
}

fn shaped_reward(shape: RewardShape, alphas: [f64; 3], x: f64, y: f64, z: f64) -> f64 {
    match shape {
        RewardShape::Gaussian => {
            let bump = |v: f64| 1.0 - (-5.0 * v * v).exp();
            alphas[0] * bump(x) + alphas[1] * bump(y) + alphas[2] * bump(z)
        }
        RewardShape::Quadratic => alphas[0] * x * x + alphas[1] * y * y + alphas[2] * z * z,
    }
}

/// Outcome of one environment step.
#[derive(Debug, Clone)]
pub struct StepResult {
    pub observation: Vec<f64>,
    pub reward: f64,
    /// Episode over with no value bootstrap (goal, failure or fault).
    pub terminal: bool,
    /// Episode cut by the step limit; bootstrap from the final state.
    pub truncated: bool,
    pub success: bool,
    /// Description of a simulation fault, if one ended the episode.
    pub fault: Option<String>,
}

impl StepResult {
    pub fn done(&self) -> bool {
        self.terminal || self.truncated
    }
}

/// Per-episode summary used for the episode log.
#[derive(Debug, Clone)]
pub struct EpisodeSummary {
    pub seed: u64,
    pub mode: ActuatorMode,
    pub steps: usize,
    pub cumulative_reward: f64,
    pub mean_abs_cross_track: f64,
    pub mean_abs_vertical_track: f64,
    pub mean_abs_surge_error: f64,
    pub success: bool,
}

/// One path-following task instance. Owns the plant state, guidance
/// bookkeeping and autopilot integrators. One instance per rollout
/// worker; calls are strictly sequential.
pub struct Environment {
    model: HydroModel,
    config: EpisodeConfig,
    state: SimState,
    path: Path,
    segment: usize,
    surge_pi: PiSurge,
    heading_pid: PidAngle,
    pitch_pid: PidAngle,
    held_course: (f64, f64),
    last_command: ActuatorCommand,
    cumulative_reward: f64,
    steps: usize,
    done: bool,
    episode_seed: u64,
    sum_abs_e: f64,
    sum_abs_h: f64,
    sum_abs_uerr: f64,
    success: bool,
}

impl Environment {
    pub fn new(model: HydroModel, config: EpisodeConfig) -> Result<Self> {
        config.validate()?;
        let path = config
            .fixed_path
            .clone()
            .map_or_else(|| Path::generate_random(0, config.n_waypoints), Ok)?;
        let gains = config.gains;
        let mut env = Self {
            model,
            config,
            state: SimState::at_rest(Pose::new(Vector3::zeros(), EulerAngles::level(0.0))),
            path,
            segment: 0,
            surge_pi: PiSurge::new(gains.surge),
            heading_pid: PidAngle::new(gains.heading),
            pitch_pid: PidAngle::new(gains.pitch),
            held_course: (0.0, 0.0),
            last_command: ActuatorCommand::zero(),
            cumulative_reward: 0.0,
            steps: 0,
            done: true,
            episode_seed: 0,
            sum_abs_e: 0.0,
            sum_abs_h: 0.0,
            sum_abs_uerr: 0.0,
            success: false,
        };
        env.reset(0);
        Ok(env)
    }

    pub fn mode(&self) -> ActuatorMode {
        self.config.mode
    }

    pub fn observation_dim(&self) -> usize {
        match self.config.mode {
            ActuatorMode::EndToEnd | ActuatorMode::VelocityOnly | ActuatorMode::PidOnly => {
                PF_OBS_DIM
            }
            _ => TT_OBS_DIM,
        }
    }

    pub fn action_dim(&self) -> usize {
        self.config.mode.action_dim()
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn last_command(&self) -> ActuatorCommand {
        self.last_command
    }

    pub fn config(&self) -> &EpisodeConfig {
        &self.config
    }

    /// Start a fresh episode. The vehicle spawns uniformly inside a ball
    /// around the first waypoint, level, headed along the first segment
    /// with a uniform perturbation, at rest. Deterministic in `seed`.
    pub fn reset(&mut self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.episode_seed = seed;

        if self.config.fixed_path.is_none() {
            let path_seed: u64 = rng.random();
            self.path = Path::generate_random(path_seed, self.config.n_waypoints)
                .expect("n_waypoints validated at construction");
        }

        let dir: [f64; 3] = UnitSphere.sample(&mut rng);
        let radius = self.config.init_radius * rng.random::<f64>().cbrt();
        let position = self.path.waypoints()[0] + radius * Vector3::new(dir[0], dir[1], dir[2]);

        let heading = wrap_angle(
            self.path.segment_azimuth(0) + rng.random_range(-PI / 6.0..PI / 6.0),
        );

        let current = if self.config.current_enabled {
            Some(CurrentState::from_seed(rng.random()))
        } else {
            None
        };

        self.state = SimState {
            pose: Pose::new(position, EulerAngles::level(heading)),
            nu: BodyVelocity::zero(),
            time: 0.0,
            current,
        };
        self.segment = 0;
        self.surge_pi.reset();
        self.heading_pid.reset();
        self.pitch_pid.reset();
        self.held_course = (heading, 0.0);
        self.last_command = ActuatorCommand::zero();
        self.cumulative_reward = 0.0;
        self.steps = 0;
        self.done = false;
        self.success = false;
        self.sum_abs_e = 0.0;
        self.sum_abs_h = 0.0;
        self.sum_abs_uerr = 0.0;

        self.observe()
    }

    /// Place the vehicle at an exact pose and velocity inside the current
    /// episode; used for controlled baseline experiments.
    pub fn place_vehicle(&mut self, pose: Pose, nu: BodyVelocity) {
        self.state.pose = pose;
        self.state.nu = nu;
        self.held_course = (pose.attitude.psi, 0.0);
    }

    fn guidance_now(&self) -> (TrackingError, f64, f64, f64, f64) {
        let tracking = self
            .path
            .tracking_errors(&self.state.pose.position, self.segment);
        let (chi_d, ups_d) = desired_angles(&self.path, &tracking, self.config.lookahead);
        let velocity_ned =
            rotation_body_to_ned(&self.state.pose.attitude) * self.state.nu.linear;
        let (chi, ups) = course_elevation_of_velocity(&velocity_ned, self.held_course);
        (tracking, chi_d, ups_d, chi, ups)
    }

    /// Assemble the observation for the active mode from the current state.
    pub fn observe(&self) -> Vec<f64> {
        match self.config.mode {
            ActuatorMode::EndToEnd | ActuatorMode::VelocityOnly | ActuatorMode::PidOnly => {
                self.pf_observe()
            }
            ActuatorMode::PidAssistRudder | ActuatorMode::Combined => {
                self.tt_observe(ObservedFin::Elevator)
            }
            ActuatorMode::PidAssistElevator => self.tt_observe(ObservedFin::Rudder),
        }
    }

    fn pf_observe(&self) -> Vec<f64> {
        let (tracking, chi_d, ups_d, chi, ups) = self.guidance_now();
        pf_observation(
            &self.state.pose.attitude,
            &self.state.nu.angular,
            self.config.u_d - self.state.nu.surge(),
            wrap_angle(chi_d - chi),
            wrap_angle(ups_d - ups),
            tracking.e,
            tracking.h,
        )
    }

    fn tt_observe(&self, observed: ObservedFin) -> Vec<f64> {
        let (tracking, chi_d, ups_d, chi, ups) = self.guidance_now();
        let nu_r = self.state.relative_velocity();
        let fin = match observed {
            ObservedFin::Rudder => self.last_command.delta_r,
            ObservedFin::Elevator => self.last_command.delta_s,
        };
        tt_observation(
            &nu_r.linear,
            &self.state.pose.attitude,
            &self.state.nu.angular,
            self.config.u_d - self.state.nu.surge(),
            wrap_angle(chi_d - chi),
            wrap_angle(ups_d - ups),
            tracking.e,
            tracking.h,
            self.last_command.n,
            fin,
        )
    }

    /// Tracking-task observation with an explicit fin choice; used when a
    /// combined deployment feeds two policies from one state.
    pub fn observe_tracking(&self, observed: ObservedFin) -> Vec<f64> {
        self.tt_observe(observed)
    }

    /// The five normalized control errors (surge, course, elevation,
    /// cross-track, vertical-track) regardless of mode; used for error
    /// time-series logs.
    pub fn normalized_errors(&self) -> [f64; 5] {
        let (tracking, chi_d, ups_d, chi, ups) = self.guidance_now();
        [
            clamp_unit((self.config.u_d - self.state.nu.surge()) / SPEED_MAX),
            clamp_unit(wrap_angle(chi_d - chi) / ANGLE_MAX),
            clamp_unit(wrap_angle(ups_d - ups) / ANGLE_MAX),
            clamp_unit(tracking.e / TRACK_ERROR_MAX),
            clamp_unit(tracking.h / TRACK_ERROR_MAX),
        ]
    }

    /// Apply one agent action: route actuators, integrate the plant,
    /// advance the disturbance, switch waypoints, observe and reward.
    pub fn step(&mut self, action: &[f64]) -> Result<StepResult> {
        if self.done {
            return Err(Error::Config(
                "environment stepped after episode end; call reset".into(),
            ));
        }

        // Controllers act on the pre-step state.
        let (_, chi_d, ups_d, chi, ups) = self.guidance_now();
        let dt = self.config.dt;
        let mode = self.config.mode;
        let u = self.state.nu.surge();
        let q_rate = self.state.nu.angular.y;
        let r_rate = self.state.nu.angular.z;

        let needs_surge = !matches!(mode, ActuatorMode::EndToEnd | ActuatorMode::VelocityOnly);
        let needs_heading = matches!(mode, ActuatorMode::PidAssistElevator | ActuatorMode::PidOnly);
        let needs_pitch = matches!(mode, ActuatorMode::PidAssistRudder | ActuatorMode::PidOnly);
        let autopilot = AutopilotOutputs {
            n: if needs_surge {
                self.surge_pi.update(self.config.u_d, u, dt)
            } else {
                0.0
            },
            delta_r: if needs_heading {
                self.heading_pid.update(chi_d, chi, r_rate, dt)
            } else {
                0.0
            },
            delta_s: if needs_pitch {
                self.pitch_pid.update(ups_d, ups, q_rate, dt)
            } else {
                0.0
            },
        };

        let command = route_actuators(mode, action, &autopilot)?;
        let input = ControlInput {
            n: command.n,
            delta_r: command.delta_r * self.model.fin_limit,
            delta_s: command.delta_s * self.model.fin_limit,
        };

        match sim_step(&self.model, &self.state, &input, dt) {
            Ok(next) => self.state = next,
            Err(err) => {
                self.done = true;
                self.steps += 1;
                return Ok(StepResult {
                    observation: self.observe(),
                    reward: 0.0,
                    terminal: true,
                    truncated: false,
                    success: false,
                    fault: Some(err.to_string()),
                });
            }
        }
        if let Some(current) = self.state.current.as_mut() {
            current.advance(dt);
        }
        self.last_command = command;

        let (segment, reached_goal) = self
            .path
            .maybe_switch_waypoint(&self.state.pose.position, self.segment);
        self.segment = segment;

        // Post-step guidance feeds the observation, reward and held course.
        let velocity_ned =
            rotation_body_to_ned(&self.state.pose.attitude) * self.state.nu.linear;
        self.held_course = course_elevation_of_velocity(&velocity_ned, self.held_course);

        let observation = self.observe();
        let reward = self.reward_for(&observation, &command);

        self.cumulative_reward += reward;
        self.steps += 1;
        let tracking = self
            .path
            .tracking_errors(&self.state.pose.position, self.segment);
        self.sum_abs_e += tracking.e.abs();
        self.sum_abs_h += tracking.h.abs();
        self.sum_abs_uerr += (self.config.u_d - self.state.nu.surge()).abs();

        let failed = self.cumulative_reward < self.config.min_cumulative_reward;
        let out_of_steps = self.steps >= self.config.max_steps;
        let terminal = reached_goal || failed;
        let truncated = out_of_steps && !terminal;
        self.done = terminal || truncated;
        self.success = reached_goal;

        Ok(StepResult {
            observation,
            reward,
            terminal,
            truncated,
            success: reached_goal,
            fault: None,
        })
    }

    fn reward_for(&self, observation: &[f64], command: &ActuatorCommand) -> f64 {
        match self.config.mode {
            ActuatorMode::EndToEnd | ActuatorMode::PidOnly => {
                reward_end_to_end(observation, &self.config.weights)
            }
            ActuatorMode::VelocityOnly => {
                reward_velocity(observation[6], &self.config.weights)
            }
            ActuatorMode::PidAssistRudder => shaped_reward(
                self.config.rudder_reward_shape,
                self.config.weights.cross_track,
                observation[10],
                observation[12],
                command.delta_r,
            ),
            ActuatorMode::PidAssistElevator => shaped_reward(
                self.config.elevator_reward_shape,
                self.config.weights.vertical_track,
                observation[11],
                observation[13],
                command.delta_s,
            ),
            ActuatorMode::Combined => {
                shaped_reward(
                    self.config.rudder_reward_shape,
                    self.config.weights.cross_track,
                    observation[10],
                    observation[12],
                    command.delta_r,
                ) + shaped_reward(
                    self.config.elevator_reward_shape,
                    self.config.weights.vertical_track,
                    observation[11],
                    observation[13],
                    command.delta_s,
                )
            }
        }
    }

    pub fn cumulative_reward(&self) -> f64 {
        self.cumulative_reward
    }

    pub fn steps_taken(&self) -> usize {
        self.steps
    }

    pub fn summary(&self) -> EpisodeSummary {
        let steps = self.steps.max(1) as f64;
        EpisodeSummary {
            seed: self.episode_seed,
            mode: self.config.mode,
            steps: self.steps,
            cumulative_reward: self.cumulative_reward,
            mean_abs_cross_track: self.sum_abs_e / steps,
            mean_abs_vertical_track: self.sum_abs_h / steps,
            mean_abs_surge_error: self.sum_abs_uerr / steps,
            success: self.success,
        }
    }
}

impl std::fmt::Display for ActuatorMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            ActuatorMode::EndToEnd => "end_to_end",
            ActuatorMode::PidAssistRudder => "pid_assist_rudder",
            ActuatorMode::PidAssistElevator => "pid_assist_elevator",
            ActuatorMode::VelocityOnly => "velocity_only",
            ActuatorMode::Combined => "combined",
            ActuatorMode::PidOnly => "pid_only",
        };
        f.write_str(name)
    }
}

pub const EPISODE_HEADER: &str =
    "seed,mode,steps,cumulative_reward,mean_abs_e,mean_abs_h,mean_abs_surge_error,success";

/// CSV episode-summary log, one row per episode.
pub struct EpisodeLogger<W: Write> {
    sink: W,
}

impl<W: Write> EpisodeLogger<W> {
    pub fn new(mut sink: W) -> Result<Self> {
        writeln!(sink, "{EPISODE_HEADER}")?;
        Ok(Self { sink })
    }

    pub fn log(&mut self, summary: &EpisodeSummary) -> Result<()> {
        writeln!(
            self.sink,
            "{},{},{},{:.9},{:.9},{:.9},{:.9},{}",
            summary.seed,
            summary.mode,
            summary.steps,
            summary.cumulative_reward,
            summary.mean_abs_cross_track,
            summary.mean_abs_vertical_track,
            summary.mean_abs_surge_error,
            summary.success as u8,
        )?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn env_with_mode(mode: ActuatorMode) -> Environment {
        Environment::new(HydroModel::default_model().unwrap(), EpisodeConfig::new(mode)).unwrap()
    }

    #[test]
    fn reset_deterministic_per_seed() {
        let mut env = env_with_mode(ActuatorMode::EndToEnd);
        let a = env.reset(17);
        let b = env.reset(17);
        assert_eq!(a, b);
        let c = env.reset(18);
        assert_ne!(a, c);
    }

    #[test]
    fn reset_position_within_init_radius() {
        let mut env = env_with_mode(ActuatorMode::EndToEnd);
        for seed in 0..200 {
            env.reset(seed);
            let wp0 = env.path.waypoints()[0];
            let dist = (env.state.pose.position - wp0).norm();
            assert!(dist <= 5.0 + 1e-12, "distance {dist} exceeds init radius");
        }
    }

    #[test]
    fn fixed_path_identical_across_episodes() {
        let mut config = EpisodeConfig::new(ActuatorMode::PidOnly);
        let path = Path::generate_random(99, 4).unwrap();
        config.fixed_path = Some(path.clone());
        let mut env = Environment::new(HydroModel::default_model().unwrap(), config).unwrap();
        env.reset(1);
        let first: Vec<_> = env.path.waypoints().to_vec();
        env.reset(2);
        assert_eq!(first, env.path.waypoints());
        assert_eq!(first, path.waypoints());
    }

    #[test]
    fn observation_normalization_extremes() {
        // Roll of pi maps to exactly 1.
        let obs = pf_observation(
            &EulerAngles {
                phi: PI,
                theta: 0.0,
                psi: 0.0,
            },
            &Vector3::zeros(),
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
        );
        assert_eq!(obs[0], 1.0);
        // A 50 m cross-track error clamps to 1.
        let obs = pf_observation(
            &EulerAngles::level(0.0),
            &Vector3::zeros(),
            0.0,
            0.0,
            0.0,
            50.0,
            0.0,
        );
        assert_eq!(obs[9], 1.0);
    }

    #[test]
    fn observation_zero_on_path_at_cruise_speed() {
        let mut config = EpisodeConfig::new(ActuatorMode::EndToEnd);
        config.fixed_path = Some(
            Path::from_waypoints(vec![Vector3::zeros(), Vector3::new(100.0, 0.0, 0.0)]).unwrap(),
        );
        let mut env = Environment::new(HydroModel::default_model().unwrap(), config).unwrap();
        env.reset(0);
        // Force the exact on-path cruise condition.
        env.state.pose = Pose::new(Vector3::new(10.0, 0.0, 0.0), EulerAngles::level(0.0));
        env.state.nu = BodyVelocity::new(1.5, 0.0, 0.0, 0.0, 0.0, 0.0);
        let obs = env.observe();
        for (i, v) in obs.iter().enumerate() {
            assert!(v.abs() <= 1e-12, "component {i} = {v}");
        }
    }

    #[test]
    fn tt_observation_has_sixteen_components() {
        let mut env = env_with_mode(ActuatorMode::PidAssistRudder);
        let obs = env.reset(3);
        assert_eq!(obs.len(), TT_OBS_DIM);
        assert!(obs.iter().all(|v| (-1.0..=1.0).contains(v)));
    }

    #[test]
    fn reward_end_to_end_cases() {
        let weights = RewardWeights::default();
        let zeros = vec![0.0; PF_OBS_DIM];
        assert_eq!(reward_end_to_end(&zeros, &weights), 0.0);

        let mut only_e = vec![0.0; PF_OBS_DIM];
        only_e[9] = 1.0;
        assert_eq!(reward_end_to_end(&only_e, &weights), -5e-3);
    }

    #[test]
    fn reward_end_to_end_never_positive() {
        let weights = RewardWeights::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let obs: Vec<f64> = (0..PF_OBS_DIM)
                .map(|_| rand::Rng::random_range(&mut rng, -1.0..1.0))
                .collect();
            assert!(reward_end_to_end(&obs, &weights) <= 0.0);
        }
    }

    #[test]
    fn reward_cross_track_cases() {
        let w = RewardWeights::default();
        assert_eq!(reward_cross_track(0.0, 0.0, 0.0, &w), 0.0);
        // Saturated course error alone approaches a1.
        let r = reward_cross_track(1e3, 0.0, 0.0, &w);
        assert!((r - w.cross_track[0]).abs() < 1e-12);
        // Mid-range point against direct evaluation.
        let expected = {
            let g = 1.0 - (-5.0f64 * 0.25).exp();
            (w.cross_track[0] + w.cross_track[1] + w.cross_track[2]) * g
        };
        assert!((reward_cross_track(0.5, 0.5, 0.5, &w) - expected).abs() <= 1e-15);
    }

    #[test]
    fn reward_vertical_track_cases() {
        let w = RewardWeights::default();
        assert_eq!(reward_vertical_track(0.0, 0.0, 0.0, &w), 0.0);
        assert_eq!(reward_vertical_track(1.0, 0.0, 0.0, &w), w.vertical_track[0]);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..100 {
            let (a, b, c): (f64, f64, f64) = (
                rand::Rng::random_range(&mut rng, -1.0..1.0),
                rand::Rng::random_range(&mut rng, -1.0..1.0),
                rand::Rng::random_range(&mut rng, -1.0..1.0),
            );
            let expected = w.vertical_track[0] * a * a
                + w.vertical_track[1] * b * b
                + w.vertical_track[2] * c * c;
            assert_eq!(reward_vertical_track(a, b, c, &w), expected);
        }
    }

    #[test]
    fn quadratic_reward_gradient_grows_with_error() {
        // |dr/dh| at h = 0.8 must exceed the slope at h = 0.2.
        let w = RewardWeights::default();
        let slope = |h: f64| {
            let eps = 1e-6;
            (reward_vertical_track(0.0, h + eps, 0.0, &w)
                - reward_vertical_track(0.0, h - eps, 0.0, &w))
                / (2.0 * eps)
        };
        assert!(slope(0.8).abs() > slope(0.2).abs());
    }

    #[test]
    fn positive_reward_weight_rejected() {
        let mut weights = RewardWeights::default();
        weights.errors[0] = 1e-3;
        assert!(weights.validate().is_err());
    }

    #[test]
    fn step_terminates_on_reward_floor() {
        let mut config = EpisodeConfig::new(ActuatorMode::EndToEnd);
        config.min_cumulative_reward = -1e-6;
        let mut env = Environment::new(HydroModel::default_model().unwrap(), config).unwrap();
        env.reset(4);
        let mut result = None;
        for _ in 0..50 {
            let r = env.step(&[1.0, 0.5, -0.5]).unwrap();
            let finished = r.done();
            result = Some(r);
            if finished {
                break;
            }
        }
        let result = result.unwrap();
        assert!(result.terminal);
        assert!(!result.success);
    }

    #[test]
    fn step_truncates_at_max_steps() {
        let mut config = EpisodeConfig::new(ActuatorMode::VelocityOnly);
        config.max_steps = 5;
        let mut env = Environment::new(HydroModel::default_model().unwrap(), config).unwrap();
        env.reset(4);
        for _ in 0..4 {
            let r = env.step(&[0.0]).unwrap();
            assert!(!r.done());
        }
        let r = env.step(&[0.0]).unwrap();
        assert!(r.truncated);
        assert!(!r.terminal);
        assert!(env.step(&[0.0]).is_err(), "stepping after done is an error");
    }

    #[test]
    fn reset_heading_within_perturbation_of_first_segment() {
        let mut env = env_with_mode(ActuatorMode::EndToEnd);
        for seed in 0..100 {
            env.reset(seed);
            let heading = env.state.pose.attitude.psi;
            let azimuth = env.path.segment_azimuth(0);
            assert!(wrap_angle(heading - azimuth).abs() <= PI / 6.0 + 1e-12);
            assert_eq!(env.state.pose.attitude.phi, 0.0);
            assert_eq!(env.state.pose.attitude.theta, 0.0);
            assert_eq!(env.state.nu, BodyVelocity::zero());
        }
    }

    #[test]
    fn simulation_fault_surfaces_in_step_result() {
        let mut env = env_with_mode(ActuatorMode::EndToEnd);
        env.reset(0);
        // Pitch the vehicle close to the guard with a strong pitch rate;
        // the next step crosses the singular attitude.
        env.place_vehicle(
            Pose::new(
                Vector3::zeros(),
                EulerAngles {
                    phi: 0.0,
                    theta: PI / 2.0 - 3e-3,
                    psi: 0.0,
                },
            ),
            BodyVelocity::new(0.0, 0.0, 0.0, 0.0, 0.5, 0.0),
        );
        let result = env.step(&[0.0, 0.0, 0.0]).unwrap();
        assert!(result.terminal);
        assert!(!result.success);
        let fault = result.fault.expect("fault must be reported");
        assert!(fault.contains("singular"), "fault: {fault}");
    }

    #[test]
    fn step_terminates_with_success_on_final_waypoint() {
        let mut config = EpisodeConfig::new(ActuatorMode::PidOnly);
        config.fixed_path = Some(
            Path::from_waypoints(vec![Vector3::zeros(), Vector3::new(30.0, 0.0, 0.0)]).unwrap(),
        );
        config.max_steps = 4000;
        let mut env = Environment::new(HydroModel::default_model().unwrap(), config).unwrap();
        env.reset(12);
        loop {
            let r = env.step(&[]).unwrap();
            if r.done() {
                assert!(r.terminal);
                assert!(r.success, "PID baseline should reach a 30 m straight goal");
                break;
            }
        }
    }

    #[test]
    fn episode_logger_format() {
        let mut buf = Vec::new();
        {
            let mut logger = EpisodeLogger::new(&mut buf).unwrap();
            logger
                .log(&EpisodeSummary {
                    seed: 3,
                    mode: ActuatorMode::EndToEnd,
                    steps: 10,
                    cumulative_reward: -1.5,
                    mean_abs_cross_track: 0.2,
                    mean_abs_vertical_track: 0.1,
                    mean_abs_surge_error: 0.3,
                    success: true,
                })
                .unwrap();
        }
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(EPISODE_HEADER));
        assert!(text.lines().nth(1).unwrap().starts_with("3,end_to_end,10,"));
    }

    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    proptest! {
        #[test]
        fn clamping_is_idempotent(x in -10.0f64..10.0) {
            let once = clamp_unit(x);
            prop_assert_eq!(once, clamp_unit(once));
        }

        #[test]
        fn cross_track_reward_even_and_decreasing(
            chi in 0.01f64..1.0,
            e in 0.01f64..1.0,
            d in 0.01f64..1.0,
        ) {
            let w = RewardWeights::default();
            // Even in each argument.
            prop_assert_eq!(
                reward_cross_track(chi, e, d, &w),
                reward_cross_track(-chi, e, d, &w)
            );
            prop_assert_eq!(
                reward_cross_track(chi, e, d, &w),
                reward_cross_track(chi, -e, d, &w)
            );
            prop_assert_eq!(
                reward_cross_track(chi, e, d, &w),
                reward_cross_track(chi, e, -d, &w)
            );
            // Strictly decreasing in each magnitude.
            prop_assert!(
                reward_cross_track(chi * 1.1, e, d, &w) < reward_cross_track(chi, e, d, &w)
            );
            prop_assert!(
                reward_cross_track(chi, e * 1.1, d, &w) < reward_cross_track(chi, e, d, &w)
            );
            prop_assert!(
                reward_cross_track(chi, e, d * 1.1, &w) < reward_cross_track(chi, e, d, &w)
            );
        }
    }
}
