//! Run configuration: a sectioned plain-text file with `key = value`
//! lines, every knob of an experiment in one place. Unknown sections or
//! keys are rejected, and the resolved configuration is serialized into
//! the output directory so a run is reproducible from its snapshot alone.

use std::collections::HashMap;
use std::path::{Path as FsPath, PathBuf};

use auv_core::control::{ActuatorMode, AutopilotGains, PidGains};
use auv_core::environment::{EpisodeConfig, RewardShape};
use auv_core::guidance::Path;
use auv_core::kinetics::HydroModel;
use auv_core::ppo::PpoConfig;
use auv_core::{Error, Result};

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mode: ActuatorMode,
    pub seed: u64,
    pub out: PathBuf,
    pub current: bool,
    pub coefficients: Option<PathBuf>,
    pub path_file: Option<PathBuf>,
    pub n_waypoints: usize,
    pub lookahead: f64,
    pub dt: f64,

    pub u_d: f64,
    pub init_radius: f64,
    pub max_steps: usize,
    pub min_cumulative_reward: f64,
    pub rudder_reward_shape: RewardShape,
    pub elevator_reward_shape: RewardShape,

    pub ppo: PpoConfig,
    pub gains: AutopilotGains,

    pub eval_episodes: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: ActuatorMode::EndToEnd,
            seed: 0,
            out: PathBuf::from("runs/out"),
            current: false,
            coefficients: None,
            path_file: None,
            n_waypoints: 5,
            lookahead: 5.0,
            dt: 0.1,
            u_d: 1.5,
            init_radius: 5.0,
            max_steps: 2000,
            min_cumulative_reward: -500.0,
            rudder_reward_shape: RewardShape::Gaussian,
            elevator_reward_shape: RewardShape::Quadratic,
            ppo: PpoConfig::default(),
            gains: AutopilotGains::default(),
            eval_episodes: 1,
        }
    }
}

fn parse_mode(s: &str) -> Result<ActuatorMode> {
    match s {
        "end_to_end" => Ok(ActuatorMode::EndToEnd),
        "pid_assist_rudder" => Ok(ActuatorMode::PidAssistRudder),
        "pid_assist_elevator" => Ok(ActuatorMode::PidAssistElevator),
        "velocity_only" => Ok(ActuatorMode::VelocityOnly),
        "combined" => Ok(ActuatorMode::Combined),
        "pid_only" => Ok(ActuatorMode::PidOnly),
        other => Err(Error::Config(format!("unknown mode `{other}`"))),
    }
}

fn parse_shape(s: &str) -> Result<RewardShape> {
    match s {
        "gaussian" => Ok(RewardShape::Gaussian),
        "quadratic" => Ok(RewardShape::Quadratic),
        other => Err(Error::Config(format!("unknown reward shape `{other}`"))),
    }
}

fn parse_bool(s: &str) -> Result<bool> {
    match s {
        "true" | "1" | "on" => Ok(true),
        "false" | "0" | "off" => Ok(false),
        other => Err(Error::Config(format!("expected bool, got `{other}`"))),
    }
}

impl RunConfig {
    pub fn from_file(path: &FsPath) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut entries: HashMap<String, String> = HashMap::new();
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name.trim().to_string();
                if !["run", "episode", "ppo", "pid", "eval"].contains(&section.as_str()) {
                    return Err(Error::Config(format!("unknown section `[{section}]`")));
                }
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("config line {}: expected `key = value`", lineno + 1))
            })?;
            if section.is_empty() {
                return Err(Error::Config(format!(
                    "config line {}: key outside any section",
                    lineno + 1
                )));
            }
            let full = format!("{section}.{}", key.trim());
            if entries.insert(full.clone(), value.trim().to_string()).is_some() {
                return Err(Error::Config(format!("duplicate config key `{full}`")));
            }
        }

        let mut config = Self::default();
        for (key, value) in &entries {
            config.apply(key, value)?;
        }
        Ok(config)
    }

    /// Apply one `section.key = value` assignment; rejects unknown keys.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let bad_num = |k: &str| Error::Config(format!("bad numeric value for `{k}`"));
        let f = |v: &str, k: &str| -> Result<f64> { v.parse().map_err(|_| bad_num(k)) };
        let n = |v: &str, k: &str| -> Result<usize> { v.parse().map_err(|_| bad_num(k)) };
        match key {
            "run.mode" => self.mode = parse_mode(value)?,
            "run.seed" => self.seed = value.parse().map_err(|_| bad_num(key))?,
            "run.out" => self.out = PathBuf::from(value),
            "run.current" => self.current = parse_bool(value)?,
            "run.coefficients" => {
                self.coefficients = (!value.is_empty()).then(|| PathBuf::from(value))
            }
            "run.path_file" => self.path_file = (!value.is_empty()).then(|| PathBuf::from(value)),
            "run.n_waypoints" => self.n_waypoints = n(value, key)?,
            "run.lookahead" => self.lookahead = f(value, key)?,
            "run.dt" => self.dt = f(value, key)?,
            "episode.u_d" => self.u_d = f(value, key)?,
            "episode.init_radius" => self.init_radius = f(value, key)?,
            "episode.max_steps" => self.max_steps = n(value, key)?,
            "episode.min_cumulative_reward" => self.min_cumulative_reward = f(value, key)?,
            "episode.rudder_reward_shape" => self.rudder_reward_shape = parse_shape(value)?,
            "episode.elevator_reward_shape" => self.elevator_reward_shape = parse_shape(value)?,
            "ppo.learning_rate" => self.ppo.learning_rate = f(value, key)?,
            "ppo.gamma" => self.ppo.gamma = f(value, key)?,
            "ppo.gae_lambda" => self.ppo.gae_lambda = f(value, key)?,
            "ppo.n_actors" => self.ppo.n_actors = n(value, key)?,
            "ppo.n_steps" => self.ppo.n_steps = n(value, key)?,
            "ppo.n_epochs" => self.ppo.n_epochs = n(value, key)?,
            "ppo.minibatch_size" => self.ppo.minibatch_size = n(value, key)?,
            "ppo.clip_epsilon" => self.ppo.clip_epsilon = f(value, key)?,
            "ppo.value_coef" => self.ppo.value_coef = f(value, key)?,
            "ppo.entropy_coef" => self.ppo.entropy_coef = f(value, key)?,
            "ppo.total_timesteps" => self.ppo.total_timesteps = n(value, key)?,
            "ppo.normalize_advantages" => self.ppo.normalize_advantages = parse_bool(value)?,
            "pid.surge_kp" => self.gains.surge.kp = f(value, key)?,
            "pid.surge_ki" => self.gains.surge.ki = f(value, key)?,
            "pid.surge_integral_limit" => self.gains.surge.integral_limit = f(value, key)?,
            "pid.heading_kp" => self.gains.heading.kp = f(value, key)?,
            "pid.heading_ki" => self.gains.heading.ki = f(value, key)?,
            "pid.heading_kd" => self.gains.heading.kd = f(value, key)?,
            "pid.heading_integral_limit" => self.gains.heading.integral_limit = f(value, key)?,
            "pid.pitch_kp" => self.gains.pitch.kp = f(value, key)?,
            "pid.pitch_ki" => self.gains.pitch.ki = f(value, key)?,
            "pid.pitch_kd" => self.gains.pitch.kd = f(value, key)?,
            "pid.pitch_integral_limit" => self.gains.pitch.integral_limit = f(value, key)?,
            "eval.episodes" => self.eval_episodes = n(value, key)?,
            other => return Err(Error::Config(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Canonical serialization; parsing the snapshot reproduces the
    /// configuration.
    pub fn snapshot(&self) -> String {
        let shape = |s: RewardShape| match s {
            RewardShape::Gaussian => "gaussian",
            RewardShape::Quadratic => "quadratic",
        };
        let pid = |g: &PidGains, name: &str, with_kd: bool| -> String {
            let mut out = format!(
                "{name}_kp = {}\n{name}_ki = {}\n",
                g.kp, g.ki
            );
            if with_kd {
                out.push_str(&format!("{name}_kd = {}\n", g.kd));
            }
            out.push_str(&format!("{name}_integral_limit = {}\n", g.integral_limit));
            out
        };
        format!(
            "[run]\n\
             mode = {}\n\
             seed = {}\n\
             out = {}\n\
             current = {}\n\
             coefficients = {}\n\
             path_file = {}\n\
             n_waypoints = {}\n\
             lookahead = {}\n\
             dt = {}\n\
             \n[episode]\n\
             u_d = {}\n\
             init_radius = {}\n\
             max_steps = {}\n\
             min_cumulative_reward = {}\n\
             rudder_reward_shape = {}\n\
             elevator_reward_shape = {}\n\
             \n[ppo]\n\
             learning_rate = {}\n\
             gamma = {}\n\
             gae_lambda = {}\n\
             n_actors = {}\n\
             n_steps = {}\n\
             n_epochs = {}\n\
             minibatch_size = {}\n\
             clip_epsilon = {}\n\
             value_coef = {}\n\
             entropy_coef = {}\n\
             total_timesteps = {}\n\
             normalize_advantages = {}\n\
             \n[pid]\n{}{}{}\
             \n[eval]\n\
             episodes = {}\n",
            self.mode,
            self.seed,
            self.out.display(),
            self.current,
            self.coefficients.as_ref().map_or(String::new(), |p| p.display().to_string()),
            self.path_file.as_ref().map_or(String::new(), |p| p.display().to_string()),
            self.n_waypoints,
            self.lookahead,
            self.dt,
            self.u_d,
            self.init_radius,
            self.max_steps,
            self.min_cumulative_reward,
            shape(self.rudder_reward_shape),
            shape(self.elevator_reward_shape),
            self.ppo.learning_rate,
            self.ppo.gamma,
            self.ppo.gae_lambda,
            self.ppo.n_actors,
            self.ppo.n_steps,
            self.ppo.n_epochs,
            self.ppo.minibatch_size,
            self.ppo.clip_epsilon,
            self.ppo.value_coef,
            self.ppo.entropy_coef,
            self.ppo.total_timesteps,
            self.ppo.normalize_advantages,
            pid(&self.gains.surge, "surge", false),
            pid(&self.gains.heading, "heading", true),
            pid(&self.gains.pitch, "pitch", true),
            self.eval_episodes,
        )
    }

    pub fn load_model(&self) -> Result<HydroModel> {
        match &self.coefficients {
            Some(path) => HydroModel::from_file(path),
            None => HydroModel::default_model(),
        }
    }

    /// Fixed path for this run: the configured path file, or a path
    /// generated once from the run seed (evaluation runs keep the path
    /// identical across episodes).
    pub fn fixed_path(&self) -> Result<Path> {
        match &self.path_file {
            Some(file) => Path::from_csv(file),
            None => Path::generate_random(self.seed, self.n_waypoints),
        }
    }

    pub fn episode_config(&self, fixed_path: Option<Path>) -> EpisodeConfig {
        let mut episode = EpisodeConfig::new(self.mode);
        episode.u_d = self.u_d;
        episode.init_radius = self.init_radius;
        episode.max_steps = self.max_steps;
        episode.min_cumulative_reward = self.min_cumulative_reward;
        episode.current_enabled = self.current;
        episode.dt = self.dt;
        episode.lookahead = self.lookahead;
        episode.n_waypoints = self.n_waypoints;
        episode.fixed_path = fixed_path;
        episode.rudder_reward_shape = self.rudder_reward_shape;
        episode.elevator_reward_shape = self.elevator_reward_shape;
        episode.gains = self.gains;
        episode
    }
}
