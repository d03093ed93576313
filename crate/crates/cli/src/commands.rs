//! The three operator entry points: train, eval and plotdata.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path as FsPath, PathBuf};

use auv_core::environment::{EpisodeLogger, Environment};
use auv_core::control::ActuatorMode;
use auv_core::policy::ActorCritic;
use auv_core::ppo::{self, CurveLogger, PolicySet};
use auv_core::simulator::TrajectoryLogger;
use auv_core::{Error, Result};

use crate::config::RunConfig;

pub const ERRORS_HEADER: &str =
    "time,surge_error_o,course_error_o,elevation_error_o,cross_track_o,vertical_track_o";

fn create(path: &FsPath) -> Result<BufWriter<fs::File>> {
    Ok(BufWriter::new(fs::File::create(path)?))
}

/// Train a policy per the run configuration and write curve, episode log,
/// config snapshot and best/latest checkpoints into the output directory.
pub fn cmd_train(config: &RunConfig) -> Result<()> {
    config.ppo.validate()?;
    let model = config.load_model()?;
    fs::create_dir_all(&config.out)?;
    fs::write(config.out.join("config.snapshot"), config.snapshot())?;

    // Training uses a fresh random path per episode unless a path file is
    // pinned explicitly.
    let fixed_path = match &config.path_file {
        Some(file) => Some(auv_core::guidance::Path::from_csv(file)?),
        None => None,
    };
    let episode = config.episode_config(fixed_path);
    episode.validate()?;

    let factory = |_actor: usize| Environment::new(model.clone(), episode.clone());
    let result = ppo::train(factory, &config.ppo, config.seed)?;

    let mut curve = CurveLogger::new(create(&config.out.join("curve.csv"))?)?;
    for point in &result.curve {
        curve.log(point)?;
    }
    let mut episodes = EpisodeLogger::new(create(&config.out.join("episodes.csv"))?)?;
    for summary in &result.episodes {
        episodes.log(summary)?;
    }
    result.policy.save(&config.out.join("latest.ckpt"))?;
    result.best_policy.save(&config.out.join("best.ckpt"))?;

    if let Some(reason) = result.aborted {
        eprintln!("training aborted: {reason}; last good checkpoints were written");
        return Err(Error::NonFiniteLoss);
    }
    eprintln!(
        "trained {} steps, best windowed episode reward {:.4}",
        result.curve.last().map_or(0, |p| p.total_steps),
        result.best_mean_reward
    );
    Ok(())
}

fn load_checkpoint_for(env: &Environment, path: &FsPath) -> Result<ActorCritic> {
    let policy = ActorCritic::load(path)?;
    if policy.obs_dim != env.observation_dim() || policy.act_dim != env.action_dim() {
        return Err(Error::Config(format!(
            "checkpoint `{}` has dims ({}, {}) but mode `{}` needs ({}, {})",
            path.display(),
            policy.obs_dim,
            policy.act_dim,
            env.mode(),
            env.observation_dim(),
            env.action_dim()
        )));
    }
    Ok(policy)
}

/// Deterministic evaluation episodes on a fixed path. The first episode
/// writes the trajectory and error time series; every episode lands in
/// the episode log. Without checkpoints this is the classical-autopilot
/// baseline.
pub fn cmd_eval(config: &RunConfig, checkpoints: &[PathBuf]) -> Result<()> {
    let model = config.load_model()?;
    let path = config.fixed_path()?;
    let episode = config.episode_config(Some(path.clone()));
    episode.validate()?;
    let mut env = Environment::new(model, episode)?;

    let expected = match config.mode {
        ActuatorMode::PidOnly => 0,
        ActuatorMode::Combined => 2,
        _ => 1,
    };
    if checkpoints.len() != expected {
        return Err(Error::Config(format!(
            "mode `{}` needs {expected} checkpoint(s), got {}",
            config.mode,
            checkpoints.len()
        )));
    }
    let loaded: Vec<ActorCritic> = match config.mode {
        ActuatorMode::Combined => {
            // Rudder policy first, elevator second; both are tracking-task
            // networks with the 16-value observation and one action.
            checkpoints
                .iter()
                .map(|p| {
                    let policy = ActorCritic::load(p)?;
                    if policy.obs_dim != auv_core::environment::TT_OBS_DIM || policy.act_dim != 1 {
                        return Err(Error::Config(format!(
                            "checkpoint `{}` is not a tracking-task policy",
                            p.display()
                        )));
                    }
                    Ok(policy)
                })
                .collect::<Result<_>>()?
        }
        ActuatorMode::PidOnly => Vec::new(),
        _ => vec![load_checkpoint_for(&env, &checkpoints[0])?],
    };
    let policies = match config.mode {
        ActuatorMode::PidOnly => PolicySet::None,
        ActuatorMode::Combined => PolicySet::Pair {
            rudder: &loaded[0],
            elevator: &loaded[1],
        },
        _ => PolicySet::Single(&loaded[0]),
    };

    fs::create_dir_all(&config.out)?;
    fs::write(config.out.join("config.snapshot"), config.snapshot())?;
    fs::write(config.out.join("path.csv"), path.to_csv())?;

    let mut episodes = EpisodeLogger::new(create(&config.out.join("episodes.csv"))?)?;
    for index in 0..config.eval_episodes.max(1) {
        let seed = config.seed.wrapping_add(index as u64);
        let summary = if index == 0 {
            let mut trajectory =
                TrajectoryLogger::new(create(&config.out.join("trajectory.csv"))?)?;
            let mut errors = create(&config.out.join("errors.csv"))?;
            writeln!(errors, "{ERRORS_HEADER}")?;
            run_logged_episode(&policies, &mut env, seed, &mut trajectory, &mut errors)?
        } else {
            ppo::run_episode(&policies, &mut env, seed, |_, _| {})?
        };
        episodes.log(&summary)?;
        eprintln!(
            "episode {index}: steps {} reward {:.4} mean|e| {:.3} success {}",
            summary.steps, summary.cumulative_reward, summary.mean_abs_cross_track, summary.success
        );
    }
    Ok(())
}

fn run_logged_episode<W: Write>(
    policies: &PolicySet,
    env: &mut Environment,
    seed: u64,
    trajectory: &mut TrajectoryLogger<W>,
    errors: &mut W,
) -> Result<auv_core::environment::EpisodeSummary> {
    let mut error_rows: Vec<String> = Vec::new();
    let summary = ppo::run_episode(policies, env, seed, |env, _result| {
        let cmd = env.last_command();
        // Faults inside the logging hook cannot be surfaced; collect rows
        // and let the outer writer report failures.
        let _ = trajectory.log(env.state(), cmd.n, cmd.delta_r, cmd.delta_s);
        let e = env.normalized_errors();
        error_rows.push(format!(
            "{:.6},{:.9},{:.9},{:.9},{:.9},{:.9}",
            env.state().time,
            e[0],
            e[1],
            e[2],
            e[3],
            e[4]
        ));
    })?;
    for row in error_rows {
        writeln!(errors, "{row}")?;
    }
    Ok(summary)
}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

fn read_csv(path: &FsPath) -> Result<Table> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Config(format!("`{}` is empty", path.display())))?
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    Ok(Table { header, rows })
}

impl Table {
    fn column(&self, name: &str, file: &FsPath) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| {
                Error::Config(format!("`{}` lacks column `{name}`", file.display()))
            })
    }
}

/// Derive tidy per-figure CSVs from a finished run directory: velocity,
/// control, error, 3D trajectory and learning curve. Inputs that are
/// missing are reported by name. Re-running produces identical bytes.
pub fn cmd_plotdata(dir: &FsPath) -> Result<()> {
    let trajectory_file = dir.join("trajectory.csv");
    let errors_file = dir.join("errors.csv");
    let curve_file = dir.join("curve.csv");
    let snapshot_file = dir.join("config.snapshot");

    let mut missing = Vec::new();
    for file in [&trajectory_file, &errors_file, &curve_file, &snapshot_file] {
        if !file.exists() {
            missing.push(file.display().to_string());
        }
    }
    if !missing.is_empty() {
        return Err(Error::Config(format!(
            "missing plotdata inputs: {}",
            missing.join(", ")
        )));
    }

    let config = RunConfig::from_file(&snapshot_file)?;
    let trajectory = read_csv(&trajectory_file)?;

    // Velocity figure: surge vs its setpoint plus sway and heave.
    {
        let t = trajectory.column("time", &trajectory_file)?;
        let u = trajectory.column("u", &trajectory_file)?;
        let v = trajectory.column("v", &trajectory_file)?;
        let w = trajectory.column("w", &trajectory_file)?;
        let mut out = create(&dir.join("plot_velocity.csv"))?;
        writeln!(out, "time,u,u_d,v,w")?;
        for row in &trajectory.rows {
            writeln!(out, "{},{},{},{},{}", row[t], row[u], config.u_d, row[v], row[w])?;
        }
    }

    // Control figure: normalized actuator commands.
    {
        let t = trajectory.column("time", &trajectory_file)?;
        let n = trajectory.column("n", &trajectory_file)?;
        let dr = trajectory.column("delta_r", &trajectory_file)?;
        let ds = trajectory.column("delta_s", &trajectory_file)?;
        let mut out = create(&dir.join("plot_control.csv"))?;
        writeln!(out, "time,n,delta_r,delta_s")?;
        for row in &trajectory.rows {
            writeln!(out, "{},{},{},{}", row[t], row[n], row[dr], row[ds])?;
        }
    }

    // 3D trajectory figure.
    {
        let t = trajectory.column("time", &trajectory_file)?;
        let x = trajectory.column("x", &trajectory_file)?;
        let y = trajectory.column("y", &trajectory_file)?;
        let z = trajectory.column("z", &trajectory_file)?;
        let mut out = create(&dir.join("plot_traj3d.csv"))?;
        writeln!(out, "time,x,y,z")?;
        for row in &trajectory.rows {
            writeln!(out, "{},{},{},{}", row[t], row[x], row[y], row[z])?;
        }
    }

    // Error figure: the normalized control errors as logged.
    {
        let errors = read_csv(&errors_file)?;
        let mut out = create(&dir.join("plot_error.csv"))?;
        writeln!(out, "{}", errors.header.join(","))?;
        for row in &errors.rows {
            writeln!(out, "{}", row.join(","))?;
        }
    }

    // Learning curve figure.
    {
        let curve = read_csv(&curve_file)?;
        let s = curve.column("total_steps", &curve_file)?;
        let r = curve.column("mean_episode_reward", &curve_file)?;
        let mut out = create(&dir.join("plot_curve.csv"))?;
        writeln!(out, "total_steps,mean_episode_reward")?;
        for row in &curve.rows {
            writeln!(out, "{},{}", row[s], row[r])?;
        }
    }

    eprintln!("wrote 5 plot CSVs to {}", dir.display());
    Ok(())
}
