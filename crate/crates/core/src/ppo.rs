//! The learner: synchronous rollout collection across parallel actors,
//! generalized advantage estimation, and clipped-surrogate optimization.
//!
//! Each update freezes the policy, runs every actor for `n_steps`,
//! computes advantages
//!
//! A_t = delta_t + (gamma lambda) delta_{t+1} + ... ,
//! delta_t = r_t + gamma V(s_{t+1}) - V(s_t)
//!
//! with chains reset at episode ends (bootstrapping the value at
//! truncation points, zero at terminals), then takes `n_epochs` of
//! minibatch Adam steps on
//!
//! loss = -E[min(ratio * A, clip(ratio, 1-eps, 1+eps) * A)]
//!        + value_coef * E[(V - return)^2] - entropy_coef * H.
//!
//! Reproducibility contract: every worker owns a ChaCha stream derived
//! from the master seed, so results are bit-identical for a given seed
//! regardless of thread scheduling.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::Write;

use crate::environment::{Environment, EpisodeSummary, ObservedFin, StepResult};
use crate::error::{Error, Result};
use crate::policy::{
    mean_action, sample_action, squashed_log_prob, ActorCritic, Gradients,
};

/// Hyperparameters of the learner.
#[derive(Debug, Clone)]
pub struct PpoConfig {
    pub learning_rate: f64,
    pub gamma: f64,
    pub gae_lambda: f64,
    pub n_actors: usize,
    /// Rollout steps per actor per update.
    pub n_steps: usize,
    pub n_epochs: usize,
    pub minibatch_size: usize,
    pub clip_epsilon: f64,
    pub value_coef: f64,
    pub entropy_coef: f64,
    pub total_timesteps: usize,
    pub normalize_advantages: bool,
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self {
            learning_rate: 5e-5,
            gamma: 0.999,
            gae_lambda: 0.95,
            n_actors: 10,
            n_steps: 6144,
            n_epochs: 4,
            minibatch_size: 1024,
            clip_epsilon: 0.2,
            value_coef: 0.5,
            entropy_coef: 0.0,
            total_timesteps: 61_440,
            normalize_advantages: true,
        }
    }
}

impl PpoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.minibatch_size == 0 || self.minibatch_size >= self.n_actors * self.n_steps {
            return Err(Error::Config(
                "minibatch_size must be positive and smaller than n_actors * n_steps".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.gae_lambda) {
            return Err(Error::Config("gae_lambda must be in [0, 1]".into()));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::Config("gamma must be in (0, 1)".into()));
        }
        if self.learning_rate <= 0.0 {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        if self.n_actors == 0 || self.n_steps == 0 || self.n_epochs == 0 {
            return Err(Error::Config(
                "n_actors, n_steps and n_epochs must be positive".into(),
            ));
        }
        if self.clip_epsilon <= 0.0 || self.clip_epsilon >= 1.0 {
            return Err(Error::Config("clip_epsilon must be in (0, 1)".into()));
        }
        if self.total_timesteps == 0 {
            return Err(Error::Config("total_timesteps must be positive".into()));
        }
        Ok(())
    }
}

/// Fixed-capacity storage for one update's worth of experience from one
/// actor.
#[derive(Debug, Clone)]
struct ActorSegment {
    observations: Vec<f64>,
    raw_actions: Vec<f64>,
    log_probs: Vec<f64>,
    rewards: Vec<f64>,
    values: Vec<f64>,
    /// V(s_{t+1}): zero at terminals, the bootstrap value at truncations
    /// and at the rollout end.
    next_values: Vec<f64>,
    /// Episode ended at this step (terminal or truncated); advantage
    /// chains reset here.
    dones: Vec<bool>,
}

impl ActorSegment {
    fn new(n_steps: usize, obs_dim: usize, act_dim: usize) -> Self {
        Self {
            observations: vec![0.0; n_steps * obs_dim],
            raw_actions: vec![0.0; n_steps * act_dim],
            log_probs: vec![0.0; n_steps],
            rewards: vec![0.0; n_steps],
            values: vec![0.0; n_steps],
            next_values: vec![0.0; n_steps],
            dones: vec![false; n_steps],
        }
    }
}

/// Experience for one update across all actors, plus computed advantages.
pub struct RolloutBuffer {
    segments: Vec<ActorSegment>,
    n_steps: usize,
    obs_dim: usize,
    act_dim: usize,
    advantages: Vec<f64>,
    returns: Vec<f64>,
}

impl RolloutBuffer {
    pub fn new(n_actors: usize, n_steps: usize, obs_dim: usize, act_dim: usize) -> Self {
        Self {
            segments: (0..n_actors)
                .map(|_| ActorSegment::new(n_steps, obs_dim, act_dim))
                .collect(),
            n_steps,
            obs_dim,
            act_dim,
            advantages: vec![0.0; n_actors * n_steps],
            returns: vec![0.0; n_actors * n_steps],
        }
    }

    pub fn len(&self) -> usize {
        self.segments.len() * self.n_steps
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Generalized advantage estimation over every actor segment, with
    /// return targets A_t + V(s_t). Chains truncate at episode ends.
    pub fn compute_gae(&mut self, gamma: f64, lambda: f64) {
        for (actor, segment) in self.segments.iter().enumerate() {
            let base = actor * self.n_steps;
            let mut chain = 0.0;
            for t in (0..self.n_steps).rev() {
                let delta =
                    segment.rewards[t] + gamma * segment.next_values[t] - segment.values[t];
                chain = if segment.dones[t] {
                    delta
                } else {
                    delta + gamma * lambda * chain
                };
                self.advantages[base + t] = chain;
                self.returns[base + t] = chain + segment.values[t];
            }
        }
    }

    /// Normalize advantages to zero mean and unit variance over the whole
    /// update batch.
    pub fn normalize_advantages(&mut self) {
        let n = self.advantages.len() as f64;
        let mean = self.advantages.iter().sum::<f64>() / n;
        let var = self
            .advantages
            .iter()
            .map(|a| (a - mean) * (a - mean))
            .sum::<f64>()
            / n;
        let std = var.sqrt() + 1e-8;
        for a in &mut self.advantages {
            *a = (*a - mean) / std;
        }
    }

    /// Gather rows into a dense minibatch.
    pub fn minibatch(&self, indices: &[usize]) -> Minibatch {
        let b = indices.len();
        let obs = DMatrix::from_fn(b, self.obs_dim, |i, j| {
            let (actor, t) = (indices[i] / self.n_steps, indices[i] % self.n_steps);
            self.segments[actor].observations[t * self.obs_dim + j]
        });
        let raw_actions = DMatrix::from_fn(b, self.act_dim, |i, j| {
            let (actor, t) = (indices[i] / self.n_steps, indices[i] % self.n_steps);
            self.segments[actor].raw_actions[t * self.act_dim + j]
        });
        let pick = |field: fn(&ActorSegment) -> &Vec<f64>, i: usize| {
            let (actor, t) = (indices[i] / self.n_steps, indices[i] % self.n_steps);
            field(&self.segments[actor])[t]
        };
        Minibatch {
            obs,
            raw_actions,
            old_log_probs: DVector::from_fn(b, |i, _| pick(|s| &s.log_probs, i)),
            advantages: DVector::from_fn(b, |i, _| self.advantages[indices[i]]),
            returns: DVector::from_fn(b, |i, _| self.returns[indices[i]]),
        }
    }

    pub fn advantages(&self) -> &[f64] {
        &self.advantages
    }

    pub fn returns(&self) -> &[f64] {
        &self.returns
    }

    /// Load a raw transition sequence into actor slot 0; used to exercise
    /// the advantage computation against external oracles.
    pub fn fill_for_test(
        &mut self,
        rewards: &[f64],
        values: &[f64],
        next_values: &[f64],
        dones: &[bool],
    ) {
        assert_eq!(rewards.len(), self.n_steps);
        let segment = &mut self.segments[0];
        segment.rewards.copy_from_slice(rewards);
        segment.values.copy_from_slice(values);
        segment.next_values.copy_from_slice(next_values);
        segment.dones.copy_from_slice(dones);
    }
}

/// A dense slice of rollout data ready for a gradient step.
pub struct Minibatch {
    pub obs: DMatrix<f64>,
    pub raw_actions: DMatrix<f64>,
    pub old_log_probs: DVector<f64>,
    pub advantages: DVector<f64>,
    pub returns: DVector<f64>,
}

/// Per-sample clipped surrogate term:
/// min(ratio * A, clip(ratio, 1-eps, 1+eps) * A).
pub fn clipped_surrogate(ratio: f64, advantage: f64, epsilon: f64) -> f64 {
    let unclipped = ratio * advantage;
    let clipped = ratio.clamp(1.0 - epsilon, 1.0 + epsilon) * advantage;
    unclipped.min(clipped)
}

/// Loss components of one minibatch step.
#[derive(Debug, Clone, Copy)]
pub struct LossTerms {
    pub total: f64,
    pub policy: f64,
    pub value: f64,
    pub entropy: f64,
}

struct LossBackward {
    terms: LossTerms,
    d_mean: DMatrix<f64>,
    d_value: DVector<f64>,
    d_log_std: DVector<f64>,
    cache: crate::policy::ForwardCache,
}

fn forward_loss(
    policy: &ActorCritic,
    batch: &Minibatch,
    config: &PpoConfig,
) -> Result<LossBackward> {
    let b = batch.obs.nrows();
    let act_dim = policy.act_dim;
    let cache = policy.forward_batch(&batch.obs);
    let inv_b = 1.0 / b as f64;

    let mut policy_objective = 0.0;
    let mut value_loss = 0.0;
    let mut d_mean = DMatrix::zeros(b, act_dim);
    let mut d_value = DVector::zeros(b);
    let mut d_log_std = DVector::zeros(act_dim);

    for i in 0..b {
        // New log-prob of the stored pre-squash action. The tanh
        // correction is constant in the parameters, so it cancels in the
        // ratio but keeps the stored and recomputed log-probs comparable.
        let mut log_prob = 0.0;
        for j in 0..act_dim {
            let sigma = policy.log_std[j].exp();
            let z = (batch.raw_actions[(i, j)] - cache.mean[(i, j)]) / sigma;
            log_prob += -policy.log_std[j] - 0.5 * 1.8378770664093453 - 0.5 * z * z;
            log_prob -= log_one_minus_tanh_sq(batch.raw_actions[(i, j)]);
        }
        let ratio = (log_prob - batch.old_log_probs[i]).exp();
        let advantage = batch.advantages[i];
        policy_objective += clipped_surrogate(ratio, advantage, config.clip_epsilon);

        // Gradient flows through the ratio only where the unclipped branch
        // attains the minimum.
        let unclipped = ratio * advantage;
        let clipped =
            ratio.clamp(1.0 - config.clip_epsilon, 1.0 + config.clip_epsilon) * advantage;
        let d_surr_d_lp = if unclipped <= clipped { unclipped } else { 0.0 };
        // loss includes -policy_objective / b.
        let d_loss_d_lp = -d_surr_d_lp * inv_b;
        for j in 0..act_dim {
            let sigma = policy.log_std[j].exp();
            let z = (batch.raw_actions[(i, j)] - cache.mean[(i, j)]) / sigma;
            d_mean[(i, j)] += d_loss_d_lp * (z / sigma);
            d_log_std[j] += d_loss_d_lp * (z * z - 1.0);
        }

        let value_error = cache.value[i] - batch.returns[i];
        value_loss += value_error * value_error;
        d_value[i] = config.value_coef * 2.0 * value_error * inv_b;
    }

    let policy_loss = -policy_objective * inv_b;
    let value_loss = value_loss * inv_b;
    let entropy = policy.entropy();
    for j in 0..act_dim {
        d_log_std[j] -= config.entropy_coef;
    }

    let total = policy_loss + config.value_coef * value_loss - config.entropy_coef * entropy;
    if !total.is_finite() {
        return Err(Error::NonFiniteLoss);
    }

    Ok(LossBackward {
        terms: LossTerms {
            total,
            policy: policy_loss,
            value: value_loss,
            entropy,
        },
        d_mean,
        d_value,
        d_log_std,
        cache,
    })
}

fn log_one_minus_tanh_sq(z: f64) -> f64 {
    let softplus = |x: f64| x.max(0.0) + (-x.abs()).exp().ln_1p();
    2.0 * (std::f64::consts::LN_2 - z - softplus(-2.0 * z))
}

/// PPO loss of a minibatch, without gradients.
pub fn ppo_loss(policy: &ActorCritic, batch: &Minibatch, config: &PpoConfig) -> Result<LossTerms> {
    forward_loss(policy, batch, config).map(|r| r.terms)
}

/// PPO loss of a minibatch together with exact gradients for every
/// parameter.
pub fn ppo_loss_and_grad(
    policy: &ActorCritic,
    batch: &Minibatch,
    config: &PpoConfig,
) -> Result<(LossTerms, Gradients)> {
    let result = forward_loss(policy, batch, config)?;
    let mut grads = policy.zeros_like();
    policy.backward_batch(
        &result.cache,
        &result.d_mean,
        &result.d_value,
        &result.d_log_std,
        &mut grads,
    );
    Ok((result.terms, grads))
}

/// Adam optimizer over the flat parameter vector; fixed learning rate.
pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Adam {
    pub fn new(lr: f64, n_params: usize) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            t: 0,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grads[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grads[i] * grads[i];
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= self.lr * m_hat / (v_hat.sqrt() + self.epsilon);
        }
    }
}

/// One point of the learning curve, logged per update.
#[derive(Debug, Clone, Copy)]
pub struct CurvePoint {
    pub total_steps: usize,
    pub mean_episode_reward: f64,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
}

pub const CURVE_HEADER: &str = "total_steps,mean_episode_reward,policy_loss,value_loss,entropy";

/// CSV learning-curve log, one row per update.
pub struct CurveLogger<W: Write> {
    sink: W,
}

impl<W: Write> CurveLogger<W> {
    pub fn new(mut sink: W) -> Result<Self> {
        writeln!(sink, "{CURVE_HEADER}")?;
        Ok(Self { sink })
    }

    pub fn log(&mut self, point: &CurvePoint) -> Result<()> {
        writeln!(
            self.sink,
            "{},{:.9},{:.9},{:.9},{:.9}",
            point.total_steps,
            point.mean_episode_reward,
            point.policy_loss,
            point.value_loss,
            point.entropy
        )?;
        Ok(())
    }
}

/// Everything a finished (or aborted) training run produces.
pub struct TrainResult {
    /// Parameters after the last completed update.
    pub policy: ActorCritic,
    /// Parameters that achieved the best windowed mean episode reward.
    pub best_policy: ActorCritic,
    pub best_mean_reward: f64,
    pub curve: Vec<CurvePoint>,
    pub episodes: Vec<EpisodeSummary>,
    /// Set when optimization aborted on a non-finite loss; the policies
    /// above are the last good state.
    pub aborted: Option<String>,
}

struct Worker {
    env: Environment,
    rng: ChaCha8Rng,
    obs: Vec<f64>,
}

fn collect_segment(
    worker: &mut Worker,
    policy: &ActorCritic,
    segment: &mut ActorSegment,
    n_steps: usize,
) -> Result<Vec<EpisodeSummary>> {
    let obs_dim = policy.obs_dim;
    let act_dim = policy.act_dim;
    let mut completed = Vec::new();

    for t in 0..n_steps {
        let output = policy.forward(&worker.obs)?;
        let (raw, action) = sample_action(&output, &mut worker.rng);
        let log_prob = squashed_log_prob(&output, &raw);

        segment.observations[t * obs_dim..(t + 1) * obs_dim].copy_from_slice(&worker.obs);
        segment.raw_actions[t * act_dim..(t + 1) * act_dim].copy_from_slice(raw.as_slice());
        segment.log_probs[t] = log_prob;
        segment.values[t] = output.value;

        let result: StepResult = worker.env.step(action.as_slice())?;
        segment.rewards[t] = result.reward;
        segment.dones[t] = result.done();

        if result.done() {
            segment.next_values[t] = if result.truncated {
                policy.forward(&result.observation)?.value
            } else {
                0.0
            };
            completed.push(worker.env.summary());
            let next_seed: u64 = worker.rng.random();
            worker.obs = worker.env.reset(next_seed);
        } else {
            worker.obs = result.observation;
        }
    }

    // Fill bootstrap values for steps that did not end an episode.
    for t in 0..n_steps {
        if !segment.dones[t] {
            segment.next_values[t] = if t + 1 < n_steps {
                segment.values[t + 1]
            } else {
                policy.forward(&worker.obs)?.value
            };
        }
    }
    Ok(completed)
}

/// Train a fresh policy against environments produced by `make_env`.
/// The factory is called once per actor with the actor index.
///
/// Fully deterministic in `seed`: worker RNG streams are derived from the
/// master seed, so neither thread scheduling nor actor count reordering
/// changes any individual stream.
pub fn train<F>(make_env: F, config: &PpoConfig, seed: u64) -> Result<TrainResult>
where
    F: Fn(usize) -> Result<Environment>,
{
    train_with(make_env, config, seed, |_, _| true)
}

/// [`train`] with a per-update callback; return `false` to stop early
/// (used for evaluation-based early stopping).
pub fn train_with<F, C>(
    make_env: F,
    config: &PpoConfig,
    seed: u64,
    mut on_update: C,
) -> Result<TrainResult>
where
    F: Fn(usize) -> Result<Environment>,
    C: FnMut(&ActorCritic, &CurvePoint) -> bool,
{
    config.validate()?;

    let mut workers = Vec::with_capacity(config.n_actors);
    for actor in 0..config.n_actors {
        let mut env = make_env(actor)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(actor as u64 + 1);
        let first_seed: u64 = rng.random();
        let obs = env.reset(first_seed);
        workers.push(Worker { env, rng, obs });
    }
    let obs_dim = workers[0].env.observation_dim();
    let act_dim = workers[0].env.action_dim();

    let mut learner_rng = ChaCha8Rng::seed_from_u64(seed);
    learner_rng.set_stream(0);
    let mut policy = ActorCritic::new(obs_dim, act_dim, &mut learner_rng);
    let mut adam = Adam::new(config.learning_rate, policy.parameter_count());
    let mut buffer = RolloutBuffer::new(config.n_actors, config.n_steps, obs_dim, act_dim);

    let mut result = TrainResult {
        policy: policy.clone(),
        best_policy: policy.clone(),
        best_mean_reward: f64::NEG_INFINITY,
        curve: Vec::new(),
        episodes: Vec::new(),
        aborted: None,
    };

    let mut steps_done = 0usize;
    let mut last_mean_reward = f64::NAN;

    while steps_done < config.total_timesteps {
        // Collection phase: policy frozen, one thread per actor writing
        // into its own segment.
        let collect: Result<Vec<Vec<EpisodeSummary>>> = std::thread::scope(|scope| {
            let policy_ref = &policy;
            let handles: Vec<_> = workers
                .iter_mut()
                .zip(buffer.segments.iter_mut())
                .map(|(worker, segment)| {
                    scope.spawn(move || {
                        collect_segment(worker, policy_ref, segment, config.n_steps)
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("rollout worker panicked"))
                .collect()
        });
        let completed_per_worker = collect?;
        steps_done += config.n_actors * config.n_steps;

        let mut completed = Vec::new();
        for worker_episodes in completed_per_worker {
            completed.extend(worker_episodes);
        }
        if !completed.is_empty() {
            last_mean_reward = completed.iter().map(|e| e.cumulative_reward).sum::<f64>()
                / completed.len() as f64;
        }
        result.episodes.extend(completed);

        buffer.compute_gae(config.gamma, config.gae_lambda);
        if config.normalize_advantages {
            buffer.normalize_advantages();
        }

        // Optimization phase: K epochs of shuffled minibatches.
        let mut params = policy.to_flat();
        let mut loss_sums = (0.0, 0.0, 0.0);
        let mut loss_count = 0usize;
        let mut failed: Option<String> = None;
        'epochs: for _ in 0..config.n_epochs {
            let mut indices: Vec<usize> = (0..buffer.len()).collect();
            indices.shuffle(&mut learner_rng);
            for chunk in indices.chunks(config.minibatch_size) {
                let batch = buffer.minibatch(chunk);
                match ppo_loss_and_grad(&policy, &batch, config) {
                    Ok((terms, grads)) => {
                        adam.step(&mut params, &grads.to_flat());
                        policy.set_from_flat(&params)?;
                        loss_sums.0 += terms.policy;
                        loss_sums.1 += terms.value;
                        loss_sums.2 += terms.entropy;
                        loss_count += 1;
                    }
                    Err(Error::NonFiniteLoss) => {
                        failed = Some("non-finite loss; update aborted".into());
                        break 'epochs;
                    }
                    Err(other) => return Err(other),
                }
            }
        }

        let denom = loss_count.max(1) as f64;
        let point = CurvePoint {
            total_steps: steps_done,
            mean_episode_reward: last_mean_reward,
            policy_loss: loss_sums.0 / denom,
            value_loss: loss_sums.1 / denom,
            entropy: loss_sums.2 / denom,
        };
        result.curve.push(point);

        if last_mean_reward.is_finite() && last_mean_reward > result.best_mean_reward {
            result.best_mean_reward = last_mean_reward;
            result.best_policy = policy.clone();
        }
        result.policy = policy.clone();

        if let Some(reason) = failed {
            result.aborted = Some(reason);
            break;
        }
        if !on_update(&policy, &point) {
            break;
        }
    }

    Ok(result)
}

/// Which policies drive the actuators during evaluation.
pub enum PolicySet<'a> {
    /// Classical autopilots only.
    None,
    /// One trained policy matching the environment mode.
    Single(&'a ActorCritic),
    /// Deployment combination: rudder and elevator policies plus the
    /// surge autopilot.
    Pair {
        rudder: &'a ActorCritic,
        elevator: &'a ActorCritic,
    },
}

impl PolicySet<'_> {
    fn action(&self, env: &Environment, obs: &[f64]) -> Result<Vec<f64>> {
        match self {
            PolicySet::None => Ok(Vec::new()),
            PolicySet::Single(policy) => {
                let output = policy.forward(obs)?;
                Ok(mean_action(&output).as_slice().to_vec())
            }
            PolicySet::Pair { rudder, elevator } => {
                let rudder_obs = env.observe_tracking(ObservedFin::Elevator);
                let elevator_obs = env.observe_tracking(ObservedFin::Rudder);
                let r = mean_action(&rudder.forward(&rudder_obs)?)[0];
                let s = mean_action(&elevator.forward(&elevator_obs)?)[0];
                Ok(vec![r, s])
            }
        }
    }
}

/// Run one deterministic episode (actions are distribution means); the
/// hook sees the environment after every step.
pub fn run_episode<F>(
    policies: &PolicySet,
    env: &mut Environment,
    seed: u64,
    mut on_step: F,
) -> Result<EpisodeSummary>
where
    F: FnMut(&Environment, &StepResult),
{
    let mut obs = env.reset(seed);
    loop {
        let action = policies.action(env, &obs)?;
        let result = env.step(&action)?;
        on_step(env, &result);
        if result.done() {
            return Ok(env.summary());
        }
        obs = result.observation;
    }
}

/// Aggregate metrics over deterministic evaluation episodes with seeds
/// `seed_base..seed_base + n_episodes`.
#[derive(Debug, Clone)]
pub struct EvalMetrics {
    pub episodes: Vec<EpisodeSummary>,
    pub mean_abs_cross_track: f64,
    pub mean_abs_vertical_track: f64,
    pub mean_abs_surge_error: f64,
    pub mean_cumulative_reward: f64,
    pub success_rate: f64,
}

pub fn evaluate(
    policies: &PolicySet,
    env: &mut Environment,
    n_episodes: usize,
    seed_base: u64,
) -> Result<EvalMetrics> {
    let mut episodes = Vec::with_capacity(n_episodes);
    for i in 0..n_episodes {
        episodes.push(run_episode(policies, env, seed_base + i as u64, |_, _| {})?);
    }
    let n = episodes.len() as f64;
    Ok(EvalMetrics {
        mean_abs_cross_track: episodes.iter().map(|e| e.mean_abs_cross_track).sum::<f64>() / n,
        mean_abs_vertical_track: episodes
            .iter()
            .map(|e| e.mean_abs_vertical_track)
            .sum::<f64>()
            / n,
        mean_abs_surge_error: episodes.iter().map(|e| e.mean_abs_surge_error).sum::<f64>() / n,
        mean_cumulative_reward: episodes.iter().map(|e| e.cumulative_reward).sum::<f64>() / n,
        success_rate: episodes.iter().filter(|e| e.success).count() as f64 / n,
        episodes,
    })
}
