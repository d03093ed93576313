//! Actor-critic function approximator: two separate tanh MLP trunks (two
//! hidden layers of 64 units each) producing a diagonal-Gaussian action
//! distribution and a scalar value estimate, with exact reverse-mode
//! gradients computed by hand.
//!
//! Sampled pre-squash actions are passed through tanh before actuator
//! scaling; log-densities carry the matching change-of-variables
//! correction so probability ratios stay exact.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub const HIDDEN: [usize; 2] = [64, 64];
const LOG_STD_INIT: f64 = -std::f64::consts::LN_2; // ln(0.5)
const LN_2PI: f64 = 1.8378770664093453;

/// One dense layer: weights of shape (inputs, outputs) plus a bias row.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub w: DMatrix<f64>,
    pub b: DVector<f64>,
}

impl Layer {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            w: DMatrix::zeros(inputs, outputs),
            b: DVector::zeros(outputs),
        }
    }
}

/// Actor and critic trunks plus state-independent action log-stds.
#[derive(Debug, Clone, PartialEq)]
pub struct ActorCritic {
    pub obs_dim: usize,
    pub act_dim: usize,
    pub actor: Vec<Layer>,
    pub critic: Vec<Layer>,
    pub log_std: DVector<f64>,
}

/// Distribution parameters and value estimate for one observation.
#[derive(Debug, Clone)]
pub struct PolicyOutput {
    pub mean: DVector<f64>,
    pub log_std: DVector<f64>,
    pub value: f64,
}

/// Gradients in the same shapes as [`ActorCritic`].
#[derive(Debug, Clone)]
pub struct Gradients {
    pub actor: Vec<Layer>,
    pub critic: Vec<Layer>,
    pub log_std: DVector<f64>,
}

fn orthogonal(rows: usize, cols: usize, gain: f64, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let (m, n) = (rows.max(cols), rows.min(cols));
    let raw = DMatrix::from_fn(m, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = raw.qr();
    let mut q = qr.q();
    let r = qr.r();
    // Fix the sign ambiguity so the distribution is uniform.
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            for i in 0..m {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    let q = if rows >= cols { q } else { q.transpose() };
    q * gain
}

fn trunk(dims: &[usize], head_gain: f64, rng: &mut ChaCha8Rng) -> Vec<Layer> {
    let mut layers = Vec::with_capacity(dims.len() - 1);
    for i in 0..dims.len() - 1 {
        let gain = if i == dims.len() - 2 {
            head_gain
        } else {
            2.0f64.sqrt()
        };
        layers.push(Layer {
            w: orthogonal(dims[i], dims[i + 1], gain, rng),
            b: DVector::zeros(dims[i + 1]),
        });
    }
    layers
}

/// Intermediate activations kept for the backward pass, plus the outputs.
pub struct ForwardCache {
    x: DMatrix<f64>,
    a1: DMatrix<f64>,
    a2: DMatrix<f64>,
    c1: DMatrix<f64>,
    c2: DMatrix<f64>,
    pub mean: DMatrix<f64>,
    pub value: DVector<f64>,
}

impl ActorCritic {
    /// Orthogonally initialized network. The policy head is scaled down
    /// by 0.01 so initial actions sit near zero, and log-stds start at
    /// ln(0.5).
    pub fn new(obs_dim: usize, act_dim: usize, rng: &mut ChaCha8Rng) -> Self {
        let actor_dims = [obs_dim, HIDDEN[0], HIDDEN[1], act_dim];
        let critic_dims = [obs_dim, HIDDEN[0], HIDDEN[1], 1];
        Self {
            obs_dim,
            act_dim,
            actor: trunk(&actor_dims, 0.01, rng),
            critic: trunk(&critic_dims, 1.0, rng),
            log_std: DVector::from_element(act_dim, LOG_STD_INIT),
        }
    }

    pub fn zeros(obs_dim: usize, act_dim: usize) -> Self {
        Self {
            obs_dim,
            act_dim,
            actor: vec![
                Layer::zeros(obs_dim, HIDDEN[0]),
                Layer::zeros(HIDDEN[0], HIDDEN[1]),
                Layer::zeros(HIDDEN[1], act_dim),
            ],
            critic: vec![
                Layer::zeros(obs_dim, HIDDEN[0]),
                Layer::zeros(HIDDEN[0], HIDDEN[1]),
                Layer::zeros(HIDDEN[1], 1),
            ],
            log_std: DVector::zeros(act_dim),
        }
    }

    pub fn zeros_like(&self) -> Gradients {
        Gradients {
            actor: self
                .actor
                .iter()
                .map(|l| Layer::zeros(l.w.nrows(), l.w.ncols()))
                .collect(),
            critic: self
                .critic
                .iter()
                .map(|l| Layer::zeros(l.w.nrows(), l.w.ncols()))
                .collect(),
            log_std: DVector::zeros(self.act_dim),
        }
    }

    /// Deterministic forward pass for a single observation.
    pub fn forward(&self, obs: &[f64]) -> Result<PolicyOutput> {
        if obs.len() != self.obs_dim {
            return Err(Error::ShapeMismatch {
                expected: self.obs_dim,
                got: obs.len(),
            });
        }
        let x = DMatrix::from_row_slice(1, self.obs_dim, obs);
        let cache = self.forward_batch(&x);
        Ok(PolicyOutput {
            mean: cache.mean.row(0).transpose().into_owned(),
            log_std: self.log_std.clone(),
            value: cache.value[0],
        })
    }

    /// Batched forward pass; rows of `x` are observations.
    pub fn forward_batch(&self, x: &DMatrix<f64>) -> ForwardCache {
        let linear = |input: &DMatrix<f64>, layer: &Layer| -> DMatrix<f64> {
            let mut out = input * &layer.w;
            for mut row in out.row_iter_mut() {
                row += layer.b.transpose();
            }
            out
        };
        let a1 = linear(x, &self.actor[0]).map(f64::tanh);
        let a2 = linear(&a1, &self.actor[1]).map(f64::tanh);
        let mean = linear(&a2, &self.actor[2]);
        let c1 = linear(x, &self.critic[0]).map(f64::tanh);
        let c2 = linear(&c1, &self.critic[1]).map(f64::tanh);
        let value = linear(&c2, &self.critic[2]).column(0).into_owned();
        ForwardCache {
            x: x.clone(),
            a1,
            a2,
            c1,
            c2,
            mean,
            value,
        }
    }

    /// Exact reverse-mode gradients given the upstream derivatives of the
    /// loss with respect to the action means, value estimates and
    /// log-stds. Accumulates into `grads`.
    pub fn backward_batch(
        &self,
        cache: &ForwardCache,
        d_mean: &DMatrix<f64>,
        d_value: &DVector<f64>,
        d_log_std: &DVector<f64>,
        grads: &mut Gradients,
    ) {
        // Actor trunk.
        grads.actor[2].w += cache.a2.transpose() * d_mean;
        grads.actor[2].b += d_mean.row_sum().transpose();
        let da2 = d_mean * self.actor[2].w.transpose();
        let dz2 = da2.zip_map(&cache.a2, |g, a| g * (1.0 - a * a));
        grads.actor[1].w += cache.a1.transpose() * &dz2;
        grads.actor[1].b += dz2.row_sum().transpose();
        let da1 = dz2 * self.actor[1].w.transpose();
        let dz1 = da1.zip_map(&cache.a1, |g, a| g * (1.0 - a * a));
        grads.actor[0].w += cache.x.transpose() * &dz1;
        grads.actor[0].b += dz1.row_sum().transpose();

        // Critic trunk; d_value is a column vector over the batch.
        let dv = DMatrix::from_column_slice(d_value.len(), 1, d_value.as_slice());
        grads.critic[2].w += cache.c2.transpose() * &dv;
        grads.critic[2].b += dv.row_sum().transpose();
        let dc2 = dv * self.critic[2].w.transpose();
        let dz2 = dc2.zip_map(&cache.c2, |g, a| g * (1.0 - a * a));
        grads.critic[1].w += cache.c1.transpose() * &dz2;
        grads.critic[1].b += dz2.row_sum().transpose();
        let dc1 = dz2 * self.critic[1].w.transpose();
        let dz1 = dc1.zip_map(&cache.c1, |g, a| g * (1.0 - a * a));
        grads.critic[0].w += cache.x.transpose() * &dz1;
        grads.critic[0].b += dz1.row_sum().transpose();

        grads.log_std += d_log_std;
    }

    /// Entropy of the pre-squash Gaussian; state-independent.
    pub fn entropy(&self) -> f64 {
        self.log_std.sum() + 0.5 * (1.0 + LN_2PI) * self.act_dim as f64
    }

    pub fn parameter_count(&self) -> usize {
        let layer_count = |layers: &[Layer]| -> usize {
            layers.iter().map(|l| l.w.len() + l.b.len()).sum()
        };
        layer_count(&self.actor) + layer_count(&self.critic) + self.log_std.len()
    }

    /// Flatten every parameter into one vector (actor, critic, log_std).
    pub fn to_flat(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(self.parameter_count());
        for layer in self.actor.iter().chain(self.critic.iter()) {
            flat.extend_from_slice(layer.w.as_slice());
            flat.extend_from_slice(layer.b.as_slice());
        }
        flat.extend_from_slice(self.log_std.as_slice());
        flat
    }

    /// Overwrite every parameter from a flat vector laid out by
    /// [`ActorCritic::to_flat`].
    pub fn set_from_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.parameter_count() {
            return Err(Error::ShapeMismatch {
                expected: self.parameter_count(),
                got: flat.len(),
            });
        }
        let mut offset = 0;
        for layer in self.actor.iter_mut().chain(self.critic.iter_mut()) {
            let n = layer.w.len();
            layer.w.as_mut_slice().copy_from_slice(&flat[offset..offset + n]);
            offset += n;
            let n = layer.b.len();
            layer.b.as_mut_slice().copy_from_slice(&flat[offset..offset + n]);
            offset += n;
        }
        let n = self.log_std.len();
        self.log_std
            .as_mut_slice()
            .copy_from_slice(&flat[offset..offset + n]);
        Ok(())
    }

    /// Serialize to the versioned text checkpoint format: f64 values are
    /// stored as hex bit patterns, so a round trip is bit-exact.
    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let mut out = BufWriter::new(file);
        writeln!(out, "auv-policy v1")?;
        writeln!(out, "obs_dim {}", self.obs_dim)?;
        writeln!(out, "act_dim {}", self.act_dim)?;
        writeln!(out, "hidden {} {}", HIDDEN[0], HIDDEN[1])?;
        for value in self.to_flat() {
            writeln!(out, "{:016x}", value.to_bits())?;
        }
        Ok(())
    }

    /// Load a checkpoint, rejecting any dimension mismatch.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut lines = text.lines();
        let magic = lines.next().unwrap_or_default();
        if magic != "auv-policy v1" {
            return Err(Error::Config(format!(
                "unsupported checkpoint header `{magic}`"
            )));
        }
        let mut field = |name: &str| -> Result<Vec<usize>> {
            let line = lines
                .next()
                .ok_or_else(|| Error::Config("truncated checkpoint".into()))?;
            let mut parts = line.split_whitespace();
            if parts.next() != Some(name) {
                return Err(Error::Config(format!("expected `{name}` in checkpoint")));
            }
            parts
                .map(|p| {
                    p.parse()
                        .map_err(|_| Error::Config(format!("bad `{name}` value")))
                })
                .collect()
        };
        let obs_dim = field("obs_dim")?[0];
        let act_dim = field("act_dim")?[0];
        let hidden = field("hidden")?;
        if hidden != HIDDEN {
            return Err(Error::Config(format!(
                "checkpoint hidden sizes {hidden:?} do not match {HIDDEN:?}"
            )));
        }

        let mut policy = Self::zeros(obs_dim, act_dim);
        let mut flat = Vec::with_capacity(policy.parameter_count());
        for line in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let bits = u64::from_str_radix(line, 16)
                .map_err(|_| Error::Config("bad value line in checkpoint".into()))?;
            flat.push(f64::from_bits(bits));
        }
        policy.set_from_flat(&flat)?;
        Ok(policy)
    }
}

impl Gradients {
    pub fn to_flat(&self) -> Vec<f64> {
        let mut flat = Vec::new();
        for layer in self.actor.iter().chain(self.critic.iter()) {
            flat.extend_from_slice(layer.w.as_slice());
            flat.extend_from_slice(layer.b.as_slice());
        }
        flat.extend_from_slice(self.log_std.as_slice());
        flat
    }

    pub fn scale(&mut self, factor: f64) {
        for layer in self.actor.iter_mut().chain(self.critic.iter_mut()) {
            layer.w *= factor;
            layer.b *= factor;
        }
        self.log_std *= factor;
    }
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// log(1 - tanh(z)^2), evaluated without catastrophic cancellation.
fn log_one_minus_tanh_sq(z: f64) -> f64 {
    2.0 * (std::f64::consts::LN_2 - z - softplus(-2.0 * z))
}

/// Log-density of the pre-squash Gaussian at `raw`.
pub fn gaussian_log_prob(output: &PolicyOutput, raw: &DVector<f64>) -> f64 {
    let mut lp = 0.0;
    for j in 0..raw.len() {
        let sigma = output.log_std[j].exp();
        let zscore = (raw[j] - output.mean[j]) / sigma;
        lp += -output.log_std[j] - 0.5 * LN_2PI - 0.5 * zscore * zscore;
    }
    lp
}

/// Log-density of the squashed action `tanh(raw)`, i.e. the Gaussian
/// log-density plus the tanh change-of-variables correction.
pub fn squashed_log_prob(output: &PolicyOutput, raw: &DVector<f64>) -> f64 {
    let mut lp = gaussian_log_prob(output, raw);
    for j in 0..raw.len() {
        lp -= log_one_minus_tanh_sq(raw[j]);
    }
    lp
}

/// Log-density expressed as a function of the squashed action itself.
pub fn squashed_log_prob_of_action(output: &PolicyOutput, action: &DVector<f64>) -> f64 {
    let raw = action.map(|a| a.clamp(-0.999_999, 0.999_999).atanh());
    squashed_log_prob(output, &raw)
}

/// Draw a pre-squash sample and its squashed action.
pub fn sample_action(
    output: &PolicyOutput,
    rng: &mut ChaCha8Rng,
) -> (DVector<f64>, DVector<f64>) {
    let raw = DVector::from_fn(output.mean.len(), |j, _| {
        output.mean[j] + output.log_std[j].exp() * rng.sample::<f64, _>(StandardNormal)
    });
    let action = raw.map(f64::tanh);
    (raw, action)
}

/// Deterministic action: the squashed distribution mean.
pub fn mean_action(output: &PolicyOutput) -> DVector<f64> {
    output.mean.map(f64::tanh)
}
