//! Distribution matching: learn log-weights so that relaxed samples from
//! the learned distribution match hard sequence samples from a target.
//!
//! Each step draws a hard without-replacement sequence from the target,
//! draws Gumbel keys for the learned log-weights, and descends the per-step
//! cross-entropy between the relaxed one-hot steps and the target sequence.
//! The gradient reaches the log-weights through the relaxation at fixed
//! noise.

use crate::dist::Weights;
use crate::error::Error;
use crate::grad::{backprop_steps, unrolled_forward};
use crate::relax::Scores;
use crate::sampler::{gumbel_keys, wrs_sample};
use crate::stream::UniformStream;
use crate::Result;

/// Bias added to step probabilities before the log.
const LOG_BIAS: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct MatchConfig {
    pub k: usize,
    pub temperature: f64,
    pub steps: usize,
    pub learning_rate: f64,
    /// Samples averaged per gradient step.
    pub batch: usize,
    pub seed: u64,
}

/// Samples in the fixed-draw evaluation average behind the loss trace.
const EVAL_SAMPLES: usize = 64;

#[derive(Debug, Clone)]
pub struct MatchResult {
    /// Final learned log-weights (shift-normalized to sum 0 at init).
    pub log_weights: Vec<f64>,
    /// Evaluation loss per step, computed with a fixed evaluation stream so
    /// the trace is deterministic in the parameters.
    pub loss_trace: Vec<f64>,
}

impl MatchResult {
    pub fn learned_weights(&self) -> Result<Weights> {
        Weights::new(self.log_weights.iter().map(|v| v.exp()).collect())
    }
}

fn sequence_cross_entropy(
    log_weights: &[f64],
    target: &Weights,
    cfg: &MatchConfig,
    rng: &mut UniformStream,
) -> Result<(f64, Vec<f64>)> {
    let n = log_weights.len();
    let hard = wrs_sample(target, cfg.k, rng)?;
    let learned = Weights::new(log_weights.iter().map(|v| v.exp()).collect())?;
    let keys = gumbel_keys(&learned, rng);
    let scores = Scores::from_keys(keys.keys().to_vec(), cfg.temperature)?;
    let forward = unrolled_forward(&scores, cfg.k)?;

    let mut loss = 0.0;
    let mut grad_steps = vec![vec![0.0; n]; cfg.k];
    for (j, &target_idx) in hard.indices().iter().enumerate() {
        let p = forward.steps[j][target_idx];
        loss -= (p + LOG_BIAS).ln();
        grad_steps[j][target_idx] = -1.0 / (p + LOG_BIAS);
    }
    let grad = backprop_steps(&forward, cfg.temperature, &grad_steps);
    Ok((loss, grad))
}

/// Plain SGD on the log-weights, initialized to zero. Returns the final
/// log-weights and the per-step evaluation loss.
pub fn train_match_distribution(target: &Weights, cfg: &MatchConfig) -> Result<MatchResult> {
    let n = target.len();
    if cfg.k > target.positive_count() {
        return Err(Error::NotEnoughPositiveWeights {
            k: cfg.k,
            positive: target.positive_count(),
        });
    }
    if cfg.steps == 0 {
        return Err(Error::InvalidConfig("steps must be positive".into()));
    }

    if cfg.batch == 0 {
        return Err(Error::InvalidConfig("batch must be positive".into()));
    }

    let mut rng = UniformStream::new(cfg.seed);
    let eval_seed = rng.fork().seed();
    let mut log_weights = vec![0.0; n];
    let mut loss_trace = Vec::with_capacity(cfg.steps);

    for step in 0..cfg.steps {
        let mut grad = vec![0.0; n];
        for _ in 0..cfg.batch {
            let (_, g) = sequence_cross_entropy(&log_weights, target, cfg, &mut rng)?;
            for (acc, gi) in grad.iter_mut().zip(&g) {
                *acc += gi;
            }
        }
        let scale = cfg.learning_rate / cfg.batch as f64;
        for (lw, g) in log_weights.iter_mut().zip(&grad) {
            *lw -= scale * g;
        }
        // Same evaluation noise at every step, so the trace moves only when
        // the parameters do.
        let mut eval_rng = UniformStream::new(eval_seed);
        let mut eval_loss = 0.0;
        for _ in 0..EVAL_SAMPLES {
            let (l, _) = sequence_cross_entropy(&log_weights, target, cfg, &mut eval_rng)?;
            eval_loss += l;
        }
        eval_loss /= EVAL_SAMPLES as f64;
        if !eval_loss.is_finite() {
            return Err(Error::Diverged { step });
        }
        loss_trace.push(eval_loss);
    }

    Ok(MatchResult {
        log_weights,
        loss_trace,
    })
}
