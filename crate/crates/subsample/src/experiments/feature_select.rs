//! Toy instance-wise feature selection on synthetic linear data.
//!
//! Data is d standard-normal features with y = x_0 + x_1. A learnable
//! log-weight vector plays the explainer and a linear regressor plays the
//! approximating model; both descend the squared error of the regressor on
//! the relaxed-mask-gated input. At test time the subset is chosen
//! deterministically by highest weights.

use crate::error::Error;
use crate::grad::{backprop_steps, unrolled_forward};
use crate::relax::Scores;
use crate::sampler::{gumbel_keys, hard_topk};
use crate::stream::UniformStream;
use crate::{Result, Weights};

#[derive(Debug, Clone)]
pub struct FeatureSelectConfig {
    pub n_features: usize,
    pub k: usize,
    pub temperature: f64,
    pub steps: usize,
    pub learning_rate: f64,
    pub seed: u64,
    /// When true the targets are independent noise instead of x_0 + x_1.
    pub null_target: bool,
}

impl FeatureSelectConfig {
    pub fn new(n_features: usize, k: usize, temperature: f64, seed: u64) -> Self {
        Self {
            n_features,
            k,
            temperature,
            steps: 3000,
            learning_rate: 0.05,
            seed,
            null_target: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FeatureSelectResult {
    /// Deterministic test-time selection: the k features with the highest
    /// learned weights, sorted ascending.
    pub selected: Vec<usize>,
    pub explainer_log_weights: Vec<f64>,
    pub regressor: Vec<f64>,
    pub loss_trace: Vec<f64>,
}

/// Standard normal via Box-Muller on the clamped uniform stream.
fn standard_normal(rng: &mut UniformStream) -> f64 {
    let u1 = rng.next_uniform();
    let u2 = rng.next_uniform();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Jointly trains explainer log-weights and the linear regressor on the
/// relaxed objective; returns the hardened selected subset.
pub fn toy_feature_selection(cfg: &FeatureSelectConfig) -> Result<FeatureSelectResult> {
    let d = cfg.n_features;
    if d < 2 || (cfg.k > d) {
        return Err(Error::InvalidConfig(format!(
            "need 2 <= k <= d, got d={d} k={}",
            cfg.k
        )));
    }
    if cfg.temperature.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::NonPositiveTemperature(cfg.temperature));
    }

    let mut rng = UniformStream::new(cfg.seed);
    let mut theta: Vec<f64> = vec![0.0; d]; // explainer log-weights
    let mut beta: Vec<f64> = vec![0.0; d]; // linear regressor on the gated input
    let mut loss_trace = Vec::with_capacity(cfg.steps);

    for step in 0..cfg.steps {
        // Fresh synthetic example each step.
        let x: Vec<f64> = (0..d).map(|_| standard_normal(&mut rng)).collect();
        let y = if cfg.null_target {
            standard_normal(&mut rng)
        } else {
            x[0] + x[1]
        };

        let weights = Weights::new(theta.iter().map(|v| v.exp()).collect())?;
        let keys = gumbel_keys(&weights, &mut rng);
        let scores = Scores::from_keys(keys.keys().to_vec(), cfg.temperature)?;
        let forward = unrolled_forward(&scores, cfg.k)?;
        let mut mass = vec![0.0; d];
        for step_probs in &forward.steps {
            for i in 0..d {
                mass[i] += step_probs[i];
            }
        }

        // Relaxed mask as a multiplicative gate on the features.
        let gated: Vec<f64> = mass.iter().zip(&x).map(|(&a, &xi)| a * xi).collect();
        let prediction: f64 = beta.iter().zip(&gated).map(|(&b, &g)| b * g).sum();
        let residual = prediction - y;
        let loss = residual * residual;
        if !loss.is_finite() {
            return Err(Error::Diverged { step });
        }
        loss_trace.push(loss);

        let grad_mass: Vec<f64> = (0..d).map(|i| 2.0 * residual * beta[i] * x[i]).collect();
        let grad_steps = vec![grad_mass; cfg.k];
        let grad_theta = backprop_steps(&forward, cfg.temperature, &grad_steps);

        for i in 0..d {
            beta[i] -= cfg.learning_rate * 2.0 * residual * gated[i];
            theta[i] -= cfg.learning_rate * grad_theta[i];
        }
    }

    let selection = hard_topk(&theta, cfg.k)?;
    let mut selected = selection.indices().to_vec();
    selected.sort_unstable();
    Ok(FeatureSelectResult {
        selected,
        explainer_log_weights: theta,
        regressor: beta,
        loss_trace,
    })
}
