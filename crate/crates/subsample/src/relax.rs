//! Successive-softmax top-k relaxation.
//!
//! Starting from log-domain scores, each of k steps takes a temperature
//! softmax and then down-weights the selected mass via
//! `alpha_i <- alpha_i + log(1 - p_i)`. The per-step probability vectors are
//! recorded and their sum is the relaxed k-hot output. As t -> 0 the output
//! converges to the exact k-hot of hard top-k; for t >= 1 the output
//! preserves the input ordering, while for t < 1 individual entries may
//! exceed 1 (scores [1, 2] at k = 2, t = 0.4 give mass [1.053, 0.947]).

use crate::dist::{SubsetMask, Weights};
use crate::error::Error;
use crate::sampler::{gumbel_keys, hard_topk};
use crate::stream::UniformStream;
use crate::Result;

/// Step probabilities are clamped to this bound before `log1p(-p)`; at low
/// temperature a step saturates at 1 and the raw log diverges.
pub const PROB_CLAMP: f64 = 1.0 - 1e-12;

/// Log-domain scores with a positive temperature.
#[derive(Debug, Clone)]
pub struct Scores {
    values: Vec<f64>,
    temperature: f64,
}

impl Scores {
    /// Requires all scores finite and t > 0.
    pub fn new(values: Vec<f64>, temperature: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyWeights);
        }
        if temperature.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) || !temperature.is_finite() {
            return Err(Error::NonPositiveTemperature(temperature));
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteScore(i));
            }
        }
        Ok(Self {
            values,
            temperature,
        })
    }

    /// Scores from Gumbel keys, admitting the negative-infinity sentinel of
    /// zero-weight items. At least one key must be finite.
    pub fn from_keys(keys: Vec<f64>, temperature: f64) -> Result<Self> {
        if keys.is_empty() {
            return Err(Error::EmptyWeights);
        }
        if temperature.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) || !temperature.is_finite() {
            return Err(Error::NonPositiveTemperature(temperature));
        }
        let mut any_finite = false;
        for (i, &v) in keys.iter().enumerate() {
            if v.is_nan() || v == f64::INFINITY {
                return Err(Error::NonFiniteScore(i));
            }
            any_finite |= v.is_finite();
        }
        if !any_finite {
            return Err(Error::NonFiniteScore(0));
        }
        Ok(Self {
            values: keys,
            temperature,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Relaxed k-hot output: total mass plus the per-step relaxed one-hot
/// sequence. `saturated` flags that some step probability hit the clamp.
#[derive(Debug, Clone)]
pub struct RelaxedKHot {
    mass: Vec<f64>,
    steps: Vec<Vec<f64>>,
    saturated: bool,
}

impl RelaxedKHot {
    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn steps(&self) -> &[Vec<f64>] {
        &self.steps
    }

    pub fn k(&self) -> usize {
        self.steps.len()
    }

    pub fn saturated(&self) -> bool {
        self.saturated
    }
}

/// Softmax of `values / t` with max-subtraction. Negative-infinity entries
/// get exactly zero mass.
pub fn softmax_with_temperature(values: &[f64], t: f64) -> Vec<f64> {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = values
        .iter()
        .map(|&v| {
            if v == f64::NEG_INFINITY {
                0.0
            } else {
                ((v - max) / t).exp()
            }
        })
        .collect();
    let sum: f64 = exps.iter().sum();
    exps.iter().map(|&e| e / sum).collect()
}

/// k successive softmax steps at temperature t, recording each step vector;
/// the mass is the step sum.
pub fn relaxed_topk(scores: &Scores, k: usize) -> Result<RelaxedKHot> {
    let n = scores.len();
    if k > n {
        return Err(Error::KTooLarge { k, n });
    }
    let t = scores.temperature();
    let mut alpha = scores.values().to_vec();
    let mut steps = Vec::with_capacity(k);
    let mut mass = vec![0.0; n];
    let mut saturated = false;

    for _ in 0..k {
        let p = softmax_with_temperature(&alpha, t);
        for i in 0..n {
            mass[i] += p[i];
            let clamped = p[i].min(PROB_CLAMP);
            if p[i] > PROB_CLAMP {
                saturated = true;
            }
            // alpha stays -inf for sentinel items: log1p(-0) = 0.
            alpha[i] += (-clamped).ln_1p();
        }
        steps.push(p);
    }

    Ok(RelaxedKHot {
        mass,
        steps,
        saturated,
    })
}

/// Mask of the k largest mass entries, ties toward the lower index.
pub fn relaxed_topk_hard(scores: &Scores, k: usize) -> Result<SubsetMask> {
    let relaxed = relaxed_topk(scores, k)?;
    let sample = hard_topk(relaxed.mass(), k)?;
    sample.to_mask(scores.len())
}

/// Algorithm composition: Gumbel keys as log-domain scores, then the
/// relaxation. Noise enters additively in the keys, which is what makes the
/// output reparameterizable in the log-weights.
pub fn relax_subset_sample(
    w: &Weights,
    k: usize,
    temperature: f64,
    rng: &mut UniformStream,
) -> Result<RelaxedKHot> {
    let positive = w.positive_count();
    if k > positive {
        return Err(Error::NotEnoughPositiveWeights { k, positive });
    }
    let keys = gumbel_keys(w, rng);
    let scores = Scores::from_keys(keys.keys().to_vec(), temperature)?;
    relaxed_topk(&scores, k)
}
