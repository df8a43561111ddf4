//! Exact (non-relaxed) samplers: weighted reservoir sampling with keys
//! `u^(1/w)` and the Gumbel-key construction `-log(-log u) + log w`.
//!
//! Both constructions consume one uniform per item in ascending index order,
//! so a shared stream feeds both for the key-equivalence check: the Gumbel
//! key is a monotonic transform of the reservoir key, hence the top-k index
//! sequences agree exactly.

use crate::dist::{Weights, WrsSample};
use crate::error::Error;
use crate::stream::UniformStream;
use crate::Result;

/// Gumbel keys `-log(-log u_i) + log w_i`. Items with `w_i = 0` carry
/// negative infinity as a "never selected" sentinel, ordered below all
/// finite keys.
#[derive(Debug, Clone)]
pub struct GumbelKeys {
    keys: Vec<f64>,
}

impl GumbelKeys {
    pub fn keys(&self) -> &[f64] {
        &self.keys
    }
}

/// Reservoir keys `u_i^(1/w_i)` in [0, 1]; `w_i = 0` maps to key 0.
#[derive(Debug, Clone)]
pub struct ReservoirKeys {
    keys: Vec<f64>,
}

impl ReservoirKeys {
    pub fn keys(&self) -> &[f64] {
        &self.keys
    }
}

/// Gumbel keys from explicit uniforms (one per item, index order).
pub fn gumbel_keys_from_uniforms(w: &Weights, uniforms: &[f64]) -> GumbelKeys {
    let keys = w
        .values()
        .iter()
        .zip(uniforms)
        .map(|(&wi, &u)| {
            if wi == 0.0 {
                f64::NEG_INFINITY
            } else {
                -(-u.ln()).ln() + wi.ln()
            }
        })
        .collect();
    GumbelKeys { keys }
}

/// Reservoir keys from explicit uniforms (one per item, index order).
pub fn reservoir_keys_from_uniforms(w: &Weights, uniforms: &[f64]) -> ReservoirKeys {
    let keys = w
        .values()
        .iter()
        .zip(uniforms)
        .map(|(&wi, &u)| if wi == 0.0 { 0.0 } else { u.powf(1.0 / wi) })
        .collect();
    ReservoirKeys { keys }
}

/// One Gumbel key per item, consuming exactly n uniform draws.
pub fn gumbel_keys(w: &Weights, rng: &mut UniformStream) -> GumbelKeys {
    let uniforms = rng.draw_n(w.len());
    gumbel_keys_from_uniforms(w, &uniforms)
}

/// Indices of the k largest keys in descending key order; ties broken
/// toward the lower index.
pub fn hard_topk(keys: &[f64], k: usize) -> Result<WrsSample> {
    let n = keys.len();
    if k > n {
        return Err(Error::KTooLarge { k, n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort by descending key keeps lower indices first among ties.
    order.sort_by(|&a, &b| keys[b].partial_cmp(&keys[a]).unwrap());
    order.truncate(k);
    WrsSample::new(order, n)
}

/// Weighted reservoir sample: top-k reservoir keys, descending.
///
/// Distributed as the sequence-without-replacement distribution over the
/// stream's randomness.
pub fn wrs_sample(w: &Weights, k: usize, rng: &mut UniformStream) -> Result<WrsSample> {
    let positive = w.positive_count();
    if k > positive {
        return Err(Error::NotEnoughPositiveWeights { k, positive });
    }
    let uniforms = rng.draw_n(w.len());
    let keys = reservoir_keys_from_uniforms(w, &uniforms);
    hard_topk(keys.keys(), k)
}

/// Gumbel-key sample: top-k Gumbel keys, descending. Same distribution as
/// [`wrs_sample`] by the monotonic-transform argument.
pub fn gumbel_topk_sample(w: &Weights, k: usize, rng: &mut UniformStream) -> Result<WrsSample> {
    let positive = w.positive_count();
    if k > positive {
        return Err(Error::NotEnoughPositiveWeights { k, positive });
    }
    let keys = gumbel_keys(w, rng);
    hard_topk(keys.keys(), k)
}

/// Feeds both key constructions the identical uniforms and checks that the
/// hard top-k index sequences agree, index for index.
pub fn key_equivalence_check(w: &Weights, k: usize, rng: &mut UniformStream) -> Result<bool> {
    let positive = w.positive_count();
    if k > positive {
        return Err(Error::NotEnoughPositiveWeights { k, positive });
    }
    let uniforms = rng.draw_n(w.len());
    let gumbel = gumbel_keys_from_uniforms(w, &uniforms);
    let reservoir = reservoir_keys_from_uniforms(w, &uniforms);
    let a = hard_topk(gumbel.keys(), k)?;
    let b = hard_topk(reservoir.keys(), k)?;
    Ok(a == b)
}
