//! Neighbor-matching stochastic embedding and the trustworthiness metric.
//!
//! For each point, a hard neighbor sequence is drawn in input space from
//! the without-replacement distribution over kernel weights
//! `exp(-||x_i - x_j||^2)`, and the per-step relaxed one-hot vectors of the
//! same distribution in embedding space are pushed to match it, with step j
//! weighted by `1/e^(j-1)`. Only distances enter the loss, so it is
//! invariant to global rotation of the embedding.

use crate::error::Error;
use crate::grad::{backprop_steps, unrolled_forward};
use crate::relax::Scores;
use crate::sampler::wrs_sample;
use crate::stream::UniformStream;
use crate::{Result, Weights};

/// Pairwise kernel weights below this are floored; their log-keys carry
/// zero gradient.
const WEIGHT_FLOOR: f64 = 1e-30;
/// Bias added to relaxed vectors before the log.
const LOG_BIAS: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct EmbeddingConfig {
    pub d_in: usize,
    pub d_out: usize,
    pub k: usize,
    pub temperature: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    /// Initialize the linear map to the identity (requires d_out == d_in).
    pub identity_init: bool,
}

impl EmbeddingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d_out > self.d_in {
            return Err(Error::InvalidConfig(format!(
                "d_out={} must not exceed d_in={}",
                self.d_out, self.d_in
            )));
        }
        if self.k == 0 || self.batch_size == 0 || self.epochs == 0 {
            return Err(Error::InvalidConfig(
                "k, batch_size, and epochs must be positive".into(),
            ));
        }
        if self.temperature.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::NonPositiveTemperature(self.temperature));
        }
        if self.identity_init && self.d_in != self.d_out {
            return Err(Error::InvalidConfig(
                "identity init requires d_in == d_out".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SneResult {
    /// Embedded coordinates under the untrained initial map.
    pub initial_embedding: Vec<Vec<f64>>,
    /// Final embedded coordinates, one row per input point.
    pub embedding: Vec<Vec<f64>>,
    /// Learned linear map, d_in x d_out.
    pub weight_matrix: Vec<Vec<f64>>,
    /// Evaluation loss per epoch at a fixed evaluation seed.
    pub loss_trace: Vec<f64>,
    /// True when the final embedding collapsed to a single point.
    pub degenerate: bool,
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn embed(data: &[Vec<f64>], w: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d_out = w[0].len();
    data.iter()
        .map(|x| {
            (0..d_out)
                .map(|q| x.iter().zip(w).map(|(&xi, row)| xi * row[q]).sum())
                .collect()
        })
        .collect()
}

/// Neighbor-matching loss of an explicit embedding, with hard neighbor
/// draws and Gumbel noise taken from the given seed. Deterministic in
/// (data, embedded, seed); depends on the embedding only through pairwise
/// distances.
pub fn sne_loss(
    data: &[Vec<f64>],
    embedded: &[Vec<f64>],
    k: usize,
    temperature: f64,
    seed: u64,
) -> Result<f64> {
    let mut rng = UniformStream::new(seed);
    let (loss, _) = batch_loss_grad(data, embedded, k, temperature, &mut rng, false)?;
    Ok(loss)
}

/// Loss over one batch plus, optionally, the gradient with respect to the
/// embedded coordinates.
fn batch_loss_grad(
    x_batch: &[Vec<f64>],
    h_batch: &[Vec<f64>],
    k: usize,
    temperature: f64,
    rng: &mut UniformStream,
    want_grad: bool,
) -> Result<(f64, Vec<Vec<f64>>)> {
    let b = x_batch.len();
    if b < 2 || k > b - 1 {
        return Err(Error::InvalidConfig(format!(
            "batch of {b} points cannot supply k={k} neighbors"
        )));
    }
    let d_out = h_batch[0].len();
    let ln_floor = WEIGHT_FLOOR.ln();

    let mut total_loss = 0.0;
    let mut dh = vec![vec![0.0; d_out]; b];

    for i in 0..b {
        let others: Vec<usize> = (0..b).filter(|&j| j != i).collect();

        // Hard neighbor sequence from the input-space kernel.
        let w_in = Weights::new(
            others
                .iter()
                .map(|&j| (-squared_distance(&x_batch[i], &x_batch[j])).exp().max(WEIGHT_FLOOR))
                .collect(),
        )?;
        let hard = wrs_sample(&w_in, k, rng)?;

        // Relaxed sample from the embedding-space kernel: Gumbel keys on
        // the log-weights, then the successive-softmax steps.
        let mut floored = vec![false; others.len()];
        let mut keys = Vec::with_capacity(others.len());
        for (m, &j) in others.iter().enumerate() {
            let log_w = -squared_distance(&h_batch[i], &h_batch[j]);
            let log_w = if log_w < ln_floor {
                floored[m] = true;
                ln_floor
            } else {
                log_w
            };
            let u = rng.next_uniform();
            keys.push(log_w - (-u.ln()).ln());
        }
        let scores = Scores::from_keys(keys, temperature)?;
        let forward = unrolled_forward(&scores, k)?;

        let mut grad_steps = vec![vec![0.0; others.len()]; k];
        for (j, &target) in hard.indices().iter().enumerate() {
            let weight = (-(j as f64)).exp(); // 1/e^(j-1) with 1-based j
            let p = forward.steps[j][target];
            total_loss -= weight * (p + LOG_BIAS).ln();
            grad_steps[j][target] = -weight / (p + LOG_BIAS);
        }

        if want_grad {
            let d_keys = backprop_steps(&forward, temperature, &grad_steps);
            for (m, &j) in others.iter().enumerate() {
                if floored[m] {
                    continue;
                }
                // key = -||h_i - h_j||^2 + gumbel, noise fixed.
                for q in 0..d_out {
                    let diff = h_batch[i][q] - h_batch[j][q];
                    dh[i][q] += d_keys[m] * (-2.0) * diff;
                    dh[j][q] += d_keys[m] * 2.0 * diff;
                }
            }
        }
    }

    let scale = 1.0 / b as f64;
    for row in &mut dh {
        for v in row.iter_mut() {
            *v *= scale;
        }
    }
    Ok((total_loss * scale, dh))
}

/// Trains a linear embedding by SGD on the neighbor-matching loss.
pub fn rss_sne_train(data: &[Vec<f64>], cfg: &EmbeddingConfig) -> Result<SneResult> {
    cfg.validate()?;
    let n = data.len();
    if n < 2 {
        return Err(Error::InvalidConfig("need at least two points".into()));
    }
    for row in data {
        if row.len() != cfg.d_in {
            return Err(Error::InvalidConfig(format!(
                "point dimension {} does not match d_in={}",
                row.len(),
                cfg.d_in
            )));
        }
    }

    let mut rng = UniformStream::new(cfg.seed);
    let eval_seed = rng.fork().seed();
    let mut w: Vec<Vec<f64>> = if cfg.identity_init {
        (0..cfg.d_in)
            .map(|p| (0..cfg.d_out).map(|q| if p == q { 1.0 } else { 0.0 }).collect())
            .collect()
    } else {
        (0..cfg.d_in)
            .map(|_| {
                (0..cfg.d_out)
                    .map(|_| (rng.next_uniform() - 0.5) * 0.2)
                    .collect()
            })
            .collect()
    };

    let initial_embedding = embed(data, &w);
    let mut loss_trace = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        for batch in data.chunks(cfg.batch_size.min(n)) {
            if batch.len() < cfg.k + 1 {
                continue; // ragged tail too small to supply k neighbors
            }
            let h = embed(batch, &w);
            let (_, dh) = batch_loss_grad(batch, &h, cfg.k, cfg.temperature, &mut rng, true)?;
            for (x, g) in batch.iter().zip(&dh) {
                for p in 0..cfg.d_in {
                    for q in 0..cfg.d_out {
                        w[p][q] -= cfg.learning_rate * x[p] * g[q];
                    }
                }
            }
        }
        let h_all = embed(data, &w);
        let eval = sne_loss(data, &h_all, cfg.k, cfg.temperature, eval_seed)?;
        if !eval.is_finite() {
            return Err(Error::Diverged { step: epoch });
        }
        loss_trace.push(eval);
    }

    let embedding = embed(data, &w);
    let mut max_dist: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            max_dist = max_dist.max(squared_distance(&embedding[i], &embedding[j]));
        }
    }
    Ok(SneResult {
        initial_embedding,
        embedding,
        weight_matrix: w,
        loss_trace,
        degenerate: max_dist < 1e-18,
    })
}

/// Trustworthiness T(k): penalizes low-space k-nearest neighbors by their
/// rank excess in the high-space distance ordering. 1 means every low-space
/// neighbor was already a high-space neighbor. Ties broken by index.
pub fn trustworthiness(high: &[Vec<f64>], low: &[Vec<f64>], k: usize) -> Result<f64> {
    let n = high.len();
    if low.len() != n {
        return Err(Error::SupportMismatch(format!(
            "{} high points vs {} low points",
            n,
            low.len()
        )));
    }
    if k == 0 || 2 * n <= 3 * k + 1 {
        return Err(Error::InvalidConfig(format!(
            "need n > (3k+1)/2, got n={n} k={k}"
        )));
    }

    let mut penalty = 0.0;
    for i in 0..n {
        let mut by_high: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        by_high.sort_by(|&a, &b| {
            squared_distance(&high[i], &high[a])
                .partial_cmp(&squared_distance(&high[i], &high[b]))
                .unwrap()
                .then(a.cmp(&b))
        });
        // rank 1 = nearest in high space
        let mut rank = vec![0usize; n];
        for (pos, &j) in by_high.iter().enumerate() {
            rank[j] = pos + 1;
        }

        let mut by_low: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        by_low.sort_by(|&a, &b| {
            squared_distance(&low[i], &low[a])
                .partial_cmp(&squared_distance(&low[i], &low[b]))
                .unwrap()
                .then(a.cmp(&b))
        });
        for &j in by_low.iter().take(k) {
            penalty += (rank[j] as f64 - k as f64).max(0.0);
        }
    }

    let normalizer = 2.0 / (n as f64 * k as f64 * (2 * n - 3 * k - 1) as f64);
    Ok(1.0 - normalizer * penalty)
}

/// Leave-one-out 1-nearest-neighbor error of an embedding against labels.
pub fn one_nn_error(embedded: &[Vec<f64>], labels: &[usize]) -> Result<f64> {
    let n = embedded.len();
    if labels.len() != n || n < 2 {
        return Err(Error::InvalidConfig("labels must match points".into()));
    }
    let mut wrong = 0;
    for i in 0..n {
        let mut best = usize::MAX;
        let mut best_d = f64::INFINITY;
        for j in 0..n {
            if j == i {
                continue;
            }
            let d = squared_distance(&embedded[i], &embedded[j]);
            if d < best_d {
                best_d = d;
                best = j;
            }
        }
        if labels[best] != labels[i] {
            wrong += 1;
        }
    }
    Ok(wrong as f64 / n as f64)
}

/// Isotropic Gaussian clusters: cluster c is centered at `separation` along
/// coordinate c, with unit-free spread 0.5.
pub fn make_cluster_data(
    n_per_cluster: usize,
    n_clusters: usize,
    d_in: usize,
    seed: u64,
) -> (Vec<Vec<f64>>, Vec<usize>) {
    assert!(n_clusters <= d_in, "one axis per cluster center");
    let separation = 4.0;
    let spread = 0.5;
    let mut rng = UniformStream::new(seed);
    let normal = |rng: &mut UniformStream| {
        let u1 = rng.next_uniform();
        let u2 = rng.next_uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    };
    let mut data = Vec::with_capacity(n_per_cluster * n_clusters);
    let mut labels = Vec::with_capacity(n_per_cluster * n_clusters);
    for c in 0..n_clusters {
        for _ in 0..n_per_cluster {
            let mut point: Vec<f64> = (0..d_in).map(|_| spread * normal(&mut rng)).collect();
            point[c] += separation;
            data.push(point);
            labels.push(c);
        }
    }
    (data, labels)
}
