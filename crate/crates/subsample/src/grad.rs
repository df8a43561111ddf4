//! Analytic derivatives of the relaxed top-k output with respect to its
//! input scores, by reverse accumulation over the unrolled k-step
//! recurrence, plus a central finite-difference checker.
//!
//! Because Gumbel noise enters the keys additively, the Jacobian with
//! respect to log-weights at fixed noise equals the Jacobian with respect
//! to the realized keys (the reparameterization trick).

use crate::dist::Weights;
use crate::error::Error;
use crate::relax::{softmax_with_temperature, Scores, PROB_CLAMP};
use crate::sampler::gumbel_keys;
use crate::stream::UniformStream;
use crate::Result;

/// Unrolled forward pass retaining what the backward pass needs: each step's
/// probability vector and which entries hit the clamp in the alpha update.
pub(crate) struct UnrolledForward {
    pub steps: Vec<Vec<f64>>,
    pub clamped: Vec<Vec<bool>>,
    pub saturated: bool,
}

pub(crate) fn unrolled_forward(scores: &Scores, k: usize) -> Result<UnrolledForward> {
    let n = scores.len();
    if k > n {
        return Err(Error::KTooLarge { k, n });
    }
    let t = scores.temperature();
    let mut alpha = scores.values().to_vec();
    let mut steps = Vec::with_capacity(k);
    let mut clamped = Vec::with_capacity(k);
    let mut saturated = false;

    for _ in 0..k {
        let p = softmax_with_temperature(&alpha, t);
        let mut clamp_row = vec![false; n];
        for i in 0..n {
            if p[i] > PROB_CLAMP {
                clamp_row[i] = true;
                saturated = true;
                alpha[i] += (-PROB_CLAMP).ln_1p();
            } else {
                alpha[i] += (-p[i]).ln_1p();
            }
        }
        steps.push(p);
        clamped.push(clamp_row);
    }
    Ok(UnrolledForward {
        steps,
        clamped,
        saturated,
    })
}

/// Reverse pass: given dL/dp^j for every step, returns dL/ds.
///
/// Clamped step probabilities propagate zero derivative through the alpha
/// update, matching the clamped forward computation.
pub(crate) fn backprop_steps(
    forward: &UnrolledForward,
    temperature: f64,
    grad_steps: &[Vec<f64>],
) -> Vec<f64> {
    let k = forward.steps.len();
    assert_eq!(grad_steps.len(), k);
    let n = forward.steps.first().map_or(0, Vec::len);

    // d_alpha holds dL/d(alpha at the current step boundary), flowing back.
    let mut d_alpha = vec![0.0; n];
    for j in (0..k).rev() {
        let p = &forward.steps[j];
        let clamp = &forward.clamped[j];
        // Gradient wrt this step's probability vector: direct output term
        // plus the path through alpha^{j+1} = alpha^j + log1p(-p).
        let mut gp = vec![0.0; n];
        for i in 0..n {
            gp[i] = grad_steps[j][i];
            if !clamp[i] {
                gp[i] -= d_alpha[i] / (1.0 - p[i]);
            }
        }
        // Softmax vector-Jacobian product at z = alpha^j / t.
        let inner: f64 = gp.iter().zip(p).map(|(&g, &pi)| g * pi).sum();
        for i in 0..n {
            let dz = p[i] * (gp[i] - inner);
            d_alpha[i] += dz / temperature;
        }
    }
    d_alpha
}

/// Matrix of partials of the relaxed k-hot mass with respect to the input
/// scores, with the inputs that produced it.
#[derive(Debug, Clone)]
pub struct JacobianRecord {
    matrix: Vec<Vec<f64>>,
    k: usize,
    temperature: f64,
    scores: Vec<f64>,
    saturated: bool,
}

impl JacobianRecord {
    /// Row i, column j: `d a_i / d s_j`.
    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix[i][j]
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    /// True when some step probability hit the clamp; the derivative
    /// through that update was zeroed.
    pub fn saturated(&self) -> bool {
        self.saturated
    }

    /// Pulls a loss gradient on the mass back to the scores:
    /// `(dL/ds)_j = sum_i (dL/da_i) * J[i][j]`.
    pub fn vjp(&self, grad_mass: &[f64]) -> Vec<f64> {
        let n = self.scores.len();
        let mut out = vec![0.0; n];
        for (row, &g) in self.matrix.iter().zip(grad_mass) {
            for j in 0..n {
                out[j] += g * row[j];
            }
        }
        out
    }
}

/// Exact Jacobian of the k-step recurrence via reverse accumulation, one
/// backward pass per output row.
pub fn relaxed_topk_jacobian(scores: &Scores, k: usize) -> Result<JacobianRecord> {
    let n = scores.len();
    let forward = unrolled_forward(scores, k)?;
    let t = scores.temperature();

    let mut matrix = Vec::with_capacity(n);
    for i in 0..n {
        // a_i = sum_j p^j_i, so every step receives the unit gradient e_i.
        let mut unit = vec![0.0; n];
        unit[i] = 1.0;
        let grad_steps = vec![unit; k];
        matrix.push(backprop_steps(&forward, t, &grad_steps));
    }
    Ok(JacobianRecord {
        matrix,
        k,
        temperature: t,
        scores: scores.values().to_vec(),
        saturated: forward.saturated,
    })
}

/// Jacobian of the relaxed sample with respect to log-weights at fixed
/// Gumbel noise; identical to [`relaxed_topk_jacobian`] at the realized
/// keys since the noise is additive.
pub fn grad_wrt_log_weights(
    w: &Weights,
    k: usize,
    temperature: f64,
    rng: &mut UniformStream,
) -> Result<JacobianRecord> {
    let positive = w.positive_count();
    if k > positive {
        return Err(Error::NotEnoughPositiveWeights { k, positive });
    }
    let keys = gumbel_keys(w, rng);
    let scores = Scores::from_keys(keys.keys().to_vec(), temperature)?;
    relaxed_topk_jacobian(&scores, k)
}

/// Max/mean absolute deviation between an analytic gradient and central
/// finite differences.
#[derive(Debug, Clone)]
pub struct FdReport {
    pub max_abs_error: f64,
    pub mean_abs_error: f64,
    pub fd_gradient: Vec<f64>,
}

/// Central finite-difference check of `analytic` against `f` at `point`
/// with step `h`.
pub fn finite_difference_check<F>(
    f: F,
    analytic: &[f64],
    point: &[f64],
    h: f64,
) -> Result<FdReport>
where
    F: Fn(&[f64]) -> f64,
{
    if h.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::InvalidConfig(format!("step h={h} must be positive")));
    }
    let n = point.len();
    let mut perturbed = point.to_vec();
    let mut fd = Vec::with_capacity(n);
    for j in 0..n {
        perturbed[j] = point[j] + h;
        let plus = f(&perturbed);
        perturbed[j] = point[j] - h;
        let minus = f(&perturbed);
        perturbed[j] = point[j];
        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::NonFinite(format!(
                "function value at coordinate {j}"
            )));
        }
        fd.push((plus - minus) / (2.0 * h));
    }
    let mut max_abs = 0.0f64;
    let mut sum_abs = 0.0;
    for (a, g) in analytic.iter().zip(&fd) {
        let e = (a - g).abs();
        max_abs = max_abs.max(e);
        sum_abs += e;
    }
    Ok(FdReport {
        max_abs_error: max_abs,
        mean_abs_error: sum_abs / n as f64,
        fd_gradient: fd,
    })
}
