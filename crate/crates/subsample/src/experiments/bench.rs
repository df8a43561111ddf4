//! Forward-pass timing of the relaxation: k softmaxes over m items is
//! O(km) work, so doubling m should roughly double the time.

use std::time::Instant;

use crate::error::Error;
use crate::relax::{relaxed_topk, Scores};
use crate::stream::UniformStream;
use crate::Result;

#[derive(Debug, Clone)]
pub struct BenchRow {
    pub m: usize,
    pub k: usize,
    pub mean_ms: f64,
    pub std_ms: f64,
    pub median_ms: f64,
}

/// Times `relaxed_topk` forward passes on random scores for each m.
pub fn scaling_benchmark(
    m_values: &[usize],
    k: usize,
    temperature: f64,
    trials: usize,
) -> Result<Vec<BenchRow>> {
    if k == 0 {
        return Err(Error::InvalidConfig("k must be at least 1".into()));
    }
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be positive".into()));
    }
    if m_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig("m values must be ascending".into()));
    }
    if m_values.first().is_some_and(|&m| m < k) {
        return Err(Error::InvalidConfig("smallest m must be at least k".into()));
    }

    let mut rng = UniformStream::new(0xbe4c);
    let mut rows = Vec::with_capacity(m_values.len());
    for &m in m_values {
        let values: Vec<f64> = (0..m).map(|_| rng.next_uniform() * 10.0 - 5.0).collect();
        let scores = Scores::new(values, temperature)?;
        // Warm-up pass outside the timed loop.
        let _ = relaxed_topk(&scores, k)?;

        let mut times_ms = Vec::with_capacity(trials);
        for _ in 0..trials {
            let start = Instant::now();
            let out = relaxed_topk(&scores, k)?;
            let elapsed = start.elapsed().as_secs_f64() * 1e3;
            std::hint::black_box(out);
            times_ms.push(elapsed);
        }
        times_ms.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mean = times_ms.iter().sum::<f64>() / trials as f64;
        let var = times_ms
            .iter()
            .map(|t| (t - mean) * (t - mean))
            .sum::<f64>()
            / trials as f64;
        rows.push(BenchRow {
            m,
            k,
            mean_ms: mean,
            std_ms: var.sqrt(),
            median_ms: times_ms[trials / 2],
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn configuration_validation() {
        assert!(scaling_benchmark(&[100], 0, 1.0, 10).is_err());
        assert!(scaling_benchmark(&[100, 50], 5, 1.0, 10).is_err());
        assert!(scaling_benchmark(&[2], 5, 1.0, 10).is_err());
        assert!(scaling_benchmark(&[100], 1, 1.0, 10).is_ok());
    }

    #[test]
    fn growth_is_roughly_linear() {
        let rows = scaling_benchmark(&[1000, 2000, 5000], 5, 1.0, 100).unwrap();
        let t1000 = rows[0].median_ms;
        let t2000 = rows[1].median_ms;
        let t5000 = rows[2].median_ms;
        assert!(
            t5000 / t1000 < 10.0,
            "time(5000)/time(1000) = {}",
            t5000 / t1000
        );
        assert!(t2000 / t1000 < 3.0, "doubling ratio = {}", t2000 / t1000);
    }
}
