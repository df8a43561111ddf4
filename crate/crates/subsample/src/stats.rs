//! Statistical verification: empirical subset histograms compared against
//! the exact enumeration oracle via total variation distance, Pearson
//! chi-square goodness of fit, and Wilson score confidence intervals.

use std::collections::BTreeMap;

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::dist::{DistributionTable, SubsetMask};
use crate::error::Error;
use crate::Result;

/// Histogram of observed subsets, keyed canonically by sorted index set.
#[derive(Debug, Clone)]
pub struct EmpiricalDistribution {
    n: usize,
    k: usize,
    counts: BTreeMap<Vec<usize>, u64>,
    total: u64,
}

impl EmpiricalDistribution {
    pub fn new(n: usize, k: usize) -> Self {
        Self {
            n,
            k,
            counts: BTreeMap::new(),
            total: 0,
        }
    }

    pub fn record(&mut self, mask: &SubsetMask) -> Result<()> {
        if mask.n() != self.n || mask.k() != self.k {
            return Err(Error::SupportMismatch(format!(
                "observed (n={}, k={}), expected (n={}, k={})",
                mask.n(),
                mask.k(),
                self.n,
                self.k
            )));
        }
        *self.counts.entry(mask.support()).or_insert(0) += 1;
        self.total += 1;
        Ok(())
    }

    pub fn counts(&self) -> &BTreeMap<Vec<usize>, u64> {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn frequency(&self, subset: &[usize]) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        *self.counts.get(subset).unwrap_or(&0) as f64 / self.total as f64
    }

    /// Merge another histogram into this one; associative and commutative,
    /// so sharded accumulation is safe.
    pub fn merge(&mut self, other: &EmpiricalDistribution) -> Result<()> {
        if other.n != self.n || other.k != self.k {
            return Err(Error::SupportMismatch(format!(
                "merging (n={}, k={}) into (n={}, k={})",
                other.n, other.k, self.n, self.k
            )));
        }
        for (subset, &c) in &other.counts {
            *self.counts.entry(subset.clone()).or_insert(0) += c;
        }
        self.total += other.total;
        Ok(())
    }
}

/// Half the L1 distance between the exact table and the empirical
/// frequencies over all k-subsets; missing subsets count as zero.
pub fn total_variation(p: &DistributionTable, q: &EmpiricalDistribution) -> Result<f64> {
    if p.n() != q.n() || p.k() != q.k() {
        return Err(Error::SupportMismatch(format!(
            "table (n={}, k={}) vs empirical (n={}, k={})",
            p.n(),
            p.k(),
            q.n(),
            q.k()
        )));
    }
    let mut l1 = 0.0;
    for (subset, &prob) in p.probabilities() {
        l1 += (prob - q.frequency(subset)).abs();
    }
    Ok(l1 / 2.0)
}

/// Pearson chi-square goodness-of-fit result.
#[derive(Debug, Clone)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
    /// Number of cells after merging low-expectation cells.
    pub cells: usize,
}

/// Pearson goodness of fit of the empirical histogram against the table.
///
/// Cells with expected count below 5 are merged ascending by expected count
/// until every cell clears the threshold; statistic has (cells - 1)
/// degrees of freedom.
pub fn chi_square_gof(p: &DistributionTable, q: &EmpiricalDistribution) -> Result<ChiSquareResult> {
    if p.n() != q.n() || p.k() != q.k() {
        return Err(Error::SupportMismatch(format!(
            "table (n={}, k={}) vs empirical (n={}, k={})",
            p.n(),
            p.k(),
            q.n(),
            q.k()
        )));
    }
    let total = q.total() as f64;
    // (expected, observed) per subset.
    let mut cells: Vec<(f64, f64)> = p
        .probabilities()
        .iter()
        .map(|(subset, &prob)| {
            (
                prob * total,
                *q.counts().get(subset).unwrap_or(&0) as f64,
            )
        })
        .collect();

    // Merge smallest-expected-first until all cells have expected >= 5.
    cells.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    while cells.len() > 1 && cells[0].0 < 5.0 {
        let (e0, o0) = cells.remove(0);
        cells[0].0 += e0;
        cells[0].1 += o0;
        cells.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    }
    if cells.len() < 2 {
        return Err(Error::DegenerateSupport);
    }

    let statistic: f64 = cells
        .iter()
        .map(|&(e, o)| {
            let d = o - e;
            d * d / e
        })
        .sum();
    let df = cells.len() - 1;
    let chi = ChiSquared::new(df as f64)
        .map_err(|e| Error::NonFinite(format!("chi-square distribution: {e}")))?;
    let p_value = 1.0 - chi.cdf(statistic);
    Ok(ChiSquareResult {
        statistic,
        degrees_of_freedom: df,
        p_value,
        cells: cells.len(),
    })
}

/// Wilson score interval for a binomial proportion.
pub fn binomial_ci(count: u64, total: u64, level: f64) -> Result<(f64, f64)> {
    if total == 0 || count > total {
        return Err(Error::InvalidCounts { count, total });
    }
    if !(0.0..1.0).contains(&level) || level <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "confidence level {level} outside (0, 1)"
        )));
    }
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let z = normal.inverse_cdf(0.5 + level / 2.0);
    let n = total as f64;
    let phat = count as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (phat + z2 / (2.0 * n)) / denom;
    let half = z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    Ok(((center - half).max(0.0), (center + half).min(1.0)))
}
