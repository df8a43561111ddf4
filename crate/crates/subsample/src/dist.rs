//! Exact probabilities for the sequence-without-replacement distribution and
//! the subset distribution it induces, plus a brute-force enumeration oracle.
//!
//! The sequence probability is the telescoping product
//! `(w_{i1}/Z) * (w_{i2}/(Z - w_{i1})) * ...` and the subset probability sums
//! that product over all `k!` orderings of the subset. The enumeration oracle
//! materializes the full table over all `C(n, k)` subsets and is the ground
//! truth for every statistical test in this crate.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::Error;
use crate::Result;

/// Refuse enumeration once `C(n,k) * k!` exceeds this; the oracle is for
/// desk-scale tests only.
pub const ENUMERATION_LIMIT: f64 = 1e7;

/// Strictly validated nonnegative item weights, the parameters of the
/// subset distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct Weights {
    values: Vec<f64>,
}

impl Weights {
    /// Validates: non-empty, every value finite and >= 0, at least one > 0.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyWeights);
        }
        for (i, &w) in values.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidWeight(i, w));
            }
        }
        if values.iter().all(|&w| w == 0.0) {
            return Err(Error::ZeroNormalizer);
        }
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn normalizer(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Number of strictly positive weights; bounds the feasible k.
    pub fn positive_count(&self) -> usize {
        self.values.iter().filter(|&&w| w > 0.0).count()
    }
}

/// Ordered sequence of k distinct item selections (a sequence of one-hot
/// vectors, stored as indices).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WrsSample {
    indices: Vec<usize>,
}

impl WrsSample {
    pub fn new(indices: Vec<usize>, n: usize) -> Result<Self> {
        let mut seen = vec![false; n];
        for &i in &indices {
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, n });
            }
            if seen[i] {
                return Err(Error::DuplicateIndex(i));
            }
            seen[i] = true;
        }
        Ok(Self { indices })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn k(&self) -> usize {
        self.indices.len()
    }

    /// Forgets order, producing the k-hot mask over n items.
    pub fn to_mask(&self, n: usize) -> Result<SubsetMask> {
        let mut bits = vec![false; n];
        for &i in &self.indices {
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, n });
            }
            bits[i] = true;
        }
        SubsetMask::new(bits)
    }
}

/// Exact k-hot indicator of a chosen subset.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubsetMask {
    bits: Vec<bool>,
}

impl SubsetMask {
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::InvalidMask("empty mask".into()));
        }
        Ok(Self { bits })
    }

    pub fn from_indices(indices: &[usize], n: usize) -> Result<Self> {
        let mut bits = vec![false; n];
        for &i in indices {
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, n });
            }
            if bits[i] {
                return Err(Error::DuplicateIndex(i));
            }
            bits[i] = true;
        }
        Self::new(bits)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn n(&self) -> usize {
        self.bits.len()
    }

    pub fn k(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Canonical identity: the sorted index set.
    pub fn support(&self) -> Vec<usize> {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect()
    }

    /// Canonical string key, indices joined by "-".
    pub fn key(&self) -> String {
        subset_key(&self.support())
    }
}

/// Sorted indices joined by "-", e.g. "2-3".
pub fn subset_key(sorted_indices: &[usize]) -> String {
    let mut s = String::new();
    for (pos, &i) in sorted_indices.iter().enumerate() {
        if pos > 0 {
            s.push('-');
        }
        let _ = write!(s, "{i}");
    }
    s
}

/// Probability of drawing the ordered sequence `s` without replacement with
/// probabilities proportional to the weights.
///
/// Zero-weight items give probability 0; the product switches to log space
/// if any factor underflows toward 1e-300.
pub fn sequence_probability(w: &Weights, s: &WrsSample) -> Result<f64> {
    let n = w.len();
    let k = s.k();
    if k > n {
        return Err(Error::KTooLarge { k, n });
    }
    let mut seen = vec![false; n];
    for &i in s.indices() {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, n });
        }
        if seen[i] {
            return Err(Error::DuplicateIndex(i));
        }
        seen[i] = true;
    }

    let mut remaining = w.normalizer();
    let mut factors = Vec::with_capacity(k);
    for &i in s.indices() {
        let wi = w.values()[i];
        if wi == 0.0 {
            return Ok(0.0);
        }
        if remaining <= 0.0 {
            return Ok(0.0);
        }
        factors.push(wi / remaining);
        remaining -= wi;
    }
    if factors.iter().any(|&f| f < 1e-300) {
        let log_p: f64 = factors.iter().map(|f| f.ln()).sum();
        Ok(log_p.exp())
    } else {
        Ok(factors.iter().product())
    }
}

/// Probability of an unordered subset: the sum of `sequence_probability`
/// over all k! orderings of the mask's support.
pub fn subset_probability(w: &Weights, mask: &SubsetMask) -> Result<f64> {
    let n = w.len();
    if mask.n() != n {
        return Err(Error::InvalidMask(format!(
            "mask length {} does not match {} weights",
            mask.n(),
            n
        )));
    }
    let support = mask.support();
    let k = support.len();
    if k > n {
        return Err(Error::KTooLarge { k, n });
    }
    let cost = factorial_f64(k);
    if cost > ENUMERATION_LIMIT {
        return Err(Error::EnumerationLimit {
            cost,
            limit: ENUMERATION_LIMIT,
        });
    }

    let mut total = 0.0;
    for perm in permutations(&support) {
        let seq = WrsSample::new(perm, n)?;
        total += sequence_probability(w, &seq)?;
    }
    Ok(total)
}

/// Exact distribution table over all `C(n, k)` subsets, keyed canonically by
/// sorted index set.
#[derive(Debug, Clone)]
pub struct DistributionTable {
    n: usize,
    k: usize,
    probs: BTreeMap<Vec<usize>, f64>,
}

impl DistributionTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn probabilities(&self) -> &BTreeMap<Vec<usize>, f64> {
        &self.probs
    }

    pub fn probability(&self, sorted_indices: &[usize]) -> Option<f64> {
        self.probs.get(sorted_indices).copied()
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.values().sum()
    }

    /// CSV with columns `subset,probability`; subset is sorted indices
    /// joined by "-".
    pub fn to_csv(&self) -> String {
        let mut out = String::from("subset,probability\n");
        for (subset, p) in &self.probs {
            let _ = writeln!(out, "{},{}", subset_key(subset), p);
        }
        out
    }

    /// JSON map from canonical subset key to probability.
    pub fn to_json(&self) -> serde_json::Value {
        let map: serde_json::Map<String, serde_json::Value> = self
            .probs
            .iter()
            .map(|(subset, &p)| (subset_key(subset), serde_json::json!(p)))
            .collect();
        serde_json::Value::Object(map)
    }
}

/// Materializes the subset distribution over every k-subset of n items.
/// Probabilities sum to 1 within 1e-12.
pub fn enumerate_subset_distribution(w: &Weights, k: usize) -> Result<DistributionTable> {
    let n = w.len();
    if k > n {
        return Err(Error::KTooLarge { k, n });
    }
    let cost = binomial_f64(n, k) * factorial_f64(k);
    if cost > ENUMERATION_LIMIT {
        return Err(Error::EnumerationLimit {
            cost,
            limit: ENUMERATION_LIMIT,
        });
    }

    let mut probs = BTreeMap::new();
    for subset in combinations(n, k) {
        let mask = SubsetMask::from_indices(&subset, n)?;
        let p = subset_probability(w, &mask)?;
        probs.insert(subset, p);
    }
    Ok(DistributionTable { n, k, probs })
}

fn factorial_f64(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

fn binomial_f64(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// All orderings of `items`, lexicographic over positions.
fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.is_empty() {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for (pos, &head) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(pos);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

/// All sorted k-subsets of {0, .., n-1}.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for i in start..n {
            current.push(i);
            rec(i + 1, n, k, current, out);
            current.pop();
        }
    }
    rec(0, n, k, &mut current, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(values: &[f64]) -> Weights {
        Weights::new(values.to_vec()).unwrap()
    }

    #[test]
    fn weights_validation() {
        assert!(matches!(Weights::new(vec![]), Err(Error::EmptyWeights)));
        assert!(matches!(
            Weights::new(vec![1.0, -0.5]),
            Err(Error::InvalidWeight(1, _))
        ));
        assert!(matches!(
            Weights::new(vec![1.0, f64::NAN]),
            Err(Error::InvalidWeight(1, _))
        ));
        assert!(matches!(
            Weights::new(vec![0.0, 0.0]),
            Err(Error::ZeroNormalizer)
        ));
        assert!(Weights::new(vec![0.0, 1.0]).is_ok());
    }

    #[test]
    fn sequence_probability_equal_weights() {
        // Any ordered pair from four equal weights has probability 1/12.
        let weights = w(&[1.0, 1.0, 1.0, 1.0]);
        for a in 0..4 {
            for b in 0..4 {
                if a == b {
                    continue;
                }
                let s = WrsSample::new(vec![a, b], 4).unwrap();
                let p = sequence_probability(&weights, &s).unwrap();
                assert!((p - 1.0 / 12.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn sequence_probability_hand_value() {
        let weights = w(&[0.1, 0.2, 0.3, 0.4]);
        let s = WrsSample::new(vec![3, 2], 4).unwrap();
        let p = sequence_probability(&weights, &s).unwrap();
        // 0.4/1.0 * 0.3/0.6 = 0.2
        assert!((p - 0.2).abs() < 1e-15);
    }

    #[test]
    fn sequence_probability_k1_softmax() {
        let weights = w(&[0.3, 0.7]);
        let s = WrsSample::new(vec![1], 2).unwrap();
        assert!((sequence_probability(&weights, &s).unwrap() - 0.7).abs() < 1e-15);
    }

    #[test]
    fn sequence_probability_zero_weight_item() {
        let weights = w(&[0.5, 0.0, 0.5]);
        let s = WrsSample::new(vec![0, 1], 3).unwrap();
        assert_eq!(sequence_probability(&weights, &s).unwrap(), 0.0);
    }

    #[test]
    fn sequence_probability_rejects_bad_indices() {
        let weights = w(&[1.0, 2.0]);
        assert!(WrsSample::new(vec![2], 2).is_err());
        assert!(WrsSample::new(vec![0, 0], 2).is_err());
        let s = WrsSample::new(vec![2], 3).unwrap();
        assert!(matches!(
            sequence_probability(&weights, &s),
            Err(Error::IndexOutOfRange { .. })
        ));
        let s = WrsSample::new(vec![0, 1, 2], 3).unwrap();
        assert!(matches!(
            sequence_probability(&weights, &s),
            Err(Error::KTooLarge { .. })
        ));
    }

    #[test]
    fn subset_probability_hand_value() {
        let weights = w(&[0.1, 0.2, 0.3, 0.4]);
        let mask = SubsetMask::from_indices(&[2, 3], 4).unwrap();
        let p = subset_probability(&weights, &mask).unwrap();
        // 0.3/1.0*0.4/0.7 + 0.4/1.0*0.3/0.6
        let expected = 0.3 * 0.4 / 0.7 + 0.4 * 0.3 / 0.6;
        assert!((p - expected).abs() < 1e-15);
        assert!((p - 0.371428).abs() < 1e-6);
    }

    #[test]
    fn subset_probability_full_subset_is_one() {
        let weights = w(&[1.0, 2.0, 3.0]);
        let mask = SubsetMask::from_indices(&[0, 1, 2], 3).unwrap();
        assert!((subset_probability(&weights, &mask).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn subset_probability_k1_softmax() {
        let weights = w(&[0.3, 0.7]);
        let mask = SubsetMask::from_indices(&[0], 2).unwrap();
        assert!((subset_probability(&weights, &mask).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn enumeration_sums_to_one_and_matches_oracle_entry() {
        let weights = w(&[0.1, 0.2, 0.3, 0.4]);
        let table = enumerate_subset_distribution(&weights, 2).unwrap();
        assert_eq!(table.probabilities().len(), 6);
        assert!((table.total_mass() - 1.0).abs() < 1e-12);
        let p23 = table.probability(&[2, 3]).unwrap();
        assert!((p23 - 0.371428).abs() < 1e-6);
    }

    #[test]
    fn enumeration_uniform_symmetry() {
        let weights = w(&[1.0, 1.0, 1.0]);
        let table = enumerate_subset_distribution(&weights, 2).unwrap();
        for &p in table.probabilities().values() {
            assert!((p - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn enumeration_zero_weights_concentrate() {
        let weights = w(&[0.5, 0.5, 0.0, 0.0]);
        let table = enumerate_subset_distribution(&weights, 2).unwrap();
        assert!((table.probability(&[0, 1]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn enumeration_limit_enforced() {
        let weights = w(&vec![1.0; 64]);
        assert!(matches!(
            enumerate_subset_distribution(&weights, 12),
            Err(Error::EnumerationLimit { .. })
        ));
    }

    #[test]
    fn table_csv_and_json_shapes() {
        let weights = w(&[0.3, 0.7]);
        let table = enumerate_subset_distribution(&weights, 1).unwrap();
        let csv = table.to_csv();
        assert!(csv.starts_with("subset,probability\n"));
        assert!(csv.contains("0,0.3"));
        let json = table.to_json();
        assert!((json["1"].as_f64().unwrap() - 0.7).abs() < 1e-12);
    }
}
