//! Edit distances over unit sequences.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::leader::ScanOrder;
use crate::Unit;

/// Parameters of the keyword clustering stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MiningConfig {
    /// Cluster radius.
    pub radius_t: f64,
    /// Minimum centroid separation, as a multiple of the radius.
    pub sep_a: f64,
    /// Scale of the normalized edit distance.
    pub norm_b: f64,
    pub min_length: usize,
    /// Order in which the clustering scan visits sequences.
    pub scan_order: ScanOrder,
}

impl Default for MiningConfig {
    fn default() -> Self {
        Self { radius_t: 1.4, sep_a: 1.8, norm_b: 4.0, min_length: 4, scan_order: ScanOrder::Frequency }
    }
}

impl MiningConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("radius T", self.radius_t), ("separation a", self.sep_a), ("normalization b", self.norm_b)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid_param(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Distance a new centroid must exceed from every existing one.
    pub fn separation(&self) -> f64 {
        self.sep_a * self.radius_t
    }
}

/// Unit-cost Levenshtein distance, two-row dynamic programme.
pub fn levenshtein(x: &[Unit], y: &[Unit]) -> usize {
    let (x, y) = if x.len() < y.len() { (y, x) } else { (x, y) };
    if y.is_empty() {
        return x.len();
    }
    let mut prev: Vec<usize> = (0..=y.len()).collect();
    let mut cur = vec![0; y.len() + 1];
    for (i, &a) in x.iter().enumerate() {
        cur[0] = i + 1;
        for (j, &b) in y.iter().enumerate() {
            let sub = prev[j] + usize::from(a != b);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[y.len()]
}

/// `b * L(x, y) / sqrt(|x|^2 + |y|^2)`; longer sequences tolerate more edits.
pub fn normalized_levenshtein(x: &[Unit], y: &[Unit], b: f64) -> Result<f64> {
    if x.is_empty() && y.is_empty() {
        return Err(Error::invalid_input("normalized distance of two empty sequences"));
    }
    Ok(normalized_unchecked(x, y, b))
}

pub(crate) fn normalized_unchecked(x: &[Unit], y: &[Unit], b: f64) -> f64 {
    let d = levenshtein(x, y);
    if d == 0 {
        return 0.0;
    }
    let (nx, ny) = (x.len() as f64, y.len() as f64);
    b * d as f64 / (nx * nx + ny * ny).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Exponential recursion straight from the definition.
    fn naive(x: &[Unit], y: &[Unit]) -> usize {
        match (x.split_first(), y.split_first()) {
            (None, _) => y.len(),
            (_, None) => x.len(),
            (Some((a, xs)), Some((b, ys))) => {
                let sub = naive(xs, ys) + usize::from(a != b);
                sub.min(naive(xs, y) + 1).min(naive(x, ys) + 1)
            }
        }
    }

    fn all_binary(max_len: usize) -> Vec<Vec<Unit>> {
        let mut out = vec![vec![]];
        for len in 1..=max_len {
            for bits in 0..(1u32 << len) {
                out.push((0..len).map(|i| (bits >> i) & 1).collect());
            }
        }
        out
    }

    #[test]
    fn examples() {
        assert_eq!(levenshtein(&[1, 2, 3], &[1, 2, 3]), 0);
        assert_eq!(levenshtein(&[], &[4, 4, 4]), 3);
        assert_eq!(levenshtein(&[1, 2, 3, 4, 5], &[1, 2, 9, 4, 5]), 1);
        assert_eq!(naive(&[1, 2, 3, 4, 5], &[1, 2, 9, 4, 5]), 1);
    }

    #[test]
    fn normalized_examples() {
        let x = [1, 2, 3, 4, 5];
        assert_eq!(normalized_levenshtein(&x, &x, 4.0).unwrap(), 0.0);
        let d = normalized_levenshtein(&x, &[1, 2, 9, 4, 5], 4.0).unwrap();
        assert!((d - 4.0 / 50f64.sqrt()).abs() < 1e-12);
        assert!(normalized_levenshtein(&[], &[], 4.0).is_err());
        // one side empty is fine: L = |y|
        assert!((normalized_levenshtein(&[], &[1, 2], 1.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn metric_axioms_on_short_binary_strings() {
        let all = all_binary(4);
        for x in &all {
            for y in &all {
                let dxy = levenshtein(x, y);
                assert_eq!(dxy, levenshtein(y, x));
                assert_eq!(dxy == 0, x == y);
                for z in &all {
                    assert!(levenshtein(x, z) <= dxy + levenshtein(y, z));
                }
            }
        }
    }

    #[test]
    fn longer_sequences_tolerate_more_edits() {
        let short = normalized_levenshtein(&[0; 5], &[0, 0, 1, 0, 0], 4.0).unwrap();
        let long = normalized_levenshtein(&[0; 10], &[0, 0, 1, 0, 0, 0, 0, 0, 0, 0], 4.0).unwrap();
        assert!(long < short);
    }

    #[test]
    fn config_validation() {
        assert!(MiningConfig::default().validate().is_ok());
        assert!((MiningConfig::default().separation() - 2.52).abs() < 1e-12);
        let bad = MiningConfig { radius_t: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = MiningConfig { sep_a: f64::NAN, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    mod props {
        use proptest::prelude::*;

        use super::super::*;

        proptest! {
            #[test]
            fn normalized_is_symmetric_and_linear_in_b(
                x in proptest::collection::vec(0u32..6, 1..12),
                y in proptest::collection::vec(0u32..6, 0..12),
                b in 0.1f64..10.0,
            ) {
                let d = normalized_levenshtein(&x, &y, b).unwrap();
                prop_assert_eq!(d, normalized_levenshtein(&y, &x, b).unwrap());
                let d1 = normalized_levenshtein(&x, &y, 1.0).unwrap();
                prop_assert!((d - b * d1).abs() <= 1e-9 * d.max(1.0));
            }
        }
    }
}
