//! Joint inputs and the non-private reference functions: binary sum, gap
//! threshold and minimum window weight.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{invalid, Result};

/// The joint input `x ∈ {0,1}^n`, one bit per party.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVector {
    bits: Vec<u8>,
}

impl BitVector {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some(i) = bits.iter().position(|&b| b > 1) {
            return invalid(format!("entry {i} is {}, expected 0 or 1", bits[i]));
        }
        Ok(Self { bits })
    }

    pub fn zeros(n: usize) -> Self {
        Self { bits: vec![0; n] }
    }

    pub fn ones(n: usize) -> Self {
        Self { bits: vec![1; n] }
    }

    /// Bits of `value`, least significant first, padded to `n` entries.
    pub fn from_index(value: u64, n: usize) -> Self {
        Self {
            bits: (0..n).map(|i| ((value >> i) & 1) as u8).collect(),
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize) -> bool) -> Self {
        Self {
            bits: (0..n).map(|i| u8::from(f(i))).collect(),
        }
    }

    /// All `2^n` vectors of length `n`, in index order.
    pub fn all(n: usize) -> impl Iterator<Item = BitVector> {
        assert!(n < 64, "exhaustive enumeration limited to n < 64");
        (0..(1u64 << n)).map(move |v| BitVector::from_index(v, n))
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, i: usize) -> u8 {
        self.bits[i]
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.bits
    }

    pub fn iter(&self) -> impl Iterator<Item = u8> + '_ {
        self.bits.iter().copied()
    }

    pub fn with_flipped(&self, i: usize) -> Self {
        let mut bits = self.bits.clone();
        bits[i] ^= 1;
        Self { bits }
    }

    pub fn complement(&self) -> Self {
        Self {
            bits: self.bits.iter().map(|b| b ^ 1).collect(),
        }
    }

    pub fn concat(&self, other: &BitVector) -> Self {
        let mut bits = self.bits.clone();
        bits.extend_from_slice(&other.bits);
        Self { bits }
    }

    /// `y_i = x_{perm[i]}`. `perm` must be a permutation of `0..n`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.len()];
        if perm.len() != self.len() || perm.iter().any(|&p| p >= self.len() || std::mem::replace(&mut seen[p], true)) {
            return invalid("not a permutation of the party indices");
        }
        Ok(Self {
            bits: perm.iter().map(|&p| self.bits[p]).collect(),
        })
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bits {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// Which entry two vectors may differ on.
///
/// Vectors are `T`-neighbouring when they differ on one entry whose index is
/// outside `excluded`; `index` pins that entry when given.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NeighborSpec {
    pub index: Option<usize>,
    pub excluded: BTreeSet<usize>,
}

impl NeighborSpec {
    pub fn at(index: usize) -> Self {
        Self {
            index: Some(index),
            excluded: BTreeSet::new(),
        }
    }

    pub fn outside(excluded: impl IntoIterator<Item = usize>) -> Self {
        Self {
            index: None,
            excluded: excluded.into_iter().collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.index {
            Some(i) if self.excluded.contains(&i) => invalid(format!("index {i} is in the excluded set")),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GapParams {
    pub kappa: usize,
    pub tau: usize,
}

impl GapParams {
    pub fn new(kappa: usize, tau: usize) -> Result<Self> {
        if tau == 0 {
            return invalid("gap width tau must be positive");
        }
        Ok(Self { kappa, tau })
    }

    /// Whether the instance is well posed for `n` parties (`κ + τ ≤ n`).
    pub fn well_posed(&self, n: usize) -> bool {
        self.kappa + self.tau <= n
    }
}

/// Additive `(γ, τ)`-approximation target: the error exceeds `tau` with
/// probability at most `gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxSpec {
    pub gamma: f64,
    pub tau: f64,
}

impl ApproxSpec {
    pub fn new(gamma: f64, tau: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return invalid(format!("gamma = {gamma} outside [0, 1]"));
        }
        if !(tau >= 0.0) {
            return invalid(format!("tau = {tau} must be non-negative"));
        }
        Ok(Self { gamma, tau })
    }

    /// Empirical failure rate of `errors` against `tau`.
    pub fn failure_rate(&self, errors: &[f64]) -> f64 {
        if errors.is_empty() {
            return 0.0;
        }
        errors.iter().filter(|e| e.abs() > self.tau).count() as f64 / errors.len() as f64
    }

    pub fn is_met_by(&self, errors: &[f64]) -> bool {
        self.failure_rate(errors) <= self.gamma
    }
}

/// Output of the promise threshold function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GapOutcome {
    Zero,
    One,
    /// The input violates the promise: `κ < sum < κ + τ`.
    Undefined,
}

impl GapOutcome {
    pub fn as_bit(self) -> Option<u8> {
        match self {
            GapOutcome::Zero => Some(0),
            GapOutcome::One => Some(1),
            GapOutcome::Undefined => None,
        }
    }
}

pub fn sum(x: &BitVector) -> usize {
    x.bits.iter().map(|&b| b as usize).sum()
}

pub fn gap_threshold(x: &BitVector, p: GapParams) -> GapOutcome {
    let s = sum(x);
    if s <= p.kappa {
        GapOutcome::Zero
    } else if s >= p.kappa + p.tau {
        GapOutcome::One
    } else {
        GapOutcome::Undefined
    }
}

/// Minimum weight over all length-`window` substrings of `x`.
pub fn dist_alpha(x: &BitVector, window: usize) -> Result<usize> {
    if window == 0 || window > x.len() {
        return invalid(format!("window {window} must be in 1..={}", x.len()));
    }
    let bits = x.as_slice();
    let mut weight: usize = bits[..window].iter().map(|&b| b as usize).sum();
    let mut best = weight;
    for i in window..bits.len() {
        weight = weight + bits[i] as usize - bits[i - window] as usize;
        best = best.min(weight);
    }
    Ok(best)
}

/// Minimum window weight with starts restricted to multiples of `interval`.
///
/// Requires `interval | n` and `interval | window`, so every candidate window
/// is a whole number of intervals.
pub fn dist_alpha_gridded(x: &BitVector, window: usize, interval: usize) -> Result<usize> {
    let n = x.len();
    check_grid(n, window, interval)?;
    let sums = interval_sums(x, interval);
    Ok(min_window_of_intervals(&sums, window / interval) as usize)
}

pub(crate) fn check_grid(n: usize, window: usize, interval: usize) -> Result<()> {
    if window == 0 || window > n {
        return invalid(format!("window {window} must be in 1..={n}"));
    }
    if interval == 0 || n % interval != 0 {
        return invalid(format!("interval {interval} must divide n = {n}"));
    }
    if window % interval != 0 {
        return invalid(format!("interval {interval} must divide window {window}"));
    }
    Ok(())
}

pub(crate) fn interval_sums(x: &BitVector, interval: usize) -> Vec<i64> {
    x.as_slice()
        .chunks(interval)
        .map(|c| c.iter().map(|&b| b as i64).sum())
        .collect()
}

/// Minimum over all runs of `span` consecutive entries of their sum.
pub(crate) fn min_window_of_intervals<T>(sums: &[T], span: usize) -> T
where
    T: Copy + PartialOrd + std::ops::Add<Output = T> + std::ops::Sub<Output = T>,
{
    let mut acc = sums[0];
    for &s in &sums[1..span] {
        acc = acc + s;
    }
    let mut best = acc;
    for k in span..sums.len() {
        acc = acc + sums[k] - sums[k - span];
        if acc < best {
            best = acc;
        }
    }
    best
}

/// Whether `x` and `y` differ in exactly one position, honouring `spec`.
pub fn is_neighbor(x: &BitVector, y: &BitVector, spec: Option<&NeighborSpec>) -> Result<bool> {
    if x.len() != y.len() {
        return invalid(format!("length mismatch: {} vs {}", x.len(), y.len()));
    }
    if let Some(spec) = spec {
        spec.validate()?;
    }
    let mut diff = x.iter().zip(y.iter()).enumerate().filter(|(_, (a, b))| a != b).map(|(i, _)| i);
    let (Some(i), None) = (diff.next(), diff.next()) else {
        return Ok(false);
    };
    Ok(match spec {
        None => true,
        Some(s) => s.index.map_or(true, |j| j == i) && !s.excluded.contains(&i),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bv(bits: &[u8]) -> BitVector {
        BitVector::new(bits.to_vec()).unwrap()
    }

    fn naive_dist(x: &BitVector, w: usize) -> usize {
        (0..=x.len() - w).map(|i| x.as_slice()[i..i + w].iter().map(|&b| b as usize).sum()).min().unwrap()
    }

    #[test]
    fn rejects_non_bits() {
        assert!(BitVector::new(vec![0, 2]).is_err());
    }

    #[test]
    fn sum_examples() {
        assert_eq!(sum(&BitVector::zeros(9)), 0);
        assert_eq!(sum(&BitVector::ones(5)), 5);
        assert_eq!(sum(&bv(&[1, 0, 1, 1, 0])), 3);
    }

    #[test]
    fn gap_examples() {
        let p = GapParams::new(0, 5).unwrap();
        let with_sum = |s: usize| BitVector::from_fn(10, |i| i < s);
        assert_eq!(gap_threshold(&with_sum(0), p), GapOutcome::Zero);
        assert_eq!(gap_threshold(&with_sum(7), p), GapOutcome::One);
        assert_eq!(gap_threshold(&with_sum(3), p), GapOutcome::Undefined);
        assert!(GapParams::new(0, 0).is_err());
    }

    #[test]
    fn dist_alpha_examples() {
        assert_eq!(dist_alpha(&BitVector::zeros(10), 4).unwrap(), 0);
        assert_eq!(dist_alpha(&BitVector::ones(10), 4).unwrap(), 4);
        let x = bv(&[1, 1, 0, 0, 0, 1, 1, 1]);
        assert_eq!(dist_alpha(&x, 3).unwrap(), naive_dist(&x, 3));
        assert_eq!(dist_alpha(&x, 3).unwrap(), 0);
        assert!(dist_alpha(&x, 9).is_err());
    }

    #[test]
    fn gridded_examples() {
        assert_eq!(dist_alpha_gridded(&BitVector::zeros(12), 4, 2).unwrap(), 0);
        assert_eq!(dist_alpha_gridded(&BitVector::ones(12), 4, 2).unwrap(), 4);
        assert!(dist_alpha_gridded(&BitVector::zeros(12), 4, 5).is_err());
        assert!(dist_alpha_gridded(&BitVector::zeros(12), 6, 4).is_err());
    }

    #[test]
    fn sliding_window_matches_naive_exhaustively() {
        for n in 1..=16 {
            for x in BitVector::all(n) {
                for w in 1..=n {
                    assert_eq!(dist_alpha(&x, w).unwrap(), naive_dist(&x, w), "x={x} w={w}");
                }
            }
        }
    }

    #[test]
    fn grid_bounds_exhaustive_16() {
        for x in BitVector::all(16) {
            for (w, g) in [(4, 1), (4, 2), (4, 4), (8, 2), (8, 4), (16, 8)] {
                let exact = dist_alpha(&x, w).unwrap();
                let grid = dist_alpha_gridded(&x, w, g).unwrap();
                assert!(grid >= exact);
                // shifting the best window back to the grid adds at most g - 1 ones
                assert!(grid <= exact + g - 1, "x={x} w={w} g={g}");
                if g == 1 {
                    assert_eq!(grid, exact);
                }
            }
        }
    }

    #[test]
    fn neighbor_examples() {
        let z = bv(&[0, 0, 0]);
        assert!(is_neighbor(&z, &bv(&[0, 1, 0]), None).unwrap());
        assert!(!is_neighbor(&z, &z, None).unwrap());
        assert!(!is_neighbor(&z, &bv(&[1, 1, 0]), None).unwrap());
        assert!(is_neighbor(&z, &bv(&[0, 0]), None).is_err());
        let t = NeighborSpec::outside([1]);
        assert!(!is_neighbor(&z, &bv(&[0, 1, 0]), Some(&t)).unwrap());
        assert!(is_neighbor(&z, &bv(&[1, 0, 0]), Some(&t)).unwrap());
        assert!(!is_neighbor(&z, &bv(&[1, 0, 0]), Some(&NeighborSpec::at(2))).unwrap());
        let bad = NeighborSpec { index: Some(1), excluded: [1].into() };
        assert!(is_neighbor(&z, &bv(&[0, 1, 0]), Some(&bad)).is_err());
    }

    #[test]
    fn approx_spec_counts_failures() {
        let a = ApproxSpec::new(0.25, 1.0).unwrap();
        assert_eq!(a.failure_rate(&[0.5, -2.0, 1.0, 0.0]), 0.25);
        assert!(a.is_met_by(&[0.5, -2.0, 1.0, 0.0]));
        assert!(ApproxSpec::new(1.5, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn sum_within_range(bits in prop::collection::vec(0u8..2, 0..200)) {
            let x = BitVector::new(bits).unwrap();
            prop_assert!(sum(&x) <= x.len());
        }

        #[test]
        fn gap_agrees_with_sign_test(bits in prop::collection::vec(0u8..2, 1..60), kappa in 0usize..30, tau in 1usize..30) {
            let x = BitVector::new(bits).unwrap();
            let s = x.iter().filter(|&b| b == 1).count() as i64;
            let out = gap_threshold(&x, GapParams { kappa, tau });
            match out {
                GapOutcome::Zero => prop_assert!(s - kappa as i64 <= 0),
                GapOutcome::One => prop_assert!(s - (kappa + tau) as i64 >= 0),
                GapOutcome::Undefined => prop_assert!(s > kappa as i64 && s < (kappa + tau) as i64),
            }
        }

        #[test]
        fn complement_and_permutation_preserve_structure(bits in prop::collection::vec(0u8..2, 1..40)) {
            let x = BitVector::new(bits).unwrap();
            prop_assert_eq!(sum(&x) + sum(&x.complement()), x.len());
            let rev: Vec<usize> = (0..x.len()).rev().collect();
            prop_assert_eq!(sum(&x.permuted(&rev).unwrap()), sum(&x));
        }
    }
}
