//! Summary statistics and chi-squared tests used by the audits.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{invalid, Result};

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

pub fn std_dev(xs: &[f64]) -> f64 {
    variance(xs).sqrt()
}

/// Standard error of the sample mean.
pub fn standard_error(xs: &[f64]) -> f64 {
    (variance(xs) / xs.len() as f64).sqrt()
}

/// Standard error of an empirical frequency `p` over `n` trials.
pub fn proportion_se(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquaredTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

impl ChiSquaredTest {
    fn from_statistic(statistic: f64, dof: usize) -> Result<Self> {
        if dof == 0 {
            return Ok(Self {
                statistic,
                dof,
                p_value: 1.0,
            });
        }
        let dist = ChiSquared::new(dof as f64).map_err(|e| crate::Error::InvalidArgument(e.to_string()))?;
        Ok(Self {
            statistic,
            dof,
            p_value: dist.sf(statistic),
        })
    }

    pub fn rejects_at(&self, significance: f64) -> bool {
        self.p_value < significance
    }
}

/// Goodness of fit of `observed` counts to the cell probabilities `expected`.
/// Cells with zero expected probability must have zero counts.
pub fn chi_squared_gof(observed: &[u64], expected: &[f64]) -> Result<ChiSquaredTest> {
    if observed.len() != expected.len() || observed.is_empty() {
        return invalid("observed and expected cells must match and be non-empty");
    }
    let total: u64 = observed.iter().sum();
    let mut stat = 0.0;
    let mut cells = 0;
    for (&o, &p) in observed.iter().zip(expected) {
        if p <= 0.0 {
            if o > 0 {
                return Ok(ChiSquaredTest {
                    statistic: f64::INFINITY,
                    dof: observed.len() - 1,
                    p_value: 0.0,
                });
            }
            continue;
        }
        let e = p * total as f64;
        stat += (o as f64 - e).powi(2) / e;
        cells += 1;
    }
    ChiSquaredTest::from_statistic(stat, cells.max(1) - 1)
}

/// Two-sample homogeneity test on paired histograms. Cells empty in both
/// samples are dropped.
pub fn chi_squared_two_sample(a: &[u64], b: &[u64]) -> Result<ChiSquaredTest> {
    if a.len() != b.len() {
        return invalid("histograms must have the same number of cells");
    }
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    if na == 0.0 || nb == 0.0 {
        return invalid("both samples must be non-empty");
    }
    let mut stat = 0.0;
    let mut cells = 0;
    for (&x, &y) in a.iter().zip(b) {
        let total = (x + y) as f64;
        if total == 0.0 {
            continue;
        }
        let ea = total * na / (na + nb);
        let eb = total * nb / (na + nb);
        stat += (x as f64 - ea).powi(2) / ea + (y as f64 - eb).powi(2) / eb;
        cells += 1;
    }
    ChiSquaredTest::from_statistic(stat, cells.max(1) - 1)
}

/// Counts of integer-valued samples over `lo..=hi`; values outside are
/// clamped into the end cells.
pub fn histogram(values: impl IntoIterator<Item = i64>, lo: i64, hi: i64) -> Vec<u64> {
    let mut h = vec![0u64; (hi - lo + 1) as usize];
    for v in values {
        h[(v.clamp(lo, hi) - lo) as usize] += 1;
    }
    h
}
