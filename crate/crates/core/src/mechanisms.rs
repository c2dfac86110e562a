//! Noise primitives and single-party sanitizers.
//!
//! Laplace noise is drawn by inverting the CDF of a uniform draw from the
//! open interval `(0, 1)`; Gaussian noise uses the ziggurat sampler from
//! `rand_distr`. Both take their randomness from the caller.

use rand::distr::Open01;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::domain::BitVector;
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrivacyParams {
    pub epsilon: f64,
    pub delta: f64,
}

impl PrivacyParams {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        if !(0.0..1.0).contains(&delta) {
            return invalid(format!("delta = {delta} outside [0, 1)"));
        }
        Ok(Self { epsilon, delta })
    }

    pub fn pure(epsilon: f64) -> Result<Self> {
        Self::new(epsilon, 0.0)
    }
}

pub(crate) fn check_epsilon(eps: f64) -> Result<()> {
    if !(eps > 0.0) || !eps.is_finite() {
        return invalid(format!("epsilon = {eps} must be positive and finite"));
    }
    Ok(())
}

/// Scale `λ` of the Laplace distribution with density `exp(-|y|/λ) / 2λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceParams {
    pub lambda: f64,
}

impl LaplaceParams {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return invalid(format!("laplace scale {lambda} must be positive"));
        }
        Ok(Self { lambda })
    }

    pub fn density(&self, y: f64) -> f64 {
        (-y.abs() / self.lambda).exp() / (2.0 * self.lambda)
    }

    /// `Pr[|Y| > k·λ] = e^{-k}`.
    pub fn tail(&self, k: f64) -> f64 {
        (-k).exp()
    }
}

pub fn sample_laplace<R: Rng + ?Sized>(p: LaplaceParams, rng: &mut R) -> f64 {
    let u: f64 = rng.sample::<f64, _>(Open01) - 0.5;
    -p.lambda * u.signum() * (1.0 - 2.0 * u.abs()).ln()
}

pub fn sample_gaussian<R: Rng + ?Sized>(mu: f64, sigma2: f64, rng: &mut R) -> Result<f64> {
    if !(sigma2 >= 0.0) || !sigma2.is_finite() {
        return invalid(format!("variance {sigma2} must be non-negative"));
    }
    if sigma2 == 0.0 {
        return Ok(mu);
    }
    let z: f64 = StandardNormal.sample(rng);
    Ok(mu + sigma2.sqrt() * z)
}

/// Randomized-response bias: a bit is kept with probability `0.5 + flip_bias`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlipParams {
    pub flip_bias: f64,
}

impl FlipParams {
    pub fn new(flip_bias: f64) -> Result<Self> {
        if !(flip_bias > 0.0 && flip_bias < 0.5) {
            return invalid(format!("flip bias {flip_bias} outside (0, 0.5)"));
        }
        Ok(Self { flip_bias })
    }

    pub fn keep_prob(&self) -> f64 {
        0.5 + self.flip_bias
    }

    /// The ε for which `(0.5+α)/(0.5−α) = 1 + ε`, i.e. `2α / (0.5 − α)`.
    pub fn ratio_epsilon(&self) -> f64 {
        2.0 * self.flip_bias / (0.5 - self.flip_bias)
    }
}

/// `α = ε / (4 + 2ε)`, the bias that makes the keep/flip ratio exactly `1 + ε`.
pub fn flip_bias_for(eps: f64) -> Result<FlipParams> {
    check_epsilon(eps)?;
    Ok(FlipParams {
        flip_bias: eps / (4.0 + 2.0 * eps),
    })
}

pub fn flip<R: Rng + ?Sized>(x: u8, p: FlipParams, rng: &mut R) -> u8 {
    debug_assert!(x <= 1);
    if rng.random::<f64>() < p.keep_prob() {
        x
    } else {
        1 - x
    }
}

pub fn flip_output_prob(x: u8, out: u8, p: FlipParams) -> f64 {
    if x == out {
        0.5 + p.flip_bias
    } else {
        0.5 - p.flip_bias
    }
}

/// Global sensitivity `GS_f` of a real-valued function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivitySpec {
    pub gs: f64,
}

impl SensitivitySpec {
    pub fn new(gs: f64) -> Result<Self> {
        if !(gs >= 0.0) || !gs.is_finite() {
            return invalid(format!("sensitivity {gs} must be non-negative"));
        }
        Ok(Self { gs })
    }

    /// Maximum of `|f(x) − f(x')|` over all neighbouring `x, x' ∈ {0,1}^n`.
    pub fn by_enumeration(n: usize, f: impl Fn(&BitVector) -> f64) -> Self {
        let mut gs: f64 = 0.0;
        for x in BitVector::all(n) {
            let fx = f(&x);
            for i in 0..n {
                gs = gs.max((fx - f(&x.with_flipped(i))).abs());
            }
        }
        Self { gs }
    }
}

/// `f(x) + Lap(GS_f / ε)`. A zero sensitivity adds no noise at all.
pub fn laplace_mechanism<R: Rng + ?Sized>(f_value: f64, s: SensitivitySpec, eps: f64, rng: &mut R) -> Result<f64> {
    check_epsilon(eps)?;
    if s.gs == 0.0 {
        return Ok(f_value);
    }
    Ok(f_value + sample_laplace(LaplaceParams::new(s.gs / eps)?, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain;
    use crate::rng::seeded;

    const N: usize = 1_000_000;

    #[test]
    fn laplace_moments_and_tails() {
        let mut rng = seeded(1);
        let p = LaplaceParams::new(1.0).unwrap();
        let ys: Vec<f64> = (0..N).map(|_| sample_laplace(p, &mut rng)).collect();
        let mean = ys.iter().sum::<f64>() / N as f64;
        assert!(mean.abs() < 0.005, "mean {mean}");
        for k in [1.0, 2.0, 3.0] {
            let tail = ys.iter().filter(|y| y.abs() > k).count() as f64 / N as f64;
            assert!((tail - (-k).exp()).abs() < 0.003, "k={k} tail={tail}");
        }
        let p2 = LaplaceParams::new(2.0).unwrap();
        let ys: Vec<f64> = (0..N).map(|_| sample_laplace(p2, &mut rng)).collect();
        let m = ys.iter().sum::<f64>() / N as f64;
        let var = ys.iter().map(|y| (y - m).powi(2)).sum::<f64>() / (N - 1) as f64;
        assert!((var - 8.0).abs() < 0.1, "var {var}");
    }

    #[test]
    fn gaussian_degenerate_and_variance() {
        let mut rng = seeded(2);
        assert_eq!(sample_gaussian(0.0, 0.0, &mut rng).unwrap(), 0.0);
        assert_eq!(sample_gaussian(3.5, 0.0, &mut rng).unwrap(), 3.5);
        assert!(sample_gaussian(0.0, -1.0, &mut rng).is_err());
        let ys: Vec<f64> = (0..N).map(|_| sample_gaussian(0.0, 4.0, &mut rng).unwrap()).collect();
        let m = ys.iter().sum::<f64>() / N as f64;
        let var = ys.iter().map(|y| (y - m).powi(2)).sum::<f64>() / (N - 1) as f64;
        assert!((var - 4.0).abs() < 0.05, "var {var}");
    }

    #[test]
    fn gaussian_variance_is_additive() {
        let mut rng = seeded(3);
        let (n, sigma2, reps) = (100, 9.0, 20_000);
        let sums: Vec<f64> = (0..reps)
            .map(|_| (0..n).map(|_| sample_gaussian(0.0, sigma2 / n as f64, &mut rng).unwrap()).sum())
            .collect();
        let m = sums.iter().sum::<f64>() / reps as f64;
        let var = sums.iter().map(|y| (y - m).powi(2)).sum::<f64>() / (reps - 1) as f64;
        assert!((var / sigma2 - 1.0).abs() < 0.05, "var {var}");
    }

    #[test]
    fn flip_bias_formula() {
        assert!((flip_bias_for(1.0).unwrap().flip_bias - 1.0 / 6.0).abs() < 1e-15);
        assert!((flip_bias_for(2.0).unwrap().flip_bias - 0.25).abs() < 1e-15);
        assert!(flip_bias_for(1e-12).unwrap().flip_bias < 1e-12);
        assert!(flip_bias_for(0.0).is_err());
        assert!(flip_bias_for(-1.0).is_err());
        assert!(FlipParams::new(0.5).is_err());
    }

    #[test]
    fn flip_oracle_values() {
        let p = FlipParams::new(1.0 / 6.0).unwrap();
        assert!((flip_output_prob(1, 1, p) - 2.0 / 3.0).abs() < 1e-15);
        assert!((flip_output_prob(1, 0, p) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(flip_output_prob(0, 0, FlipParams::new(0.25).unwrap()), 0.75);
        for eps in [0.1, 0.5, 1.0, 2.0] {
            let p = flip_bias_for(eps).unwrap();
            let ratio = flip_output_prob(1, 1, p) / flip_output_prob(0, 1, p);
            assert!((ratio - (1.0 + eps)).abs() < 1e-12);
            assert!((p.ratio_epsilon() - eps).abs() < 1e-12);
            for x in 0..2 {
                assert!((flip_output_prob(x, 0, p) + flip_output_prob(x, 1, p) - 1.0).abs() < 1e-15);
            }
        }
        let near_half = FlipParams::new(0.5 - 1e-9).unwrap();
        assert!(flip_output_prob(1, 1, near_half) > 1.0 - 1e-8);
    }

    #[test]
    fn exact_flip_epsilon_is_log_one_plus_eps() {
        for bias in [0.05, 1.0 / 6.0, 0.3, 0.45] {
            let p = FlipParams::new(bias).unwrap();
            let mut worst = f64::NEG_INFINITY;
            for (x, y, out) in triples(2) {
                worst = worst.max((flip_output_prob(x, out, p) / flip_output_prob(y, out, p)).ln());
            }
            assert!((worst - p.ratio_epsilon().ln_1p()).abs() < 1e-12);
            assert!(p.ratio_epsilon().ln_1p() <= p.ratio_epsilon());
        }
    }

    fn triples(k: u8) -> Vec<(u8, u8, u8)> {
        let mut v = Vec::new();
        for x in 0..k {
            for y in 0..k {
                for o in 0..k {
                    v.push((x, y, o));
                }
            }
        }
        v
    }

    #[test]
    fn empirical_flip_matches_oracle() {
        let mut rng = seeded(4);
        let p = FlipParams::new(1.0 / 6.0).unwrap();
        for x in 0..2u8 {
            let ones = (0..N).filter(|_| flip(x, p, &mut rng) == 1).count() as f64 / N as f64;
            let q = flip_output_prob(x, 1, p);
            let se = (q * (1.0 - q) / N as f64).sqrt();
            assert!((ones - q).abs() < 3.0 * se, "x={x} ones={ones}");
        }
    }

    #[test]
    fn laplace_mechanism_on_sum() {
        let s = SensitivitySpec::by_enumeration(6, |x| domain::sum(x) as f64);
        assert_eq!(s.gs, 1.0);
        let mut rng = seeded(5);
        let x = BitVector::from_fn(50, |i| i % 3 == 0);
        let f = domain::sum(&x) as f64;
        let fails = (0..N)
            .filter(|_| (laplace_mechanism(f, s, 1.0, &mut rng).unwrap() - f).abs() > 3.0)
            .count() as f64
            / N as f64;
        assert!((fails - (-3.0f64).exp()).abs() < 0.01);
        let zero = SensitivitySpec::new(0.0).unwrap();
        assert_eq!(laplace_mechanism(f, zero, 1.0, &mut rng).unwrap(), f);
        assert!(laplace_mechanism(f, s, 0.0, &mut rng).is_err());
    }

    #[test]
    fn privacy_params_validate() {
        assert!(PrivacyParams::new(1.0, 0.01).is_ok());
        assert!(PrivacyParams::new(0.0, 0.0).is_err());
        assert!(PrivacyParams::new(1.0, 1.0).is_err());
        assert!(PrivacyParams::pure(f64::NAN).is_err());
    }
}
