use rand::RngCore;

use crate::domain::{sum, BitVector, GapParams};
use crate::error::{invalid, Result};
use crate::local::laplace_submission_sum;
use crate::local::noninteractive::rr_estimate;
use crate::mechanisms::{check_epsilon, flip, flip_bias_for, FlipParams};

/// A protocol that estimates `SUM(x)`.
pub trait SumProtocol: Sync {
    fn estimate(&self, x: &BitVector, rng: &mut dyn RngCore) -> Result<f64>;

    fn rounds(&self) -> usize;

    fn message_count(&self, n: usize) -> usize;
}

/// A protocol that decides `GAP_{κ,τ}`.
pub trait GapProtocol: Sync {
    fn params(&self) -> GapParams;

    fn decide(&self, x: &BitVector, rng: &mut dyn RngCore) -> Result<u8>;

    fn rounds(&self) -> usize;

    fn message_count(&self, n: usize) -> usize;
}

/// Non-interactive randomized response with the debiased count estimator.
#[derive(Debug, Clone, Copy)]
pub struct RandomizedResponse {
    pub flip: FlipParams,
}

impl RandomizedResponse {
    pub fn new(eps: f64) -> Result<Self> {
        Ok(Self { flip: flip_bias_for(eps)? })
    }
}

impl SumProtocol for RandomizedResponse {
    fn estimate(&self, x: &BitVector, rng: &mut dyn RngCore) -> Result<f64> {
        let k = x.iter().filter(|&b| flip(b, self.flip, rng) == 1).count();
        Ok(rr_estimate(k, x.len(), self.flip))
    }

    fn rounds(&self) -> usize {
        1
    }

    fn message_count(&self, n: usize) -> usize {
        n
    }
}

/// Every party submits its bit plus Laplace noise.
#[derive(Debug, Clone, Copy)]
pub struct LaplaceSubmission {
    pub eps: f64,
}

impl LaplaceSubmission {
    pub fn new(eps: f64) -> Result<Self> {
        check_epsilon(eps)?;
        Ok(Self { eps })
    }
}

impl SumProtocol for LaplaceSubmission {
    fn estimate(&self, x: &BitVector, rng: &mut dyn RngCore) -> Result<f64> {
        Ok(laplace_submission_sum(x, self.eps, rng)?.0)
    }

    fn rounds(&self) -> usize {
        1
    }

    fn message_count(&self, n: usize) -> usize {
        n
    }
}

/// Noise-free reference: reports the true sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExactSum;

impl SumProtocol for ExactSum {
    fn estimate(&self, x: &BitVector, _rng: &mut dyn RngCore) -> Result<f64> {
        Ok(sum(x) as f64)
    }

    fn rounds(&self) -> usize {
        1
    }

    fn message_count(&self, n: usize) -> usize {
        n
    }
}

/// Thresholds a SUM estimate at `κ + τ/2`; an estimate exactly on the
/// threshold answers 0.
#[derive(Debug, Clone, Copy)]
pub struct SumToGap<P> {
    pub inner: P,
    pub params: GapParams,
}

pub fn sum_to_gap<P: SumProtocol>(inner: P, params: GapParams) -> SumToGap<P> {
    SumToGap { inner, params }
}

impl<P> SumToGap<P> {
    pub fn threshold(&self) -> f64 {
        self.params.kappa as f64 + self.params.tau as f64 / 2.0
    }

    pub fn classify(&self, estimate: f64) -> u8 {
        u8::from(estimate > self.threshold())
    }
}

impl<P: SumProtocol> GapProtocol for SumToGap<P> {
    fn params(&self) -> GapParams {
        self.params
    }

    fn decide(&self, x: &BitVector, rng: &mut dyn RngCore) -> Result<u8> {
        Ok(self.classify(self.inner.estimate(x, rng)?))
    }

    fn rounds(&self) -> usize {
        self.inner.rounds()
    }

    fn message_count(&self, n: usize) -> usize {
        self.inner.message_count(n)
    }
}

/// Runs an `n`-party `GAP_{κ,τ}` protocol as an `n/2`-party `GAP_{0,τ}`
/// protocol by letting one real party simulate the padding parties.
#[derive(Debug, Clone, Copy)]
pub struct GapKToGap0<G> {
    pub inner: G,
    pub n: usize,
}

pub fn gapk_to_gap0<G: GapProtocol>(inner: G, n: usize) -> Result<GapKToGap0<G>> {
    let GapParams { kappa, tau } = inner.params();
    if n % 2 != 0 {
        return invalid(format!("party count {n} must be even"));
    }
    if kappa + tau > n {
        return invalid(format!("kappa {kappa} exceeds n - tau = {}", n.saturating_sub(tau)));
    }
    Ok(GapKToGap0 { inner, n })
}

impl<G: GapProtocol> GapKToGap0<G> {
    fn padded(&self, x: &BitVector, ones: usize) -> BitVector {
        let half = self.n / 2;
        x.concat(&BitVector::from_fn(half, |i| i < ones))
    }
}

impl<G: GapProtocol> GapProtocol for GapKToGap0<G> {
    fn params(&self) -> GapParams {
        GapParams::new(0, self.inner.params().tau).expect("tau was validated by the inner protocol")
    }

    fn decide(&self, x: &BitVector, rng: &mut dyn RngCore) -> Result<u8> {
        let half = self.n / 2;
        if x.len() != half {
            return invalid(format!("expected {half} inputs, got {}", x.len()));
        }
        let GapParams { kappa, tau } = self.inner.params();
        if kappa <= half {
            self.inner.decide(&self.padded(x, kappa), rng)
        } else {
            let y = self.padded(x, self.n - kappa - tau);
            Ok(1 - self.inner.decide(&y.complement(), rng)?)
        }
    }

    fn rounds(&self) -> usize {
        self.inner.rounds()
    }

    fn message_count(&self, _n: usize) -> usize {
        self.inner.message_count(self.n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{gap_threshold, GapOutcome};
    use crate::montecarlo::run_trials;
    use crate::rng::seeded;

    #[test]
    fn tie_goes_to_zero() {
        let g = sum_to_gap(ExactSum, GapParams::new(3, 4).unwrap());
        assert_eq!(g.classify(5.0), 0);
        assert_eq!(g.classify(5.0 + 1e-9), 1);
        let x = BitVector::from_fn(10, |i| i < 7);
        assert_eq!(g.decide(&x, &mut seeded(0)).unwrap(), 1);
    }

    fn check_exhaustive(kappa: usize, tau: usize, n: usize) {
        let inner = sum_to_gap(ExactSum, GapParams::new(kappa, tau).unwrap());
        let reduced = gapk_to_gap0(inner, n).unwrap();
        let p0 = reduced.params();
        let mut rng = seeded(0);
        for x in BitVector::all(n / 2) {
            if let Some(want) = gap_threshold(&x, p0).as_bit() {
                assert_eq!(reduced.decide(&x, &mut rng).unwrap(), want, "kappa={kappa} x={x}");
            }
        }
    }

    #[test]
    fn reduction_is_exact_with_perfect_oracle() {
        check_exhaustive(3, 2, 12);
        check_exhaustive(0, 2, 12);
        check_exhaustive(8, 2, 12);
        check_exhaustive(10, 2, 12);
        check_exhaustive(5, 3, 10);
    }

    #[test]
    fn reduction_validates_arguments() {
        assert!(gapk_to_gap0(sum_to_gap(ExactSum, GapParams::new(0, 2).unwrap()), 7).is_err());
        assert!(gapk_to_gap0(sum_to_gap(ExactSum, GapParams::new(11, 2).unwrap()), 12).is_err());
    }

    #[test]
    fn top_kappa_with_all_ones_is_one() {
        let reduced = gapk_to_gap0(sum_to_gap(ExactSum, GapParams::new(10, 2).unwrap()), 12).unwrap();
        assert_eq!(reduced.decide(&BitVector::ones(6), &mut seeded(0)).unwrap(), 1);
    }

    #[test]
    fn rr_gap_is_reliable_with_wide_gap() {
        let n = 10_000;
        let tau = 10 * (n as f64).sqrt() as usize;
        let g = sum_to_gap(RandomizedResponse::new(1.0).unwrap(), GapParams::new(0, tau).unwrap());
        let zero = BitVector::zeros(n);
        let high = BitVector::from_fn(n, |i| i < tau);
        assert_eq!(gap_threshold(&high, g.params), GapOutcome::One);
        let trials = 2_000;
        let wrong = run_trials(8, trials, |t, rng| {
            if t % 2 == 0 {
                g.decide(&zero, rng).unwrap() != 0
            } else {
                g.decide(&high, rng).unwrap() != 1
            }
        })
        .into_iter()
        .filter(|&w| w)
        .count();
        assert!((wrong as f64) < 0.01 * trials as f64);
    }
}
