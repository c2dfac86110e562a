use crate::audit::likelihood::{sample_a, DistributionAParams};
use crate::domain::{sum, BitVector};
use crate::error::{invalid, Result};
use crate::local::GapProtocol;
use crate::montecarlo::try_run_trials;
use crate::rng::derive_seed;

/// Error rates of a `GAP_{0,τ}` protocol on `𝒜`-inputs and on the all-zero
/// input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistinguisherReport {
    /// Fraction of `𝒜` trials where the weight is at least `τ` and the
    /// protocol still answers 0.
    pub error_case_i: f64,
    /// Fraction of all-zero trials answered with 1.
    pub error_case_ii: f64,
    /// Trials per case.
    pub trials: usize,
    /// `𝒜` trials whose weight fell strictly between 0 and `τ`, where the
    /// protocol may answer either way.
    pub promise_violations: usize,
}

impl DistinguisherReport {
    pub fn total_error(&self) -> f64 {
        self.error_case_i + self.error_case_ii
    }

    pub fn max_error(&self) -> f64 {
        self.error_case_i.max(self.error_case_ii)
    }
}

/// `τ = a·n/2`.
pub fn default_tau(p: DistributionAParams) -> f64 {
    p.expected_sum() / 2.0
}

/// Runs `trials` executions of `protocol` on `𝒜`-inputs and `trials` on
/// `0^n`, using independent seed streams derived from `seed`.
pub fn distinguisher_experiment<G: GapProtocol + ?Sized>(protocol: &G, p: DistributionAParams, tau: f64, trials: usize, seed: u64) -> Result<DistinguisherReport> {
    if trials == 0 {
        return invalid("need at least one trial");
    }
    if !(tau > 0.0) {
        return invalid(format!("tau {tau} must be positive"));
    }
    let case_i = try_run_trials(derive_seed(seed, 1), trials, |_, rng| -> Result<(bool, bool)> {
        let x = sample_a(p, rng);
        let w = sum(&x) as f64;
        let answer = protocol.decide(&x, rng)?;
        Ok((w >= tau && answer == 0, w > 0.0 && w < tau))
    })?;
    let zero = BitVector::zeros(p.n);
    let case_ii = try_run_trials(derive_seed(seed, 2), trials, |_, rng| -> Result<bool> { Ok(protocol.decide(&zero, rng)? == 1) })?;
    let errors_i = case_i.iter().filter(|(e, _)| *e).count();
    let violations = case_i.iter().filter(|(_, v)| *v).count();
    let errors_ii = case_ii.iter().filter(|&&e| e).count();
    Ok(DistinguisherReport {
        error_case_i: errors_i as f64 / trials as f64,
        error_case_ii: errors_ii as f64 / trials as f64,
        trials,
        promise_violations: violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::GapParams;
    use crate::local::{sum_to_gap, ExactSum};

    #[test]
    fn exact_oracle_never_errs() {
        let p = DistributionAParams::new(10_000, 1.0, 4.0).unwrap();
        let tau = default_tau(p);
        let g = sum_to_gap(ExactSum, GapParams::new(0, tau.ceil() as usize).unwrap());
        let r = distinguisher_experiment(&g, p, tau, 500, 3).unwrap();
        assert_eq!(r.total_error(), 0.0);
        assert!(r.promise_violations < 500);
    }
}
