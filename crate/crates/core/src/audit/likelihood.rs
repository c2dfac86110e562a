use rand::Rng;
use rand_distr::{Binomial, Distribution, Geometric};

use crate::domain::BitVector;
use crate::error::{invalid, Result};
use crate::local::{party_transcript_probability, CuratorView, InteractiveParty, SanitizerSpec};
use crate::mechanisms::check_epsilon;
use crate::stats::proportion_se;
use crate::symbol::Symbol;

/// Parameters of the sparse input distribution `𝒜`: every bit is 1
/// independently with probability `a_density = 1/(ε√(dn))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistributionAParams {
    pub n: usize,
    pub eps: f64,
    pub d: f64,
}

impl DistributionAParams {
    pub fn new(n: usize, eps: f64, d: f64) -> Result<Self> {
        check_epsilon(eps)?;
        if n == 0 {
            return invalid("distribution needs at least one party");
        }
        if !(d > 1.0) || !d.is_finite() {
            return invalid(format!("d = {d} must exceed 1"));
        }
        let p = Self { n, eps, d };
        if p.a_density() >= 0.5 {
            return invalid(format!("density {} must stay below 0.5; increase n, eps or d", p.a_density()));
        }
        Ok(p)
    }

    pub fn a_density(&self) -> f64 {
        1.0 / (self.eps * (self.d * self.n as f64).sqrt())
    }

    pub fn expected_sum(&self) -> f64 {
        self.a_density() * self.n as f64
    }

    /// `4·a·ε`, the hard bound on every `|V_i|`.
    pub fn v_hard_bound(&self) -> f64 {
        4.0 * self.a_density() * self.eps
    }

    /// `32·a²·ε²`, the bound on every `E[V_i]`.
    pub fn v_mean_bound(&self) -> f64 {
        32.0 * (self.a_density() * self.eps).powi(2)
    }

    /// `32/d`, the bound on `E[ΣV_i]`.
    pub fn v_sum_bound(&self) -> f64 {
        32.0 / self.d
    }

    /// `exp(−γ²√n / (2ε√d))`, the lower-tail bound on the input weight.
    pub fn chernoff_bound(&self, gamma: f64) -> f64 {
        (-gamma * gamma * (self.n as f64).sqrt() / (2.0 * self.eps * self.d.sqrt())).exp()
    }
}

/// `d = max(4, 16·ℓ²·ln(ℓ+2))`.
pub fn default_d(rounds: usize) -> f64 {
    let l = rounds.max(1) as f64;
    (16.0 * l * l * (l + 2.0).ln()).max(4.0)
}

/// `ν = max(64, d/ℓ)`.
pub fn default_nu(rounds: usize, d: f64) -> f64 {
    (d / rounds.max(1) as f64).max(64.0)
}

/// Draws a vector from `𝒜` by jumping between ones with geometric gaps.
pub fn sample_a<R: Rng + ?Sized>(p: DistributionAParams, rng: &mut R) -> BitVector {
    let mut bits = vec![0u8; p.n];
    let gap = Geometric::new(p.a_density()).expect("density in (0, 0.5)");
    let mut pos: u64 = 0;
    loop {
        pos = pos.saturating_add(gap.sample(rng));
        if pos >= p.n as u64 {
            break;
        }
        bits[pos as usize] = 1;
        pos += 1;
    }
    BitVector::new(bits).expect("bits are 0/1")
}

/// Number of ones in a vector drawn from `𝒜`.
pub fn sample_a_weight<R: Rng + ?Sized>(p: DistributionAParams, rng: &mut R) -> u64 {
    Binomial::new(p.n as u64, p.a_density()).expect("valid binomial").sample(rng)
}

/// `r(c) = (a·Pr[S(1)=c] + (1−a)·Pr[S(0)=c]) / Pr[S(0)=c]`; `+∞` when the
/// all-zero denominator vanishes but the numerator does not.
pub fn party_ratio(p1: f64, p0: f64, a: f64) -> f64 {
    let num = a * p1 + (1.0 - a) * p0;
    if p0 > 0.0 {
        num / p0
    } else if num > 0.0 {
        f64::INFINITY
    } else {
        f64::NAN
    }
}

/// Per-party likelihood ratios of one curator view.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioStats {
    pub per_party_ratios: Vec<f64>,
    /// `V_i = ln r_i`.
    pub log_ratios: Vec<f64>,
    pub total_ratio: f64,
    /// Set when some denominator was zero.
    pub infinite: bool,
}

impl RatioStats {
    fn from_ratios(per_party_ratios: Vec<f64>) -> Self {
        let log_ratios: Vec<f64> = per_party_ratios.iter().map(|r| r.ln()).collect();
        let infinite = per_party_ratios.iter().any(|r| r.is_infinite());
        let total_ratio = per_party_ratios.iter().product();
        Self {
            per_party_ratios,
            log_ratios,
            total_ratio,
            infinite,
        }
    }

    pub fn total_log(&self) -> f64 {
        self.log_ratios.iter().sum()
    }

    pub fn max_abs_log(&self) -> f64 {
        self.log_ratios.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Likelihood ratios of a non-interactive view: message `k` of the view is
/// scored with `sanitizers[k]`.
pub fn likelihood_ratios(sanitizers: &[SanitizerSpec], view: &CuratorView<Symbol>, p: DistributionAParams) -> Result<RatioStats> {
    if view.messages.len() != sanitizers.len() {
        return invalid(format!("view has {} messages for {} sanitizers", view.messages.len(), sanitizers.len()));
    }
    let a = p.a_density();
    let ratios = view
        .messages
        .iter()
        .map(|e| {
            let s = &sanitizers[e.party];
            match (s.output_prob(1, &e.symbol), s.output_prob(0, &e.symbol)) {
                (Some(p1), Some(p0)) => Ok(party_ratio(p1, p0, a)),
                _ => invalid(format!("sanitizer {} has no exact oracle", s.id)),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RatioStats::from_ratios(ratios))
}

/// Likelihood ratios of an interactive view: party `i`'s factor is
/// `(a·α_i(1) + (1−a)·α_i(0)) / α_i(0)` with `α_i` the exact probability of
/// its whole transcript, i.e. the product of its per-round conditional
/// answer probabilities.
pub fn interactive_likelihood_ratios<P: InteractiveParty<Symbol>>(parties: &[P], view: &CuratorView<Symbol>, p: DistributionAParams) -> Result<RatioStats> {
    let a = p.a_density();
    let ratios = parties
        .iter()
        .enumerate()
        .map(|(i, party)| {
            let t = view.party_transcript(i);
            Ok(party_ratio(party_transcript_probability(party, 1, &t)?, party_transcript_probability(party, 0, &t)?, a))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RatioStats::from_ratios(ratios))
}

/// A sampled view summarised by its sufficient statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViewSummary {
    /// `ΣV_i = ln r(c)`.
    pub total_log: f64,
    /// `max_i |V_i|` over the parties in the view.
    pub max_abs_log: f64,
}

/// Samples curator views of `n` parties that share one finite sanitizer,
/// with inputs from `𝒜`.
///
/// Each party's message is independent with law
/// `q(c) = a·Pr[S(1)=c] + (1−a)·Pr[S(0)=c]`, and `ΣV_i` depends on the view
/// only through the symbol counts, so a view is drawn as a multinomial count
/// vector instead of `n` separate messages.
#[derive(Debug, Clone)]
pub struct HomogeneousViewSampler {
    /// `q(c)` per alphabet entry.
    pub mixture: Vec<f64>,
    /// `V(c) = ln r(c)` per alphabet entry.
    pub log_ratio: Vec<f64>,
    pub n: usize,
}

impl HomogeneousViewSampler {
    pub fn new(sanitizer: &SanitizerSpec, p: DistributionAParams) -> Result<Self> {
        let Some(alphabet) = sanitizer.alphabet() else {
            return invalid("sampler needs a finite sanitizer");
        };
        let a = p.a_density();
        let (mut mixture, mut log_ratio) = (Vec::new(), Vec::new());
        for k in 0..alphabet.len() {
            let (p0, p1) = (sanitizer.prob_at(0, k), sanitizer.prob_at(1, k));
            mixture.push(a * p1 + (1.0 - a) * p0);
            log_ratio.push(party_ratio(p1, p0, a).ln());
        }
        Ok(Self { mixture, log_ratio, n: p.n })
    }

    /// Exact `E_𝒜[V_i]`.
    pub fn expected_v(&self) -> f64 {
        self.mixture.iter().zip(&self.log_ratio).filter(|(q, _)| **q > 0.0).map(|(q, v)| q * v).sum()
    }

    pub fn sample_counts<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<u64> {
        let mut remaining = self.n as u64;
        let mut mass = 1.0;
        let mut counts = Vec::with_capacity(self.mixture.len());
        for (k, &q) in self.mixture.iter().enumerate() {
            let c = if k + 1 == self.mixture.len() || remaining == 0 {
                remaining
            } else {
                let prob = (q / mass).clamp(0.0, 1.0);
                Binomial::new(remaining, prob).expect("valid binomial").sample(rng)
            };
            counts.push(c);
            remaining -= c;
            mass -= q;
        }
        counts
    }

    pub fn summarise(&self, counts: &[u64]) -> ViewSummary {
        let mut total = 0.0;
        let mut max_abs: f64 = 0.0;
        for (&c, &v) in counts.iter().zip(&self.log_ratio) {
            if c > 0 {
                total += c as f64 * v;
                max_abs = max_abs.max(v.abs());
            }
        }
        ViewSummary {
            total_log: total,
            max_abs_log: max_abs,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ViewSummary {
        self.summarise(&self.sample_counts(rng))
    }
}

/// Streaming summary of `V` statistics over many sampled views.
#[derive(Debug, Clone, Default)]
pub struct VStatistics {
    count: usize,
    sum: f64,
    sum_sq: f64,
    max_abs: f64,
    per_party: Vec<f64>,
    per_party_sq: Vec<f64>,
}

impl VStatistics {
    pub fn push_summary(&mut self, s: ViewSummary) {
        self.count += 1;
        self.sum += s.total_log;
        self.sum_sq += s.total_log * s.total_log;
        self.max_abs = self.max_abs.max(s.max_abs_log);
    }

    pub fn push(&mut self, r: &RatioStats) {
        if self.per_party.len() < r.log_ratios.len() {
            self.per_party.resize(r.log_ratios.len(), 0.0);
            self.per_party_sq.resize(r.log_ratios.len(), 0.0);
        }
        for ((acc, sq), v) in self.per_party.iter_mut().zip(self.per_party_sq.iter_mut()).zip(&r.log_ratios) {
            *acc += v;
            *sq += v * v;
        }
        self.push_summary(ViewSummary {
            total_log: r.total_log(),
            max_abs_log: r.max_abs_log(),
        });
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Empirical `E[ΣV_i]`.
    pub fn mean_total(&self) -> f64 {
        self.sum / self.count as f64
    }

    pub fn se_total(&self) -> f64 {
        let n = self.count as f64;
        let var = (self.sum_sq - self.sum * self.sum / n) / (n - 1.0);
        (var.max(0.0) / n).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.max_abs
    }

    /// Empirical `E[V_i]` per party; empty unless fed full [`RatioStats`].
    pub fn per_party_means(&self) -> Vec<f64> {
        self.per_party.iter().map(|s| s / self.count as f64).collect()
    }

    /// Standard error of each entry of [`per_party_means`](Self::per_party_means).
    pub fn per_party_se(&self) -> Vec<f64> {
        let n = self.count as f64;
        self.per_party
            .iter()
            .zip(&self.per_party_sq)
            .map(|(s, sq)| (((sq - s * s / n) / (n - 1.0)).max(0.0) / n).sqrt())
            .collect()
    }
}

/// Outcome of checking sampled `V` statistics against their bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct VBoundReport {
    pub mean_total: f64,
    pub se_total: f64,
    pub sum_bound: f64,
    pub max_abs: f64,
    pub hard_bound: f64,
    pub mean_ok: bool,
    pub hard_ok: bool,
}

pub fn check_v_bounds(stats: &VStatistics, p: DistributionAParams) -> Result<VBoundReport> {
    if stats.count() < 1_000 {
        return invalid(format!("need at least 1000 samples, got {}", stats.count()));
    }
    let (mean_total, se_total) = (stats.mean_total(), stats.se_total());
    let max_abs = stats.max_abs();
    let per_party_ok = stats
        .per_party_means()
        .iter()
        .zip(stats.per_party_se())
        .all(|(&m, se)| m <= p.v_mean_bound() + 3.0 * se);
    Ok(VBoundReport {
        mean_total,
        se_total,
        sum_bound: p.v_sum_bound(),
        max_abs,
        hard_bound: p.v_hard_bound(),
        mean_ok: mean_total <= p.v_sum_bound() + 3.0 * se_total && per_party_ok,
        hard_ok: max_abs <= p.v_hard_bound(),
    })
}

/// An empirical tail frequency next to its analytic bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailCheck {
    pub empirical: f64,
    pub bound: f64,
    pub std_error: f64,
    pub samples: usize,
    pub pass: bool,
}

impl TailCheck {
    fn new(hits: usize, samples: usize, bound: f64) -> Self {
        let empirical = hits as f64 / samples as f64;
        let std_error = proportion_se(bound.min(1.0), samples);
        Self {
            empirical,
            bound,
            std_error,
            samples,
            pass: empirical <= bound + 3.0 * std_error,
        }
    }
}

/// `exp(−(ν−32)² / 32d)`.
pub fn hoeffding_bound(nu: f64, d: f64) -> f64 {
    (-(nu - 32.0).powi(2) / (32.0 * d)).exp()
}

/// Frequency of `r(c) > e^{ν/d}` among sampled `ln r(c)` values against
/// `exp(−(ν−32)²/32d)`; the standard error is that of a rate equal to the bound.
pub fn hoeffding_tail_check(total_logs: &[f64], nu: f64, d: f64) -> Result<TailCheck> {
    view_probability_transfer(total_logs, nu, d, 1)
}

/// Frequency of `p_𝒜(c) > e^{ℓν/d}·p_0(c)` among sampled `ln(p_𝒜(c)/p_0(c))`
/// values, against `ℓ·exp(−(ν−32)²/32d)`.
pub fn view_probability_transfer(total_logs: &[f64], nu: f64, d: f64, rounds: usize) -> Result<TailCheck> {
    if !(nu > 32.0) {
        return invalid(format!("nu = {nu} must exceed 32"));
    }
    if !(d > 1.0) {
        return invalid(format!("d = {d} must exceed 1"));
    }
    if rounds == 0 || total_logs.is_empty() {
        return invalid("need at least one round and one sample");
    }
    let threshold = rounds as f64 * nu / d;
    let hits = total_logs.iter().filter(|&&v| v > threshold).count();
    Ok(TailCheck::new(hits, total_logs.len(), rounds as f64 * hoeffding_bound(nu, d)))
}

/// Frequency of `Σx_i ≤ (1−γ)·a·n` among sampled weights against the
/// Chernoff bound.
pub fn chernoff_tail_check(weights: &[u64], p: DistributionAParams, gamma: f64) -> Result<TailCheck> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return invalid(format!("gamma {gamma} outside (0, 1)"));
    }
    if weights.is_empty() {
        return invalid("need at least one sample");
    }
    let cut = (1.0 - gamma) * p.expected_sum();
    let hits = weights.iter().filter(|&&w| w as f64 <= cut).count();
    Ok(TailCheck::new(hits, weights.len(), p.chernoff_bound(gamma)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local::{rr_sanitizers, run_noninteractive};
    use crate::mechanisms::flip_bias_for;
    use crate::montecarlo::run_trials;
    use crate::rng::seeded;
    use crate::stats::{mean, variance};

    #[test]
    fn density_arithmetic() {
        let p = DistributionAParams::new(10_000, 1.0, 4.0).unwrap();
        assert!((p.a_density() - 0.005).abs() < 1e-15);
        assert!((p.expected_sum() - 50.0).abs() < 1e-9);
        assert!(DistributionAParams::new(10, 1.0, 1.0).is_err());
        assert!(DistributionAParams::new(1, 1.0, 2.0).is_err());
    }

    #[test]
    fn defaults() {
        assert!((default_d(1) - 16.0 * 3f64.ln()).abs() < 1e-12);
        assert_eq!(default_nu(1, default_d(1)), 64.0);
        assert!((hoeffding_bound(64.0, 4.0) - (-8.0f64).exp()).abs() < 1e-15);
        assert!(hoeffding_tail_check(&[0.0], 32.0, 4.0).is_err());
    }

    #[test]
    fn sample_a_moments() {
        let p = DistributionAParams::new(10_000, 1.0, 4.0).unwrap();
        let sums: Vec<f64> = run_trials(1, 10_000, |_, rng| crate::domain::sum(&sample_a(p, rng)) as f64);
        let a = p.a_density();
        let se = (10_000.0 * a * (1.0 - a) / 10_000.0f64).sqrt();
        assert!((mean(&sums) - 50.0).abs() < 3.0 * se);
    }

    #[test]
    fn flip_ratio_substitution() {
        let p = DistributionAParams::new(10_000, 1.0, 4.0).unwrap();
        let s = rr_sanitizers(1, flip_bias_for(1.0).unwrap());
        let view = CuratorView {
            messages: vec![crate::local::ViewEntry {
                round: 1,
                party: 0,
                symbol: Symbol::Int(1),
            }],
            queries: vec![],
        };
        let r = likelihood_ratios(&s, &view, p).unwrap();
        let want = (0.005 * (2.0 / 3.0) + 0.995 * (1.0 / 3.0)) / (1.0 / 3.0);
        assert!((r.per_party_ratios[0] - want).abs() < 1e-15);
        // the same value from the two-outcome joint law of (x, c)
        let joint_c1 = 0.005 * (2.0 / 3.0) + 0.995 * (1.0 / 3.0);
        assert!((r.per_party_ratios[0] - joint_c1 * 3.0).abs() < 1e-15);
    }

    #[test]
    fn uninformative_sanitizers_give_unit_ratios() {
        let p = DistributionAParams::new(100, 1.0, 4.0).unwrap();
        let s: Vec<_> = (0..3).map(|i| SanitizerSpec::constant(i, 0)).collect();
        let x = BitVector::new(vec![1, 0, 1]).unwrap();
        let (_, view) = run_noninteractive(&s, |_| (), &x, &mut seeded(0)).unwrap();
        let r = likelihood_ratios(&s, &view, p).unwrap();
        assert!(r.log_ratios.iter().all(|&v| v == 0.0));
        assert_eq!(r.total_ratio, 1.0);
    }

    #[test]
    fn lemma_bounds_hold_on_every_output_of_a_2eps_sanitizer() {
        // e^{2ε} ≤ 1 + 4ε only while ε ≤ 0.628
        for eps in [0.1, 0.3, 0.5, 0.6] {
            let p = DistributionAParams::new(10_000, eps, 4.0).unwrap();
            let a = p.a_density();
            // keep/flip ratio e^{2ε}: exactly 2ε-private
            let keep = (2.0 * eps).exp() / (1.0 + (2.0 * eps).exp());
            let s = SanitizerSpec::table(0, vec![0, 1], vec![keep, 1.0 - keep], vec![1.0 - keep, keep]).unwrap();
            for k in 0..2 {
                let r = party_ratio(s.prob_at(1, k), s.prob_at(0, k), a);
                assert!(r >= 1.0 - 2.0 * a * eps - 1e-15 && r <= 1.0 + 4.0 * a * eps + 1e-15, "eps={eps} r={r}");
                assert!(r.ln().abs() <= 4.0 * a * eps);
            }
        }
    }

    #[test]
    fn hard_bound_fails_for_a_worst_case_sanitizer_at_eps_one() {
        let eps = 1.0;
        let p = DistributionAParams::new(10_000, eps, 4.0).unwrap();
        let a = p.a_density();
        let keep = (2.0 * eps).exp() / (1.0 + (2.0 * eps).exp());
        let r = party_ratio(keep, 1.0 - keep, a);
        assert!(r.ln() > 4.0 * a * eps);
        // randomized response at the same ε stays inside the bound
        let rr = flip_bias_for(eps).unwrap().keep_prob();
        assert!(party_ratio(rr, 1.0 - rr, a).ln() <= 4.0 * a * eps);
    }

    #[test]
    fn infinite_ratio_is_flagged() {
        let p = DistributionAParams::new(100, 1.0, 4.0).unwrap();
        let s = vec![SanitizerSpec::identity(0)];
        let view = CuratorView {
            messages: vec![crate::local::ViewEntry {
                round: 1,
                party: 0,
                symbol: Symbol::Int(1),
            }],
            queries: vec![],
        };
        let r = likelihood_ratios(&s, &view, p).unwrap();
        assert!(r.infinite && r.total_ratio.is_infinite());
    }

    #[test]
    fn product_form_matches_log_sum() {
        let p = DistributionAParams::new(400, 1.0, 4.0).unwrap();
        let s = rr_sanitizers(50, flip_bias_for(1.0).unwrap());
        let x = sample_a(DistributionAParams { n: 50, ..p }, &mut seeded(3));
        let (_, view) = run_noninteractive(&s, |_| (), &x, &mut seeded(4)).unwrap();
        let r = likelihood_ratios(&s, &view, p).unwrap();
        assert!((r.total_ratio - r.total_log().exp()).abs() <= 1e-12 * r.total_ratio);
    }

    #[test]
    fn count_sampler_matches_per_party_simulation() {
        let n = 200;
        let p = DistributionAParams::new(n, 1.0, 4.0).unwrap();
        let flip = flip_bias_for(1.0).unwrap();
        let s = rr_sanitizers(n, flip);
        let sampler = HomogeneousViewSampler::new(&s[0], p).unwrap();
        let trials = 20_000;
        let full = run_trials(5, trials, |_, rng| {
            let x = sample_a(p, rng);
            let (_, view) = run_noninteractive(&s, |_| (), &x, rng).unwrap();
            likelihood_ratios(&s, &view, p).unwrap().total_log()
        });
        let fast = run_trials(6, trials, |_, rng| sampler.sample(rng).total_log);
        let exact_mean = n as f64 * sampler.expected_v();
        for sample in [&full, &fast] {
            let se = (variance(sample) / trials as f64).sqrt();
            assert!((mean(sample) - exact_mean).abs() < 4.0 * se);
        }
        assert!((variance(&full) / variance(&fast) - 1.0).abs() < 0.05);
    }

    #[test]
    fn count_sampler_totals_are_consistent() {
        let p = DistributionAParams::new(1_000, 1.0, 4.0).unwrap();
        let s = SanitizerSpec::table(0, vec![0, 1, 2], vec![0.5, 0.3, 0.2], vec![0.3, 0.3, 0.4]).unwrap();
        let sampler = HomogeneousViewSampler::new(&s, p).unwrap();
        let mut rng = seeded(8);
        for _ in 0..100 {
            assert_eq!(sampler.sample_counts(&mut rng).iter().sum::<u64>(), 1_000);
        }
    }

    #[test]
    fn v_statistics_of_uninformative_views_are_zero() {
        let p = DistributionAParams::new(100, 1.0, 4.0).unwrap();
        let sampler = HomogeneousViewSampler::new(&SanitizerSpec::constant(0, 1), p).unwrap();
        let mut stats = VStatistics::default();
        let mut rng = seeded(0);
        for _ in 0..1_000 {
            stats.push_summary(sampler.sample(&mut rng));
        }
        let report = check_v_bounds(&stats, p).unwrap();
        assert_eq!((report.mean_total, report.max_abs), (0.0, 0.0));
        assert!(report.mean_ok && report.hard_ok);
        let logs = vec![0.0; 1_000];
        assert_eq!(hoeffding_tail_check(&logs, 64.0, 4.0).unwrap().empirical, 0.0);
    }
}
