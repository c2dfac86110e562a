use rand::Rng;

use crate::distributed::protocol::{run_protocol, Execution, Protocol, Record};
use crate::distributed::sharing::{additive_share, ShareParams};
use crate::distributed::topology::Topology;
use crate::domain::{check_grid, min_window_of_intervals, BitVector};
use crate::error::{invalid, Result};
use crate::local::rr_estimate;
use crate::mechanisms::{check_epsilon, flip_bias_for, sample_gaussian, FlipParams};
use crate::rng::tape_rng;
use crate::symbol::{Symbol, TapeSpace};

fn broadcast(n: usize, from: usize, symbol: Symbol) -> Vec<(usize, Symbol)> {
    (0..n).filter(|&i| i != from).map(|i| (i, symbol)).collect()
}

fn real_of(r: &Record) -> Result<f64> {
    match r.symbol.as_real() {
        Some(v) => Ok(v),
        None => invalid(format!("expected a real from party {}, got {}", r.sender, r.symbol)),
    }
}

/// Randomized response with party 0 acting as the curator.
///
/// Round 1: every other party sends its flipped bit to party 0. Round 2:
/// party 0 broadcasts the debiased estimate. Tape value 1 means "flip".
#[derive(Debug, Clone, Copy)]
pub struct StarRandomizedResponse {
    pub n: usize,
    pub flip: FlipParams,
}

impl StarRandomizedResponse {
    pub fn new(n: usize, eps: f64) -> Result<Self> {
        if n == 0 {
            return invalid("need at least one party");
        }
        Ok(Self { n, flip: flip_bias_for(eps)? })
    }

    fn estimate(&self, input: u8, tape: u64, inbox: &[Record]) -> Result<f64> {
        let mut k = usize::from(input ^ tape as u8);
        for r in inbox.iter().filter(|r| r.round == 1) {
            match r.symbol.as_int() {
                Some(b @ (0 | 1)) => k += b as usize,
                _ => return invalid(format!("party {} sent {}, expected a bit", r.sender, r.symbol)),
            }
        }
        Ok(rr_estimate(k, self.n, self.flip))
    }
}

impl Protocol for StarRandomizedResponse {
    fn parties(&self) -> usize {
        self.n
    }

    fn rounds(&self) -> usize {
        2
    }

    fn channels(&self) -> Topology {
        Topology::star(self.n, 0).expect("star on valid party count")
    }

    fn tape_space(&self, _party: usize) -> TapeSpace {
        let keep = self.flip.keep_prob();
        TapeSpace::Finite(vec![keep, 1.0 - keep])
    }

    fn send(&self, round: usize, party: usize, input: u8, tape: u64, inbox: &[Record]) -> Result<Vec<(usize, Symbol)>> {
        Ok(match (round, party) {
            (1, 0) => Vec::new(),
            (1, _) => vec![(0, Symbol::bit(input ^ tape as u8))],
            (2, 0) => broadcast(self.n, 0, Symbol::Real(self.estimate(input, tape, inbox)?)),
            _ => Vec::new(),
        })
    }

    fn output(&self, input: u8, tape: u64, inbox: &[Record]) -> Result<Symbol> {
        Ok(Symbol::Real(self.estimate(input, tape, inbox)?))
    }
}

/// Randomized response run as a distributed protocol on a star around party 0.
pub fn randomized_response_distributed<R: Rng + ?Sized>(x: &BitVector, eps: f64, rng: &mut R) -> Result<Execution> {
    let p = StarRandomizedResponse::new(x.len(), eps)?;
    run_protocol(&p, &p.channels(), x, rng)
}

/// Every party submits `x_i + N(0, σ²)` to party 0, which plays a trusted
/// aggregator and broadcasts the total.
///
/// The default σ² is `6 ln²n / (n ε²)`, so the total carries variance
/// `6 ln²n / ε²` and any `n/2` honest parties alone still contribute half of it.
#[derive(Debug, Clone, Copy)]
pub struct GaussianAggregator {
    pub n: usize,
    pub eps: f64,
    pub party_variance: f64,
    pub coalition_bound: usize,
}

impl GaussianAggregator {
    pub fn new(n: usize, eps: f64) -> Result<Self> {
        if n < 2 {
            return invalid(format!("the aggregator needs at least 2 parties, got {n}"));
        }
        check_epsilon(eps)?;
        let ln = (n as f64).ln();
        Ok(Self {
            n,
            eps,
            party_variance: 6.0 * ln * ln / (n as f64 * eps * eps),
            coalition_bound: n / 2,
        })
    }

    pub fn without_noise(mut self) -> Self {
        self.party_variance = 0.0;
        self
    }

    pub fn total_noise_variance(&self) -> f64 {
        self.n as f64 * self.party_variance
    }

    /// Noise variance left once the noise of `excluded` parties is known.
    pub fn residual_noise_variance(&self, excluded: usize) -> f64 {
        self.n.saturating_sub(excluded) as f64 * self.party_variance
    }

    fn submission(&self, input: u8, tape: u64) -> Result<f64> {
        sample_gaussian(f64::from(input), self.party_variance, &mut tape_rng(tape))
    }

    fn total(&self, input: u8, tape: u64, inbox: &[Record]) -> Result<f64> {
        let mut acc = self.submission(input, tape)?;
        for r in inbox.iter().filter(|r| r.round == 1) {
            acc += real_of(r)?;
        }
        Ok(acc)
    }
}

impl Protocol for GaussianAggregator {
    fn parties(&self) -> usize {
        self.n
    }

    fn rounds(&self) -> usize {
        2
    }

    fn channels(&self) -> Topology {
        Topology::star(self.n, 0).expect("star on valid party count")
    }

    fn tape_space(&self, _party: usize) -> TapeSpace {
        TapeSpace::Seed
    }

    fn send(&self, round: usize, party: usize, input: u8, tape: u64, inbox: &[Record]) -> Result<Vec<(usize, Symbol)>> {
        Ok(match (round, party) {
            (1, 0) => Vec::new(),
            (1, _) => vec![(0, Symbol::Real(self.submission(input, tape)?))],
            (2, 0) => broadcast(self.n, 0, Symbol::Real(self.total(input, tape, inbox)?)),
            _ => Vec::new(),
        })
    }

    fn output(&self, input: u8, tape: u64, inbox: &[Record]) -> Result<Symbol> {
        Ok(Symbol::Real(self.total(input, tape, inbox)?))
    }
}

pub fn gaussian_aggregator_sum<R: Rng + ?Sized>(x: &BitVector, eps: f64, rng: &mut R) -> Result<(f64, Execution)> {
    let p = GaussianAggregator::new(x.len(), eps)?;
    let e = run_protocol(&p, &p.channels(), x, rng)?;
    Ok((e.output.as_real().expect("aggregator outputs a real"), e))
}

/// How much Gaussian noise each party adds in the window-minimum protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseCalibration {
    /// Variance `2R/n` per party, where `R = 2 ln(2/δ)/ε²`.
    #[default]
    PerParty,
    /// Variance `2R/g` per party for interval length `g`, so that every
    /// interval sum carries variance exactly `2R`.
    PerInterval,
    /// No noise; the protocol computes the gridded minimum exactly.
    Disabled,
}

/// Secret-shared computation of the minimum window weight.
///
/// Round 1: each party adds Gaussian noise to its bit and sends additive
/// shares to the aggregators `0..=t`. Round 2: aggregators other than 0 send
/// party 0 one share-sum per interval. Round 3: party 0 decodes the interval
/// sums, takes the minimum over interval-aligned windows and broadcasts it.
#[derive(Debug, Clone, Copy)]
pub struct DistAlphaProtocol {
    pub n: usize,
    pub t: usize,
    pub window: usize,
    pub interval: usize,
    pub eps: f64,
    pub delta: f64,
    pub calibration: NoiseCalibration,
    pub share: ShareParams,
}

fn integral_power(n: usize, exp: f64, what: &str) -> Result<usize> {
    let v = (n as f64).powf(exp);
    let r = v.round();
    if (v - r).abs() > 1e-6 * r.max(1.0) {
        return invalid(format!("{what} n^{exp} = {v} is not an integer"));
    }
    Ok(r as usize)
}

impl DistAlphaProtocol {
    /// Window `n^alpha_exp` and interval `n^(alpha_exp/3)`; both must be
    /// integers compatible with the grid.
    pub fn new(n: usize, eps: f64, delta: f64, t: usize, alpha_exp: f64) -> Result<Self> {
        if !(alpha_exp > 0.0 && alpha_exp < 1.0) {
            return invalid(format!("alpha_exp {alpha_exp} outside (0, 1)"));
        }
        let window = integral_power(n, alpha_exp, "window")?;
        let interval = integral_power(n, alpha_exp / 3.0, "interval")?;
        Self::with_sizes(n, window, interval, eps, delta, t)
    }

    pub fn with_sizes(n: usize, window: usize, interval: usize, eps: f64, delta: f64, t: usize) -> Result<Self> {
        check_epsilon(eps)?;
        if !(delta > 0.0 && delta < 1.0) {
            return invalid(format!("delta {delta} outside (0, 1)"));
        }
        if 2 * t >= n {
            return invalid(format!("coalition bound t = {t} needs 2t < n = {n}"));
        }
        check_grid(n, window, interval)?;
        Ok(Self {
            n,
            t,
            window,
            interval,
            eps,
            delta,
            calibration: NoiseCalibration::default(),
            share: ShareParams::for_parties(n),
        })
    }

    pub fn with_calibration(mut self, calibration: NoiseCalibration) -> Self {
        self.calibration = calibration;
        self
    }

    /// `R = 2 ln(2/δ) / ε²`.
    pub fn noise_scale(&self) -> f64 {
        2.0 * (2.0 / self.delta).ln() / (self.eps * self.eps)
    }

    pub fn party_noise_variance(&self) -> f64 {
        let r = self.noise_scale();
        match self.calibration {
            NoiseCalibration::PerParty => 2.0 * r / self.n as f64,
            NoiseCalibration::PerInterval => 2.0 * r / self.interval as f64,
            NoiseCalibration::Disabled => 0.0,
        }
    }

    pub fn interval_noise_variance(&self) -> f64 {
        self.interval as f64 * self.party_noise_variance()
    }

    pub fn intervals(&self) -> usize {
        self.n / self.interval
    }

    pub fn aggregators(&self) -> std::ops::RangeInclusive<usize> {
        0..=self.t
    }

    /// Closed-form message count: shares to the other aggregators, one
    /// share-sum per interval from each aggregator besides party 0, and the
    /// final broadcast.
    pub fn expected_message_count(&self) -> usize {
        (self.t + 1) * (self.n - 1) + self.t * self.intervals() + (self.n - 1)
    }

    fn shares(&self, input: u8, tape: u64) -> Result<Vec<u64>> {
        let mut rng = tape_rng(tape);
        let noisy = sample_gaussian(f64::from(input), self.party_noise_variance(), &mut rng)?;
        Ok(additive_share(noisy, self.t + 1, self.share, &mut rng)?.shares)
    }

    /// Aggregator `me`'s share-sum for every interval.
    fn partial_sums(&self, me: usize, input: u8, tape: u64, inbox: &[Record]) -> Result<Vec<u64>> {
        let mut partial = vec![0u64; self.intervals()];
        partial[me / self.interval] = self.shares(input, tape)?[me];
        for r in inbox.iter().filter(|r| r.round == 1) {
            let Some(s) = r.symbol.as_field() else {
                return invalid(format!("party {} sent {}, expected a share", r.sender, r.symbol));
            };
            let k = r.sender / self.interval;
            partial[k] = self.share.add(partial[k], s);
        }
        Ok(partial)
    }

    /// Party 0's decoded noisy interval sums.
    fn decode(&self, input: u8, tape: u64, inbox: &[Record]) -> Result<Vec<f64>> {
        let mut total = self.partial_sums(0, input, tape, inbox)?;
        for j in 1..=self.t {
            let sums: Vec<&Record> = inbox.iter().filter(|r| r.round == 2 && r.sender == j).collect();
            if sums.len() != total.len() {
                return invalid(format!("aggregator {j} sent {} interval sums, expected {}", sums.len(), total.len()));
            }
            for (k, r) in sums.into_iter().enumerate() {
                let Some(s) = r.symbol.as_field() else {
                    return invalid(format!("aggregator {j} sent {}, expected a share-sum", r.symbol));
                };
                total[k] = self.share.add(total[k], s);
            }
        }
        Ok(total.into_iter().map(|e| self.share.decode(e)).collect())
    }

    fn estimate(&self, input: u8, tape: u64, inbox: &[Record]) -> Result<f64> {
        let sums = self.decode(input, tape, inbox)?;
        Ok(min_window_of_intervals(&sums, self.window / self.interval))
    }

    /// The noisy interval sums party 0 reconstructed in `e`.
    pub fn interval_estimates(&self, e: &Execution) -> Result<Vec<f64>> {
        let inbox: Vec<Record> = e.received_by(0).cloned().collect();
        self.decode(e.inputs.get(0), e.tapes[0], &inbox)
    }
}

impl Protocol for DistAlphaProtocol {
    fn parties(&self) -> usize {
        self.n
    }

    fn rounds(&self) -> usize {
        3
    }

    fn channels(&self) -> Topology {
        let agg = self.aggregators();
        let pairs = (0..self.n).flat_map(move |i| agg.clone().filter(move |&j| j != i).map(move |j| (i, j)));
        Topology::new(self.n, pairs).expect("aggregator channels are valid")
    }

    fn tape_space(&self, _party: usize) -> TapeSpace {
        TapeSpace::Seed
    }

    fn send(&self, round: usize, party: usize, input: u8, tape: u64, inbox: &[Record]) -> Result<Vec<(usize, Symbol)>> {
        match round {
            1 => {
                let shares = self.shares(input, tape)?;
                Ok(self.aggregators().filter(|&j| j != party).map(|j| (j, Symbol::Field(shares[j]))).collect())
            }
            2 if party != 0 && party <= self.t => {
                Ok(self.partial_sums(party, input, tape, inbox)?.into_iter().map(|s| (0, Symbol::Field(s))).collect())
            }
            3 if party == 0 => Ok(broadcast(self.n, 0, Symbol::Real(self.estimate(input, tape, inbox)?))),
            _ => Ok(Vec::new()),
        }
    }

    fn output(&self, input: u8, tape: u64, inbox: &[Record]) -> Result<Symbol> {
        Ok(Symbol::Real(self.estimate(input, tape, inbox)?))
    }
}

pub fn dist_alpha_protocol<R: Rng + ?Sized>(x: &BitVector, eps: f64, delta: f64, t: usize, alpha_exp: f64, rng: &mut R) -> Result<(f64, Execution)> {
    let p = DistAlphaProtocol::new(x.len(), eps, delta, t, alpha_exp)?;
    let e = run_protocol(&p, &p.channels(), x, rng)?;
    Ok((e.output.as_real().expect("protocol outputs a real"), e))
}
