use std::collections::HashMap;
use std::hash::Hash;

use rand::Rng;

use crate::domain::BitVector;
use crate::error::{invalid, Result};
use crate::local::sanitizer::SanitizerSpec;
use crate::mechanisms::{check_epsilon, flip_bias_for, FlipParams, LaplaceParams};
use crate::symbol::Symbol;

/// One message seen by the curator: the round (1-based), the party on the
/// other end, and the payload.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ViewEntry<M> {
    pub round: usize,
    pub party: usize,
    pub symbol: M,
}

/// Everything the curator receives, plus the queries it sent.
///
/// Queries are a deterministic function of earlier messages, so two views
/// are equal exactly when their `messages` are.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CuratorView<M> {
    pub messages: Vec<ViewEntry<M>>,
    pub queries: Vec<ViewEntry<M>>,
}

impl<M> Default for CuratorView<M> {
    fn default() -> Self {
        Self {
            messages: Vec::new(),
            queries: Vec::new(),
        }
    }
}

/// The restriction `c_i` of a view to one party: its queries and answers in
/// round order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PartyTranscript<M> {
    pub queries: Vec<M>,
    pub answers: Vec<M>,
}

impl<M: Clone> CuratorView<M> {
    pub fn answers_of(&self, party: usize) -> impl Iterator<Item = &ViewEntry<M>> + '_ {
        self.messages.iter().filter(move |e| e.party == party)
    }

    pub fn party_transcript(&self, party: usize) -> PartyTranscript<M> {
        PartyTranscript {
            queries: self.queries.iter().filter(|e| e.party == party).map(|e| e.symbol.clone()).collect(),
            answers: self.answers_of(party).map(|e| e.symbol.clone()).collect(),
        }
    }

    /// Messages received in rounds strictly before `round`.
    pub fn before_round(&self, round: usize) -> impl Iterator<Item = &ViewEntry<M>> + '_ {
        self.messages.iter().filter(move |e| e.round < round)
    }
}

impl CuratorView<Symbol> {
    /// The one-round message vector `(c_1, …, c_n)` of a non-interactive view.
    pub fn symbols(&self) -> Vec<Symbol> {
        self.messages.iter().map(|e| e.symbol).collect()
    }
}

/// Each party applies its sanitizer to its own bit; the curator applies
/// `curator_fn` to what it received.
pub fn run_noninteractive<O, R: Rng + ?Sized>(
    sanitizers: &[SanitizerSpec],
    curator_fn: impl FnOnce(&CuratorView<Symbol>) -> O,
    x: &BitVector,
    rng: &mut R,
) -> Result<(O, CuratorView<Symbol>)> {
    if sanitizers.len() != x.len() {
        return invalid(format!("{} sanitizers for {} parties", sanitizers.len(), x.len()));
    }
    let mut rng = rng;
    let messages = sanitizers
        .iter()
        .zip(x.iter())
        .enumerate()
        .map(|(i, (s, bit))| ViewEntry {
            round: 1,
            party: i,
            symbol: s.sample(bit, &mut rng),
        })
        .collect();
    let view = CuratorView {
        messages,
        queries: Vec::new(),
    };
    Ok((curator_fn(&view), view))
}

/// Exact distribution of the curator's view, as `(c_1, …, c_n)` tuples.
///
/// Builds the joint table one party at a time; every sanitizer must be
/// finite. Zero-probability views are dropped.
pub fn view_distribution(sanitizers: &[SanitizerSpec], x: &BitVector) -> Result<Vec<(Vec<i64>, f64)>> {
    if sanitizers.len() != x.len() {
        return invalid(format!("{} sanitizers for {} parties", sanitizers.len(), x.len()));
    }
    let mut table: Vec<(Vec<i64>, f64)> = vec![(Vec::new(), 1.0)];
    for (s, bit) in sanitizers.iter().zip(x.iter()) {
        let Some(alphabet) = s.alphabet() else {
            return invalid(format!("sanitizer {} has no finite alphabet", s.id));
        };
        let mut next = Vec::with_capacity(table.len() * alphabet.len());
        for (prefix, p) in &table {
            for (k, &sym) in alphabet.iter().enumerate() {
                let q = s.prob_at(bit, k);
                if q > 0.0 {
                    let mut c = prefix.clone();
                    c.push(sym);
                    next.push((c, p * q));
                }
            }
        }
        table = next;
    }
    Ok(table)
}

/// Exact output distribution of a non-interactive protocol.
pub fn output_distribution<O: Eq + Hash>(
    sanitizers: &[SanitizerSpec],
    x: &BitVector,
    curator_fn: impl Fn(&[i64]) -> O,
) -> Result<HashMap<O, f64>> {
    let mut out = HashMap::new();
    for (c, p) in view_distribution(sanitizers, x)? {
        *out.entry(curator_fn(&c)).or_insert(0.0) += p;
    }
    Ok(out)
}

/// Debiased sum estimate from `k` reported ones: `(k − (0.5 − α)n) / 2α`.
pub fn rr_estimate(k: usize, n: usize, p: FlipParams) -> f64 {
    (k as f64 - (0.5 - p.flip_bias) * n as f64) / (2.0 * p.flip_bias)
}

/// Standard deviation of [`rr_estimate`]: `√(n(0.25 − α²)) / 2α`.
pub fn rr_estimate_std(n: usize, p: FlipParams) -> f64 {
    (n as f64 * (0.25 - p.flip_bias * p.flip_bias)).sqrt() / (2.0 * p.flip_bias)
}

pub fn rr_sanitizers(n: usize, p: FlipParams) -> Vec<SanitizerSpec> {
    (0..n).map(|i| SanitizerSpec::flip(i, p)).collect()
}

pub(crate) fn count_ones(view: &CuratorView<Symbol>) -> usize {
    view.messages.iter().filter(|e| e.symbol == Symbol::Int(1)).count()
}

/// Randomized response: every party reports a flipped bit, the curator
/// counts ones and debiases.
pub fn randomized_response_sum<R: Rng + ?Sized>(x: &BitVector, eps: f64, rng: &mut R) -> Result<(f64, CuratorView<Symbol>)> {
    let p = flip_bias_for(eps)?;
    let n = x.len();
    run_noninteractive(&rr_sanitizers(n, p), |view| rr_estimate(count_ones(view), n, p), x, rng)
}

/// Every party reports `x_i + Lap(1/ε)`; the curator adds the reports.
pub fn laplace_submission_sum<R: Rng + ?Sized>(x: &BitVector, eps: f64, rng: &mut R) -> Result<(f64, CuratorView<Symbol>)> {
    check_epsilon(eps)?;
    let lap = LaplaceParams::new(1.0 / eps)?;
    let sanitizers: Vec<_> = (0..x.len()).map(|i| SanitizerSpec::laplace(i, lap)).collect();
    run_noninteractive(
        &sanitizers,
        |view| view.messages.iter().filter_map(|e| e.symbol.as_real()).sum(),
        x,
        rng,
    )
}
