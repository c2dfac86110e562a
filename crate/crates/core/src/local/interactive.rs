use std::collections::HashMap;
use std::hash::Hash;

use rand::Rng;

use crate::domain::BitVector;
use crate::error::{invalid, Error, Result};
use crate::local::noninteractive::{CuratorView, PartyTranscript, ViewEntry};
use crate::local::sanitizer::SanitizerSpec;
use crate::mechanisms::FlipParams;
use crate::rng::tape_rng;
use crate::symbol::{enumerate_tapes, Symbol, TapeSpace};

/// A party in the interactive local model.
///
/// The tape is drawn once per execution from [`tape_space`](Self::tape_space)
/// and the round-`j` answer may depend only on the input, the tape and the
/// first `j` queries.
pub trait InteractiveParty<M> {
    fn tape_space(&self) -> TapeSpace;

    fn answer(&self, input: u8, queries: &[M], tape: u64) -> Result<M>;
}

impl<M, P: InteractiveParty<M> + ?Sized> InteractiveParty<M> for Box<P> {
    fn tape_space(&self) -> TapeSpace {
        (**self).tape_space()
    }

    fn answer(&self, input: u8, queries: &[M], tape: u64) -> Result<M> {
        (**self).answer(input, queries, tape)
    }
}

/// A deterministic curator: a round-indexed query policy and an output map.
///
/// `query` sees only messages from rounds strictly before `round`.
pub trait Curator<M> {
    type Output;

    fn query(&self, round: usize, party: usize, view: &CuratorView<M>) -> M;

    fn output(&self, view: &CuratorView<M>) -> Self::Output;
}

/// A curator built from two closures.
pub struct PolicyCurator<Q, F> {
    pub policy: Q,
    pub finish: F,
}

impl<M, O, Q, F> Curator<M> for PolicyCurator<Q, F>
where
    Q: Fn(usize, usize, &CuratorView<M>) -> M,
    F: Fn(&CuratorView<M>) -> O,
{
    type Output = O;

    fn query(&self, round: usize, party: usize, view: &CuratorView<M>) -> M {
        (self.policy)(round, party, view)
    }

    fn output(&self, view: &CuratorView<M>) -> O {
        (self.finish)(view)
    }
}

/// Runs `rounds` rounds of queries and answers, drawing every party's tape
/// from `rng` first.
pub fn run_interactive<M, P, C, R>(parties: &[P], curator: &C, x: &BitVector, rounds: usize, rng: &mut R) -> Result<(C::Output, CuratorView<M>)>
where
    M: Clone,
    P: InteractiveParty<M>,
    C: Curator<M>,
    R: Rng + ?Sized,
{
    let tapes: Vec<u64> = parties.iter().map(|p| p.tape_space().sample(rng)).collect();
    run_interactive_with_tapes(parties, curator, x, rounds, &tapes)
}

/// Deterministic replay of an interactive execution on fixed tapes.
pub fn run_interactive_with_tapes<M, P, C>(parties: &[P], curator: &C, x: &BitVector, rounds: usize, tapes: &[u64]) -> Result<(C::Output, CuratorView<M>)>
where
    M: Clone,
    P: InteractiveParty<M>,
    C: Curator<M>,
{
    if rounds == 0 {
        return invalid("an interactive protocol needs at least one round");
    }
    if parties.len() != x.len() || tapes.len() != x.len() {
        return invalid(format!("{} parties and {} tapes for {} inputs", parties.len(), tapes.len(), x.len()));
    }
    let n = parties.len();
    let mut view = CuratorView::default();
    let mut history: Vec<Vec<M>> = vec![Vec::with_capacity(rounds); n];
    for round in 1..=rounds {
        let queries: Vec<M> = (0..n).map(|i| curator.query(round, i, &view)).collect();
        for (i, q) in queries.into_iter().enumerate() {
            history[i].push(q.clone());
            view.queries.push(ViewEntry { round, party: i, symbol: q });
        }
        for (i, party) in parties.iter().enumerate() {
            let a = party.answer(x.get(i), &history[i], tapes[i]).map_err(|e| Error::ProtocolAbort {
                round,
                party: i,
                reason: e.to_string(),
            })?;
            view.messages.push(ViewEntry { round, party: i, symbol: a });
        }
    }
    Ok((curator.output(&view), view))
}

fn finite_tapes<M, P: InteractiveParty<M>>(parties: &[P]) -> Result<Vec<Vec<f64>>> {
    parties
        .iter()
        .enumerate()
        .map(|(i, p)| match p.tape_space() {
            TapeSpace::Finite(probs) => Ok(probs),
            TapeSpace::Seed => Err(Error::NotEnumerable(i)),
        })
        .collect()
}

/// Exact distribution of the curator's view, by enumerating every joint tape.
pub fn interactive_view_distribution<M, P, C>(parties: &[P], curator: &C, x: &BitVector, rounds: usize) -> Result<HashMap<CuratorView<M>, f64>>
where
    M: Clone + Eq + Hash,
    P: InteractiveParty<M>,
    C: Curator<M>,
{
    let spaces = finite_tapes(parties)?;
    let mut dist = HashMap::new();
    for (tapes, p) in enumerate_tapes(&spaces) {
        let (_, view) = run_interactive_with_tapes(parties, curator, x, rounds, &tapes)?;
        *dist.entry(view).or_insert(0.0) += p;
    }
    Ok(dist)
}

/// `α_i^{c_i}(input)`: the probability over the party's tape that it answers
/// `transcript.queries` with exactly `transcript.answers`.
pub fn party_transcript_probability<M, P>(party: &P, input: u8, transcript: &PartyTranscript<M>) -> Result<f64>
where
    M: Clone + PartialEq,
    P: InteractiveParty<M> + ?Sized,
{
    if transcript.queries.len() != transcript.answers.len() {
        return invalid("transcript has unequal numbers of queries and answers");
    }
    let TapeSpace::Finite(probs) = party.tape_space() else {
        return invalid("party has a seed tape; its transcript probability is not enumerable");
    };
    let mut total = 0.0;
    'tapes: for (tape, &p) in probs.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        for j in 0..transcript.queries.len() {
            if party.answer(input, &transcript.queries[..=j], tape as u64)? != transcript.answers[j] {
                continue 'tapes;
            }
        }
        total += p;
    }
    Ok(total)
}

/// A non-interactive sanitizer seen as a one-shot interactive party that
/// ignores its queries.
///
/// For finite sanitizers the tape is the cell of the common refinement of
/// the two output CDFs, so the tape space is finite and input-independent
/// while each input still gets exactly its sanitizer's output law.
#[derive(Debug, Clone)]
pub struct SanitizerParty {
    spec: SanitizerSpec,
    // cells[k] = (probability, output index given 0, output index given 1)
    cells: Vec<(f64, usize, usize)>,
}

impl SanitizerParty {
    pub fn new(spec: SanitizerSpec) -> Self {
        let cells = match spec.alphabet() {
            Some(alphabet) => {
                let k = alphabet.len();
                let cdf = |b: u8| -> Vec<f64> {
                    let mut acc = 0.0;
                    (0..k)
                        .map(|j| {
                            acc += spec.prob_at(b, j);
                            acc
                        })
                        .collect()
                };
                let (c0, c1) = (cdf(0), cdf(1));
                let mut cuts: Vec<f64> = c0.iter().chain(c1.iter()).copied().filter(|&c| c < 1.0).collect();
                cuts.push(1.0);
                cuts.sort_by(f64::total_cmp);
                cuts.dedup();
                let locate = |cdf: &[f64], u: f64| cdf.iter().position(|&c| u < c).unwrap_or(k - 1);
                let mut lo = 0.0;
                let mut cells = Vec::with_capacity(cuts.len());
                for hi in cuts {
                    if hi > lo {
                        let mid = 0.5 * (lo + hi);
                        cells.push((hi - lo, locate(&c0, mid), locate(&c1, mid)));
                    }
                    lo = hi;
                }
                cells
            }
            None => Vec::new(),
        };
        Self { spec, cells }
    }
}

impl InteractiveParty<Symbol> for SanitizerParty {
    fn tape_space(&self) -> TapeSpace {
        if self.spec.is_finite() {
            TapeSpace::Finite(self.cells.iter().map(|c| c.0).collect())
        } else {
            TapeSpace::Seed
        }
    }

    fn answer(&self, input: u8, _queries: &[Symbol], tape: u64) -> Result<Symbol> {
        match self.spec.alphabet() {
            Some(alphabet) => {
                let Some(&(_, o0, o1)) = self.cells.get(tape as usize) else {
                    return invalid(format!("tape {tape} outside the party's tape space"));
                };
                Ok(Symbol::Int(alphabet[if input == 0 { o0 } else { o1 }]))
            }
            None => Ok(self.spec.sample(input, &mut tape_rng(tape))),
        }
    }
}

/// Answers every round with a fresh randomized-response copy of its input.
/// Bit `j` of the tape is the flip decision for round `j + 1`.
#[derive(Debug, Clone, Copy)]
pub struct RepeatedFlipParty {
    pub flip: FlipParams,
    pub rounds: usize,
}

impl InteractiveParty<Symbol> for RepeatedFlipParty {
    fn tape_space(&self) -> TapeSpace {
        let keep = self.flip.keep_prob();
        TapeSpace::Finite(
            (0..1u64 << self.rounds)
                .map(|t| (0..self.rounds).map(|j| if t >> j & 1 == 1 { 1.0 - keep } else { keep }).product())
                .collect(),
        )
    }

    fn answer(&self, input: u8, queries: &[Symbol], tape: u64) -> Result<Symbol> {
        let j = queries.len() - 1;
        if j >= self.rounds {
            return invalid(format!("round {} beyond the party's {} rounds", j + 1, self.rounds));
        }
        Ok(Symbol::bit(input ^ (tape >> j & 1) as u8))
    }
}

/// Flips its input once and repeats that answer in every round.
#[derive(Debug, Clone, Copy)]
pub struct EchoParty {
    pub flip: FlipParams,
}

impl InteractiveParty<Symbol> for EchoParty {
    fn tape_space(&self) -> TapeSpace {
        let keep = self.flip.keep_prob();
        TapeSpace::Finite(vec![keep, 1.0 - keep])
    }

    fn answer(&self, input: u8, _queries: &[Symbol], tape: u64) -> Result<Symbol> {
        Ok(Symbol::bit(input ^ tape as u8))
    }
}

/// A curator that sends the same query to everyone and reduces the view with
/// `finish`.
pub fn broadcast_curator<O>(finish: impl Fn(&CuratorView<Symbol>) -> O) -> PolicyCurator<impl Fn(usize, usize, &CuratorView<Symbol>) -> Symbol, impl Fn(&CuratorView<Symbol>) -> O> {
    PolicyCurator {
        policy: |round: usize, _party: usize, _view: &CuratorView<Symbol>| Symbol::Int(round as i64),
        finish,
    }
}
