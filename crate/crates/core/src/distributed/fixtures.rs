//! Small protocols with finite tapes, used by the exact-enumeration checks.

use crate::distributed::protocol::{Protocol, Record};
use crate::distributed::sharing::{split_with, ShareParams};
use crate::distributed::topology::Topology;
use crate::error::{invalid, Result};
use crate::mechanisms::FlipParams;
use crate::symbol::{Symbol, TapeSpace};

fn flip_tapes(flip: Option<FlipParams>) -> TapeSpace {
    match flip {
        Some(f) => TapeSpace::Finite(vec![f.keep_prob(), 1.0 - f.keep_prob()]),
        None => TapeSpace::trivial(),
    }
}

fn int_sum(inbox: &[Record], round: usize) -> Result<i64> {
    inbox
        .iter()
        .filter(|r| r.round == round)
        .map(|r| r.symbol.as_int().ok_or_else(|| crate::Error::InvalidArgument(format!("expected an integer, got {}", r.symbol))))
        .sum()
}

/// Two parties, one round: party 1 sends its (optionally flipped) bit to
/// party 0, which outputs the sum of its own bit and what it received.
#[derive(Debug, Clone, Copy)]
pub struct Forwarding {
    pub flip: Option<FlipParams>,
}

impl Protocol for Forwarding {
    fn parties(&self) -> usize {
        2
    }

    fn rounds(&self) -> usize {
        1
    }

    fn channels(&self) -> Topology {
        Topology::new(2, [(0, 1)]).expect("valid")
    }

    fn tape_space(&self, party: usize) -> TapeSpace {
        flip_tapes(if party == 1 { self.flip } else { None })
    }

    fn send(&self, _round: usize, party: usize, input: u8, tape: u64, _inbox: &[Record]) -> Result<Vec<(usize, Symbol)>> {
        Ok(if party == 1 { vec![(0, Symbol::bit(input ^ tape as u8))] } else { Vec::new() })
    }

    fn output(&self, input: u8, _tape: u64, inbox: &[Record]) -> Result<Symbol> {
        Ok(Symbol::Int(i64::from(input) + int_sum(inbox, 1)?))
    }
}

/// Three parties on the path 0 - 1 - 2. Round 1: party 2 sends a noisy bit
/// to party 1. Round 2: party 1 forwards that bit plus its own noisy bit to
/// party 0, which adds its own input.
#[derive(Debug, Clone, Copy)]
pub struct ChainRelay {
    pub flip: FlipParams,
}

impl Protocol for ChainRelay {
    fn parties(&self) -> usize {
        3
    }

    fn rounds(&self) -> usize {
        2
    }

    fn channels(&self) -> Topology {
        Topology::new(3, [(0, 1), (1, 2)]).expect("valid")
    }

    fn tape_space(&self, party: usize) -> TapeSpace {
        flip_tapes((party != 0).then_some(self.flip))
    }

    fn send(&self, round: usize, party: usize, input: u8, tape: u64, inbox: &[Record]) -> Result<Vec<(usize, Symbol)>> {
        let noisy = i64::from(input ^ tape as u8);
        Ok(match (round, party) {
            (1, 2) => vec![(1, Symbol::Int(noisy))],
            (2, 1) => vec![(0, Symbol::Int(noisy + int_sum(inbox, 1)?))],
            _ => Vec::new(),
        })
    }

    fn output(&self, input: u8, _tape: u64, inbox: &[Record]) -> Result<Symbol> {
        Ok(Symbol::Int(i64::from(input) + int_sum(inbox, 2)?))
    }
}

/// Exact sum over a small field on the complete graph.
///
/// Round 1: every party splits its bit into `n` additive shares mod
/// `modulus` and sends share `j` to party `j`. Round 2: every party other
/// than 0 sends party 0 the sum of the shares it holds. The tape encodes the
/// `n - 1` free shares in base `modulus`.
#[derive(Debug, Clone, Copy)]
pub struct SecureSum {
    pub n: usize,
    pub modulus: u64,
}

impl SecureSum {
    pub fn new(n: usize, modulus: u64) -> Result<Self> {
        if n < 2 || modulus <= n as u64 {
            return invalid(format!("secure sum needs n >= 2 and modulus > n, got n={n}, modulus={modulus}"));
        }
        Ok(Self { n, modulus })
    }

    fn params(&self) -> ShareParams {
        ShareParams::new(self.modulus, 1).expect("modulus checked")
    }

    fn shares(&self, input: u8, tape: u64) -> Vec<u64> {
        let randomness: Vec<u64> = (0..self.n - 1).map(|k| tape / self.modulus.pow(k as u32) % self.modulus).collect();
        split_with(u64::from(input), &randomness, self.params())
    }

    fn held(&self, party: usize, input: u8, tape: u64, inbox: &[Record]) -> u64 {
        let p = self.params();
        let own = self.shares(input, tape)[party];
        p.sum(std::iter::once(own).chain(inbox.iter().filter(|r| r.round == 1).filter_map(|r| r.symbol.as_field())))
    }
}

impl Protocol for SecureSum {
    fn parties(&self) -> usize {
        self.n
    }

    fn rounds(&self) -> usize {
        2
    }

    fn channels(&self) -> Topology {
        Topology::complete(self.n)
    }

    fn tape_space(&self, _party: usize) -> TapeSpace {
        TapeSpace::uniform(self.modulus.pow(self.n as u32 - 1) as usize).expect("non-empty")
    }

    fn send(&self, round: usize, party: usize, input: u8, tape: u64, inbox: &[Record]) -> Result<Vec<(usize, Symbol)>> {
        Ok(match round {
            1 => {
                let shares = self.shares(input, tape);
                (0..self.n).filter(|&j| j != party).map(|j| (j, Symbol::Field(shares[j]))).collect()
            }
            2 if party != 0 => vec![(0, Symbol::Field(self.held(party, input, tape, inbox)))],
            _ => Vec::new(),
        })
    }

    fn output(&self, input: u8, tape: u64, inbox: &[Record]) -> Result<Symbol> {
        let p = self.params();
        let mine = self.held(0, input, tape, inbox);
        let total = p.sum(std::iter::once(mine).chain(inbox.iter().filter(|r| r.round == 2).filter_map(|r| r.symbol.as_field())));
        Ok(Symbol::Int(total as i64))
    }
}

/// Four parties on the channels {0-1, 1-2, 1-3, 2-3}; with `t = 1`, party 0
/// is lonely and party 1 is its only neighbour.
///
/// Round 1: parties 0, 2 and 3 send noisy bits to party 1, and party 2 also
/// sends its noisy bit to party 3. Round 2: party 1 sends party 0 the sum of
/// what it received plus its own noisy bit; party 0 outputs that sum.
#[derive(Debug, Clone, Copy)]
pub struct LonelyRelay {
    pub flip: FlipParams,
}

impl Protocol for LonelyRelay {
    fn parties(&self) -> usize {
        4
    }

    fn rounds(&self) -> usize {
        2
    }

    fn channels(&self) -> Topology {
        Topology::new(4, [(0, 1), (1, 2), (1, 3), (2, 3)]).expect("valid")
    }

    fn tape_space(&self, _party: usize) -> TapeSpace {
        flip_tapes(Some(self.flip))
    }

    fn send(&self, round: usize, party: usize, input: u8, tape: u64, inbox: &[Record]) -> Result<Vec<(usize, Symbol)>> {
        let noisy = Symbol::bit(input ^ tape as u8);
        Ok(match (round, party) {
            (1, 0) | (1, 3) => vec![(1, noisy)],
            (1, 2) => vec![(1, noisy), (3, noisy)],
            (2, 1) => vec![(0, Symbol::Int(noisy.as_int().unwrap_or(0) + int_sum(inbox, 1)?))],
            _ => Vec::new(),
        })
    }

    fn output(&self, _input: u8, _tape: u64, inbox: &[Record]) -> Result<Symbol> {
        Ok(Symbol::Int(int_sum(inbox, 2)?))
    }
}
