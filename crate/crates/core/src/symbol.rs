//! Message symbols and random tapes shared by the local and distributed runners.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use rand::{Rng, RngCore};

use crate::error::{invalid, Error, Result};

/// A single message payload.
///
/// Finite-alphabet protocols use `Int`; real-valued submissions use `Real`;
/// secret shares travel as `Field` elements.
#[derive(Debug, Clone, Copy)]
pub enum Symbol {
    Int(i64),
    Real(f64),
    Field(u64),
}

impl Symbol {
    pub fn bit(b: u8) -> Self {
        Symbol::Int(i64::from(b))
    }

    pub fn as_int(&self) -> Option<i64> {
        match *self {
            Symbol::Int(v) => Some(v),
            _ => None,
        }
    }

    /// Numeric value of an `Int` or `Real` symbol.
    pub fn as_real(&self) -> Option<f64> {
        match *self {
            Symbol::Int(v) => Some(v as f64),
            Symbol::Real(v) => Some(v),
            Symbol::Field(_) => None,
        }
    }

    pub fn as_field(&self) -> Option<u64> {
        match *self {
            Symbol::Field(v) => Some(v),
            _ => None,
        }
    }
}

// Reals compare by bit pattern so that transcripts can key hash maps.
impl PartialEq for Symbol {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Symbol::Int(a), Symbol::Int(b)) => a == b,
            (Symbol::Real(a), Symbol::Real(b)) => a.to_bits() == b.to_bits(),
            (Symbol::Field(a), Symbol::Field(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Symbol {}

impl Hash for Symbol {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            Symbol::Int(v) => {
                0u8.hash(state);
                v.hash(state)
            }
            Symbol::Real(v) => {
                1u8.hash(state);
                v.to_bits().hash(state)
            }
            Symbol::Field(v) => {
                2u8.hash(state);
                v.hash(state)
            }
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Int(v) => write!(f, "i:{v}"),
            // `{:?}` on f64 is the shortest representation that round-trips.
            Symbol::Real(v) => write!(f, "r:{v:?}"),
            Symbol::Field(v) => write!(f, "f:{v}"),
        }
    }
}

impl FromStr for Symbol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (tag, value) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidArgument(format!("symbol {s:?} has no type tag")))?;
        let bad = |_| Error::InvalidArgument(format!("bad symbol value {s:?}"));
        match tag {
            "i" => value.parse().map(Symbol::Int).map_err(|e: std::num::ParseIntError| bad(e.to_string())),
            "r" => value.parse().map(Symbol::Real).map_err(|e: std::num::ParseFloatError| bad(e.to_string())),
            "f" => value.parse().map(Symbol::Field).map_err(|e: std::num::ParseIntError| bad(e.to_string())),
            _ => Err(Error::InvalidArgument(format!("unknown symbol tag {tag:?}"))),
        }
    }
}

/// The random input of one party.
///
/// A finite tape space lists the probability of each tape value `0..len`,
/// which is what exact enumeration walks over. A seed tape is a 64-bit seed
/// expanded with [`crate::rng::tape_rng`]; it can be sampled and replayed but
/// not enumerated.
#[derive(Debug, Clone, PartialEq)]
pub enum TapeSpace {
    Finite(Vec<f64>),
    Seed,
}

impl TapeSpace {
    /// A single deterministic tape.
    pub fn trivial() -> Self {
        TapeSpace::Finite(vec![1.0])
    }

    /// Tapes with uniform probability over `k` values.
    pub fn uniform(k: usize) -> Result<Self> {
        if k == 0 {
            return invalid("uniform tape space needs at least one value");
        }
        Ok(TapeSpace::Finite(vec![1.0 / k as f64; k]))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match self {
            TapeSpace::Finite(probs) => sample_index(probs, rng) as u64,
            TapeSpace::Seed => rng.next_u64(),
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, TapeSpace::Finite(_))
    }
}

/// Draws an index from a categorical distribution given by `probs`.
pub(crate) fn sample_index<R: RngCore + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // Rounding can leave `acc` a hair below one; fall back to the last
    // index with positive mass.
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// Iterates over the cartesian product of finite tape spaces, yielding each
/// joint tape assignment with its probability. Zero-probability tapes are
/// skipped.
pub(crate) fn enumerate_tapes(spaces: &[Vec<f64>]) -> Vec<(Vec<u64>, f64)> {
    let mut out = vec![(Vec::with_capacity(spaces.len()), 1.0)];
    for probs in spaces {
        let mut next = Vec::with_capacity(out.len() * probs.len());
        for (prefix, p) in &out {
            for (v, q) in probs.iter().enumerate() {
                if *q > 0.0 {
                    let mut t = prefix.clone();
                    t.push(v as u64);
                    next.push((t, p * q));
                }
            }
        }
        out = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn tape_product_is_a_distribution() {
        let joint = enumerate_tapes(&[vec![0.25, 0.75], vec![0.5, 0.0, 0.5]]);
        assert_eq!(joint.len(), 4);
        let total: f64 = joint.iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn symbols_round_trip_through_text(i in any::<i64>(), r in -1e300..1e300f64, f in any::<u64>()) {
            for s in [Symbol::Int(i), Symbol::Real(r), Symbol::Field(f)] {
                let back: Symbol = s.to_string().parse().unwrap();
                prop_assert_eq!(back, s);
            }
        }
    }
}
