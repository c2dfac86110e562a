use rand::RngCore;

use crate::error::{invalid, Result};
use crate::mechanisms::{sample_laplace, FlipParams, LaplaceParams};
use crate::symbol::{sample_index, Symbol};

/// A single party's randomized map from its input bit to the message it sends
/// the curator.
///
/// Finite sanitizers carry their full output table, which doubles as the
/// exact probability oracle used by the audits. Laplace submissions emit reals
/// and expose no oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct SanitizerSpec {
    pub id: usize,
    kind: SanitizerKind,
}

#[derive(Debug, Clone, PartialEq)]
enum SanitizerKind {
    Table {
        alphabet: Vec<i64>,
        // probs[b][k] = Pr[S(b) = alphabet[k]]
        probs: [Vec<f64>; 2],
    },
    Laplace(LaplaceParams),
}

impl SanitizerSpec {
    pub fn table(id: usize, alphabet: Vec<i64>, given_zero: Vec<f64>, given_one: Vec<f64>) -> Result<Self> {
        if alphabet.is_empty() {
            return invalid("sanitizer alphabet is empty");
        }
        for (b, row) in [&given_zero, &given_one].into_iter().enumerate() {
            if row.len() != alphabet.len() {
                return invalid(format!("row for input {b} has {} entries, alphabet has {}", row.len(), alphabet.len()));
            }
            if row.iter().any(|p| !(0.0..=1.0).contains(p)) || (row.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return invalid(format!("row for input {b} is not a probability distribution"));
            }
        }
        let mut sorted = alphabet.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != alphabet.len() {
            return invalid("sanitizer alphabet has repeated symbols");
        }
        Ok(Self {
            id,
            kind: SanitizerKind::Table {
                alphabet,
                probs: [given_zero, given_one],
            },
        })
    }

    /// Randomized response: keep the bit with probability `0.5 + flip_bias`.
    pub fn flip(id: usize, p: FlipParams) -> Self {
        let keep = p.keep_prob();
        Self::table(id, vec![0, 1], vec![keep, 1.0 - keep], vec![1.0 - keep, keep]).expect("flip table is valid")
    }

    /// Reveals the input.
    pub fn identity(id: usize) -> Self {
        Self::table(id, vec![0, 1], vec![1.0, 0.0], vec![0.0, 1.0]).expect("identity table is valid")
    }

    /// Always sends `symbol`, whatever the input.
    pub fn constant(id: usize, symbol: i64) -> Self {
        Self::table(id, vec![symbol], vec![1.0], vec![1.0]).expect("constant table is valid")
    }

    /// Sends `x + Lap(λ)`.
    pub fn laplace(id: usize, p: LaplaceParams) -> Self {
        Self {
            id,
            kind: SanitizerKind::Laplace(p),
        }
    }

    pub fn alphabet(&self) -> Option<&[i64]> {
        match &self.kind {
            SanitizerKind::Table { alphabet, .. } => Some(alphabet),
            SanitizerKind::Laplace(_) => None,
        }
    }

    /// The noise scale `λ` of a Laplace sanitizer.
    pub fn laplace_scale(&self) -> Option<f64> {
        match &self.kind {
            SanitizerKind::Laplace(p) => Some(p.lambda),
            SanitizerKind::Table { .. } => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.alphabet().is_some()
    }

    pub fn sample(&self, bit: u8, rng: &mut dyn RngCore) -> Symbol {
        match &self.kind {
            SanitizerKind::Table { alphabet, probs } => Symbol::Int(alphabet[sample_index(&probs[bit as usize], rng)]),
            SanitizerKind::Laplace(p) => Symbol::Real(f64::from(bit) + sample_laplace(*p, rng)),
        }
    }

    /// Exact `Pr[S(bit) = out]`, or `None` for real-valued sanitizers.
    pub fn output_prob(&self, bit: u8, out: &Symbol) -> Option<f64> {
        match &self.kind {
            SanitizerKind::Table { alphabet, probs } => {
                let v = out.as_int()?;
                Some(alphabet.iter().position(|&a| a == v).map_or(0.0, |k| probs[bit as usize][k]))
            }
            SanitizerKind::Laplace(_) => None,
        }
    }

    /// `Pr[S(bit) = alphabet[k]]` for finite sanitizers.
    pub(crate) fn prob_at(&self, bit: u8, k: usize) -> f64 {
        match &self.kind {
            SanitizerKind::Table { probs, .. } => probs[bit as usize][k],
            SanitizerKind::Laplace(_) => panic!("prob_at on a real-valued sanitizer"),
        }
    }
}
