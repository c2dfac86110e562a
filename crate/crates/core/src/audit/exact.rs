use std::collections::HashMap;

use crate::distributed::{compile_to_local, consistency_probability, output_distribution, transcript_distribution, Protocol};
use crate::domain::BitVector;
use crate::error::{invalid, Result};
use crate::local::{interactive_view_distribution, Curator};
use crate::symbol::Symbol;

/// Largest output-probability difference between a protocol and its local
/// compilation, over every input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompileCheck {
    pub max_gap: f64,
    pub inputs: usize,
    pub original_rounds: usize,
    pub compiled_rounds: usize,
}

pub fn compile_check<P: Protocol + ?Sized>(protocol: &P) -> Result<CompileCheck> {
    let n = protocol.parties();
    if n > 12 {
        return invalid(format!("exhaustive check over 2^{n} inputs is too large"));
    }
    let topology = protocol.channels();
    let compiled = compile_to_local(protocol, &topology)?;
    let mut max_gap: f64 = 0.0;
    for x in BitVector::all(n) {
        let direct = output_distribution(protocol, &x)?;
        let mut via_local: HashMap<Symbol, f64> = HashMap::new();
        for (view, p) in interactive_view_distribution(&compiled.parties, &compiled.curator, &x, compiled.rounds)? {
            let Some(out) = compiled.curator.output(&view) else {
                return invalid("compiled protocol produced no output");
            };
            *via_local.entry(out).or_insert(0.0) += p;
        }
        for (sym, &p) in &direct {
            max_gap = max_gap.max((p - via_local.get(sym).copied().unwrap_or(0.0)).abs());
        }
        for (sym, &p) in &via_local {
            if !direct.contains_key(sym) {
                max_gap = max_gap.max(p);
            }
        }
    }
    Ok(CompileCheck {
        max_gap,
        inputs: 1 << n,
        original_rounds: protocol.rounds(),
        compiled_rounds: compiled.rounds,
    })
}

/// Largest difference between each transcript's probability and the product
/// of the parties' consistency probabilities, over every input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorizationCheck {
    pub max_error: f64,
    pub transcripts: usize,
}

pub fn factorization_check<P: Protocol + ?Sized>(protocol: &P) -> Result<FactorizationCheck> {
    let n = protocol.parties();
    if n > 12 {
        return invalid(format!("exhaustive check over 2^{n} inputs is too large"));
    }
    let (mut max_error, mut transcripts): (f64, usize) = (0.0, 0);
    for x in BitVector::all(n) {
        let dist = transcript_distribution(protocol, &x)?;
        max_error = max_error.max((dist.values().sum::<f64>() - 1.0).abs());
        for (c, p) in dist {
            let mut product = 1.0;
            for i in 0..n {
                product *= consistency_probability(protocol, i, x.get(i), &c)?;
            }
            max_error = max_error.max((product - p).abs());
            transcripts += 1;
        }
    }
    Ok(FactorizationCheck { max_error, transcripts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributed::fixtures::{ChainRelay, Forwarding};
    use crate::mechanisms::flip_bias_for;

    #[test]
    fn fixtures_pass_both_checks() {
        let chain = ChainRelay { flip: flip_bias_for(0.5).unwrap() };
        let c = compile_check(&chain).unwrap();
        assert!(c.max_gap < 1e-12);
        assert_eq!((c.inputs, c.compiled_rounds), (8, c.original_rounds + 1));
        let f = factorization_check(&Forwarding { flip: None }).unwrap();
        assert!(f.max_error < 1e-12 && f.transcripts == 4);
    }
}
