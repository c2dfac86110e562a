use crate::domain::BitVector;
use crate::error::{invalid, Result};
use crate::local::{view_distribution, SanitizerSpec};

/// The tightest ε for which `s` is ε-differentially private:
/// `max_{c} |ln(Pr[S(1)=c] / Pr[S(0)=c])|`, or `+∞` if some output is
/// possible under one input only.
///
/// Real-valued Laplace sanitizers report `1/λ`, the supremum of their
/// density ratio.
pub fn exact_epsilon(s: &SanitizerSpec) -> f64 {
    let Some(alphabet) = s.alphabet() else {
        return s.laplace_scale().map_or(f64::INFINITY, |l| 1.0 / l);
    };
    let mut worst: f64 = 0.0;
    for k in 0..alphabet.len() {
        let (p0, p1) = (s.prob_at(0, k), s.prob_at(1, k));
        match (p0 > 0.0, p1 > 0.0) {
            (false, false) => {}
            (true, true) => worst = worst.max((p1 / p0).ln().abs()),
            _ => return f64::INFINITY,
        }
    }
    worst
}

/// The two maxima compared by [`definition_equivalence_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivalenceReport {
    /// Max log-ratio of whole curator views over neighbouring inputs.
    pub collective: f64,
    /// Max over parties of the per-party exact ε.
    pub individual: f64,
    pub pass: bool,
}

/// Computes the collective and individual privacy levels of a finite
/// non-interactive protocol by exhaustive enumeration and checks that they
/// agree to `1e-12` relative tolerance.
pub fn definition_equivalence_check(sanitizers: &[SanitizerSpec]) -> Result<EquivalenceReport> {
    let n = sanitizers.len();
    if n == 0 || n > 4 {
        return invalid(format!("exhaustive check supports 1..=4 parties, got {n}"));
    }
    if sanitizers.iter().any(|s| !s.is_finite()) {
        return invalid("every sanitizer needs a finite alphabet");
    }
    let tables: Vec<_> = BitVector::all(n).map(|x| view_distribution(sanitizers, &x)).collect::<Result<_>>()?;
    let lookup: Vec<std::collections::HashMap<Vec<i64>, f64>> = tables.into_iter().map(|t| t.into_iter().collect()).collect();
    let mut collective: f64 = 0.0;
    'outer: for (xi, dx) in lookup.iter().enumerate() {
        for i in 0..n {
            let dy = &lookup[xi ^ (1 << i)];
            for (c, &px) in dx {
                match dy.get(c) {
                    Some(&py) if py > 0.0 => collective = collective.max((px / py).ln()),
                    _ => {
                        collective = f64::INFINITY;
                        break 'outer;
                    }
                }
            }
        }
    }
    let individual = sanitizers.iter().map(exact_epsilon).fold(0.0, f64::max);
    let pass = if collective.is_infinite() || individual.is_infinite() {
        collective == individual
    } else {
        (collective - individual).abs() <= 1e-12 * individual.abs().max(f64::MIN_POSITIVE)
    };
    Ok(EquivalenceReport {
        collective,
        individual,
        pass,
    })
}
