use rand::Rng;

use crate::error::{invalid, Result};

/// The smallest prime above `2^63`.
pub const DEFAULT_MODULUS: u64 = 9_223_372_036_854_775_837;

/// Field and fixed-point encoding shared by every party.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShareParams {
    pub modulus: u64,
    /// Reals are stored as `round(v · scale)`.
    pub scale: u64,
}

impl ShareParams {
    pub fn new(modulus: u64, scale: u64) -> Result<Self> {
        if modulus < 2 {
            return invalid(format!("modulus {modulus} is too small"));
        }
        if scale == 0 {
            return invalid("fixed-point scale must be positive");
        }
        Ok(Self { modulus, scale })
    }

    /// Default parameters for `n` parties: [`DEFAULT_MODULUS`] and
    /// `⌈log₁₀ n⌉` decimal digits after the point.
    pub fn for_parties(n: usize) -> Self {
        let mut scale = 1u64;
        while (scale as u128) < n as u128 {
            scale *= 10;
        }
        Self {
            modulus: DEFAULT_MODULUS,
            scale,
        }
    }

    /// Largest encoded magnitude that stays unambiguous in two's-complement
    /// style reading of the field.
    pub fn max_encoded(&self) -> u64 {
        (self.modulus - 1) / 2
    }

    pub fn encode(&self, value: f64) -> Result<u64> {
        let scaled = (value * self.scale as f64).round();
        if !scaled.is_finite() || scaled.abs() > self.max_encoded() as f64 {
            return invalid(format!("value {value} overflows the field at scale {}", self.scale));
        }
        let m = scaled.abs() as u64;
        Ok(if scaled < 0.0 { (self.modulus - m) % self.modulus } else { m })
    }

    pub fn decode(&self, element: u64) -> f64 {
        let e = element % self.modulus;
        let signed = if e > self.max_encoded() {
            -((self.modulus - e) as f64)
        } else {
            e as f64
        };
        signed / self.scale as f64
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        ((a as u128 + b as u128) % self.modulus as u128) as u64
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        ((a as u128 + self.modulus as u128 - (b % self.modulus) as u128) % self.modulus as u128) as u64
    }

    pub fn sum(&self, elements: impl IntoIterator<Item = u64>) -> u64 {
        elements.into_iter().fold(0, |acc, e| self.add(acc, e))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShareVector {
    pub shares: Vec<u64>,
    pub params: ShareParams,
}

/// Splits `secret` into `randomness.len() + 1` shares: the given field
/// elements followed by the balancing share.
pub fn split_with(secret: u64, randomness: &[u64], params: ShareParams) -> Vec<u64> {
    let mut shares: Vec<u64> = randomness.iter().map(|r| r % params.modulus).collect();
    let last = params.sub(secret % params.modulus, params.sum(shares.iter().copied()));
    shares.push(last);
    shares
}

/// Additive `parts`-out-of-`parts` sharing of the fixed-point encoding of
/// `value`.
pub fn additive_share<R: Rng + ?Sized>(value: f64, parts: usize, params: ShareParams, rng: &mut R) -> Result<ShareVector> {
    if parts == 0 {
        return invalid("need at least one share");
    }
    let secret = params.encode(value)?;
    let randomness: Vec<u64> = (0..parts - 1).map(|_| rng.random_range(0..params.modulus)).collect();
    Ok(ShareVector {
        shares: split_with(secret, &randomness, params),
        params,
    })
}

pub fn reconstruct(sv: &ShareVector) -> f64 {
    sv.params.decode(sv.params.sum(sv.shares.iter().copied()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use std::collections::HashMap;

    #[test]
    fn zero_shares_sum_to_zero() {
        let p = ShareParams::for_parties(10);
        for parts in 1..6 {
            let sv = additive_share(0.0, parts, p, &mut seeded(parts as u64)).unwrap();
            assert_eq!(p.sum(sv.shares.iter().copied()), 0);
        }
    }

    #[test]
    fn round_trip_rounds_to_scale() {
        let p = ShareParams::for_parties(100);
        assert_eq!(p.scale, 100);
        let sv = additive_share(3.14159, 4, p, &mut seeded(1)).unwrap();
        assert_eq!(reconstruct(&sv), 3.14);
        let sv = additive_share(-2.257, 3, p, &mut seeded(2)).unwrap();
        assert_eq!(reconstruct(&sv), -2.26);
    }

    #[test]
    fn scale_follows_decimal_digits() {
        assert_eq!(ShareParams::for_parties(1).scale, 1);
        assert_eq!(ShareParams::for_parties(10).scale, 10);
        assert_eq!(ShareParams::for_parties(11).scale, 100);
        assert_eq!(ShareParams::for_parties(4096).scale, 10_000);
    }

    #[test]
    fn overflow_is_rejected() {
        let p = ShareParams::new(101, 10).unwrap();
        assert!(p.encode(5.0).is_ok());
        assert!(p.encode(5.1).is_err());
        assert!(p.encode(f64::NAN).is_err());
        assert_eq!(p.decode(p.encode(-4.2).unwrap()), -4.2);
    }

    #[test]
    fn any_two_of_three_shares_hide_the_secret() {
        let p = ShareParams::new(17, 1).unwrap();
        for pair in [(0, 1), (0, 2), (1, 2)] {
            let mut reference: Option<HashMap<(u64, u64), usize>> = None;
            for secret in 0..17 {
                let mut counts = HashMap::new();
                for r1 in 0..17 {
                    for r2 in 0..17 {
                        let s = split_with(secret, &[r1, r2], p);
                        *counts.entry((s[pair.0], s[pair.1])).or_insert(0) += 1;
                    }
                }
                assert_eq!(counts.len(), 289);
                assert!(counts.values().all(|&c| c == 1));
                match &reference {
                    None => reference = Some(counts),
                    Some(r) => assert_eq!(r, &counts),
                }
            }
        }
    }
}
