//! Primitive roots `b mod p` whose fraction `b/p` has small partial quotients.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cf::expand;
use crate::error::{Error, Result};
use crate::numth::{factorize, is_prime, multiplicative_order_mod_prime, pow_mod, primes_up_to};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeightRecord {
    pub p: u64,
    pub b: u64,
    /// Largest partial quotient of `b/p`.
    pub height: u64,
    pub is_primitive_root: bool,
    /// `p − b` has order `(p−1)/2` and height below the bound, which by itself
    /// certifies `b` when `p ≡ 3 mod 4`.
    pub via_complement: bool,
}

fn check_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::domain(format!("{p} is not prime")))
    }
}

pub fn is_primitive_root(b: u64, p: u64) -> Result<bool> {
    check_prime(p)?;
    if b == 0 || b >= p {
        return Err(Error::domain(format!(
            "need 1 ≤ b < p, got b = {b}, p = {p}"
        )));
    }
    Ok(factorize(p - 1)
        .into_iter()
        .all(|(l, _)| pow_mod(b, (p - 1) / l, p) != 1))
}

pub fn height(b: u64, p: u64) -> Result<u64> {
    Ok(expand(b, p)?.height())
}

/// If `b` has order `(p−1)/2` and `p ≡ 3 mod 4`, then `p − b = −b` is a
/// primitive root, since `−1` is a non-residue.
pub fn complement_primitivity_check(p: u64, b: u64) -> Result<bool> {
    check_prime(p)?;
    if p % 4 != 3 {
        return Err(Error::domain(format!("{p} is not 3 mod 4")));
    }
    if b == 0 || b >= p || multiplicative_order_mod_prime(b, p) != (p - 1) / 2 {
        return Err(Error::domain(format!(
            "{b} does not have order (p−1)/2 mod {p}"
        )));
    }
    is_primitive_root(p - b, p)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchFilters {
    /// Keep only `p ≡ 3 mod 4`.
    pub three_mod_four: bool,
    /// Keep only `p` whose `(p−1)/2` has every prime factor above this.
    pub min_half_factor: Option<u64>,
}

impl SearchFilters {
    pub fn passes(&self, p: u64) -> bool {
        if self.three_mod_four && p % 4 != 3 {
            return false;
        }
        match self.min_half_factor {
            Some(t) => factorize((p - 1) / 2).iter().all(|&(l, _)| l > t),
            None => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub p: u64,
    /// `None` when no primitive root meets the height bound.
    pub record: Option<HeightRecord>,
}

fn least_bounded_root(p: u64, bound: u64) -> Result<Option<HeightRecord>> {
    for b in 1..p {
        let h = height(b, p)?;
        if h > bound || !is_primitive_root(b, p)? {
            continue;
        }
        let c = p - b;
        let via_complement = p % 4 == 3
            && multiplicative_order_mod_prime(c, p) == (p - 1) / 2
            && height(c, p)? < bound;
        return Ok(Some(HeightRecord {
            p,
            b,
            height: h,
            is_primitive_root: true,
            via_complement,
        }));
    }
    Ok(None)
}

/// For every prime `3 ≤ p ≤ p_max` passing the filters, the least primitive
/// root whose fraction has height at most `height_bound`.
pub fn search_height_bounded(
    p_max: u64,
    height_bound: u64,
    filters: &SearchFilters,
) -> Result<Vec<SearchOutcome>> {
    if p_max < 3 || height_bound < 2 {
        return Err(Error::domain("need p_max ≥ 3 and height bound ≥ 2"));
    }
    let primes: Vec<u64> = primes_up_to(p_max)
        .into_iter()
        .filter(|&p| p >= 3 && filters.passes(p))
        .collect();
    primes
        .par_iter()
        .map(|&p| {
            Ok(SearchOutcome {
                p,
                record: least_bounded_root(p, height_bound)?,
            })
        })
        .collect()
}
