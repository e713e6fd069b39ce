//! Ramanujan sums, their averages over residue tables, and the singular series.

use std::collections::HashMap;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::cf::Alphabet;
use crate::error::{Error, Result};
use crate::modular::{closure_mod_q, is_certified_prime, lift_exponent, ResidueTable};
use crate::numth::{divisors, factorize, gcd, mobius, prime_power, primes_up_to, sigma1};
use crate::orbit::DetFilter;

pub type Rational = Ratio<i128>;

/// `c_q(m) = Σ_{(a,q)=1} e(am/q)`, computed as `Σ_{s | (q,m)} s·μ(q/s)`.
pub fn ramanujan_sum(q: u64, m: i64) -> i64 {
    let g = gcd(q, m.unsigned_abs());
    divisors(g)
        .into_iter()
        .map(|s| s as i64 * mobius(q / s))
        .sum()
}

/// `C_q(n)` from the closed form, valid when the closure mod `p^t` is all of
/// `SL₂` (or its determinant `±1` extension).
pub fn closed_form_cq(p: u64, t: u32, n: i64) -> Rational {
    let p = p as i128;
    match t {
        0 => Rational::from_integer(1),
        1 if n.rem_euclid(p as i64) == 0 => Rational::new(-1, p + 1),
        1 => Rational::new(1, p * p - 1),
        _ => Rational::from_integer(0),
    }
}

/// `C_q(n) = |S|⁻¹ Σ_{ω ∈ S} c_q(d_ω − n)` over the closure mod a prime power `q`.
pub fn averaged_cq(q: u64, n: i64, table: &ResidueTable) -> Result<Rational> {
    if prime_power(q).is_none() {
        return Err(Error::domain(format!("{q} is not a prime power")));
    }
    if table.q != q {
        return Err(Error::domain(format!(
            "table is mod {}, not mod {q}",
            table.q
        )));
    }
    let mut total: i128 = 0;
    for (r, &count) in table.d_counts.iter().enumerate() {
        if count > 0 {
            total += count as i128 * ramanujan_sum(q, r as i64 - n) as i128;
        }
    }
    Ok(Rational::new(total, table.len() as i128))
}

/// Source of `C_{p^t}(n)` for one alphabet.
///
/// Primes not dividing `k*` carry no obstruction at any level, so their values
/// come from the closed form once `p^t` exceeds `table_budget`; below it they
/// are always averaged from an actual closure. Primes dividing `k*` are read
/// from closures up to their lift exponent, past which `C_{p^t}` vanishes.
pub struct CqSource {
    alphabet: Alphabet,
    filter: DetFilter,
    table_budget: u64,
    tables: HashMap<u64, ResidueTable>,
    lifts: HashMap<u64, u32>,
}

/// Default largest modulus for which `C_q` is averaged from a table.
pub const DEFAULT_TABLE_BUDGET: u64 = 64;

impl CqSource {
    pub fn new(alphabet: &Alphabet, filter: DetFilter) -> Self {
        Self::with_budget(alphabet, filter, DEFAULT_TABLE_BUDGET)
    }

    pub fn with_budget(alphabet: &Alphabet, filter: DetFilter, table_budget: u64) -> Self {
        CqSource {
            alphabet: alphabet.clone(),
            filter,
            table_budget,
            tables: HashMap::new(),
            lifts: HashMap::new(),
        }
    }

    pub fn table(&mut self, q: u64) -> Result<&ResidueTable> {
        if !self.tables.contains_key(&q) {
            let t = closure_mod_q(&self.alphabet, q, self.filter)?;
            self.tables.insert(q, t);
        }
        Ok(&self.tables[&q])
    }

    fn lift(&mut self, p: u64) -> Result<u32> {
        if let Some(&t) = self.lifts.get(&p) {
            return Ok(t);
        }
        let (t, _) = lift_exponent(&self.alphabet, p)?;
        self.lifts.insert(p, t);
        Ok(t)
    }

    /// `C_{p^t}(n)` for a prime power.
    pub fn prime_power(&mut self, p: u64, t: u32, n: i64) -> Result<Rational> {
        if t == 0 {
            return Ok(Rational::from_integer(1));
        }
        let q = p
            .checked_pow(t)
            .ok_or_else(|| Error::overflow("prime power modulus"))?;
        if is_certified_prime(&self.alphabet, p) {
            if q > self.table_budget {
                return Ok(closed_form_cq(p, t, n));
            }
        } else if t > self.lift(p)? {
            return Ok(Rational::from_integer(0));
        }
        averaged_cq(q, n, self.table(q)?)
    }

    /// `C_q(n)` for any `q ≥ 1`, as the product over its prime-power parts.
    pub fn cq(&mut self, q: u64, n: i64) -> Result<Rational> {
        let mut acc = Rational::from_integer(1);
        for (p, t) in factorize(q) {
            let c = self.prime_power(p, t, n)?;
            if c == Rational::from_integer(0) {
                return Ok(c);
            }
            acc *= c;
        }
        Ok(acc)
    }

    /// Local factor `Σ_{t ≥ 0} C_{p^t}(n)` of the Euler product.
    pub fn local_factor(&mut self, p: u64, n: i64) -> Result<Rational> {
        if is_certified_prime(&self.alphabet, p) {
            return Ok(Rational::from_integer(1) + closed_form_cq(p, 1, n));
        }
        let t = self.lift(p)?;
        let mut acc = Rational::from_integer(1);
        for s in 1..=t {
            acc += self.prime_power(p, s, n)?;
        }
        Ok(acc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeriesMode {
    /// `Σ_{q < Q} C_q(n)`.
    Truncated(u64),
    /// `∏_{p ≤ P} Σ_t C_{p^t}(n)`.
    Euler(u64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesTerm {
    /// `q` in truncated mode, `p` in Euler mode.
    pub index: u64,
    pub numer: i128,
    pub denom: i128,
    pub value: f64,
}

impl SeriesTerm {
    fn new(index: u64, r: Rational) -> Self {
        SeriesTerm {
            index,
            numer: *r.numer(),
            denom: *r.denom(),
            value: to_f64(r),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularSeriesValue {
    pub n: u64,
    pub mode: SeriesMode,
    pub value: f64,
    pub terms: Vec<SeriesTerm>,
}

pub fn to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

pub fn singular_series(
    n: u64,
    mode: SeriesMode,
    alphabet: &Alphabet,
) -> Result<SingularSeriesValue> {
    singular_series_with(n, mode, &mut CqSource::new(alphabet, DetFilter::All))
}

pub fn singular_series_with(
    n: u64,
    mode: SeriesMode,
    source: &mut CqSource,
) -> Result<SingularSeriesValue> {
    if n == 0 {
        return Err(Error::domain("singular series needs n ≥ 1"));
    }
    let ni = n as i64;
    let mut terms = Vec::new();
    let value = match mode {
        SeriesMode::Truncated(big_q) => {
            let mut sum = 0.0;
            for q in 1..big_q {
                let c = source.cq(q, ni)?;
                if *c.numer() != 0 {
                    sum += to_f64(c);
                    terms.push(SeriesTerm::new(q, c));
                }
            }
            sum
        }
        SeriesMode::Euler(big_p) => {
            let mut prod = 1.0;
            for p in primes_up_to(big_p) {
                let f = source.local_factor(p, ni)?;
                prod *= to_f64(f);
                terms.push(SeriesTerm::new(p, f));
            }
            prod
        }
    };
    Ok(SingularSeriesValue {
        n,
        mode,
        value,
        terms,
    })
}

/// `Σ |C_q(n)|` over `P`-smooth `q ≥ Q` with `C_q(n) ≠ 0`: bounds the gap
/// between the truncated sum at `Q` and the Euler product at `P` (for `Q ≤ P+1`).
pub fn tail_bound(n: u64, big_q: u64, big_p: u64, source: &mut CqSource) -> Result<f64> {
    let ni = n as i64;
    // Per prime, the nonzero prime-power contributions.
    let mut local: Vec<Vec<(u64, f64)>> = Vec::new();
    for p in primes_up_to(big_p) {
        let mut opts = Vec::new();
        let mut t = 1;
        loop {
            let c = source.prime_power(p, t, ni)?;
            if *c.numer() == 0 {
                break;
            }
            opts.push((p.pow(t), to_f64(c).abs()));
            t += 1;
        }
        local.push(opts);
    }
    fn go(local: &[Vec<(u64, f64)>], q: u128, w: f64, big_q: u64, acc: &mut f64) {
        match local.split_first() {
            None => {
                if q >= big_q as u128 {
                    *acc += w;
                }
            }
            Some((opts, rest)) => {
                go(rest, q, w, big_q, acc);
                for &(pt, c) in opts {
                    go(rest, q * pt as u128, w * c, big_q, acc);
                }
            }
        }
    }
    let mut acc = 0.0;
    go(&local, 1, 1.0, big_q, &mut acc);
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobinCheck {
    pub n: u64,
    /// `∏_{p | n} (1 + 1/p)`.
    pub lhs: f64,
    /// `σ₁(n)/n`.
    pub rhs: f64,
    /// `lhs ≤ rhs`, decided exactly.
    pub holds: bool,
    /// `rhs / log log n`.
    pub loglog_ratio: f64,
}

pub fn robin_bound_check(n: u64) -> Result<RobinCheck> {
    if n < 3 {
        return Err(Error::domain("Robin check needs n ≥ 3"));
    }
    let (mut num, mut den) = (1u128, 1u128);
    for (p, _) in factorize(n) {
        num *= (p + 1) as u128;
        den *= p as u128;
    }
    let sigma = sigma1(n);
    let holds = num * n as u128 <= sigma * den;
    let rhs = sigma as f64 / n as f64;
    Ok(RobinCheck {
        n,
        lhs: num as f64 / den as f64,
        rhs,
        holds,
        loglog_ratio: rhs / (n as f64).ln().ln(),
    })
}
