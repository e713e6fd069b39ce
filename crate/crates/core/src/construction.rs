//! Multi-scale parameter schedule, sector sets and their concatenation.
//!
//! The schedule is a sequence `N_j = N^{e_j}`, `−J ≤ j ≤ J+1`, with exponents
//! that are polynomials in `u = 1 − r`. They are kept as exact polynomials
//! with rational coefficients so identities such as `e_m + e_{−m} = 1` can be
//! checked exactly rather than in floating point. Sizes are handled through
//! `log₂`, so `N` may be far beyond the range of `f64`.

use std::collections::{BTreeMap, HashMap, HashSet};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::cf::{dist, eigen, word_of_matrix, Alphabet, Mat2};
use crate::error::{Error, Result};
use crate::orbit::{density_point, enumerate_ball, DetFilter};

pub type Coeff = Ratio<i64>;

/// A polynomial `Σ c_k u^k` in `u = 1 − r`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Exponent {
    coeffs: BTreeMap<u32, Coeff>,
}

impl Exponent {
    pub fn constant(c: Coeff) -> Self {
        Self::monomial(c, 0)
    }

    pub fn monomial(c: Coeff, k: u32) -> Self {
        let mut e = Exponent::default();
        e.add_term(k, c);
        e
    }

    /// `c·r·u^k = c·u^k − c·u^{k+1}`.
    pub fn r_times(c: Coeff, k: u32) -> Self {
        Self::monomial(c, k).sub(&Self::monomial(c, k + 1))
    }

    fn add_term(&mut self, k: u32, c: Coeff) {
        let entry = self
            .coeffs
            .entry(k)
            .or_insert_with(|| Coeff::from_integer(0));
        *entry += c;
        if *entry == Coeff::from_integer(0) {
            self.coeffs.remove(&k);
        }
    }

    pub fn add(&self, other: &Exponent) -> Exponent {
        let mut out = self.clone();
        for (&k, &c) in &other.coeffs {
            out.add_term(k, c);
        }
        out
    }

    pub fn sub(&self, other: &Exponent) -> Exponent {
        let mut out = self.clone();
        for (&k, &c) in &other.coeffs {
            out.add_term(k, -c);
        }
        out
    }

    pub fn is_constant(&self, c: Coeff) -> bool {
        *self == Exponent::constant(c)
    }

    pub fn eval(&self, r: f64) -> f64 {
        let u = 1.0 - r;
        self.coeffs
            .iter()
            .map(|(&k, c)| (*c.numer() as f64 / *c.denom() as f64) * u.powi(k as i32))
            .sum()
    }
}

impl std::fmt::Display for Exponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        for (i, (k, c)) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            match k {
                0 => write!(f, "{c}")?,
                _ => write!(f, "{c}·u^{k}")?,
            }
        }
        Ok(())
    }
}

fn q(n: i64, d: i64) -> Coeff {
    Coeff::new(n, d)
}

/// Least `J₁ ≥ 1` with `(1−r)^{J₁} ≤ r`.
pub fn j1_for(r: f64) -> Result<i64> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::domain(format!("r = {r} outside (0, 1)")));
    }
    let u = 1.0 - r;
    let mut j1 = 1;
    let mut p = u;
    while p > r {
        p *= u;
        j1 += 1;
    }
    Ok(j1)
}

/// `J₂ = ⌈(log₂ log₂ N − C) / (−log₂(1 − r))⌉`.
pub fn j2_for(log2_n: f64, r: f64, c: f64) -> f64 {
    ((log2_n.log2() - c) / -(1.0 - r).log2()).ceil()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub log2_n: f64,
    pub r: f64,
    pub c: f64,
    pub j1: i64,
    pub j2: i64,
    pub j: i64,
    exponents: Vec<Exponent>,
}

impl Schedule {
    /// Schedule for `N = 2^{log2_n}` with `J₂` from its defining formula.
    pub fn build(log2_n: f64, r: f64, c: f64) -> Result<Schedule> {
        let j1 = j1_for(r)?;
        if !(log2_n > 1.0) {
            return Err(Error::domain("need N > 2"));
        }
        if log2_n * std::f64::consts::LN_2 <= c {
            return Err(Error::domain(format!(
                "need N > e^C (ln N = {:.3}, C = {c})",
                log2_n * std::f64::consts::LN_2
            )));
        }
        let j2 = j2_for(log2_n, r, c);
        if !(j2 > (2 * j1 + 2) as f64) {
            return Err(Error::domain(format!(
                "violates J2 > 2·J1 + 2: J1 = {j1}, J2 = {j2} (log2 log2 N = {:.3}, C = {c}); increase N or lower C",
                log2_n.log2()
            )));
        }
        Self::from_parts(log2_n, r, c, j2 as i64)
    }

    /// Schedule with an explicit `J₂`, bypassing its formula.
    pub fn from_parts(log2_n: f64, r: f64, c: f64, j2: i64) -> Result<Schedule> {
        let j1 = j1_for(r)?;
        if j2 <= 2 * j1 + 2 {
            return Err(Error::domain(format!(
                "violates J2 > 2·J1 + 2: J1 = {j1}, J2 = {j2}"
            )));
        }
        let j = j1 + j2;
        let exponents = (-j..=j + 1)
            .map(|idx| exponent_formula(idx, j1, j))
            .collect();
        Ok(Schedule {
            log2_n,
            r,
            c,
            j1,
            j2,
            j,
            exponents,
        })
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<i64> {
        -self.j..=self.j + 1
    }

    /// Exponent `e_j` with `N_j = N^{e_j}`.
    pub fn exponent(&self, idx: i64) -> &Exponent {
        &self.exponents[(idx + self.j) as usize]
    }

    pub fn log2_size(&self, idx: i64) -> f64 {
        self.exponent(idx).eval(self.r) * self.log2_n
    }

    /// Closed form of `e_{m+1} − e_m`, branch by branch.
    pub fn ratio_formula(&self, m: i64) -> Exponent {
        let j1 = self.j1;
        // |m + 1/2| − 1/2 as an integer
        let dist = if m >= 0 { m } else { -m - 1 };
        if m == -j1 || m == j1 - 1 {
            Exponent::monomial(q(1, 4), (j1 - 1) as u32)
        } else if (-j1 + 1..=j1 - 2).contains(&m) {
            Exponent::r_times(q(1, 4), dist as u32)
        } else {
            Exponent::r_times(q(1, 4), (dist - j1) as u32)
        }
    }

    /// Index range `[log₂ M]` accepted by [`Schedule::locate_index`].
    pub fn m_range_log2(&self) -> (f64, f64) {
        (
            (self.c - 2.0).exp2() / (1.0 - self.r),
            (1.0 - self.r) * self.log2_n,
        )
    }

    /// For `M = 2^{log2_m}` in range, the least `j` with `N_{j−1} ≤ M ≤ N_j`
    /// and `h = 1 − j`, so that `N/N_h ≤ M ≤ N/N_{h−1}`.
    pub fn locate_index(&self, log2_m: f64) -> Result<(i64, i64)> {
        let (lo, hi) = self.m_range_log2();
        if !(log2_m >= lo && log2_m < hi) {
            return Err(Error::domain(format!(
                "log2 M = {log2_m} outside [{lo}, {hi})"
            )));
        }
        let eps = 1e-12 * self.log2_n;
        for j in -self.j + 1..=self.j - 1 {
            if self.log2_size(j - 1) <= log2_m + eps && log2_m <= self.log2_size(j) + eps {
                return Ok((j, 1 - j));
            }
        }
        Err(Error::Numerical(format!(
            "no schedule interval contains log2 M = {log2_m}"
        )))
    }

    /// Index for `M = N^{2/3}`.
    pub fn special_index(&self) -> Result<i64> {
        self.locate_index(self.log2_n * 2.0 / 3.0).map(|(j, _)| j)
    }

    /// `Σ 1/ln L_j` with `L_{−J} = N_{−J}`, `L_j = N_j / N_{j−1}`, against
    /// the bound `32 / (r²(1−r)2^C)`.
    pub fn log_sum_report(&self) -> LogSumReport {
        let ln2 = std::f64::consts::LN_2;
        let mut sum = 1.0 / (self.log2_size(-self.j) * ln2);
        for j in -self.j + 1..=self.j + 1 {
            sum += 1.0 / ((self.log2_size(j) - self.log2_size(j - 1)) * ln2);
        }
        let bound = 32.0 / (self.r * self.r * (1.0 - self.r) * self.c.exp2());
        LogSumReport {
            sum,
            bound,
            within: sum <= bound,
        }
    }
}

fn exponent_formula(idx: i64, j1: i64, j: i64) -> Exponent {
    if idx == j + 1 {
        Exponent::constant(q(1, 1))
    } else if idx <= -j1 {
        Exponent::monomial(q(1, 4), (-idx - j1) as u32)
    } else if idx <= 0 {
        Exponent::constant(q(1, 4)).add(&Exponent::monomial(q(1, 4), (-idx) as u32))
    } else if idx < j1 {
        Exponent::constant(q(3, 4)).sub(&Exponent::monomial(q(1, 4), idx as u32))
    } else {
        Exponent::constant(q(1, 1)).sub(&Exponent::monomial(q(1, 4), (idx - j1) as u32))
    }
}

/// Builds the schedule for `N` given directly.
pub fn build_schedule(n: f64, r: f64, c: f64) -> Result<Schedule> {
    if !(n > 2.0) {
        return Err(Error::domain("need N > 2"));
    }
    Schedule::build(n.log2(), r, c)
}

pub fn locate_index(schedule: &Schedule, m: f64) -> Result<(i64, i64)> {
    if !(m > 0.0) {
        return Err(Error::domain("M must be positive"));
    }
    schedule.locate_index(m.log2())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogSumReport {
    pub sum: f64,
    pub bound: f64,
    pub within: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantCheck {
    pub name: String,
    pub holds: bool,
    pub detail: String,
}

/// Checks the named requirements on the constant `C` for given `N` and `r`.
pub fn validate_constant(log2_n: f64, r: f64, c: f64) -> Result<Vec<ConstantCheck>> {
    let j1 = j1_for(r)?;
    let log2_ctilde = (c - 2.0).exp2() / (1.0 - r);
    let j2 = j2_for(log2_n, r, c);
    Ok(vec![
        ConstantCheck {
            name: "ceil(2^(2^(C-2)/(1-r))) >= 2^20".into(),
            holds: log2_ctilde.ceil() >= 20.0 || log2_ctilde >= 20.0,
            detail: format!("log2 of the threshold = {log2_ctilde:.4}"),
        },
        ConstantCheck {
            name: "J2 > 2*J1 + 2".into(),
            holds: j2 > (2 * j1 + 2) as f64,
            detail: format!("J1 = {j1}, J2 = {j2}"),
        },
        ConstantCheck {
            name: "N > e^C".into(),
            holds: log2_n * std::f64::consts::LN_2 > c,
            detail: format!("ln N = {:.4}", log2_n * std::f64::consts::LN_2),
        },
    ])
}

/// Determinant-one elements with expanding eigenvalue in `(L(1 − 1/ln L), L)`,
/// expanding eigenvector within `1/H` of the density point, and a common
/// word length `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorSet {
    pub m: f64,
    pub h: f64,
    pub l: f64,
    pub k: usize,
    pub elements: Vec<Mat2>,
}

impl SectorSet {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// `#Ξ / (L^{2δ} / (H ln² L))`.
    pub fn size_ratio(&self, delta: f64) -> f64 {
        let ln_l = self.l.ln();
        self.len() as f64 / (self.l.powf(2.0 * delta) / (self.h * ln_l * ln_l))
    }

    /// Whether `m` meets all three membership conditions for this set.
    pub fn admits(&self, m: &Mat2, alphabet_max: u64) -> bool {
        let Ok(e) = eigen(m) else { return false };
        let window = self.l * (1.0 - 1.0 / self.l.ln());
        m.det() == 1
            && e.lambda_plus > window
            && e.lambda_plus < self.l
            && dist(e.v_plus, density_point(alphabet_max)) < 1.0 / self.h
            && word_of_matrix(m)
                .map(|w| w.len() == self.k)
                .unwrap_or(false)
    }
}

const L_GRID: usize = 33;

pub fn build_sector_set(alphabet: &Alphabet, m: f64, h: f64) -> Result<SectorSet> {
    if alphabet.max() < 3 {
        return Err(Error::domain("sector sets need max alphabet member ≥ 3"));
    }
    if !(m / 4.0 > std::f64::consts::E) || !(h > 0.0) {
        return Err(Error::domain(format!(
            "need M > 4e and H > 0, got M = {m}, H = {h}"
        )));
    }
    // λ < 4M forces tr < 4M + 1 and so ‖γ‖ < 2(4M + 1).
    let bound = (2.0 * (4.0 * m + 1.0)).ceil() as u128 + 1;
    let ball = enumerate_ball(alphabet, bound, DetFilter::PlusOne)?;
    let v = density_point(alphabet.max());
    let cone: Vec<(f64, &Mat2)> = ball
        .elements
        .iter()
        .filter_map(|g| eigen(g).ok().map(|e| (e, g)))
        .filter(|(e, _)| dist(e.v_plus, v) < 1.0 / h)
        .map(|(e, g)| (e.lambda_plus, g))
        .collect();

    let in_window = |l: f64, lambda: f64| lambda > l * (1.0 - 1.0 / l.ln()) && lambda < l;
    let (lo, hi) = (m / 4.0, 4.0 * m);
    let mut best = (0usize, lo);
    for i in 0..L_GRID {
        let l = lo * (hi / lo).powf(i as f64 / (L_GRID - 1) as f64);
        let count = cone
            .iter()
            .filter(|(lambda, _)| in_window(l, *lambda))
            .count();
        if count > best.0 {
            best = (count, l);
        }
    }
    let l = best.1;
    let selected: Vec<(usize, Mat2)> = cone
        .iter()
        .filter(|(lambda, _)| in_window(l, *lambda))
        .map(|(_, g)| Ok((word_of_matrix(g)?.len(), **g)))
        .collect::<Result<_>>()?;
    let mut by_len: BTreeMap<usize, usize> = BTreeMap::new();
    for (k, _) in &selected {
        *by_len.entry(*k).or_default() += 1;
    }
    let Some((&k, _)) = by_len.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0))) else {
        return Err(Error::domain(format!(
            "sector unrealizable at this scale (M = {m}, H = {h})"
        )));
    };
    let elements = selected
        .into_iter()
        .filter(|(len, _)| *len == k)
        .map(|(_, g)| g)
        .collect();
    Ok(SectorSet {
        m,
        h,
        l,
        k,
        elements,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductSet {
    pub elements: Vec<Mat2>,
    /// Product of part sizes.
    pub expected: usize,
    /// Every product distinct.
    pub unique: bool,
}

/// All ordered products `ξ₁ξ₂⋯ξ_k` with `ξ_i` from the `i`-th part.
pub fn concat_product(parts: &[SectorSet]) -> Result<ProductSet> {
    if parts.is_empty() || parts.iter().any(|p| p.is_empty()) {
        return Err(Error::domain("concatenation needs nonempty parts"));
    }
    let mut current = vec![Mat2::IDENTITY];
    for part in parts {
        let mut next = Vec::with_capacity(current.len() * part.len());
        for a in &current {
            for b in &part.elements {
                next.push(a.checked_mul(b)?);
            }
        }
        current = next;
    }
    let expected = parts.iter().map(|p| p.len()).product();
    let distinct: HashSet<&Mat2> = current.iter().collect();
    let unique = distinct.len() == expected;
    Ok(ProductSet {
        elements: current,
        expected,
        unique,
    })
}

/// Extremes of `λ(ξη)/(λ(ξ)λ(η))` over all pairs from two sets.
pub fn eigenvalue_ratio_range(first: &[Mat2], second: &[Mat2]) -> Result<(f64, f64)> {
    let mut cache: HashMap<Mat2, f64> = HashMap::new();
    let mut lam = |m: &Mat2| -> Result<f64> {
        if let Some(&v) = cache.get(m) {
            return Ok(v);
        }
        let v = eigen(m)?.lambda_plus;
        cache.insert(*m, v);
        Ok(v)
    };
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for a in first {
        let la = lam(a)?;
        for b in second {
            let ratio = eigen(&a.checked_mul(b)?)?.lambda_plus / (la * lam(b)?);
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
    }
    Ok((lo, hi))
}
