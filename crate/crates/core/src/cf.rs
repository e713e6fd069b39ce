//! Continued fractions as products of the generators `[[0, 1], [1, a]]`.
//!
//! A finite expansion `b/d = [a₁, …, a_k]` corresponds to the matrix
//! `g(a₁)·g(a₂)⋯g(a_k)` whose second column is `(b, d)`. Everything in this
//! module is exact: entries are `u128` and every product is checked.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite, nonempty set of allowed partial quotients, sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct Alphabet {
    members: Vec<u64>,
}

impl Alphabet {
    pub fn new(members: impl IntoIterator<Item = u64>) -> Result<Self> {
        let mut members: Vec<u64> = members.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        if members.is_empty() {
            return Err(Error::domain("alphabet must be nonempty"));
        }
        if members[0] == 0 {
            return Err(Error::domain("partial quotients must be positive"));
        }
        Ok(Alphabet { members })
    }

    /// `{lo, lo+1, …, hi}`.
    pub fn range(lo: u64, hi: u64) -> Result<Self> {
        if lo > hi {
            return Err(Error::domain(format!("empty range {lo}..{hi}")));
        }
        Self::new(lo..=hi)
    }

    /// `{start, start+step, …}` with `count` members.
    pub fn progression(start: u64, step: u64, count: u64) -> Result<Self> {
        if count == 0 {
            return Err(Error::domain("progression needs at least one term"));
        }
        Self::new((0..count).map(|k| start + step * k))
    }

    pub fn members(&self) -> &[u64] {
        &self.members
    }

    pub fn max(&self) -> u64 {
        *self.members.last().unwrap()
    }

    pub fn min(&self) -> u64 {
        self.members[0]
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, a: u64) -> bool {
        self.members.binary_search(&a).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.members.iter().copied()
    }

    /// Alphabet with one extra member.
    pub fn with(&self, extra: u64) -> Result<Self> {
        Self::new(self.members.iter().copied().chain(std::iter::once(extra)))
    }
}

impl TryFrom<Vec<u64>> for Alphabet {
    type Error = Error;

    fn try_from(v: Vec<u64>) -> Result<Self> {
        Alphabet::new(v)
    }
}

impl From<Alphabet> for Vec<u64> {
    fn from(a: Alphabet) -> Self {
        a.members
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, a) in self.members.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "}}")
    }
}

/// A finite sequence of partial quotients. The empty word is the identity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Word(pub Vec<u64>);

impl Word {
    pub fn new(quotients: Vec<u64>) -> Result<Self> {
        if quotients.contains(&0) {
            return Err(Error::domain("partial quotients must be positive"));
        }
        Ok(Word(quotients))
    }

    pub fn quotients(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Largest partial quotient (the height of the fraction); 0 for the empty word.
    pub fn height(&self) -> u64 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    pub fn is_over(&self, alphabet: &Alphabet) -> bool {
        self.0.iter().all(|&a| alphabet.contains(a))
    }

    /// The other expansion of the same rational: `[…, a_k] ↔ […, a_k − 1, 1]`.
    ///
    /// Returns `None` for the empty word and for `[1]` (which has no second form
    /// with positive quotients).
    pub fn alternate(&self) -> Option<Word> {
        let (&last, init) = self.0.split_last()?;
        if last >= 2 {
            let mut q = init.to_vec();
            q.push(last - 1);
            q.push(1);
            Some(Word(q))
        } else {
            let (&prev, init2) = init.split_last()?;
            let mut q = init2.to_vec();
            q.push(prev + 1);
            Some(Word(q))
        }
    }

    /// Canonical form: last quotient ≥ 2 whenever the length is at least 2.
    pub fn canonical(&self) -> Word {
        match self.0.as_slice() {
            [.., _, 1] => self.alternate().unwrap(),
            _ => self.clone(),
        }
    }

    /// The form of even length, when one exists.
    pub fn even_form(&self) -> Option<Word> {
        if self.len() % 2 == 0 {
            Some(self.clone())
        } else {
            self.alternate().filter(|w| w.len() % 2 == 0)
        }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "]")
    }
}

/// Exact 2×2 matrix `[[a, b], [c, d]]` with nonnegative entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Mat2 {
    pub a: u128,
    pub b: u128,
    pub c: u128,
    pub d: u128,
}

impl PartialOrd for Mat2 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Ordered by `(d, c, b, a)`.
impl Ord for Mat2 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.d, self.c, self.b, self.a).cmp(&(other.d, other.c, other.b, other.a))
    }
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 {
        a: 1,
        b: 0,
        c: 0,
        d: 1,
    };

    pub const fn new(a: u128, b: u128, c: u128, d: u128) -> Self {
        Mat2 { a, b, c, d }
    }

    /// The generator `g(q) = [[0, 1], [1, q]]`.
    pub const fn generator(q: u64) -> Self {
        Mat2 {
            a: 0,
            b: 1,
            c: 1,
            d: q as u128,
        }
    }

    pub fn checked_mul(&self, rhs: &Mat2) -> Result<Mat2> {
        let dot = |x: u128, y: u128, z: u128, w: u128| -> Option<u128> {
            x.checked_mul(y)?.checked_add(z.checked_mul(w)?)
        };
        let prod = (|| {
            Some(Mat2 {
                a: dot(self.a, rhs.a, self.b, rhs.c)?,
                b: dot(self.a, rhs.b, self.b, rhs.d)?,
                c: dot(self.c, rhs.a, self.d, rhs.c)?,
                d: dot(self.c, rhs.b, self.d, rhs.d)?,
            })
        })();
        prod.ok_or_else(|| Error::overflow("matrix product exceeds 128-bit entries"))
    }

    /// `self · g(q)`, the child step of every enumeration.
    #[inline]
    pub fn mul_generator(&self, q: u64) -> Result<Mat2> {
        let q = q as u128;
        let step = |x: u128, y: u128| q.checked_mul(y).and_then(|t| t.checked_add(x));
        match (step(self.a, self.b), step(self.c, self.d)) {
            (Some(b), Some(d)) => Ok(Mat2 {
                a: self.b,
                b,
                c: self.d,
                d,
            }),
            _ => Err(Error::overflow("matrix product exceeds 128-bit entries")),
        }
    }

    /// `g(q) · self`.
    pub fn premul_generator(&self, q: u64) -> Result<Mat2> {
        Mat2::generator(q).checked_mul(self)
    }

    pub fn transpose(&self) -> Mat2 {
        Mat2 {
            a: self.a,
            b: self.c,
            c: self.b,
            d: self.d,
        }
    }

    /// Determinant sign: `+1`, `-1`, or `0` if neither (never for generator products).
    pub fn det(&self) -> i8 {
        let (ad, bc) = match (self.a.checked_mul(self.d), self.b.checked_mul(self.c)) {
            (Some(x), Some(y)) => (x, y),
            _ => return 0,
        };
        if ad == bc + 1 {
            1
        } else if bc == ad + 1 {
            -1
        } else {
            0
        }
    }

    /// Squared Frobenius norm `a² + b² + c² + d²`, exact.
    pub fn norm_sq(&self) -> Result<u128> {
        let sq = |x: u128| x.checked_mul(x);
        (|| {
            sq(self.a)?
                .checked_add(sq(self.b)?)?
                .checked_add(sq(self.c)?)?
                .checked_add(sq(self.d)?)
        })()
        .ok_or_else(|| Error::overflow("squared norm exceeds 128 bits"))
    }

    pub fn norm(&self) -> f64 {
        let (a, b, c, d) = self.as_f64();
        (a * a + b * b + c * c + d * d).sqrt()
    }

    pub fn trace(&self) -> u128 {
        self.a + self.d
    }

    /// Second column `γe₂ = (b, d)`.
    pub fn col2(&self) -> (u128, u128) {
        (self.b, self.d)
    }

    pub fn as_f64(&self) -> (f64, f64, f64, f64) {
        (self.a as f64, self.b as f64, self.c as f64, self.d as f64)
    }

    /// `1 ≤ a ≤ min(b, c) ≤ max(b, c) < d`, true for every non-identity element
    /// of the determinant-one semigroup.
    pub fn has_entry_ordering(&self) -> bool {
        1 <= self.a && self.a <= self.b.min(self.c) && self.b.max(self.c) < self.d
    }

    /// The comparability chains between Frobenius norm, trace, sup-norm and the
    /// norm of the second column. `slack` is a relative floating tolerance.
    pub fn satisfies_norm_chains(&self, slack: f64) -> bool {
        let (_, b, _, d) = self.as_f64();
        let norm = self.norm();
        let tr = self.trace() as f64;
        let col = (b * b + d * d).sqrt();
        let le = |x: f64, y: f64| x <= y * (1.0 + slack);
        let lt = |x: f64, y: f64| x < y * (1.0 + slack);
        le(norm, 2.0 * tr)
            && le(2.0 * tr, 2.0 * std::f64::consts::SQRT_2 * norm)
            && lt(d, col)
            && lt(col, norm)
            && lt(norm, std::f64::consts::SQRT_2 * col)
            && lt(std::f64::consts::SQRT_2 * col, 2.0 * d)
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{},{}],[{},{}]]", self.a, self.b, self.c, self.d)
    }
}

/// Euclidean expansion of `numer/denom` for `0 < numer ≤ denom` coprime,
/// with last quotient ≥ 2 unless the fraction is `1/1`.
fn euclid(mut numer: u128, mut denom: u128) -> Vec<u64> {
    let mut q = Vec::new();
    while numer != 0 {
        let a = denom / numer;
        q.push(a as u64);
        let r = denom % numer;
        denom = numer;
        numer = r;
    }
    q
}

/// Canonical continued fraction expansion of `numer/denom`.
pub fn expand(numer: u64, denom: u64) -> Result<Word> {
    if numer == 0 || numer >= denom {
        return Err(Error::domain(format!("expected 0 < {numer} < {denom}")));
    }
    if crate::numth::gcd(numer, denom) != 1 {
        return Err(Error::domain(format!(
            "{numer}/{denom} is not in lowest terms"
        )));
    }
    Ok(Word(euclid(numer as u128, denom as u128)))
}

/// Rational value `(b, d)` of a word, read off its matrix.
pub fn reconstruct(w: &Word) -> Result<(u128, u128)> {
    Ok(matrix_of_word(w)?.col2())
}

pub fn matrix_of_word(w: &Word) -> Result<Mat2> {
    w.0.iter()
        .try_fold(Mat2::IDENTITY, |m, &q| m.mul_generator(q))
}

/// Recovers the unique word whose product is `m`.
pub fn word_of_matrix(m: &Mat2) -> Result<Word> {
    if *m == Mat2::IDENTITY {
        return Ok(Word::default());
    }
    let not_product = || Error::domain(format!("{m} is not a product of generators"));
    if m.b == 0 || m.b > m.d || m.det() == 0 {
        return Err(not_product());
    }
    let w = Word(euclid(m.b, m.d));
    if matrix_of_word(&w).ok() == Some(*m) {
        return Ok(w);
    }
    match w.alternate() {
        Some(alt) if matrix_of_word(&alt).ok() == Some(*m) => Ok(alt),
        _ => Err(not_product()),
    }
}

/// Expansion of `(d − b)/d` obtained from the expansion of `b/d` by the
/// first-quotient rule.
pub fn complement_expansion(w: &Word) -> Result<Word> {
    match w.0.as_slice() {
        [] => Err(Error::domain("complement of the empty word")),
        [1] => Err(Error::domain(
            "[1] is 1/1, which has no complement in (0, 1)",
        )),
        [1, second, rest @ ..] => {
            let mut q = vec![1 + second];
            q.extend_from_slice(rest);
            Ok(Word(q))
        }
        [first, rest @ ..] => {
            let mut q = vec![1, first - 1];
            q.extend_from_slice(rest);
            Ok(Word(q))
        }
    }
}

/// Expanding/contracting eigenvalues and unit eigenvectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenData {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub v_plus: [f64; 2],
    pub v_minus: [f64; 2],
}

impl EigenData {
    /// `|λ₊ − tr|`, which is `O(1/‖γ‖)`.
    pub fn trace_gap(&self, m: &Mat2) -> f64 {
        (self.lambda_plus - m.trace() as f64).abs()
    }
}

/// Unit vector along `(x, y)` with nonnegative second coordinate.
fn unit(x: f64, y: f64) -> [f64; 2] {
    let n = x.hypot(y);
    let (x, y) = (x / n, y / n);
    if y < 0.0 || (y == 0.0 && x < 0.0) {
        [-x, -y]
    } else {
        [x, y]
    }
}

fn eigenvector(m: &Mat2, lambda: f64) -> [f64; 2] {
    let (a, b, c, d) = m.as_f64();
    // Pick the better conditioned of the two rows of (m − λ).
    let r1 = [b, lambda - a];
    let r2 = [lambda - d, c];
    if r1[0].hypot(r1[1]) >= r2[0].hypot(r2[1]) {
        unit(r1[0], r1[1])
    } else {
        unit(r2[0], r2[1])
    }
}

pub fn eigen(m: &Mat2) -> Result<EigenData> {
    let det = m.det();
    let tr = m.trace() as f64;
    let hyperbolic = match det {
        1 => m.trace() > 2,
        -1 => m.trace() >= 1,
        _ => false,
    };
    if !hyperbolic {
        return Err(Error::domain(format!("{m} is not hyperbolic")));
    }
    let det_f = det as f64;
    let disc = tr * tr - 4.0 * det_f;
    let lambda_plus = 0.5 * (tr + disc.sqrt());
    let lambda_minus = det_f / lambda_plus;
    Ok(EigenData {
        lambda_plus,
        lambda_minus,
        v_plus: eigenvector(m, lambda_plus),
        v_minus: eigenvector(m, lambda_minus),
    })
}

/// Euclidean distance between two 2-vectors.
pub fn dist(u: [f64; 2], v: [f64; 2]) -> f64 {
    (u[0] - v[0]).hypot(u[1] - v[1])
}
