//! Brute-force reference implementations used only by tests.
//!
//! Nothing here calls the library beyond `Mat2` arithmetic, so agreement with
//! the library is evidence rather than tautology.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::f64::consts::PI;

use num_complex::Complex64;
use zaremba::Mat2;

/// Size limits for the oracles, kept in one place so test time stays bounded.
#[derive(Debug, Clone, Copy)]
pub struct OracleBudget {
    pub max_denominator: u64,
    pub max_modulus: u64,
    pub max_quadrature_nodes: usize,
    pub max_ball_norm: u64,
    pub max_words: u64,
}

pub const BUDGET: OracleBudget = OracleBudget {
    max_denominator: 600,
    max_modulus: 64,
    max_quadrature_nodes: 400_000,
    max_ball_norm: 1_000,
    max_words: 20_000_000,
};

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Partial quotients of `b/d` for `0 < b ≤ d`, by the Euclidean algorithm.
pub fn euclid(b: u64, d: u64) -> Vec<u64> {
    let (mut num, mut den) = (d, b);
    let mut out = Vec::new();
    while den != 0 {
        out.push(num / den);
        (num, den) = (den, num % den);
    }
    out
}

/// Both expansions of `b/d`: the Euclidean one and, when it exists, the one
/// ending in 1.
pub fn both_expansions(b: u64, d: u64) -> Vec<Vec<u64>> {
    let w = euclid(b, d);
    let mut out = vec![w.clone()];
    let last = *w.last().unwrap();
    if last >= 2 {
        let mut alt = w[..w.len() - 1].to_vec();
        alt.extend([last - 1, 1]);
        out.push(alt);
    }
    out
}

/// Multiplicity of every denominator up to `d_max`, by expanding each `b/d`.
pub fn brute_denominators(alphabet: &[u64], d_max: u64, even_only: bool) -> BTreeMap<u128, u64> {
    assert!(d_max <= BUDGET.max_denominator);
    let mut out = BTreeMap::new();
    for d in 1..=d_max {
        for b in 1..=d {
            if gcd(b, d) != 1 {
                continue;
            }
            for w in both_expansions(b, d) {
                if w.iter().all(|a| alphabet.contains(a)) && (!even_only || w.len() % 2 == 0) {
                    *out.entry(d as u128).or_insert(0) += 1;
                }
            }
        }
    }
    out
}

fn fib(n: usize) -> u128 {
    let (mut a, mut b) = (0u128, 1u128);
    for _ in 0..n {
        (a, b) = (b, a + b);
    }
    a
}

fn word_matrix(w: &[u64]) -> Option<Mat2> {
    w.iter().try_fold(Mat2::IDENTITY, |m, &a| {
        m.checked_mul(&Mat2::generator(a)).ok()
    })
}

/// Every nonempty word up to the longest length that could still have norm
/// below `n` (a length-`k` product has `d ≥ F_{k+1}`), filtered afterwards.
pub fn brute_ball(alphabet: &[u64], n: u64, even_only: bool) -> Vec<Mat2> {
    assert!(n <= BUDGET.max_ball_norm);
    let letters: Vec<u64> = alphabet.iter().copied().filter(|&a| a < n).collect();
    let mut max_len = 0;
    while fib(max_len + 2) < n as u128 {
        max_len += 1;
    }
    let words: u64 = (1..=max_len as u32)
        .map(|k| (letters.len() as u64).saturating_pow(k))
        .sum();
    assert!(words <= BUDGET.max_words, "brute ball needs {words} words");
    let mut out = Vec::new();
    let mut word = Vec::new();
    fn go(
        letters: &[u64],
        max_len: usize,
        n: u64,
        even_only: bool,
        word: &mut Vec<u64>,
        out: &mut Vec<Mat2>,
    ) {
        if !word.is_empty() && (!even_only || word.len() % 2 == 0) {
            let m = word_matrix(word).unwrap();
            if m.a * m.a + m.b * m.b + m.c * m.c + m.d * m.d < (n as u128) * (n as u128) {
                out.push(m);
            }
        }
        if word.len() == max_len {
            return;
        }
        for &a in letters {
            word.push(a);
            go(letters, max_len, n, even_only, word, out);
            word.pop();
        }
    }
    go(&letters, max_len, n, even_only, &mut word, &mut out);
    out.sort();
    out
}

/// `e(x) = exp(2πix)` without reducing the argument.
pub fn e(x: f64) -> Complex64 {
    Complex64::new(0.0, 2.0 * PI * x).exp()
}

/// Fourier coefficient of `S(θ) = Σ e(m θ)` at `d`, via an exact-size DFT.
pub fn brute_fourier(pairings: &[u128], d: u64) -> i64 {
    let max = pairings.iter().copied().max().unwrap_or(0).max(d as u128);
    let size = 2 * max as usize + 2;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..size {
        let theta = k as f64 / size as f64;
        let s: Complex64 = pairings
            .iter()
            .map(|&m| e(((m as usize * k) % size) as f64 / size as f64))
            .sum();
        acc += s * e(-theta * d as f64);
    }
    (acc.re / size as f64).round() as i64
}

/// `c_q(m) = Σ_{(a,q)=1} e(am/q)`, summed literally.
pub fn complex_ramanujan(q: u64, m: i64) -> f64 {
    (0..q)
        .filter(|&a| gcd(a, q) == 1)
        .map(|a| e((a as i128 * m as i128).rem_euclid(q as i128) as f64 / q as f64).re)
        .sum()
}

pub type ModMat = [u64; 4];

fn mul_mod(q: u64, x: ModMat, y: ModMat) -> ModMat {
    [
        (x[0] * y[0] + x[1] * y[2]) % q,
        (x[0] * y[1] + x[1] * y[3]) % q,
        (x[2] * y[0] + x[3] * y[2]) % q,
        (x[2] * y[1] + x[3] * y[3]) % q,
    ]
}

/// Products of words mod `q`, grown one letter at a time until a whole
/// length adds nothing new. With `even_only` the letters are pairs `g(a)g(b)`.
pub fn brute_closure(alphabet: &[u64], q: u64, even_only: bool) -> BTreeSet<ModMat> {
    assert!(q <= BUDGET.max_modulus);
    let singles: Vec<ModMat> = alphabet.iter().map(|&a| [0, 1, 1, a % q]).collect();
    let letters: Vec<ModMat> = if even_only {
        singles
            .iter()
            .flat_map(|&x| singles.iter().map(move |&y| mul_mod(q, x, y)))
            .collect()
    } else {
        singles
    };
    let mut seen: HashSet<ModMat> = letters.iter().copied().collect();
    let mut frontier: Vec<ModMat> = seen.iter().copied().collect();
    for _ in 0..100_000 {
        let mut next = Vec::new();
        for &x in &frontier {
            for &g in &letters {
                let y = mul_mod(q, x, g);
                if seen.insert(y) {
                    next.push(y);
                }
            }
        }
        if next.is_empty() {
            return seen.into_iter().collect();
        }
        frontier = next;
    }
    panic!("closure mod {q} did not stabilize");
}

pub fn d_residues(closure: &BTreeSet<ModMat>) -> BTreeSet<u64> {
    closure.iter().map(|m| m[3]).collect()
}

/// `C_q(n)` as `(numerator, |S|)` with the numerator from complex sums,
/// grouping closure elements by their `d` residue.
pub fn brute_cq(closure: &BTreeSet<ModMat>, q: u64, n: i64) -> (i128, i128) {
    let mut counts = vec![0u64; q as usize];
    for m in closure {
        counts[m[3] as usize] += 1;
    }
    let total: f64 = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(r, &c)| c as f64 * complex_ramanujan(q, r as i64 - n))
        .sum();
    let rounded = total.round();
    assert!((total - rounded).abs() < 1e-6 * closure.len() as f64);
    (rounded as i128, closure.len() as i128)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton's method.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    (p0, p1) = (p1, p2);
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// Periodized triangle mollifier, summing translates over a generous range.
pub fn brute_mollifier(theta: f64, n: u64, q_level: u64) -> f64 {
    let scale = n as f64 / q_level as f64;
    let mut total = 0.0;
    for q in 1..q_level {
        for a in 0..q {
            if gcd(a, q) != 1 {
                continue;
            }
            for k in -3..=3 {
                let x = scale * (theta - a as f64 / q as f64 + k as f64);
                total += (1.0 - x.abs()).max(0.0);
            }
        }
    }
    total
}

/// `∫₀¹ Ψ(θ) S(θ) e(−dθ) dθ` by composite Gauss–Legendre quadrature, with
/// panel boundaries at every kink of `Ψ`.
pub fn quadrature_main_term(pairings: &[u128], d: u64, n: u64, q_level: u64) -> f64 {
    let radius = q_level as f64 / n as f64;
    let mut cuts = vec![0.0, 1.0];
    for q in 1..q_level {
        for a in 0..q {
            if gcd(a, q) == 1 {
                for c in [
                    a as f64 / q as f64 - radius,
                    a as f64 / q as f64,
                    a as f64 / q as f64 + radius,
                ] {
                    let c = c.rem_euclid(1.0);
                    cuts.push(c);
                }
            }
        }
    }
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut grouped: BTreeMap<u128, f64> = BTreeMap::new();
    for &m in pairings {
        *grouped.entry(m).or_insert(0.0) += 1.0;
    }
    cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-15);
    let freq = pairings.iter().copied().max().unwrap_or(1).max(d as u128) as f64 + 1.0;
    let nodes = gauss_legendre(16);
    let mut used = 0usize;
    let mut acc = 0.0;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi - lo < 1e-15 {
            continue;
        }
        let panels = ((hi - lo) * freq).ceil().max(1.0) as usize;
        let h = (hi - lo) / panels as f64;
        for k in 0..panels {
            let mid = lo + (k as f64 + 0.5) * h;
            for &(x, wt) in &nodes {
                let theta = mid + 0.5 * h * x;
                let psi = brute_mollifier(theta, n, q_level);
                if psi == 0.0 {
                    continue;
                }
                let s: Complex64 = grouped
                    .iter()
                    .map(|(&m, &r)| r * e(theta * (m as f64 - d as f64)))
                    .sum();
                acc += 0.5 * h * wt * psi * s.re;
                used += 1;
            }
        }
    }
    assert!(used <= BUDGET.max_quadrature_nodes);
    acc
}
