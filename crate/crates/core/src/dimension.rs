//! Hausdorff dimension of the set of irrationals whose partial quotients all
//! lie in a finite alphabet.
//!
//! The dimension is the `s` at which the transfer operator
//! `(L_s f)(x) = Σ_a (a + x)^{−2s} f(1/(a + x))` has leading eigenvalue one.
//! The operator is discretized by collocation at Chebyshev points and its
//! leading eigenvalue found by power iteration.

use serde::{Deserialize, Serialize};

use crate::cf::Alphabet;
use crate::error::{Error, Result};

pub const DEFAULT_ORDER: usize = 32;
pub const MAX_ORDER: usize = 256;
const POWER_MAX_ITERS: usize = 5000;
const POWER_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionEstimate {
    pub alphabet: Alphabet,
    pub delta: f64,
    pub collocation_order: usize,
    /// `|λ(δ) − 1|` at the reported order.
    pub residual: f64,
    /// Change in `δ` between the last two orders.
    pub order_change: f64,
    pub converged: bool,
}

/// Collocation grid for one alphabet: Chebyshev points of the second kind
/// on `[0, 1/min𝒜]` with their barycentric weights.
struct Grid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Grid {
    fn new(order: usize, right: f64) -> Self {
        let n = order - 1;
        let nodes = (0..=n)
            .map(|j| 0.5 * right * (1.0 - (std::f64::consts::PI * j as f64 / n as f64).cos()))
            .collect();
        let weights = (0..=n)
            .map(|j| {
                let w = if j % 2 == 0 { 1.0 } else { -1.0 };
                if j == 0 || j == n {
                    0.5 * w
                } else {
                    w
                }
            })
            .collect();
        Grid { nodes, weights }
    }

    /// Adds `scale · ℓ_j(y)` to `row[j]` for every Lagrange basis polynomial.
    fn add_basis_at(&self, y: f64, scale: f64, row: &mut [f64], scratch: &mut [f64]) {
        if let Some(k) = self.nodes.iter().position(|&x| x == y) {
            row[k] += scale;
            return;
        }
        let mut denom = 0.0;
        for ((s, &x), &w) in scratch.iter_mut().zip(&self.nodes).zip(&self.weights) {
            *s = w / (y - x);
            denom += *s;
        }
        let f = scale / denom;
        for (r, s) in row.iter_mut().zip(scratch.iter()) {
            *r += f * s;
        }
    }
}

fn operator_matrix(alphabet: &Alphabet, s: f64, grid: &Grid) -> Vec<Vec<f64>> {
    let n = grid.nodes.len();
    let mut scratch = vec![0.0; n];
    grid.nodes
        .iter()
        .map(|&x| {
            let mut row = vec![0.0; n];
            for a in alphabet.iter() {
                let t = a as f64 + x;
                grid.add_basis_at(1.0 / t, t.powf(-2.0 * s), &mut row, &mut scratch);
            }
            row
        })
        .collect()
}

fn leading_eigenvalue(m: &[Vec<f64>]) -> Result<f64> {
    let n = m.len();
    let mut v = vec![1.0; n];
    let mut w = vec![0.0; n];
    let mut lambda = 0.0;
    for _ in 0..POWER_MAX_ITERS {
        for (wi, row) in w.iter_mut().zip(m) {
            *wi = row.iter().zip(&v).map(|(a, b)| a * b).sum();
        }
        let norm = w.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::Numerical("power iteration collapsed".into()));
        }
        // The dominant eigenvector is positive, so the sign of its entries is stable.
        let next = norm * w[0].signum();
        let diff = (next - lambda).abs();
        lambda = next;
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / norm;
        }
        if diff <= POWER_TOL * lambda.abs() {
            return Ok(lambda.abs());
        }
    }
    Err(Error::Numerical(format!(
        "power iteration did not settle within {POWER_MAX_ITERS} steps (last λ = {lambda})"
    )))
}

fn collocation_interval(alphabet: &Alphabet) -> f64 {
    1.0 / alphabet.min() as f64
}

/// Leading eigenvalue of the discretized transfer operator at exponent `s`.
pub fn transfer_eigenvalue(alphabet: &Alphabet, s: f64, order: usize) -> Result<f64> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::domain(format!("exponent s = {s} outside (0, 1]")));
    }
    if order < 4 {
        return Err(Error::domain("collocation order must be at least 4"));
    }
    let grid = Grid::new(order, collocation_interval(alphabet));
    leading_eigenvalue(&operator_matrix(alphabet, s, &grid))
}

/// Root of `λ(s) = 1` at a fixed order, by safeguarded secant steps on `ln λ`.
fn solve_at_order(alphabet: &Alphabet, order: usize, tol: f64) -> Result<(f64, f64)> {
    let grid = Grid::new(order, collocation_interval(alphabet));
    let f = |s: f64| -> Result<f64> {
        Ok(leading_eigenvalue(&operator_matrix(alphabet, s, &grid))?.ln())
    };

    let (mut lo, mut hi) = (1e-6, 1.0);
    let (mut flo, mut fhi) = (f(lo)?, f(hi)?);
    if !(flo > 0.0 && fhi <= 0.0) {
        if fhi.abs() < 1e-13 {
            return Ok((hi, fhi.abs()));
        }
        return Err(Error::Numerical(format!(
            "λ(s) − 1 does not change sign on (0, 1]: ln λ = {flo:.3e}, {fhi:.3e}"
        )));
    }
    let mut s = hi;
    let mut fs = fhi;
    for _ in 0..200 {
        let secant = hi - fhi * (hi - lo) / (fhi - flo);
        let mid = 0.5 * (lo + hi);
        // Fall back to bisection when the secant step leaves the middle of the bracket.
        let guess = if secant > lo + 0.05 * (hi - lo) && secant < hi - 0.05 * (hi - lo) {
            secant
        } else {
            mid
        };
        s = guess;
        fs = f(s)?;
        if fs > 0.0 {
            lo = s;
            flo = fs;
        } else {
            hi = s;
            fhi = fs;
        }
        if hi - lo < tol || fs.abs() < 1e-15 {
            break;
        }
    }
    Ok((s, fs.exp_m1().abs()))
}

/// Dimension estimate, doubling the collocation order from
/// [`DEFAULT_ORDER`] up to [`MAX_ORDER`] until successive estimates agree.
pub fn dimension(alphabet: &Alphabet, tol: f64) -> Result<DimensionEstimate> {
    if !(tol >= 1e-10) {
        return Err(Error::domain(format!("tolerance {tol} below 1e-10")));
    }
    if alphabet.len() == 1 {
        return Ok(DimensionEstimate {
            alphabet: alphabet.clone(),
            delta: 0.0,
            collocation_order: 0,
            residual: 0.0,
            order_change: 0.0,
            converged: true,
        });
    }
    let target = tol.max(1e-8);
    let root_tol = (target * 1e-3).max(1e-13);
    let mut order = DEFAULT_ORDER;
    let (mut prev, _) = solve_at_order(alphabet, order, root_tol)?;
    loop {
        order *= 2;
        let (delta, residual) = solve_at_order(alphabet, order, root_tol)?;
        let change = (delta - prev).abs();
        if change < target || order >= MAX_ORDER {
            return Ok(DimensionEstimate {
                alphabet: alphabet.clone(),
                delta,
                collocation_order: order,
                residual,
                order_change: change,
                converged: change < target,
            });
        }
        prev = delta;
    }
}

/// `1 − 6/(π²A) − 72·ln A/(π⁴A²)`, the first two terms of the large-`A`
/// expansion of the dimension for `{1, …, A}`; the `O(1/A²)` term is dropped.
pub fn hensley_asymptotic(a: u64) -> Result<f64> {
    if a < 2 {
        return Err(Error::domain("asymptotic needs A ≥ 2"));
    }
    let a = a as f64;
    let pi2 = std::f64::consts::PI.powi(2);
    Ok(1.0 - 6.0 / (pi2 * a) - 72.0 * a.ln() / (pi2 * pi2 * a * a))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrderingOutcome {
    /// `dim(base ∪ {n1}) > dim(base ∪ {n2})`.
    Holds,
    Fails,
    /// The two estimates are within their combined tolerance.
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderingReport {
    pub with_n1: f64,
    pub with_n2: f64,
    pub outcome: OrderingOutcome,
}

/// Adding a smaller letter gives a larger dimension.
pub fn dimension_ordering_check(
    base: &Alphabet,
    n1: u64,
    n2: u64,
    tol: f64,
) -> Result<OrderingReport> {
    if n1 >= n2 || base.contains(n1) || base.contains(n2) {
        return Err(Error::domain(
            "need n1 < n2, both outside the base alphabet",
        ));
    }
    let e1 = dimension(&base.with(n1)?, tol)?;
    let e2 = dimension(&base.with(n2)?, tol)?;
    let margin = 2.0 * tol.max(1e-8) + e1.order_change + e2.order_change;
    let outcome = if (e1.delta - e2.delta).abs() <= margin {
        OrderingOutcome::Indeterminate
    } else if e1.delta > e2.delta {
        OrderingOutcome::Holds
    } else {
        OrderingOutcome::Fails
    };
    Ok(OrderingReport {
        with_n1: e1.delta,
        with_n2: e2.delta,
        outcome,
    })
}
