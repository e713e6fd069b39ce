//! Norm balls in the generator semigroup and the denominators they produce.
//!
//! A ball holds every nonempty generator product with Frobenius norm strictly
//! below the bound. The identity is not included. Elements are stored as
//! matrices; the word of an element is recovered on demand with
//! [`word_of_matrix`], which is a bijection on the semigroup.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::cf::{eigen, word_of_matrix, Alphabet, Mat2, Word};
use crate::error::{Error, Result};
use crate::modular::AdmissibilityProfile;

/// Which elements of the semigroup a ball keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum DetFilter {
    /// Every nonempty word.
    #[default]
    All,
    /// Even-length words only (the determinant-one subsemigroup).
    PlusOne,
}

impl DetFilter {
    #[inline]
    fn keeps(self, len: usize) -> bool {
        len > 0 && (self == DetFilter::All || len % 2 == 0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitBall {
    pub alphabet: Alphabet,
    pub norm_bound: u64,
    pub det_filter: DetFilter,
    /// Sorted by `(d, c, b, a)`.
    pub elements: Vec<Mat2>,
}

impl OrbitBall {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = Word> + '_ {
        self.elements
            .iter()
            .map(|m| word_of_matrix(m).expect("ball elements are generator products"))
    }

    pub fn denominators(&self) -> MultiplicityIndex {
        denominators(self)
    }
}

/// Number of ball elements with a given bottom-right entry.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MultiplicityIndex {
    pub counts: BTreeMap<u128, u64>,
}

impl MultiplicityIndex {
    pub fn get(&self, d: u128) -> u64 {
        self.counts.get(&d).copied().unwrap_or(0)
    }

    pub fn contains(&self, d: u128) -> bool {
        self.counts.contains_key(&d)
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn keys(&self) -> impl Iterator<Item = u128> + '_ {
        self.counts.keys().copied()
    }

    fn add(&mut self, d: u128) {
        *self.counts.entry(d).or_insert(0) += 1;
    }
}

fn check_bound(n: u128) -> Result<u64> {
    if n == 0 {
        return Err(Error::domain("norm bound must be positive"));
    }
    u64::try_from(n).map_err(|_| Error::overflow(format!("norm bound {n} squares past 128 bits")))
}

/// Depth-first walk over every word whose product has norm below `bound`,
/// starting at `root` (a product of length `depth`). Appending a generator
/// never decreases the norm, and the child norm grows with the appended
/// quotient, so the scan over the sorted alphabet stops at the first miss.
fn walk<F: FnMut(&Mat2, usize)>(
    alphabet: &[u64],
    bound_sq: u128,
    root: &Mat2,
    depth: usize,
    visit: &mut F,
) {
    for &x in alphabet {
        let child = match root.mul_generator(x) {
            Ok(m) => m,
            Err(_) => break,
        };
        match child.norm_sq() {
            Ok(ns) if ns < bound_sq => {}
            _ => break,
        }
        visit(&child, depth + 1);
        walk(alphabet, bound_sq, &child, depth + 1, visit);
    }
}

/// Calls `visit(element, word_length)` for every nonempty word in the ball,
/// regardless of filter.
pub fn visit_ball<F: FnMut(&Mat2, usize)>(
    alphabet: &Alphabet,
    n: u128,
    mut visit: F,
) -> Result<()> {
    let n = check_bound(n)?;
    let bound_sq = (n as u128) * (n as u128);
    walk(alphabet.members(), bound_sq, &Mat2::IDENTITY, 0, &mut visit);
    Ok(())
}

/// Size of the ball without materializing it.
pub fn count_ball(alphabet: &Alphabet, n: u128, filter: DetFilter) -> Result<u64> {
    let mut count = 0u64;
    visit_ball(alphabet, n, |_, len| {
        if filter.keeps(len) {
            count += 1;
        }
    })?;
    Ok(count)
}

pub fn enumerate_ball(alphabet: &Alphabet, n: u128, filter: DetFilter) -> Result<OrbitBall> {
    let bound = check_bound(n)?;
    let mut elements = Vec::new();
    visit_ball(alphabet, n, |m, len| {
        if filter.keeps(len) {
            elements.push(*m);
        }
    })?;
    elements.sort_unstable();
    Ok(OrbitBall {
        alphabet: alphabet.clone(),
        norm_bound: bound,
        det_filter: filter,
        elements,
    })
}

/// Same result as [`enumerate_ball`], with subtrees below each word of length
/// at most two handed to a pool of `threads` workers.
pub fn enumerate_ball_parallel(
    alphabet: &Alphabet,
    n: u128,
    filter: DetFilter,
    threads: usize,
) -> Result<OrbitBall> {
    use rayon::prelude::*;

    let bound = check_bound(n)?;
    if threads <= 1 {
        return enumerate_ball(alphabet, n, filter);
    }
    let bound_sq = (bound as u128) * (bound as u128);
    let members = alphabet.members();
    let inside = |m: &Mat2| m.norm_sq().map(|s| s < bound_sq).unwrap_or(false);

    let mut elements = Vec::new();
    let mut roots = Vec::new();
    for &x in members {
        let g = Mat2::generator(x);
        if !inside(&g) {
            break;
        }
        if filter.keeps(1) {
            elements.push(g);
        }
        for &y in members {
            let Ok(gy) = g.mul_generator(y) else { break };
            if !inside(&gy) {
                break;
            }
            roots.push(gy);
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Resource(format!("thread pool: {e}")))?;
    let parts: Vec<Vec<Mat2>> = pool.install(|| {
        roots
            .par_iter()
            .map(|root| {
                let mut local = Vec::new();
                if filter.keeps(2) {
                    local.push(*root);
                }
                walk(members, bound_sq, root, 2, &mut |m: &Mat2, len| {
                    if filter.keeps(len) {
                        local.push(*m);
                    }
                });
                local
            })
            .collect()
    });
    for part in parts {
        elements.extend(part);
    }
    pool.install(|| elements.par_sort_unstable());
    Ok(OrbitBall {
        alphabet: alphabet.clone(),
        norm_bound: bound,
        det_filter: filter,
        elements,
    })
}

pub fn denominators(ball: &OrbitBall) -> MultiplicityIndex {
    let mut idx = MultiplicityIndex::default();
    for m in &ball.elements {
        idx.add(m.d);
    }
    idx
}

/// Multiplicities of every denominator `d ≤ dmax`, counting each word once.
///
/// Walks the tree pruned on `d` instead of the norm; `d` never decreases when
/// a generator is appended, so this sees every word with `d ≤ dmax`.
pub fn denominators_up_to(
    alphabet: &Alphabet,
    dmax: u64,
    filter: DetFilter,
) -> Result<MultiplicityIndex> {
    fn go(
        members: &[u64],
        dmax: u128,
        root: &Mat2,
        depth: usize,
        filter: DetFilter,
        idx: &mut MultiplicityIndex,
    ) {
        for &x in members {
            let Ok(child) = root.mul_generator(x) else {
                break;
            };
            if child.d > dmax {
                break;
            }
            if filter.keeps(depth + 1) {
                idx.add(child.d);
            }
            go(members, dmax, &child, depth + 1, filter, idx);
        }
    }
    let mut idx = MultiplicityIndex::default();
    go(
        alphabet.members(),
        dmax as u128,
        &Mat2::IDENTITY,
        0,
        filter,
        &mut idx,
    );
    Ok(idx)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityPoint {
    pub cutoff: u64,
    pub admissible: u64,
    pub represented: u64,
    pub fraction: f64,
}

/// Fraction of admissible integers up to each cutoff that occur as denominators.
pub fn density_report(alphabet: &Alphabet, n: u64, grid: usize) -> Result<Vec<DensityPoint>> {
    if n == 0 || grid == 0 {
        return Err(Error::domain(
            "density report needs n ≥ 1 and a nonempty grid",
        ));
    }
    let denoms = denominators_up_to(alphabet, n, DetFilter::All)?;
    let profile = AdmissibilityProfile::new(alphabet)?;
    let cutoffs: Vec<u64> = (1..=grid as u64)
        .map(|k| (n * k / grid as u64).max(1))
        .collect();
    let mut out = Vec::with_capacity(grid);
    let (mut adm, mut rep) = (0u64, 0u64);
    let mut next = 1u64;
    for cutoff in cutoffs {
        while next <= cutoff {
            if profile.admits(next) {
                adm += 1;
                if denoms.contains(next as u128) {
                    rep += 1;
                }
            }
            next += 1;
        }
        let fraction = if adm == 0 {
            0.0
        } else {
            rep as f64 / adm as f64
        };
        out.push(DensityPoint {
            cutoff,
            admissible: adm,
            represented: rep,
            fraction,
        });
    }
    Ok(out)
}

/// Unit vector of the fixed point `x = [A, A, A, …]`.
pub fn density_point(a_max: u64) -> [f64; 2] {
    let a = a_max as f64;
    let x = (-a + (a * a + 4.0).sqrt()) / 2.0;
    let n = (1.0 + x * x).sqrt();
    [x / n, 1.0 / n]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorCount {
    pub count: u64,
    pub ball_count: u64,
    pub density_point: [f64; 2],
}

/// Determinant-one elements of norm `< t` whose expanding eigenvector lies
/// within `1/h` of the density point.
pub fn sector_count(alphabet: &Alphabet, t: f64, h: f64) -> Result<SectorCount> {
    if alphabet.max() < 3 {
        return Err(Error::domain(
            "sector counting needs max alphabet member ≥ 3",
        ));
    }
    if !(t >= 2.0) || !(h > 0.0) {
        return Err(Error::domain(format!(
            "need T ≥ 2 and H > 0, got T = {t}, H = {h}"
        )));
    }
    let v = density_point(alphabet.max());
    let radius = 1.0 / h;
    let mut count = 0u64;
    let mut ball_count = 0u64;
    let mut failure = None;
    visit_ball(alphabet, t.ceil() as u128, |m, len| {
        if len % 2 != 0 || m.norm() >= t {
            return;
        }
        ball_count += 1;
        match eigen(m) {
            Ok(e) => {
                if crate::cf::dist(e.v_plus, v) < radius {
                    count += 1;
                }
            }
            Err(err) => failure = Some(err),
        }
    })?;
    if let Some(err) = failure {
        return Err(err);
    }
    Ok(SectorCount {
        count,
        ball_count,
        density_point: v,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub holds: bool,
    /// Fractions compared, all with denominator below `N/2`.
    pub fractions: usize,
    pub only_in_ball: Vec<(u128, u128)>,
    pub only_in_union: Vec<(u128, u128)>,
}

/// Checks that the fractions of the full ball equal those of the
/// determinant-one orbit together with its translates by each generator,
/// restricted to denominators below `N/2` where both sides are complete.
pub fn orbit_decomposition_check(alphabet: &Alphabet, n: u128) -> Result<DecompositionReport> {
    let half = n / 2 + n % 2; // d < N/2  ⇔  d < ceil(N/2)
    let keep = |(_, d): &(u128, u128)| *d < half;

    let full = enumerate_ball(alphabet, n, DetFilter::All)?;
    let lhs: HashSet<(u128, u128)> = full.elements.iter().map(Mat2::col2).filter(keep).collect();

    let gamma = enumerate_ball(alphabet, n, DetFilter::PlusOne)?;
    let mut rhs: HashSet<(u128, u128)> =
        gamma.elements.iter().map(Mat2::col2).filter(keep).collect();
    for a in alphabet.iter() {
        let g = Mat2::generator(a);
        for m in std::iter::once(&Mat2::IDENTITY).chain(gamma.elements.iter()) {
            let col = g.checked_mul(m)?.col2();
            if keep(&col) {
                rhs.insert(col);
            }
        }
    }

    let mut only_in_ball: Vec<_> = lhs.difference(&rhs).copied().collect();
    let mut only_in_union: Vec<_> = rhs.difference(&lhs).copied().collect();
    only_in_ball.sort_unstable();
    only_in_union.sort_unstable();
    Ok(DecompositionReport {
        holds: only_in_ball.is_empty() && only_in_union.is_empty(),
        fractions: lhs.len(),
        only_in_ball,
        only_in_union,
    })
}

/// Least-squares fit of `log y` against `log x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub counts: Vec<(u64, u64)>,
    pub exponent: f64,
}

/// Ball sizes at each cutoff and the fitted exponent of `#ball(N) ≈ N^e`.
pub fn growth_fit(alphabet: &Alphabet, cutoffs: &[u64], filter: DetFilter) -> Result<GrowthFit> {
    if cutoffs.len() < 2 {
        return Err(Error::domain("growth fit needs at least two cutoffs"));
    }
    let counts = cutoffs
        .iter()
        .map(|&n| count_ball(alphabet, n as u128, filter).map(|c| (n, c)))
        .collect::<Result<Vec<_>>>()?;
    let pts: Vec<(f64, f64)> = counts.iter().map(|&(n, c)| (n as f64, c as f64)).collect();
    Ok(GrowthFit {
        exponent: loglog_slope(&pts),
        counts,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplicityScaling {
    /// `(N, median multiplicity over d ∈ [N/40, N/25])`.
    pub medians: Vec<(u64, f64)>,
    pub exponent: f64,
}

/// Median multiplicity of denominators in `[N/40, N/25]` as `N` grows.
pub fn multiplicity_scaling(alphabet: &Alphabet, ns: &[u64]) -> Result<MultiplicityScaling> {
    let mut medians = Vec::with_capacity(ns.len());
    for &n in ns {
        let idx = enumerate_ball(alphabet, n as u128, DetFilter::All)?.denominators();
        let (lo, hi) = ((n / 40).max(1) as u128, (n / 25) as u128);
        let mut window: Vec<u64> = (lo..=hi).map(|d| idx.get(d)).collect();
        window.sort_unstable();
        let median = match window.len() {
            0 => 0.0,
            k if k % 2 == 1 => window[k / 2] as f64,
            k => (window[k / 2 - 1] + window[k / 2]) as f64 / 2.0,
        };
        medians.push((n, median));
    }
    let pts: Vec<(f64, f64)> = medians.iter().map(|&(n, m)| (n as f64, m)).collect();
    let exponent = if pts.len() >= 2 {
        loglog_slope(&pts)
    } else {
        f64::NAN
    };
    Ok(MultiplicityScaling { medians, exponent })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alpha(v: &[u64]) -> Alphabet {
        Alphabet::new(v.iter().copied()).unwrap()
    }

    #[test]
    fn fibonacci_ball() {
        let ball = enumerate_ball(&alpha(&[1]), 3, DetFilter::All).unwrap();
        assert_eq!(
            ball.elements,
            vec![Mat2::new(0, 1, 1, 1), Mat2::new(1, 1, 1, 2)]
        );
        assert!(enumerate_ball(&alpha(&[1, 2, 3]), 1, DetFilter::All)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn small_denominator_sets() {
        let idx = enumerate_ball(&alpha(&[1]), 10, DetFilter::All)
            .unwrap()
            .denominators();
        assert_eq!(idx.keys().collect::<Vec<_>>(), vec![1, 2, 3, 5]);
        let idx = enumerate_ball(&alpha(&[2]), 50, DetFilter::All)
            .unwrap()
            .denominators();
        assert_eq!(idx.keys().collect::<Vec<_>>(), vec![2, 5, 12, 29]);
    }

    #[test]
    fn parallel_matches_serial() {
        let a = alpha(&[1, 2, 3]);
        for filter in [DetFilter::All, DetFilter::PlusOne] {
            let s = enumerate_ball(&a, 300, filter).unwrap();
            let p = enumerate_ball_parallel(&a, 300, filter, 3).unwrap();
            assert_eq!(s, p);
            assert_eq!(count_ball(&a, 300, filter).unwrap(), s.len() as u64);
        }
    }

    #[test]
    fn zero_bound_is_rejected() {
        assert!(matches!(
            enumerate_ball(&alpha(&[1]), 0, DetFilter::All),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            enumerate_ball(&alpha(&[1]), u128::MAX, DetFilter::All),
            Err(Error::Overflow(_))
        ));
    }

    #[test]
    fn density_point_is_steep() {
        for a in 3..60 {
            assert!(density_point(a)[1] > 0.75f64.sqrt());
        }
        assert!(sector_count(&alpha(&[1, 2]), 100.0, 1.0).is_err());
    }

    #[test]
    fn decomposition_small() {
        assert!(
            orbit_decomposition_check(&alpha(&[1, 2]), 200)
                .unwrap()
                .holds
        );
        assert!(orbit_decomposition_check(&alpha(&[3]), 100).unwrap().holds);
        assert!(orbit_decomposition_check(&alpha(&[2]), 1).unwrap().holds);
    }
}
