//! Circle-method bookkeeping at desk scale: the exponential sum of a ball,
//! exact representation counts, the major-arc main term and the dyadic
//! region cover used to profile the error.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::ramanujan_sum;
use crate::cf::Mat2;
use crate::error::{Error, Result};
use crate::modular::AdmissibilityProfile;
use crate::numth::gcd;
use crate::orbit::{MultiplicityIndex, OrbitBall};

pub const DEFAULT_Q_LEVEL: u64 = 6;

/// Triangle `ψ(x) = max(0, 1 − |x|)`.
pub fn psi(x: f64) -> f64 {
    (1.0 - x.abs()).max(0.0)
}

pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// `Υ = sinc²`, the Fourier transform of `ψ`.
pub fn upsilon(x: f64) -> f64 {
    let s = sinc(x);
    s * s
}

pub fn test_functions(x: f64) -> (f64, f64) {
    (psi(x), upsilon(x))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MajorArcConfig {
    pub n: u64,
    pub q_level: u64,
    /// Pair with `γ_a e₂ = (1, a)` instead of `e₂`.
    pub shift: Option<u64>,
}

impl MajorArcConfig {
    pub fn new(n: u64, q_level: u64, shift: Option<u64>) -> Result<Self> {
        if q_level < 1 || q_level > n {
            return Err(Error::domain(format!(
                "need 1 ≤ Q ≤ N, got Q = {q_level}, N = {n}"
            )));
        }
        Ok(MajorArcConfig { n, q_level, shift })
    }

    /// Half-width `Q/N` of every arc.
    pub fn radius(&self) -> f64 {
        self.q_level as f64 / self.n as f64
    }
}

/// `m_γ = ⟨γe₂, e₂⟩ = d`, or `⟨γe₂, (1, a)⟩ = b + a·d` with a shift.
pub fn pairing(m: &Mat2, shift: Option<u64>) -> Result<u128> {
    match shift {
        None => Ok(m.d),
        Some(a) => (a as u128)
            .checked_mul(m.d)
            .and_then(|x| x.checked_add(m.b))
            .ok_or_else(|| Error::overflow("shifted pairing exceeds 128 bits")),
    }
}

pub fn representation_counts(ball: &OrbitBall, shift: Option<u64>) -> Result<MultiplicityIndex> {
    let mut idx = MultiplicityIndex::default();
    for m in &ball.elements {
        *idx.counts.entry(pairing(m, shift)?).or_insert(0) += 1;
    }
    Ok(idx)
}

/// `e(x) = exp(2πix)`, reducing the argument mod 1 first.
pub fn e(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * x.rem_euclid(1.0))
}

fn e_int(theta: f64, m: u128) -> Complex64 {
    e(theta.rem_euclid(1.0) * m as f64)
}

/// `S(θ) = Σ_m R(m) e(θm)`.
pub fn exponential_sum(ball: &OrbitBall, theta: f64, shift: Option<u64>) -> Result<Complex64> {
    exponential_sum_counts(&representation_counts(ball, shift)?, theta)
}

pub fn exponential_sum_counts(counts: &MultiplicityIndex, theta: f64) -> Result<Complex64> {
    Ok(counts
        .counts
        .iter()
        .map(|(&m, &r)| e_int(theta, m) * r as f64)
        .sum())
}

/// `Ψ_{Q,N}(θ) = Σ_{q<Q} Σ_{(a,q)=1} Σ_k ψ(N(θ − a/q + k)/Q)`.
pub fn mollifier(theta: f64, config: &MajorArcConfig) -> f64 {
    let scale = config.n as f64 / config.q_level as f64;
    let mut total = 0.0;
    for q in 1..config.q_level {
        for a in 0..q {
            if gcd(a, q) != 1 {
                continue;
            }
            let mut x = (theta - a as f64 / q as f64).rem_euclid(1.0);
            if x > 0.5 {
                x -= 1.0;
            }
            // Arc radius is at most 1, so three translates suffice.
            total += (-1..=1).map(|k| psi(scale * (x + k as f64))).sum::<f64>();
        }
    }
    total
}

/// `ℳ(d) = (Q/N) Σ_γ sinc²(Q(m_γ − d)/N) Σ_{q<Q} c_q(m_γ − d)`.
pub fn main_term(ball: &OrbitBall, d: u64, config: &MajorArcConfig) -> Result<f64> {
    main_term_counts(&representation_counts(ball, config.shift)?, d, config)
}

pub fn main_term_counts(
    counts: &MultiplicityIndex,
    d: u64,
    config: &MajorArcConfig,
) -> Result<f64> {
    let ratio = config.radius();
    let mut total = 0.0;
    for (&m, &r) in &counts.counts {
        let k = i64::try_from(m).map_err(|_| Error::overflow("pairing exceeds i64"))? - d as i64;
        let ram: i64 = (1..config.q_level).map(|q| ramanujan_sum(q, k)).sum();
        if ram != 0 {
            total += r as f64 * upsilon(ratio * k as f64) * ram as f64;
        }
    }
    Ok(ratio * total)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionRecord {
    pub d: u64,
    pub r: u64,
    pub main: f64,
    pub error: f64,
    pub admissible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionResult {
    pub window: (u64, u64),
    pub config: MajorArcConfig,
    pub ball_size: usize,
    /// Which index set the sums ran over.
    pub index_set: String,
    pub records: Vec<DecompositionRecord>,
    /// `Σ_d ℰ(d)²` over the window.
    pub l2_error: f64,
    /// Admissible `d` with `R(d) < ℳ(d)/2`.
    pub exceptional: Vec<u64>,
}

impl DecompositionResult {
    /// `l2_error · N / |ball|²`.
    pub fn normalized_l2(&self) -> f64 {
        self.l2_error * self.config.n as f64 / (self.ball_size as f64).powi(2)
    }

    pub fn exceptional_fraction(&self) -> f64 {
        let admissible = self.records.iter().filter(|r| r.admissible).count();
        if admissible == 0 {
            0.0
        } else {
            self.exceptional.len() as f64 / admissible as f64
        }
    }
}

/// Splits `R(d) = ℳ(d) + ℰ(d)` for every `d` in the inclusive window.
pub fn decompose(
    ball: &OrbitBall,
    window: (u64, u64),
    config: &MajorArcConfig,
) -> Result<DecompositionResult> {
    let (lo, hi) = window;
    if lo < 1 || lo > hi || hi as f64 > std::f64::consts::SQRT_2 * config.n as f64 {
        return Err(Error::domain(format!(
            "window [{lo}, {hi}] outside [1, √2·N]"
        )));
    }
    decompose_with(
        ball,
        window,
        config,
        &AdmissibilityProfile::new(&ball.alphabet)?,
    )
}

fn decompose_with(
    ball: &OrbitBall,
    (lo, hi): (u64, u64),
    config: &MajorArcConfig,
    profile: &AdmissibilityProfile,
) -> Result<DecompositionResult> {
    let counts = representation_counts(ball, config.shift)?;
    let mut records = Vec::with_capacity((hi - lo + 1) as usize);
    let mut l2_error = 0.0;
    let mut exceptional = Vec::new();
    for d in lo..=hi {
        let r = counts.get(d as u128);
        let main = main_term_counts(&counts, d, config)?;
        let error = r as f64 - main;
        let admissible = profile.admits(d);
        if admissible && (r as f64) < main / 2.0 {
            exceptional.push(d);
        }
        l2_error += error * error;
        records.push(DecompositionRecord {
            d,
            r,
            main,
            error,
            admissible,
        });
    }
    let index_set = match ball.det_filter {
        crate::orbit::DetFilter::All => "full ball",
        crate::orbit::DetFilter::PlusOne => "determinant-one ball",
    };
    Ok(DecompositionResult {
        window: (lo, hi),
        config: config.clone(),
        ball_size: ball.len(),
        index_set: index_set.into(),
        records,
        l2_error,
        exceptional,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RegionKind {
    /// `|β| < K/N'` around each fraction.
    Central,
    /// `β = l/(TN') + t` with `KT/2 ≤ |l| < KT`, `|t| < 1/(TN')`.
    Tail { t: f64 },
}

/// Fractions `s/q` with `Q/2 ≤ q < Q` and a shape around each.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub q_dyadic: u64,
    pub k: f64,
    pub kind: RegionKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcPartition {
    pub n: u64,
    pub n_prime: f64,
    pub c_tilde: f64,
    pub regions: Vec<Region>,
}

/// Signed distance from `θ` to `s/q` on the circle, for the nearest `s`.
fn offset(theta: f64, q: u64) -> (u64, f64) {
    let s = (theta * q as f64).round();
    let beta = theta - s / q as f64;
    (s.rem_euclid(q as f64) as u64, beta)
}

impl ArcPartition {
    fn in_shape(&self, region: &Region, beta: f64) -> bool {
        let np = self.n_prime;
        match region.kind {
            RegionKind::Central => beta.abs() < region.k / np,
            RegionKind::Tail { t } => {
                let x = beta.abs() * t * np;
                let (lmin, lmax) = (region.k * t / 2.0, region.k * t);
                [x.floor(), x.ceil()]
                    .into_iter()
                    .any(|l| l >= lmin && l < lmax && (x - l).abs() < 1.0)
            }
        }
    }

    pub fn contains(&self, region: &Region, theta: f64) -> bool {
        let theta = theta.rem_euclid(1.0);
        let qd = region.q_dyadic;
        (qd / 2..qd).filter(|&q| q >= 1).any(|q| {
            let (s, beta) = offset(theta, q);
            gcd(s, q) == 1 && self.in_shape(region, beta)
        })
    }

    /// Dirichlet approximation: the last convergent `s/q` of `θ` with
    /// `q ≤ √N'`, which satisfies `|θ − s/q| < 1/(q√N')`.
    pub fn dirichlet(&self, theta: f64) -> (u64, u64) {
        let bound = self.n_prime.sqrt();
        let theta = theta.rem_euclid(1.0);
        let (mut p0, mut q0, mut p1, mut q1) = (0u64, 1u64, 1u64, 0u64);
        let mut x = theta;
        loop {
            let a = x.floor();
            let (p2, q2) = (a as u64 * p1 + p0, a as u64 * q1 + q0);
            if q2 as f64 > bound {
                break;
            }
            (p0, q0, p1, q1) = (p1, q1, p2, q2);
            let frac = x - a;
            if frac < 1e-15 {
                break;
            }
            x = 1.0 / frac;
        }
        (p1 % q1.max(1), q1.max(1))
    }

    /// First region containing `θ`, searched from the Dirichlet denominator's dyadic block.
    pub fn locate(&self, theta: f64) -> Option<usize> {
        let (_, q) = self.dirichlet(theta);
        let qd = (q + 1).next_power_of_two();
        self.regions
            .iter()
            .enumerate()
            .filter(|(_, r)| r.q_dyadic == qd)
            .chain(self.regions.iter().enumerate())
            .find(|(_, r)| self.contains(r, theta))
            .map(|(i, _)| i)
    }

    /// Sum over regions of the measure of each region counted per fraction,
    /// so overlaps are counted repeatedly.
    pub fn measure_sum(&self) -> f64 {
        let np = self.n_prime;
        self.regions
            .iter()
            .map(|r| {
                let fractions: u64 = (r.q_dyadic / 2..r.q_dyadic)
                    .filter(|&q| q >= 1)
                    .map(crate::numth::euler_phi)
                    .sum();
                let width = match r.kind {
                    RegionKind::Central => 2.0 * r.k / np,
                    RegionKind::Tail { t } => {
                        let lmin = (r.k * t / 2.0).ceil();
                        let lmax = (r.k * t).ceil() - 1.0;
                        if lmax < lmin {
                            0.0
                        } else {
                            2.0 * (lmax - lmin + 2.0) / (t * np)
                        }
                    }
                };
                fractions as f64 * width.min(1.0)
            })
            .sum()
    }

    /// Fraction of the sample points that fall in at least one region.
    pub fn coverage(&self, samples: &[f64]) -> f64 {
        let hit = samples
            .iter()
            .filter(|&&t| self.locate(t).is_some())
            .count();
        hit as f64 / samples.len().max(1) as f64
    }
}

/// Dyadic `(Q, K)` regions for `N' = scale·N`, with `K` starting at `C̃`.
pub fn arc_partition(n: u64, scale: f64, c_tilde: f64) -> Result<ArcPartition> {
    if n < 4 {
        return Err(Error::domain("arc partition needs N ≥ 4"));
    }
    if !(scale >= 1.0 && c_tilde >= 1.0) {
        return Err(Error::domain("scale and C̃ must be at least 1"));
    }
    let n_prime = scale * n as f64;
    let root = n_prime.sqrt();
    let mut regions = Vec::new();
    let mut qd = 2u64;
    while qd as f64 / 2.0 <= root {
        let reach = 2.0 * root / qd as f64;
        regions.push(Region {
            q_dyadic: qd,
            k: c_tilde,
            kind: RegionKind::Central,
        });
        let mut k = 2.0 * c_tilde;
        while k / 2.0 < reach {
            let t = k * (qd as f64).powf(1.5);
            regions.push(Region {
                q_dyadic: qd,
                k,
                kind: RegionKind::Tail { t },
            });
            k *= 2.0;
        }
        qd *= 2;
    }
    Ok(ArcPartition {
        n,
        n_prime,
        c_tilde,
        regions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cf::Alphabet;
    use crate::orbit::{enumerate_ball, DetFilter};

    #[test]
    fn test_function_values() {
        assert_eq!(psi(0.0), 1.0);
        assert_eq!(psi(1.0), 0.0);
        assert_eq!(psi(-1.0), 0.0);
        assert_eq!(upsilon(0.0), 1.0);
        for k in 1..10 {
            assert!(upsilon(k as f64).abs() < 1e-30);
        }
    }

    #[test]
    fn sum_at_zero_and_half() {
        let ball = enumerate_ball(&Alphabet::range(1, 3).unwrap(), 60, DetFilter::PlusOne).unwrap();
        let s0 = exponential_sum(&ball, 0.0, None).unwrap();
        assert!((s0.re - ball.len() as f64).abs() < 1e-9 && s0.im.abs() < 1e-9);
        let half = exponential_sum(&ball, 0.5, None).unwrap();
        let parity: i64 = ball
            .elements
            .iter()
            .map(|m| if m.d % 2 == 0 { 1 } else { -1 })
            .sum();
        assert!((half.re - parity as f64).abs() < 1e-9);
    }

    #[test]
    fn main_term_edge_cases() {
        let ball = OrbitBall {
            alphabet: Alphabet::new([1]).unwrap(),
            norm_bound: 3,
            det_filter: DetFilter::All,
            elements: vec![Mat2::new(1, 1, 1, 2)],
        };
        let cfg = MajorArcConfig::new(100, 2, None).unwrap();
        assert!((main_term(&ball, 2, &cfg).unwrap() - 0.02).abs() < 1e-15);
        let cfg1 = MajorArcConfig::new(100, 1, None).unwrap();
        assert_eq!(main_term(&ball, 2, &cfg1).unwrap(), 0.0);
    }

    #[test]
    fn mollifier_peaks_at_fractions() {
        let cfg = MajorArcConfig::new(500, 5, None).unwrap();
        for (a, q) in [(0u64, 1u64), (1, 2), (1, 3), (3, 4)] {
            assert!((mollifier(a as f64 / q as f64, &cfg) - 1.0).abs() < 1e-12);
        }
        assert_eq!(mollifier(0.123, &cfg), 0.0);
    }

    #[test]
    fn partition_locates_half() {
        let p = arc_partition(100, 1.0, 1.0).unwrap();
        assert_eq!(p.dirichlet(0.5), (1, 2));
        let i = p.locate(0.5).unwrap();
        assert_eq!(p.regions[i].q_dyadic, 4);
    }
}
