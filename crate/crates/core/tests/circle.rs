mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zaremba::arith::{CqSource, Rational};
use zaremba::circle::{
    arc_partition, decompose, e, exponential_sum, exponential_sum_counts, main_term,
    main_term_counts, mollifier, pairing, psi, representation_counts, test_functions, upsilon,
    MajorArcConfig,
};
use zaremba::modular::AdmissibilityProfile;
use zaremba::orbit::enumerate_ball;
use zaremba::{Alphabet, DetFilter, Mat2, MultiplicityIndex, OrbitBall};

fn alpha(m: &[u64]) -> Alphabet {
    Alphabet::new(m.iter().copied()).unwrap()
}

fn pairings(ball: &OrbitBall, shift: Option<u64>) -> Vec<u128> {
    ball.elements
        .iter()
        .map(|m| pairing(m, shift).unwrap())
        .collect()
}

#[test]
fn test_function_values() {
    assert_eq!(test_functions(0.0), (1.0, 1.0));
    assert_eq!(psi(1.0), 0.0);
    assert_eq!(psi(-1.0), 0.0);
    for k in 1..20 {
        assert!(upsilon(k as f64).abs() < 1e-30 + 1e-15);
    }
    // Fourier transform of the triangle by Gauss–Legendre on [-1, 0] and [0, 1].
    let nodes = common::gauss_legendre(40);
    for t in [0.1, 0.5, 2.3] {
        let mut acc = 0.0;
        for (lo, hi) in [(-1.0, 0.0), (0.0, 1.0)] {
            for &(x, w) in &nodes {
                let y = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x;
                acc += 0.5 * (hi - lo) * w * psi(y) * common::e(-t * y).re;
            }
        }
        assert!((acc - upsilon(t)).abs() < 1e-8, "t = {t}");
    }
}

#[test]
fn exponential_sum_values() {
    let ball = enumerate_ball(&alpha(&[1, 2, 3]), 200, DetFilter::PlusOne).unwrap();
    let s0 = exponential_sum(&ball, 0.0, None).unwrap();
    assert!((s0.re - ball.len() as f64).abs() < 1e-9 && s0.im.abs() < 1e-9);
    let half = exponential_sum(&ball, 0.5, None).unwrap();
    let parity: i64 = ball
        .elements
        .iter()
        .map(|m| if m.d % 2 == 0 { 1 } else { -1 })
        .sum();
    assert!((half.re - parity as f64).abs() < 1e-8 && half.im.abs() < 1e-8);
    for theta in [0.1, 0.37, 0.9] {
        assert!(exponential_sum(&ball, theta, None).unwrap().norm() <= ball.len() as f64 + 1e-9);
    }
    assert!((e(0.25) - num_complex::Complex64::new(0.0, 1.0)).norm() < 1e-15);
}

#[test]
fn counts_match_dft_oracle() {
    let ball = enumerate_ball(&alpha(&[1, 2]), 100, DetFilter::All).unwrap();
    for shift in [None, Some(2)] {
        let counts = representation_counts(&ball, shift).unwrap();
        assert_eq!(counts.total(), ball.len() as u64);
        let ms = pairings(&ball, shift);
        let top = *ms.iter().max().unwrap() as u64;
        for d in 0..=top + 3 {
            assert_eq!(
                common::brute_fourier(&ms, d),
                counts.get(d as u128) as i64,
                "d = {d}, shift {shift:?}"
            );
        }
    }
    let empty = OrbitBall {
        elements: vec![],
        ..ball
    };
    assert_eq!(common::brute_fourier(&pairings(&empty, None), 5), 0);
}

#[test]
fn shift_is_left_multiplication() {
    let ball = enumerate_ball(&alpha(&[1, 2, 3]), 150, DetFilter::PlusOne).unwrap();
    for a in [1u64, 2, 3] {
        let shifted = representation_counts(&ball, Some(a)).unwrap();
        let mut direct = MultiplicityIndex::default();
        for m in &ball.elements {
            *direct
                .counts
                .entry(m.premul_generator(a).unwrap().d)
                .or_insert(0) += 1;
        }
        assert_eq!(shifted, direct);
    }
}

#[test]
fn parseval() {
    let ball = enumerate_ball(&alpha(&[1, 2, 3]), 300, DetFilter::PlusOne).unwrap();
    let counts = representation_counts(&ball, None).unwrap();
    let lhs: f64 = counts.counts.values().map(|&r| (r * r) as f64).sum();
    let size = 2 * counts.keys().max().unwrap() as usize + 2;
    let rhs: f64 = (0..size)
        .map(|j| {
            exponential_sum_counts(&counts, j as f64 / size as f64)
                .unwrap()
                .norm_sqr()
        })
        .sum::<f64>()
        / size as f64;
    assert!((lhs - rhs).abs() <= 1e-6 * lhs, "{lhs} vs {rhs}");
}

#[test]
fn main_term_edge_cases() {
    let mut one = MultiplicityIndex::default();
    one.counts.insert(17, 1);
    let cfg = MajorArcConfig::new(100, 2, None).unwrap();
    assert!((main_term_counts(&one, 17, &cfg).unwrap() - 2.0 / 100.0).abs() < 1e-15);
    let cfg1 = MajorArcConfig::new(100, 1, None).unwrap();
    assert_eq!(main_term_counts(&one, 17, &cfg1).unwrap(), 0.0);
    assert!(MajorArcConfig::new(10, 11, None).is_err());
    assert!(MajorArcConfig::new(10, 0, None).is_err());
}

#[test]
fn main_term_matches_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..8 {
        let n = rng.gen_range(60..=300u64);
        let q_level = rng.gen_range(2..=8u64);
        let shift = if rng.gen_bool(0.3) {
            Some(rng.gen_range(1..=3u64))
        } else {
            None
        };
        let ball = enumerate_ball(&alpha(&[1, 2, 3]), n as u128, DetFilter::PlusOne).unwrap();
        let cfg = MajorArcConfig::new(n, q_level, shift).unwrap();
        let d = rng.gen_range(1..=n);
        let closed = main_term(&ball, d, &cfg).unwrap();
        let quad = common::quadrature_main_term(&pairings(&ball, shift), d, n, q_level);
        let scale = closed.abs().max(1e-3);
        assert!(
            (closed - quad).abs() <= 1e-6 * scale,
            "N={n} Q={q_level} d={d}: {closed} vs {quad}"
        );
    }
}

#[test]
fn mollifier_shape() {
    let cfg = MajorArcConfig::new(2000, 6, None).unwrap();
    let radius = cfg.radius();
    for q in 1..6u64 {
        for a in 0..q {
            if zaremba::numth::gcd(a, q) == 1 {
                assert!((mollifier(a as f64 / q as f64, &cfg) - 1.0).abs() < 1e-12);
            }
        }
    }
    let centers: Vec<f64> = (1..6u64)
        .flat_map(|q| {
            (0..q)
                .filter(move |&a| zaremba::numth::gcd(a, q) == 1)
                .map(move |a| a as f64 / q as f64)
        })
        .collect();
    for k in 0..2000 {
        let theta = k as f64 / 2000.0 + 1.3e-4;
        let v = mollifier(theta, &cfg);
        assert!(v >= 0.0);
        let near = centers.iter().any(|&c| {
            let x = (theta - c).rem_euclid(1.0);
            x.min(1.0 - x) < radius
        });
        if !near {
            assert_eq!(v, 0.0);
        }
        assert!((v - common::brute_mollifier(theta, 2000, 6)).abs() < 1e-12);
    }
}

#[test]
fn decomposition_at_two_thousand() {
    let a = Alphabet::range(1, 5).unwrap();
    let ball = enumerate_ball(&a, 2000, DetFilter::PlusOne).unwrap();
    let cfg = MajorArcConfig::new(2000, 6, None).unwrap();
    let res = decompose(&ball, (50, 80), &cfg).unwrap();
    let profile = AdmissibilityProfile::new(&a).unwrap();
    for r in &res.records {
        assert_eq!(r.r as f64, r.main + r.error);
        if profile.admits(r.d) {
            assert!(r.r > 0, "R({}) = 0", r.d);
            assert!(r.main > 0.0, "M({}) = {}", r.d, r.main);
        }
    }
    assert!(res.exceptional_fraction() <= 0.5);
    assert!(decompose(&ball, (0, 10), &cfg).is_err());
    assert!(decompose(&ball, (10, 3000), &cfg).is_err());
}

#[test]
fn octal_obstruction_nullifies_two_adic_part() {
    let oct = Alphabet::progression(1, 8, 6).unwrap();
    let mut src = CqSource::new(&oct, DetFilter::All);
    let (t, _) = zaremba::modular::lift_exponent(&oct, 2).unwrap();
    for n in (4..200i64).step_by(8) {
        let mut acc = Rational::from_integer(1);
        for s in 1..=t {
            acc += src.prime_power(2, s, n).unwrap();
        }
        assert_eq!(acc, Rational::from_integer(0), "n = {n}");
    }
}

#[test]
fn arc_cover() {
    let part = arc_partition(10_000, 1.0, 1.0).unwrap();
    assert_eq!(part.dirichlet(0.5), (1, 2));
    let idx = part.locate(0.5).unwrap();
    let region = part.regions[idx];
    assert!(region.q_dyadic / 2 <= 2 && 2 < region.q_dyadic);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let samples: Vec<f64> = (0..10_000).map(|_| rng.gen::<f64>()).collect();
    assert_eq!(part.coverage(&samples), 1.0);
    assert!(part.measure_sum() >= 1.0);
    assert!(arc_partition(3, 1.0, 1.0).is_err());
    let _ = Mat2::IDENTITY;
}
