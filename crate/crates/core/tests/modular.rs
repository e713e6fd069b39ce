mod common;

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zaremba::modular::{
    admissible_residues, closure_mod_q, det_mod, find_bad_modulus, is_admissible, k_star, mul_mod,
    ModMat,
};
use zaremba::numth::sl2_order;
use zaremba::{Alphabet, DetFilter};

fn alpha(m: &[u64]) -> Alphabet {
    Alphabet::new(m.iter().copied()).unwrap()
}

fn as_set(a: &Alphabet, q: u64, filter: DetFilter) -> BTreeSet<ModMat> {
    closure_mod_q(a, q, filter).unwrap().elements().collect()
}

#[test]
fn closure_matches_word_product_oracle() {
    for a in [
        &[1u64, 2][..],
        &[1, 3, 5],
        &[1, 9, 17],
        &[2, 4, 6],
        &[1, 9],
        &[3, 7, 11],
    ] {
        for q in 2..=24 {
            for (filter, even) in [(DetFilter::All, false), (DetFilter::PlusOne, true)] {
                assert_eq!(
                    as_set(&alpha(a), q, filter),
                    common::brute_closure(a, q, even),
                    "{a:?} mod {q} {filter:?}"
                );
            }
        }
    }
}

#[test]
fn closure_examples() {
    let t = closure_mod_q(&alpha(&[1, 2]), 5, DetFilter::PlusOne).unwrap();
    assert!(t.is_full_sl2 && t.len() == 120);
    let t = closure_mod_q(&alpha(&[1, 3, 5]), 2, DetFilter::PlusOne).unwrap();
    assert_eq!(t.len(), 3);
    assert!(!t.is_full_sl2);
    assert_eq!(
        admissible_residues(&alpha(&[1, 9, 17]), 8).unwrap(),
        vec![0, 1, 2, 3, 5, 7]
    );
    assert_eq!(admissible_residues(&alpha(&[1, 3]), 2).unwrap(), vec![0, 1]);
    assert_eq!(
        admissible_residues(&alpha(&[1, 2]), 7).unwrap(),
        (0..7).collect::<Vec<_>>()
    );
}

#[test]
fn consecutive_letters_give_full_sl2() {
    for m in 1..=6 {
        for q in 2..=30 {
            let t = closure_mod_q(&alpha(&[m, m + 1]), q, DetFilter::PlusOne).unwrap();
            assert!(t.is_full_sl2, "{{{m},{}}} mod {q}", m + 1);
        }
    }
}

#[test]
fn sl2_order_formula_for_one_two() {
    for q in 2..=64 {
        let t = closure_mod_q(&alpha(&[1, 2]), q, DetFilter::PlusOne).unwrap();
        assert!(t.is_full_sl2);
        assert_eq!(t.len() as u64, sl2_order(q));
    }
}

#[test]
fn closure_is_a_group() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (a, q) in [
        (&[1u64, 9, 17][..], 16),
        (&[1, 3, 5], 12),
        (&[2, 4, 6], 9),
        (&[1, 2, 3], 10),
    ] {
        let t = closure_mod_q(&alpha(a), q, DetFilter::All).unwrap();
        let elems: Vec<ModMat> = t.elements().collect();
        for _ in 0..1000 {
            let x = elems[rng.gen_range(0..elems.len())];
            let y = elems[rng.gen_range(0..elems.len())];
            assert!(t.contains(mul_mod(q, x, y)));
            assert!(matches!(det_mod(q, x), d if d == 1 || d == q - 1));
            // x⁻¹ = ±adj(x)
            let adj = [x[3], (q - x[1]) % q, (q - x[2]) % q, x[0]];
            let inv = if det_mod(q, x) == 1 {
                adj
            } else {
                adj.map(|v| (q - v) % q)
            };
            assert!(t.contains(inv));
        }
        assert!(t.contains([1, 0, 0, 1]));
    }
}

#[test]
fn reduction_is_compatible() {
    for (a, q) in [
        (&[1u64, 9, 17][..], 16),
        (&[1, 3, 5], 12),
        (&[2, 4, 6], 18),
        (&[1, 9], 24),
    ] {
        let big = as_set(&alpha(a), q, DetFilter::All);
        for qp in (2..q).filter(|d| q % d == 0) {
            let image: BTreeSet<ModMat> = big.iter().map(|m| m.map(|v| v % qp)).collect();
            assert_eq!(
                image,
                as_set(&alpha(a), qp, DetFilter::All),
                "{a:?}: {q} → {qp}"
            );
        }
    }
}

#[test]
fn k_star_collapse() {
    for (a, pair) in [
        (&[1u64, 9, 17][..], [1u64, 9]),
        (&[3, 7, 11], [3, 7]),
        (&[2, 4, 6], [2, 4]),
    ] {
        for q in 2..=64 {
            assert_eq!(
                as_set(&alpha(a), q, DetFilter::All),
                as_set(&alpha(&pair), q, DetFilter::All),
                "{a:?} mod {q}"
            );
        }
    }
}

#[test]
fn crt_lifting_for_octal_pair() {
    let a = alpha(&[1, 9]);
    for k in 1..=2u32 {
        let m = 8u64.pow(k);
        let base: BTreeSet<u64> = admissible_residues(&a, m).unwrap().into_iter().collect();
        for q1 in [3u64, 5, 7] {
            let q = m * q1;
            let got = closure_mod_q(&a, q, DetFilter::All).unwrap().d_residues();
            let want: Vec<u64> = (0..q).filter(|r| base.contains(&(r % m))).collect();
            assert_eq!(got, want, "mod {q}");
        }
    }
}

#[test]
fn obstruction_reports() {
    assert_eq!(k_star(&alpha(&[3, 7, 11])), 4);
    let r = find_bad_modulus(&alpha(&[1, 2, 5]), 120).unwrap();
    assert!(r.certified && r.k_star == 1 && r.failing_moduli.is_empty());
    let r = find_bad_modulus(&alpha(&[2, 4, 6]), 16).unwrap();
    assert_eq!(r.k_star, 2);
    assert!(r.failing_moduli.contains(&2));
    let r = find_bad_modulus(&alpha(&[1, 9, 17, 25, 33, 41]), 16).unwrap();
    assert!(r.inadmissible_residues[&8].contains(&4));
    assert!(find_bad_modulus(&alpha(&[5]), 10).unwrap().is_degenerate());
    assert!(find_bad_modulus(&alpha(&[1, 2]), 1).is_err());
}

#[test]
fn admissibility_examples() {
    let oct = alpha(&[1, 9, 17, 25, 33, 41]);
    for d in (4..400).step_by(8) {
        let c = is_admissible(d, &oct, 8).unwrap();
        assert!(!c.admissible && c.witness == Some(8) && c.bounded);
    }
    let five = alpha(&[1, 2, 3, 4, 5]);
    for d in 1..300 {
        assert!(is_admissible(d, &five, 64).unwrap().admissible);
    }
    for a in [&[1u64][..], &[2, 4, 6], &[1, 9, 17], &[3, 7, 11]] {
        assert!(is_admissible(1, &alpha(a), 64).unwrap().admissible, "{a:?}");
    }
}
