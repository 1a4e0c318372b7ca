use std::collections::BTreeSet;

use eislab::counting::{
    check_lemma_generic, check_lemma_upper, enumerate, parabolic_fast, CountQuery, MatrixClass,
};
use eislab::modgroup::{apply, point_pair_u, IntegerMatrix2, UpperHalfPoint};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_in_domain(rng: &mut impl Rng) -> UpperHalfPoint {
    let x: f64 = rng.gen_range(-0.5..0.5);
    let y = rng.gen_range((1.0 - x * x).sqrt()..2.0);
    UpperHalfPoint::new(x, y).unwrap()
}

type Entries = (i64, i64, i64, i64);

fn key(m: &IntegerMatrix2) -> Entries {
    (m.a, m.b, m.c, m.d)
}

fn brute_force(q: &CountQuery, bound: i64, b_bound: i64) -> BTreeSet<Entries> {
    let ell = q.ell as i64;
    let mut found = BTreeSet::new();
    for a in -bound..=bound {
        for c in -bound..=bound {
            for d in -bound..=bound {
                let bs: Vec<i64> = if c == 0 {
                    if a * d != ell {
                        continue;
                    }
                    (-b_bound..=b_bound).collect()
                } else {
                    if (a * d - ell) % c != 0 {
                        continue;
                    }
                    vec![(a * d - ell) / c]
                };
                for b in bs {
                    let g = IntegerMatrix2::new(a, b, c, d);
                    if point_pair_u(apply(&g, q.z), q.z) <= q.delta {
                        found.insert(key(&g));
                    }
                }
            }
        }
    }
    found
}

#[test]
fn enumerate_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_c0de);
    for _ in 0..200 {
        let z = random_in_domain(&mut rng);
        let ell = rng.gen_range(1..=8u64);
        let delta = rng.gen_range(0.001..0.999);
        let q = CountQuery::new(z, ell, delta).unwrap();
        let b = enumerate(&q, true).unwrap();
        let got: BTreeSet<Entries> = b.matrices.as_ref().unwrap().iter().map(|m| key(&m.matrix)).collect();
        assert_eq!(got, brute_force(&q, 20, 40), "query {q:?}");
        assert_eq!(b.total() as usize, got.len());
    }
}

#[test]
fn parabolic_fast_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..100 {
        let z = random_in_domain(&mut rng);
        let m = rng.gen_range(1..=20u64);
        let delta = rng.gen_range(0.001..0.999);
        let q = CountQuery::new(z, m * m, delta).unwrap();
        let fast: Vec<Entries> = parabolic_fast(&q, true).unwrap().matrices.unwrap().iter().map(|c| key(&c.matrix)).collect();
        let full: Vec<Entries> = enumerate(&q, true)
            .unwrap()
            .matrices
            .unwrap()
            .iter()
            .filter(|c| c.class == MatrixClass::Parabolic)
            .map(|c| key(&c.matrix))
            .collect();
        assert_eq!(fast, full, "query {q:?}");
    }
}

#[test]
fn non_squares_have_no_parabolic_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let z = random_in_domain(&mut rng);
        let ell = rng.gen_range(2..=60u64);
        if eislab::numeric::is_square(ell) {
            continue;
        }
        let b = enumerate(&CountQuery::new(z, ell, rng.gen_range(0.01..0.99)).unwrap(), false).unwrap();
        assert_eq!(b.m_p, 0);
    }
}

#[test]
fn lemma_sums_are_monotone() {
    let z = UpperHalfPoint::new(0.4, 0.9).unwrap();
    let mut prev = 0;
    for &d in &[1e-4, 1e-2, 0.5] {
        let r = check_lemma_generic(z, 30, d).unwrap();
        assert!(r.sum >= prev);
        prev = r.sum;
        assert!(check_lemma_generic(z, 10, d).unwrap().sum <= r.sum);
        assert!(check_lemma_upper(z, 10, d).unwrap().sum <= check_lemma_upper(z, 30, d).unwrap().sum);
    }
    assert!(check_lemma_generic(z, 30, 1e-12).unwrap().ratio.is_finite());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partition_and_negation_symmetry(x in -0.5f64..0.5, dy in 0.0f64..1.0, ell in 1u64..40, delta in 0.001f64..0.999) {
        let y = (1.0 - x * x).sqrt() + dy;
        let q = CountQuery::new(UpperHalfPoint::new(x, y).unwrap(), ell, delta).unwrap();
        let b = enumerate(&q, true).unwrap();
        let list = b.matrices.clone().unwrap();
        prop_assert_eq!(b.total() as usize, list.len());
        prop_assert!(b.m_star.is_multiple_of(2) && b.m_u.is_multiple_of(2) && b.m_p.is_multiple_of(2));
        let set: BTreeSet<Entries> = list.iter().map(|m| key(&m.matrix)).collect();
        for &(a, bb, c, d) in &set {
            prop_assert!(set.contains(&(-a, -bb, -c, -d)));
        }
    }

    #[test]
    fn conjugation_invariance(x in -0.5f64..0.5, dy in 0.0f64..1.0, ell in 1u64..30, delta in 0.001f64..0.999, pick in 0usize..4) {
        let y = (1.0 - x * x).sqrt() + dy;
        let z = UpperHalfPoint::new(x, y).unwrap();
        let g0 = [
            IntegerMatrix2::new(1, 1, 0, 1),
            IntegerMatrix2::new(0, -1, 1, 0),
            IntegerMatrix2::new(1, 0, 1, 1),
            IntegerMatrix2::new(2, 1, 1, 1),
        ][pick];
        let a = enumerate(&CountQuery::new(z, ell, delta).unwrap(), false).unwrap();
        let b = enumerate(&CountQuery::new(apply(&g0, z), ell, delta).unwrap(), false).unwrap();
        prop_assert_eq!(a.total(), b.total());
        prop_assert_eq!(a.m_p, b.m_p);
    }
}
