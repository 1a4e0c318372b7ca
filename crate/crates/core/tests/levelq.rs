use eislab::eisenstein::{SpectralPoint, DEFAULT_TOL};
use eislab::levelq::{
    apply_gamma0, cusps, eisenstein_cusp_direct, eisenstein_cusp_lowered_lattice, gamma0_element, LevelPoint,
};
use eislab::modgroup::{fricke, UpperHalfPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_point(rng: &mut ChaCha8Rng) -> UpperHalfPoint {
    UpperHalfPoint::new(rng.gen_range(-0.5..0.5), rng.gen_range(0.4..1.6)).unwrap()
}

#[test]
fn coset_oracle_matches_level_lowering_at_sigma_two() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let s = SpectralPoint::new(2.0, 0.0);
    for &q in &[2u64, 3, 5, 6, 7, 10] {
        for _ in 0..10 {
            let z = random_point(&mut rng);
            for c in cusps(q).unwrap() {
                let direct = eisenstein_cusp_direct(&c, z, s).unwrap();
                let lowered = eisenstein_cusp_lowered_lattice(&c, z, s).unwrap();
                assert!((direct - lowered).norm() <= 1e-8 * direct.norm(), "q={q} v={} z={z:?}", c.v);
            }
        }
    }
}

#[test]
fn fourier_path_matches_coset_oracle_at_sigma_two() {
    let s = SpectralPoint::new(2.0, 0.0);
    let z = UpperHalfPoint::new(0.17, 0.8).unwrap();
    for &q in &[2u64, 6] {
        let lp = LevelPoint::new(q, z, s, 1e-14).unwrap();
        for c in cusps(q).unwrap() {
            let direct = eisenstein_cusp_direct(&c, z, s).unwrap();
            let fourier = lp.cusp_value(&c).unwrap().total;
            assert!((direct - fourier).norm() <= 1e-8 * direct.norm());
        }
    }
}

#[test]
fn fricke_swaps_dual_cusps_at_sigma_two() {
    let s = SpectralPoint::new(2.0, 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for &q in &[2u64, 3, 6, 10] {
        let z = random_point(&mut rng);
        let fz = fricke(q, z);
        for c in cusps(q).unwrap() {
            let lhs = eisenstein_cusp_direct(&c, fz, s).unwrap();
            let rhs = eisenstein_cusp_direct(&c.dual(), z, s).unwrap();
            assert!((lhs - rhs).norm() <= 1e-8 * rhs.norm(), "q={q} v={}", c.v);
        }
    }
}

#[test]
fn fricke_swaps_dual_cusps_on_the_critical_line() {
    let s = SpectralPoint::critical(15.0);
    for &q in &[2u64, 6] {
        let z = UpperHalfPoint::new(0.11, 0.45).unwrap();
        let at_z = LevelPoint::new(q, z, s, DEFAULT_TOL).unwrap();
        let at_fz = LevelPoint::new(q, fricke(q, z), s, DEFAULT_TOL).unwrap();
        for c in cusps(q).unwrap() {
            let lhs = at_fz.cusp_value(&c).unwrap().total;
            let rhs = at_z.cusp_value(&c.dual()).unwrap().total;
            assert!((lhs - rhs).norm() <= 1e-6 * rhs.norm().max(1e-3), "q={q} v={}: {lhs} vs {rhs}", c.v);
        }
    }
}

#[test]
fn gamma0_invariance_of_each_cusp_series() {
    let s = SpectralPoint::new(2.0, 0.0);
    for &q in &[2u64, 3, 5, 6, 7, 10] {
        let z = UpperHalfPoint::new(0.05, 0.9).unwrap();
        let mut tested = 0;
        for cm in 1..=2 {
            for d in -5..=5 {
                let Some(g) = gamma0_element(q, cm, d) else { continue };
                let gz = apply_gamma0(&g, z);
                for c in cusps(q).unwrap() {
                    let a = eisenstein_cusp_direct(&c, z, s).unwrap();
                    let b = eisenstein_cusp_direct(&c, gz, s).unwrap();
                    assert!((a - b).norm() <= 1e-8 * a.norm(), "q={q} g={g:?}");
                }
                tested += 1;
            }
        }
        assert!(tested >= 4);
    }
}
