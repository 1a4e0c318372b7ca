use eislab::eisenstein::{eisenstein_fourier, eisenstein_reduced, f_remainder, SpectralPoint, DEFAULT_TOL};
use eislab::modgroup::{apply, IntegerMatrix2, UpperHalfPoint};
use eislab::numeric::{ext_gcd, gcd};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_sl2(rng: &mut ChaCha8Rng) -> IntegerMatrix2 {
    loop {
        let c: i64 = rng.gen_range(-4..=4);
        let d: i64 = rng.gen_range(-4..=4);
        if c == 0 || gcd(c, d) != 1 {
            continue;
        }
        let (g, x, y) = ext_gcd(d, c);
        let m = IntegerMatrix2::new(x * g, -y * g, c, d);
        if m.det() == 1 {
            return m;
        }
    }
}

#[test]
fn automorphy_of_the_fourier_evaluator() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut done = 0;
    while done < 50 {
        let g = random_sl2(&mut rng);
        let z = UpperHalfPoint::new(rng.gen_range(-0.5..0.5), rng.gen_range(0.3..2.0)).unwrap();
        let gz = apply(&g, z);
        if gz.y < 0.04 {
            continue;
        }
        let t = 10f64.powf(rng.gen_range(0.0..2.2));
        let a = eisenstein_fourier(z, t, DEFAULT_TOL).unwrap().total;
        let b = eisenstein_fourier(gz, t, DEFAULT_TOL).unwrap().total;
        assert!((a - b).norm() <= 1e-6 * a.norm().max(1e-3), "T={t} z={z:?} gz={gz:?}: {a} vs {b}");
        done += 1;
    }
}

#[test]
fn remainder_is_small_high_in_the_cusp() {
    for &t in &[5.0, 40.0, 200.0] {
        let z = UpperHalfPoint::new(0.3, 1.5 * t).unwrap();
        let f = f_remainder(z, SpectralPoint::critical(t), DEFAULT_TOL).unwrap();
        assert!(f.norm() < 1e-8 + DEFAULT_TOL);
    }
}

#[test]
fn remainder_real_part_even_in_x() {
    let s = SpectralPoint::critical(33.0);
    for &(x, y) in &[(0.1, 1.0), (0.4, 0.3), (1.7, 0.05)] {
        let a = f_remainder(UpperHalfPoint::new(x, y).unwrap(), s, DEFAULT_TOL).unwrap();
        let b = f_remainder(UpperHalfPoint::new(-x, y).unwrap(), s, DEFAULT_TOL).unwrap();
        assert!((a.re - b.re).abs() <= 1e-9 * a.norm().max(1.0));
    }
}

#[test]
fn reduction_agrees_with_direct_series_at_moderate_height() {
    let s = SpectralPoint::critical(64.0);
    let z = UpperHalfPoint::new(0.45, 0.12).unwrap();
    let a = eisenstein_fourier(z, 64.0, DEFAULT_TOL).unwrap();
    let b = eisenstein_reduced(z, s, DEFAULT_TOL).unwrap();
    assert!((a.total - b.total).norm() < 1e-8 * a.total.norm().max(1.0));
}
