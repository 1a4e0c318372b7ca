use std::f64::consts::PI;

use eislab::counting::{enumerate, stieltjes_synthetic, stieltjes_weighted_count, CountQuery};
use eislab::kernel::{
    build_kernel, build_test_kernel, k_at_origin, selberg_k, spherical_forward, GaussianShape, KernelShape,
};
use eislab::modgroup::UpperHalfPoint;
use eislab::numeric::{integrate, QuadOptions};

fn sup_relative_error(pair: &eislab::kernel::KernelPair, r_hi: f64) -> f64 {
    let forward = pair.forward();
    let mut worst: f64 = 0.0;
    let mut peak: f64 = 0.0;
    for i in 0..=400 {
        let r = r_hi * i as f64 / 400.0;
        worst = worst.max((forward.h(r) - pair.h(r)).abs());
        peak = peak.max(pair.h(r));
    }
    worst / peak
}

#[test]
fn gaussian_round_trip() {
    let centred = build_kernel(KernelShape::Gaussian(GaussianShape { centre: 0.0, width: 5.0 }), 0.1);
    assert!(sup_relative_error(&centred, 20.0) < 1e-4);
    for &t in &[5.0, 20.0] {
        let pair = build_kernel(KernelShape::Gaussian(GaussianShape { centre: t, width: 1.0 }), 0.1);
        assert!(sup_relative_error(&pair, 2.0 * t) < 1e-4, "T = {t}");
    }
}

#[test]
fn forward_transform_is_linear_and_even() {
    let a = build_kernel(KernelShape::Gaussian(GaussianShape { centre: 5.0, width: 1.0 }), 0.1);
    let b = build_kernel(KernelShape::Gaussian(GaussianShape { centre: 0.0, width: 2.0 }), 0.1);
    let (u_end, band) = (a.u_max.max(b.u_max), 12.0);
    let fa = spherical_forward(|u| a.k(u), u_end, band);
    let fb = spherical_forward(|u| b.k(u), u_end, band);
    let fab = spherical_forward(|u| a.k(u) + b.k(u), u_end, band);
    for &r in &[0.0, 1.3, 4.9, 7.5] {
        assert!((fab.h(r) - fa.h(r) - fb.h(r)).abs() < 1e-8);
        assert_eq!(fa.h(r), fa.h(-r));
    }
}

#[test]
fn k_at_origin_matches_spectral_integral() {
    for &(centre, width) in &[(0.0, 5.0), (10.0, 1.0)] {
        let g = GaussianShape { centre, width };
        let shape = KernelShape::Gaussian(g);
        let spectral = 2.0
            * integrate(
                |r: f64| r * (PI * r).tanh() * g.h(r),
                0.0,
                centre + 10.0 * width,
                QuadOptions { initial_panels: 16, ..QuadOptions::default() },
            )
            .value
            / (4.0 * PI);
        assert!((selberg_k(&shape, 0.0) - spectral).abs() < 1e-8 * spectral.abs());
        assert!((k_at_origin(&shape) - spectral).abs() < 1e-8 * spectral.abs());
    }
}

#[test]
fn localisation_properties_hold_with_one_constant() {
    for &t in &[16.0, 64.0, 256.0] {
        let pair = build_test_kernel(t).unwrap();
        assert!(pair.h(t) >= 1.0);
        assert!(pair.h(t + 1.0) >= (-1.0f64).exp());
        let props = pair.properties.unwrap();
        assert!(props.k_sup_ratio <= eislab::kernel::KERNEL_SUP_CONSTANT);
        assert!(props.k_decay_ratio <= eislab::kernel::KERNEL_DECAY_CONSTANT);
        assert!(pair.tail_bound <= 1e-12 * t);
        assert!(pair.k(2.0 * pair.u_max) == 0.0);
    }
}

#[test]
fn kernel_decays_faster_than_any_power() {
    let pair = build_test_kernel(16.0).unwrap();
    // Windowed maxima in ρ = log-scale of u; a power law has constant log-slope.
    let peak_near = |rho: f64| {
        let (lo, hi) = (eislab::kernel::u_from_rho(rho - 0.5), eislab::kernel::u_from_rho(rho + 0.5));
        pair.nodes().filter(|&(u, _)| u > lo && u <= hi).map(|(_, k)| k.abs()).fold(0.0, f64::max).ln()
    };
    let slopes: Vec<f64> = [2.0, 4.0, 6.0, 8.0].windows(2).map(|w| (peak_near(w[1]) - peak_near(w[0])) / 2.0).collect();
    for pair in slopes.windows(2) {
        assert!(pair[1] < pair[0] - 0.5, "{slopes:?}");
    }
    assert!(build_test_kernel(0.5).is_err());
}

#[test]
fn stieltjes_count_identity_contribution() {
    let pair = build_test_kernel(16.0).unwrap();
    let total = stieltjes_weighted_count(UpperHalfPoint::i(), 1, |u| pair.k(u)).unwrap();
    assert!(total >= 2.0 * pair.k(0.0).abs());
}

#[test]
fn stieltjes_count_matches_binned_sum() {
    let pair = build_test_kernel(16.0).unwrap();
    let z = UpperHalfPoint::new(0.3, 0.8).unwrap();
    for &ell in &[6u64, 30] {
        let exact = stieltjes_weighted_count(z, ell, |u| pair.k(u)).unwrap();
        let list = enumerate(&CountQuery::new(z, ell, 1.0).unwrap(), true).unwrap().matrices.unwrap();
        let bins = 10_000;
        let mut counts = vec![0u32; bins];
        for m in &list {
            let i = ((m.u * bins as f64).ceil() as usize).clamp(1, bins);
            counts[i - 1] += 1;
        }
        let binned: f64 = counts
            .iter()
            .enumerate()
            .map(|(i, &c)| c as f64 * pair.k((i as f64 + 0.5) / bins as f64).abs())
            .sum();
        assert!((binned - exact).abs() < 1e-3 * exact, "ell {ell}: {binned} vs {exact}");
    }
}

#[test]
fn synthetic_stieltjes_scaling() {
    let kernels: Vec<_> = [16.0, 64.0, 256.0].iter().map(|&t| build_test_kernel(t).unwrap()).collect();
    for &alpha in &[0.1, 0.2, 0.3, 0.5, 1.0] {
        let beta = f64::max(0.5, 1.0 - 2.0 * alpha);
        let ratios: Vec<f64> = kernels
            .iter()
            .map(|p| stieltjes_synthetic(|u| p.k(u), alpha, 100_000) / p.t.powf(beta))
            .collect();
        let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &r| (l.min(r), h.max(r)));
        assert!(hi <= 1.0 && hi / lo < 1.5, "alpha {alpha}: {ratios:?}");
    }
}
