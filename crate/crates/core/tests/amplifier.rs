use eislab::amplifier::{a_sum, amplifier_rows, b_sum, default_window, verify_amplifier_lemma};

/// Fitted over N ∈ {10³, 10⁴, 10⁵} and T ∈ {20, 50, 100}; largest observed 0.06.
const PRIME_POWER_CONSTANT: f64 = 0.1;

#[test]
fn a_matches_main_term_at_large_n() {
    let w = default_window();
    let rep = amplifier_rows(&[100_000], 50.0, 0.0, &w).unwrap();
    assert!((rep.rows[0].ratio - 1.0).abs() <= 0.1);
}

#[test]
fn a_and_b_differ_by_prime_powers_only() {
    let w = default_window();
    for &n in &[1_000u64, 10_000, 100_000] {
        for &(t, r) in &[(50.0, 50.0), (20.0, 19.9), (100.0, 100.0)] {
            let a = a_sum(n, t, r, &w).unwrap();
            let b = b_sum(n, t, r, &w).unwrap();
            let scale = (n as f64).sqrt() * (n as f64).ln();
            assert!((a - b).abs() <= PRIME_POWER_CONSTANT * scale, "N={n} t={t} r={r}");
        }
    }
}

#[test]
fn lemma_ratio_approaches_one() {
    let w = default_window();
    let rep = verify_amplifier_lemma(&[1_000, 10_000, 100_000], 50.0, 0.0, &w).unwrap();
    assert!(rep.within_window && rep.converging);
    let dev: Vec<f64> = rep.rows.iter().map(|r| (r.ratio - 1.0).abs()).collect();
    assert!(dev[0] > dev[1] && dev[1] > dev[2], "{dev:?}");
}

#[test]
fn outside_the_window_is_reported_not_asserted() {
    let w = default_window();
    let rep = verify_amplifier_lemma(&[1_000], 50.0, 0.5, &w).unwrap();
    assert!(!rep.within_window);
    assert!(rep.rows[0].ratio.is_finite());
}
