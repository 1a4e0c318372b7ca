//! Prime-supported amplifier `x_p = w(p/N) log p η_{it}(p)`, its squared-out
//! weights `y_ℓ`, the sums `A_N`, `B_N`, the Ramanujan identity for
//! `Σ η_{it}(n)η_{ir}(n) n^{-s}`, and the lower-bound lemma for `A_N(t, t)`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::eisenstein::eta;
use crate::error::{EislabError, Result};
use crate::numeric::{integrate, primes_in, CompensatedSum, QuadOptions};
use crate::specfun::zeta;

/// A window on `[1, 2]` with values in `[0, 1]`.
#[derive(Clone, Copy)]
pub struct WindowFunction {
    pub name: &'static str,
    rule: fn(f64) -> f64,
    /// `None` means infinitely differentiable.
    pub smoothness: Option<u32>,
}

impl std::fmt::Debug for WindowFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WindowFunction").field("name", &self.name).field("smoothness", &self.smoothness).finish()
    }
}

impl WindowFunction {
    pub fn new(name: &'static str, rule: fn(f64) -> f64, smoothness: Option<u32>) -> Self {
        Self { name, rule, smoothness }
    }

    pub fn eval(&self, r: f64) -> f64 {
        (self.rule)(r)
    }
}

fn bump(r: f64) -> f64 {
    if r <= 1.0 || r >= 2.0 {
        return 0.0;
    }
    let v = 2.0 * r - 3.0;
    (1.0 - 1.0 / (1.0 - v * v)).exp()
}

/// `w(r) = exp(1 − 1/(1 − (2r−3)²))` on `(1, 2)`, zero elsewhere.
pub fn default_window() -> WindowFunction {
    WindowFunction::new("bump", bump, None)
}

/// `w̃(s) = ∫₁² w(y) y^{s−1} dy`.
pub fn mellin_w(window: &WindowFunction, s: Complex64) -> Complex64 {
    let opts = QuadOptions { abs_tol: 1e-14, rel_tol: 1e-13, initial_panels: 8 + (s.im.abs() / 4.0) as usize, ..QuadOptions::default() };
    integrate(|y| window.eval(y) * ((s - 1.0) * y.ln()).exp(), 1.0, 2.0, opts).value
}

#[derive(Debug, Clone, Serialize)]
pub struct AmplifierSpec {
    pub n: u64,
    pub t: f64,
    #[serde(skip)]
    pub window: WindowFunction,
    pub primes: Vec<u64>,
    /// `x_p` in the order of `primes`.
    pub x: Vec<f64>,
}

fn check_n(n: u64) -> Result<Vec<u64>> {
    if !(2..=1_000_000).contains(&n) {
        return Err(EislabError::Domain(format!("amplifier length must be in [2, 1e6], got {n}")));
    }
    let primes = primes_in(n, 2 * n);
    if primes.is_empty() {
        return Err(EislabError::NoPrimes { lo: n, hi: 2 * n });
    }
    Ok(primes)
}

pub fn build_amplifier(n: u64, t: f64, window: WindowFunction) -> Result<AmplifierSpec> {
    let primes = check_n(n)?;
    let x = primes
        .iter()
        .map(|&p| window.eval(p as f64 / n as f64) * (p as f64).ln() * eta(t, p))
        .collect();
    Ok(AmplifierSpec { n, t, window, primes, x })
}

impl AmplifierSpec {
    /// `y_1 = Σ_p x_p²`.
    pub fn y_one(&self) -> f64 {
        let mut acc = CompensatedSum::<f64>::default();
        for &x in &self.x {
            acc.add(x * x);
        }
        acc.value()
    }

    /// All nonzero `y_ℓ`, keyed by `ℓ`: `y_1`, `y_{p²} = x_p²`, `y_{pq} = 2x_p x_q`.
    pub fn y_weights(&self) -> BTreeMap<u64, f64> {
        let mut y = BTreeMap::new();
        y.insert(1, self.y_one());
        for (i, (&p, &xp)) in self.primes.iter().zip(&self.x).enumerate() {
            y.insert(p * p, xp * xp);
            for (&q, &xq) in self.primes[i + 1..].iter().zip(&self.x[i + 1..]) {
                y.insert(p * q, 2.0 * xp * xq);
            }
        }
        y
    }

    /// `y_ℓ` for a single `ℓ` without materializing the table.
    pub fn y_at(&self, ell: u64) -> f64 {
        if ell == 1 {
            return self.y_one();
        }
        let index = |p: u64| self.primes.binary_search(&p).ok();
        for (i, &p) in self.primes.iter().enumerate() {
            if !ell.is_multiple_of(p) {
                continue;
            }
            let other = ell / p;
            if let Some(j) = index(other) {
                return if i == j { self.x[i] * self.x[i] } else { 2.0 * self.x[i] * self.x[j] };
            }
            return 0.0;
        }
        0.0
    }

    /// `Σ_p x_p η_{ir}(p)`, which equals `A_N(t, r)`.
    pub fn amplify(&self, r: f64) -> f64 {
        let mut acc = CompensatedSum::<f64>::default();
        for (&p, &x) in self.primes.iter().zip(&self.x) {
            acc.add(x * eta(r, p));
        }
        acc.value()
    }
}

/// `A_N(t, r) = Σ_{p} w(p/N) log p η_{it}(p) η_{ir}(p)`.
pub fn a_sum(n: u64, t: f64, r: f64, window: &WindowFunction) -> Result<f64> {
    let primes = check_n(n)?;
    let mut acc = CompensatedSum::<f64>::default();
    for p in primes {
        acc.add(window.eval(p as f64 / n as f64) * (p as f64).ln() * eta(t, p) * eta(r, p));
    }
    Ok(acc.value())
}

/// `b(p^k) = log p (2cos(k(t+r)log p) + 2cos(k(t−r)log p) − 2[k even])`.
pub fn b_coefficient(p: u64, k: u32, t: f64, r: f64) -> f64 {
    let lp = (p as f64).ln();
    let kf = k as f64;
    let even = if k.is_multiple_of(2) { 2.0 } else { 0.0 };
    lp * (2.0 * (kf * (t + r) * lp).cos() + 2.0 * (kf * (t - r) * lp).cos() - even)
}

/// `B_N(t, r) = Σ_n w(n/N) b(n)` over prime powers `n`.
pub fn b_sum(n: u64, t: f64, r: f64, window: &WindowFunction) -> Result<f64> {
    check_n(n)?;
    let hi = 2 * n;
    let mut acc = CompensatedSum::<f64>::default();
    let k_max = (hi as f64).log2().floor() as u32;
    for k in 1..=k_max {
        let lo_root = (n as f64).powf(1.0 / k as f64).floor() as u64;
        let hi_root = (hi as f64).powf(1.0 / k as f64).ceil() as u64;
        for p in primes_in(lo_root.max(2), hi_root) {
            let Some(pk) = p.checked_pow(k) else { continue };
            if pk < n || pk > hi {
                continue;
            }
            acc.add(window.eval(pk as f64 / n as f64) * b_coefficient(p, k, t, r));
        }
    }
    Ok(acc.value())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RamanujanCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub tail_bound: f64,
    pub imag_residue: f64,
}

/// Compares `Σ_{n ≤ n_max} η_{it}(n)η_{ir}(n) n^{-σ}` with
/// `ζ(σ+it+ir)ζ(σ−it+ir)ζ(σ+it−ir)ζ(σ−it−ir)/ζ(2σ)`.
pub fn ramanujan_check(t: f64, r: f64, sigma: f64, n_max: u64) -> Result<RamanujanCheck> {
    if sigma < 2.0 {
        return Err(EislabError::Domain(format!("Ramanujan check needs sigma >= 2, got {sigma}")));
    }
    let mut acc = CompensatedSum::<f64>::default();
    for n in 1..=n_max {
        acc.add(eta(t, n) * eta(r, n) * (n as f64).powf(-sigma));
    }
    let lhs = acc.value();
    let z = |im: f64| zeta(Complex64::new(sigma, im));
    let rhs = z(t + r)? * z(r - t)? * z(t - r)? * z(-t - r)? / zeta(Complex64::new(2.0 * sigma, 0.0))?;
    // Σ_{n>N} d(n)² n^{-σ} ≤ N^{-(σ−1−θ)} ζ(1+θ)⁴/ζ(2+2θ), minimised over θ.
    let mut tail_bound = f64::INFINITY;
    for i in 1..100 {
        let theta = (sigma - 1.0) * i as f64 / 100.0;
        let z1 = zeta(Complex64::new(1.0 + theta, 0.0))?.re;
        let z2 = zeta(Complex64::new(2.0 + 2.0 * theta, 0.0))?.re;
        let b = (n_max as f64).powf(-(sigma - 1.0 - theta)) * z1.powi(4) / z2;
        tail_bound = tail_bound.min(b);
    }
    Ok(RamanujanCheck { lhs, rhs: rhs.re, gap: (lhs - rhs.re).abs(), tail_bound, imag_residue: rhs.im })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AmplifierRow {
    pub n: u64,
    pub a: f64,
    pub b: f64,
    pub main: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmplifierReport {
    pub t: f64,
    pub r: f64,
    pub rows: Vec<AmplifierRow>,
    /// `|t − r| ≤ (log N)^{−1−δ}` at the smallest `N`.
    pub within_window: bool,
    pub converging: bool,
}

pub const LEMMA_DELTA: f64 = 0.1;

/// Rows `(N, A_N(t, r), B_N(t, r), 2N w̃(1), A_N/(2N w̃(1)))` with `r = t − offset`.
pub fn amplifier_rows(ns: &[u64], t: f64, offset: f64, window: &WindowFunction) -> Result<AmplifierReport> {
    let r = t - offset;
    let w1 = mellin_w(window, Complex64::new(1.0, 0.0)).re;
    let rows = ns
        .iter()
        .map(|&n| {
            let a = a_sum(n, t, r, window)?;
            let b = b_sum(n, t, r, window)?;
            let main = 2.0 * n as f64 * w1;
            Ok(AmplifierRow { n, a, b, main, ratio: a / main })
        })
        .collect::<Result<Vec<_>>>()?;
    let n_min = ns.iter().copied().min().unwrap_or(2) as f64;
    let within_window = offset.abs() <= n_min.ln().powf(-1.0 - LEMMA_DELTA);
    let converging = match (rows.first(), rows.last()) {
        (Some(f), Some(l)) if rows.len() > 1 => (l.ratio - 1.0).abs() < (f.ratio - 1.0).abs(),
        _ => true,
    };
    Ok(AmplifierReport { t, r, rows, within_window, converging })
}

/// As [`amplifier_rows`], failing when the lemma's window holds but the
/// ratio at the largest `N` is not closer to 1 than at the smallest.
pub fn verify_amplifier_lemma(ns: &[u64], t: f64, offset: f64, window: &WindowFunction) -> Result<AmplifierReport> {
    let report = amplifier_rows(ns, t, offset, window)?;
    if report.within_window && !report.converging {
        return Err(EislabError::CheckFailed(format!(
            "A_N/(2N w(1)) does not approach 1 across N = {ns:?} at t = {t}, offset {offset}"
        )));
    }
    Ok(report)
}
