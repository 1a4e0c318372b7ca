//! Level-1 Eisenstein series `E(z, s)`: Hecke eigenvalues, the scattering
//! coefficient, the Fourier-expansion evaluator, an independent lattice-sum
//! oracle for `Re s ≥ 2`, and the non-constant part `F(z, s)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{EislabError, Result};
use crate::modgroup::{reduce_sl2, UpperHalfPoint};
use crate::numeric::{factorize, kahan_sum_complex, CompensatedSum};
use crate::specfun::{
    bessel_envelope, bessel_k_scaled_complex, bessel_k_scaled_fast, ln_gamma, ln_xi_with, shifted_power_tail,
    zeta, Precision, MAX_INTERNAL_ORDER,
};

/// `s = σ + iT`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralPoint {
    pub sigma: f64,
    pub t: f64,
}

impl SpectralPoint {
    pub fn new(sigma: f64, t: f64) -> Self {
        Self { sigma, t }
    }

    /// A point on the critical line `σ = 1/2`.
    pub fn critical(t: f64) -> Self {
        Self { sigma: 0.5, t }
    }

    pub fn s(&self) -> Complex64 {
        Complex64::new(self.sigma, self.t)
    }

    fn on_critical_line(&self) -> bool {
        self.sigma == 0.5
    }
}

/// `E = main_terms + remainder`, with the truncation actually used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EisensteinValue {
    pub total: Complex64,
    pub main_terms: Complex64,
    pub remainder: Complex64,
    pub n_max: u64,
    pub tail_estimate: f64,
}

impl EisensteinValue {
    fn from_parts(main_terms: Complex64, remainder: Complex64, n_max: u64, tail_estimate: f64) -> Self {
        Self { total: main_terms + remainder, main_terms, remainder, n_max, tail_estimate }
    }
}

pub const MAX_FOURIER_TERMS: u64 = 10_000_000;
pub const DEFAULT_TOL: f64 = 1e-12;

/// `η_{it}(n) = Σ_{ad=n} (a/d)^{it}`, real, computed prime power by prime power.
pub fn eta(t: f64, n: u64) -> f64 {
    assert!(n >= 1, "eta needs n >= 1");
    factorize(n)
        .into_iter()
        .map(|(p, k)| {
            let theta = t * (p as f64).ln();
            (0..=k).map(|j| (theta * (k as f64 - 2.0 * j as f64)).cos()).sum::<f64>()
        })
        .product()
}

/// `Σ_{ad=n} (a/d)^ν` for complex `ν`.
pub fn eta_complex(nu: Complex64, n: u64) -> Complex64 {
    factorize(n)
        .into_iter()
        .map(|(p, k)| {
            let lp = (p as f64).ln();
            (0..=k).map(|j| (nu * lp * (k as f64 - 2.0 * j as f64)).exp()).sum::<Complex64>()
        })
        .product()
}

fn ln_scattering(s: Complex64, precision: Precision) -> Result<Complex64> {
    let w = 2.0 - 2.0 * s;
    // ξ(w) = ξ(1 − w); keep the argument in the half-plane the evaluator prefers.
    let numerator = if w.re >= 0.5 { w } else { 1.0 - w };
    Ok(ln_xi_with(numerator, precision)? - ln_xi_with(2.0 * s, precision)?)
}

/// `φ(s) = ξ(2(1 − s)) / ξ(2s)`.
pub fn scattering_phi(s: SpectralPoint) -> Result<Complex64> {
    Ok(ln_scattering(s.s(), Precision::Standard)?.exp())
}

pub fn scattering_phi_with(s: SpectralPoint, precision: Precision) -> Result<Complex64> {
    Ok(ln_scattering(s.s(), precision)?.exp())
}

/// `y^s + φ(s) y^{1−s}`.
pub fn main_terms(y: f64, s: SpectralPoint) -> Result<Complex64> {
    let sc = s.s();
    let ly = y.ln();
    Ok((sc * ly).exp() + scattering_phi(s)? * ((1.0 - sc) * ly).exp())
}

fn check_spectral(s: SpectralPoint) -> Result<()> {
    if !(s.sigma.is_finite() && s.t.is_finite()) || s.sigma < 0.5 || s.t.abs() > MAX_INTERNAL_ORDER {
        return Err(EislabError::Domain(format!("unsupported spectral point {s:?}")));
    }
    if s.on_critical_line() && s.t == 0.0 {
        return Err(EislabError::Domain("E(z, 1/2) sits on the pole of 1/ξ(2s)".into()));
    }
    Ok(())
}

/// Truncation index before tail control.
pub fn initial_truncation(t: f64, y: f64) -> f64 {
    let t = t.abs();
    ((t + 12.0 * t.cbrt() + 40.0) / (2.0 * PI * y)).ceil()
}

/// Bound on `Σ_{n > n_max} |term_n|` for a term size `prefactor·d(n)·|K|`.
fn tail_bound(prefactor: f64, t: f64, y: f64, n_max: u64) -> f64 {
    let t = t.abs().max(1e-3);
    let size = |n: f64| {
        let u = 2.0 * PI * n * y;
        4.0 * n.sqrt() * (1.0 + 3.0 / u + 3.0 / (u * u)) * bessel_envelope(t, u)
    };
    let n = (n_max + 1) as f64;
    let first = size(n);
    if first == 0.0 {
        return 0.0;
    }
    let ratio = (size(n + 1.0) / first).min(1.0);
    if ratio >= 1.0 - 1e-12 {
        return f64::INFINITY;
    }
    prefactor * first / (1.0 - ratio)
}

/// Non-constant part of the Fourier expansion at `σ ≥ 1/2`, `T ≥ 0`.
fn fourier_remainder(z: UpperHalfPoint, s: SpectralPoint, tol: f64) -> Result<(Complex64, u64, f64)> {
    let sc = s.s();
    let nu = sc - 0.5;
    // 2√y/ξ(2s) · e^{−πT/2}: the second factor undoes the Bessel scaling.
    let ln_pref = Complex64::new((2.0 * z.y.sqrt()).ln() - PI * s.t / 2.0, 0.0) - ln_xi_with(2.0 * sc, Precision::Standard)?;
    let pref = ln_pref.exp();
    let mut n_max = initial_truncation(s.t, z.y);
    if n_max > MAX_FOURIER_TERMS as f64 {
        return Err(EislabError::PrecisionLoss { n_max: n_max.min(u64::MAX as f64) as u64 });
    }
    let mut tail = tail_bound(pref.norm(), s.t, z.y, n_max as u64);
    while tail > tol {
        n_max = (n_max * 1.25).ceil();
        if n_max > MAX_FOURIER_TERMS as f64 {
            return Err(EislabError::PrecisionLoss { n_max: n_max as u64 });
        }
        tail = tail_bound(pref.norm(), s.t, z.y, n_max as u64);
    }
    let n_max = n_max as u64;
    let critical = s.on_critical_line();
    let term = |n: u64| -> Result<Complex64> {
        let u = 2.0 * PI * n as f64 * z.y;
        let phase = 2.0 * (2.0 * PI * n as f64 * z.x).cos();
        if critical {
            Ok(Complex64::new(eta(s.t, n) * bessel_k_scaled_fast(s.t, u)? * phase, 0.0))
        } else {
            Ok(eta_complex(nu, n) * bessel_k_scaled_complex(nu, u)? * phase)
        }
    };
    let terms: Vec<Complex64> = if n_max >= 32 {
        (1..=n_max).into_par_iter().map(term).collect::<Result<_>>()?
    } else {
        (1..=n_max).map(term).collect::<Result<_>>()?
    };
    Ok((pref * kahan_sum_complex(terms), n_max, tail))
}

/// `E(z, s)` from its Fourier expansion, for `σ ≥ 1/2` and `0 < |T| ≤ 512`
/// on the critical line (any `|T| ≤ 512` off it).
pub fn eisenstein_fourier_general(z: UpperHalfPoint, s: SpectralPoint, tol: f64) -> Result<EisensteinValue> {
    check_spectral(s)?;
    if s.t < 0.0 {
        let v = eisenstein_fourier_general(z, SpectralPoint::new(s.sigma, -s.t), tol)?;
        return Ok(EisensteinValue::from_parts(v.main_terms.conj(), v.remainder.conj(), v.n_max, v.tail_estimate));
    }
    let main = main_terms(z.y, s)?;
    let (rem, n_max, tail) = fourier_remainder(z, s, tol)?;
    Ok(EisensteinValue::from_parts(main, rem, n_max, tail))
}

/// `E(z, 1/2 + iT)` from its Fourier expansion at `z` itself.
pub fn eisenstein_fourier(z: UpperHalfPoint, t: f64, tol: f64) -> Result<EisensteinValue> {
    if t == 0.0 || t.abs() > 512.0 {
        return Err(EislabError::Domain(format!("critical-line evaluation needs 0 < |T| <= 512, got {t}")));
    }
    eisenstein_fourier_general(z, SpectralPoint::critical(t), tol)
}

/// Same value as [`eisenstein_fourier_general`], but the series is summed at
/// the SL₂(ℤ)-reduction of `z`. Main terms refer to `z` itself, so the
/// remainder is `F(z, s)` at the original point.
pub fn eisenstein_reduced(z: UpperHalfPoint, s: SpectralPoint, tol: f64) -> Result<EisensteinValue> {
    check_spectral(s)?;
    let (w, _) = reduce_sl2(z);
    if w == z {
        return eisenstein_fourier_general(z, s, tol);
    }
    let at_w = eisenstein_fourier_general(w, s, tol)?;
    let main = if s.t < 0.0 {
        main_terms(z.y, SpectralPoint::new(s.sigma, -s.t))?.conj()
    } else {
        main_terms(z.y, s)?
    };
    Ok(EisensteinValue::from_parts(main, at_w.total - main, at_w.n_max, at_w.tail_estimate))
}

/// `F(z, s) = E(z, s) − y^s − φ(s) y^{1−s}`.
pub fn f_remainder(z: UpperHalfPoint, s: SpectralPoint, tol: f64) -> Result<Complex64> {
    if z.y >= 3f64.sqrt() / 2.0 {
        Ok(eisenstein_fourier_general(z, s, tol)?.remainder)
    } else {
        Ok(eisenstein_reduced(z, s, tol)?.remainder)
    }
}

// ---------------------------------------------------------------------------
// Lattice oracle
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatticeValue {
    pub value: Complex64,
    pub tail_bound: f64,
    pub radius: u64,
}

pub const DEFAULT_LATTICE_RADIUS: u64 = 24;

/// Number of binomial terms kept in `(τ² + b²)^{-s}` on the tails.
const BINOMIAL_TERMS: usize = 24;
/// Bernoulli corrections on the Euler–Maclaurin tails.
const TAIL_CORRECTIONS: usize = 10;
/// Row index beyond which `Σ_d |cz+d|^{-2s}` is replaced by its smooth part.
const POISSON_EXPONENT: f64 = 47.0;

/// `Σ_{k ≥ 0} ((start + k)² + b²)^{-s}` with `start ≥ 8b`.
fn shifted_row_tail(s: Complex64, b: f64, start: f64) -> Complex64 {
    let mut acc = CompensatedSum::<Complex64>::default();
    let mut coeff = Complex64::new(1.0, 0.0);
    let b2 = b * b;
    let mut bpow = 1.0;
    for k in 0..BINOMIAL_TERMS {
        if k > 0 {
            coeff *= (-s - (k as f64 - 1.0)) / k as f64;
            bpow *= b2;
        }
        let scale = coeff * bpow;
        if scale.norm() * start.powf(-2.0 * s.re - 2.0 * k as f64) < 1e-30 {
            break;
        }
        acc.add(scale * shifted_power_tail(2.0 * s + 2.0 * k as f64, start, TAIL_CORRECTIONS));
    }
    acc.value()
}

/// `Σ_{d ∈ ℤ} ((X + d)² + b²)^{-s}`.
fn lattice_row(s: Complex64, x: f64, b: f64, radius: f64) -> Complex64 {
    let window = (8.0 * b).max(radius);
    let lo = (-x - window).ceil() as i64;
    let hi = (-x + window).floor() as i64;
    let mut acc = CompensatedSum::<Complex64>::default();
    for d in lo..=hi {
        let tau = x + d as f64;
        acc.add((-s * (tau * tau + b * b).ln()).exp());
    }
    acc.add(shifted_row_tail(s, b, (hi + 1) as f64 + x));
    acc.add(shifted_row_tail(s, b, -((lo - 1) as f64 + x)));
    acc.value()
}

/// Epstein zeta `Σ_{(c,d) ≠ 0} |cz + d|^{-2s}` for `Re s > 1`, with a bound on
/// the neglected exponentially small Poisson terms.
pub(crate) fn epstein(z: UpperHalfPoint, s: Complex64, radius: u64) -> Result<(Complex64, f64)> {
    let rows = (POISSON_EXPONENT / (2.0 * PI * z.y)).ceil().max(1.0) as u64;
    let mut acc = CompensatedSum::<Complex64>::default();
    acc.add(2.0 * zeta(2.0 * s)?);
    for c in 1..=rows {
        let cf = c as f64;
        acc.add(2.0 * lattice_row(s, cf * z.x, cf * z.y, radius as f64));
    }
    // Σ_d ((X+d)² + b²)^{-s} = √π Γ(s−½)/Γ(s) b^{1−2s} + O(e^{−2πb}).
    let smooth = (0.5 * PI.ln() + ln_gamma(s - 0.5)? - ln_gamma(s)? + (1.0 - 2.0 * s) * z.y.ln()).exp();
    let tail_start = (rows + 1).max(40 + 2 * s.im.abs().ceil() as u64);
    let mut smooth_rows = CompensatedSum::<Complex64>::default();
    for c in rows + 1..tail_start {
        smooth_rows.add(((1.0 - 2.0 * s) * (c as f64).ln()).exp());
    }
    smooth_rows.add(shifted_power_tail(2.0 * s - 1.0, tail_start as f64, TAIL_CORRECTIONS));
    acc.add(2.0 * smooth * smooth_rows.value());
    let ln_gs = ln_gamma(s)?.re;
    let q = (-2.0 * PI * z.y).exp();
    let bound = 32.0 * (s.re * PI.ln() - ln_gs).exp() * (-2.0 * PI * (rows + 1) as f64 * z.y).exp() / (1.0 - q);
    Ok((acc.value(), bound))
}

/// `E(z, s) = ½ Σ_{gcd(c,d)=1} y^s / |cz+d|^{2s}` for `Re s ≥ 2`, summed as an
/// Epstein zeta divided by `2ζ(2s)`.
pub fn eisenstein_lattice_with_radius(z: UpperHalfPoint, s: SpectralPoint, radius: u64) -> Result<LatticeValue> {
    if s.sigma < 2.0 {
        return Err(EislabError::Domain(format!("lattice oracle needs sigma >= 2, got {}", s.sigma)));
    }
    let sc = s.s();
    let (ep, bound) = epstein(z, sc, radius)?;
    let scale = (sc * z.y.ln()).exp() / (2.0 * zeta(2.0 * sc)?);
    Ok(LatticeValue { value: ep * scale, tail_bound: bound * scale.norm(), radius })
}

pub fn eisenstein_lattice(z: UpperHalfPoint, s: SpectralPoint) -> Result<LatticeValue> {
    eisenstein_lattice_with_radius(z, s, DEFAULT_LATTICE_RADIUS)
}

/// Plain coprime-pair summation over `|c|, |d| ≤ radius`; slow and only
/// accurate to the truncation, used to cross-check the Epstein route.
pub fn eisenstein_lattice_naive(z: UpperHalfPoint, s: SpectralPoint, radius: i64) -> Complex64 {
    let sc = s.s();
    let mut acc = CompensatedSum::<Complex64>::default();
    for c in -radius..=radius {
        for d in -radius..=radius {
            if crate::numeric::gcd(c, d) != 1 {
                continue;
            }
            let n = (c as f64 * z.x + d as f64).powi(2) + (c as f64 * z.y).powi(2);
            acc.add((-sc * n.ln()).exp());
        }
    }
    acc.value() * 0.5 * (sc * z.y.ln()).exp()
}
