//! Complex special functions: Γ, ζ, ξ and the exponentially scaled
//! K-Bessel function of (mostly) imaginary order.
//!
//! Everything that can under- or overflow for large imaginary parts is
//! available in log form (`ln_gamma`, `ln_xi`), and K-Bessel values are
//! always returned multiplied by `e^{π|Im ν|/2}`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{EislabError, Result};
use crate::numeric::CompensatedSum;

pub type ComplexValue = Complex64;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

// Godfrey's g = 607/128 Lanczos set.
const LANCZOS_G: f64 = 607.0 / 128.0;
const LANCZOS: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_747,
    -0.491_913_816_097_620_2,
    0.339_946_499_848_118_9e-4,
    0.465_236_289_270_485_8e-4,
    -0.983_744_753_048_795_6e-4,
    0.158_088_703_224_912_5e-3,
    -0.210_264_441_724_104_9e-3,
    0.217_439_618_115_212_6e-3,
    -0.164_318_106_536_763_9e-3,
    0.844_182_239_838_527_4e-4,
    -0.261_908_384_015_814_1e-4,
    0.368_991_826_595_316_2e-5,
];

// B_{2k} / (2k)! for k = 1..=12.
const BERNOULLI_OVER_FACT: [f64; 12] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30_240.0,
    -1.0 / 1_209_600.0,
    1.0 / 47_900_160.0,
    -691.0 / 1_307_674_368_000.0,
    1.0 / 74_724_249_600.0,
    -3617.0 / 10_670_622_842_880_000.0,
    43867.0 / 5_109_094_217_170_944_000.0,
    -174_611.0 / 802_857_662_698_291_200_000.0,
    77683.0 / 14_101_100_039_391_805_440_000.0,
    -236_364_091.0 / 1_693_824_136_731_743_669_452_800_000.0,
];

fn is_nonpositive_integer(s: Complex64) -> bool {
    s.im == 0.0 && s.re <= 0.0 && s.re == s.re.round()
}

/// `ln sin(πs)` on a branch that never overflows for large `|Im s|`.
fn ln_sin_pi(s: Complex64) -> Complex64 {
    if s.im.abs() < 20.0 {
        return (s * PI).sin().ln();
    }
    let (z, conj) = if s.im < 0.0 { (s.conj(), true) } else { (s, false) };
    // sin(πz) = (i/2) e^{-iπz} (1 - e^{2iπz}); |e^{2iπz}| = e^{-2π Im z} is tiny.
    let i = Complex64::i();
    let r = -i * PI * z + (i * 0.5).ln() + (1.0 - (i * 2.0 * PI * z).exp()).ln();
    if conj {
        r.conj()
    } else {
        r
    }
}

/// Logarithm of Γ(s) on an arbitrary but continuous-in-practice branch;
/// `exp(ln_gamma(s)) == Γ(s)`.
pub fn ln_gamma(s: Complex64) -> Result<Complex64> {
    if is_nonpositive_integer(s) {
        return Err(EislabError::GammaPole { re: s.re, im: s.im });
    }
    if s.re < 0.5 {
        // Reflection: Γ(s) Γ(1-s) = π / sin(πs).
        let rest = ln_gamma(1.0 - s)?;
        return Ok(Complex64::new(PI.ln(), 0.0) - ln_sin_pi(s) - rest);
    }
    let z = s - 1.0;
    let mut acc = Complex64::new(LANCZOS[0], 0.0);
    for (k, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (z + k as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    Ok(LN_SQRT_2PI + (z + 0.5) * t.ln() - t + acc.ln())
}

/// Γ(s). Underflows to zero for very large `|Im s|`; use [`ln_gamma`] there.
pub fn complex_gamma(s: ComplexValue) -> Result<ComplexValue> {
    Ok(ln_gamma(s)?.exp())
}

/// Accuracy mode for [`zeta_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    /// `⌈|Im s|⌉ + 20` direct terms, 6 Euler–Maclaurin corrections.
    Standard,
    /// Twice the direct terms and 12 corrections; slower, used as a cross-check.
    High,
}

/// Euler–Maclaurin tail `Σ_{k ≥ 0} (start + k)^{-p}` with `corrections`
/// Bernoulli terms. Valid for `p ≠ 1` (by continuation when `Re p ≤ 1`)
/// provided `start` is a few times larger than `|p| / 2π`.
pub(crate) fn shifted_power_tail(p: Complex64, start: f64, corrections: usize) -> Complex64 {
    let n = start;
    let n_pow = (-p * n.ln()).exp();
    let mut acc = CompensatedSum::<Complex64>::default();
    acc.add(n_pow * n / (p - 1.0));
    acc.add(n_pow * 0.5);
    // k-th correction: B_{2k}/(2k)! * p(p+1)...(p+2k-2) * n^{-p-2k+1}
    let mut rising = p;
    let mut power = n_pow / n;
    for (k, &b) in BERNOULLI_OVER_FACT.iter().enumerate().take(corrections) {
        if k > 0 {
            let j = 2.0 * k as f64;
            rising *= (p + (j - 1.0)) * (p + j);
            power /= n * n;
        }
        acc.add(rising * power * b);
    }
    acc.value()
}

/// `Σ_{n ≥ n0} n^{-p}`.
pub(crate) fn power_sum_tail(p: Complex64, n0: u64, corrections: usize) -> Complex64 {
    shifted_power_tail(p, n0 as f64, corrections)
}

pub fn zeta_with(s: ComplexValue, precision: Precision) -> Result<ComplexValue> {
    if s == Complex64::new(1.0, 0.0) {
        return Err(EislabError::ZetaPole);
    }
    if s.re <= -1.0 {
        return Err(EislabError::Domain(format!("zeta needs Re s > -1, got {s}")));
    }
    let (terms, corrections) = match precision {
        Precision::Standard => (s.im.abs().ceil() as u64 + 20, 6),
        Precision::High => (2 * (s.im.abs().ceil() as u64 + 20), 12),
    };
    let mut acc = CompensatedSum::<Complex64>::default();
    for n in 1..terms {
        acc.add((-s * (n as f64).ln()).exp());
    }
    acc.add(power_sum_tail(s, terms, corrections));
    Ok(acc.value())
}

/// Riemann ζ(s) by Euler–Maclaurin summation.
pub fn zeta(s: ComplexValue) -> Result<ComplexValue> {
    zeta_with(s, Precision::Standard)
}

/// `ln ξ(s)` with `ξ(s) = π^{-s/2} Γ(s/2) ζ(s)`.
pub fn ln_xi(s: ComplexValue) -> Result<ComplexValue> {
    ln_xi_with(s, Precision::Standard)
}

pub fn ln_xi_with(s: ComplexValue, precision: Precision) -> Result<ComplexValue> {
    if s == Complex64::new(0.0, 0.0) || s == Complex64::new(1.0, 0.0) {
        return Err(EislabError::Domain("xi is evaluated away from s = 0, 1".into()));
    }
    let z = zeta_with(s, precision)?;
    if z == Complex64::new(0.0, 0.0) {
        return Err(EislabError::Domain(format!("zeta vanishes at {s}")));
    }
    Ok(-s * 0.5 * PI.ln() + ln_gamma(s * 0.5)? + z.ln())
}

pub fn xi(s: ComplexValue) -> Result<ComplexValue> {
    Ok(ln_xi(s)?.exp())
}

// ---------------------------------------------------------------------------
// K-Bessel
// ---------------------------------------------------------------------------

/// `e^{πt/2} K_{it}(u)` together with the arguments that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledBesselValue {
    pub value: f64,
    pub t: f64,
    pub u: f64,
    /// Imaginary part left over by the two-sided quadrature (zero analytically).
    pub imag_residue: f64,
}

/// Largest imaginary order accepted by the internal evaluator.
pub(crate) const MAX_INTERNAL_ORDER: f64 = 1024.0;

/// Allowed growth of the integrand above the answer's scale, in nepers.
const CANCELLATION_BUDGET: f64 = 6.0;
/// Integrand is dropped once it falls this many nepers below its peak.
const TAIL_NEPERS: f64 = 55.0;
/// Trapezoid step as a fraction of the inverse maximal phase speed.
const STEP_FACTOR: f64 = 2.0;

/// Geometry of the shifted contour `w ↦ w + i(π/2 − ε)` and its trapezoid grid.
#[derive(Debug, Clone, Copy)]
struct Contour {
    eps: f64,
    step: f64,
    nodes: usize,
}

fn contour_for(a: f64, t: f64, u: f64) -> Contour {
    // Height of the integrand at w = 0 as a function of the shift.
    let height = |e: f64| t * e - u * e.sin();
    let eps_lo = if u > t { (t / u).acos() } else { 0.0 };
    let floor = height(eps_lo) + CANCELLATION_BUDGET;
    let eps = if height(FRAC_PI_2) <= floor {
        FRAC_PI_2
    } else {
        let (mut lo, mut hi) = (eps_lo, FRAC_PI_2);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if height(mid) <= floor {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    let se = eps.sin();
    let re_phi = |w: f64| t * eps - u * se * w.cosh() + a * w;
    let w_peak = (a / (u * se)).asinh();
    let target = re_phi(w_peak) - TAIL_NEPERS;
    let mut hi = w_peak + 1.0;
    while re_phi(hi) > target {
        hi *= 2.0;
    }
    let mut lo = w_peak;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if re_phi(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let w_cut = hi;
    let speed = u * w_cut.cosh() + (a * a + t * t).sqrt() + 1.0;
    let step = STEP_FACTOR / speed;
    let nodes = (w_cut / step).ceil() as usize + 1;
    Contour { eps, step, nodes }
}

fn integrand(a: f64, t: f64, u: f64, eps: f64, w: f64) -> Complex64 {
    let beta = FRAC_PI_2 - eps;
    let re = t * eps - u * eps.sin() * w.cosh() + a * w;
    let im = -u * eps.cos() * w.sinh() + a * beta + t * w;
    Complex64::from_polar(re.exp(), im)
}

/// Two-sided trapezoid sum of `½∫ e^{-u cosh v + νv} dv` on the shifted line.
fn scaled_k_two_sided(a: f64, t: f64, u: f64) -> Complex64 {
    let c = contour_for(a, t, u);
    let mut acc = CompensatedSum::<Complex64>::default();
    acc.add(integrand(a, t, u, c.eps, 0.0));
    for k in 1..c.nodes {
        let w = k as f64 * c.step;
        acc.add(integrand(a, t, u, c.eps, w));
        acc.add(integrand(a, t, u, c.eps, -w));
    }
    acc.value() * (0.5 * c.step)
}

/// Real imaginary-order fast path: pairs `±w` are complex conjugates.
fn scaled_k_imaginary(t: f64, u: f64) -> f64 {
    let c = contour_for(0.0, t, u);
    let mut acc = CompensatedSum::<f64>::default();
    acc.add(integrand(0.0, t, u, c.eps, 0.0).re);
    for k in 1..c.nodes {
        acc.add(2.0 * integrand(0.0, t, u, c.eps, k as f64 * c.step).re);
    }
    acc.value() * 0.5 * c.step
}

fn check_bessel_args(t: f64, u: f64, t_max: f64) -> Result<()> {
    if !(t.is_finite() && u.is_finite()) || t.abs() > t_max || u <= 0.0 {
        return Err(EislabError::Domain(format!("K-Bessel needs |t| <= {t_max}, u > 0; got t = {t}, u = {u}")));
    }
    Ok(())
}

/// `e^{πt/2} K_{it}(u)` for `0 ≤ t ≤ 512`, `u > 0`.
pub fn bessel_k_scaled(t: f64, u: f64) -> Result<ScaledBesselValue> {
    if t < 0.0 {
        return Err(EislabError::Domain(format!("K-Bessel order must be t >= 0, got {t}")));
    }
    check_bessel_args(t, u, 512.0)?;
    let full = scaled_k_two_sided(0.0, t, u);
    Ok(ScaledBesselValue { value: full.re, t, u, imag_residue: full.im })
}

/// Fast real-valued `e^{π|t|/2} K_{it}(u)` used inside series evaluations.
pub(crate) fn bessel_k_scaled_fast(t: f64, u: f64) -> Result<f64> {
    check_bessel_args(t, u, MAX_INTERNAL_ORDER)?;
    Ok(scaled_k_imaginary(t.abs(), u))
}

/// `e^{π|Im ν|/2} K_ν(u)` for complex order with `Re ν ≥ 0`.
pub fn bessel_k_scaled_complex(nu: Complex64, u: f64) -> Result<Complex64> {
    if nu.re < 0.0 {
        // K_{-ν} = K_ν
        return bessel_k_scaled_complex(-nu, u);
    }
    check_bessel_args(nu.im, u, MAX_INTERNAL_ORDER)?;
    if nu.im < 0.0 {
        return Ok(scaled_k_two_sided(nu.re, -nu.im, u).conj());
    }
    if nu.re == 0.0 {
        return Ok(Complex64::new(scaled_k_imaginary(nu.im, u), 0.0));
    }
    Ok(scaled_k_two_sided(nu.re, nu.im, u))
}

/// Single constant for the three-regime envelope of `e^{πt/2}K_{it}(u)`,
/// fitted on `t ∈ [10, 512]`, `u ∈ (0, 3t]`.
pub const BESSEL_ENVELOPE_CONSTANT: f64 = 2.6;

/// Upper envelope for `|e^{πt/2}K_{it}(u)|`, `t ≥ 1`.
///
/// Below the turning point it is `C (t(t−u))^{-1/4}`, inside the transition
/// window `|u − t| ≤ C t^{1/3}` it is `C t^{-1/3}`, and beyond it is the
/// saddle-point decay `C (u²−t²)^{-1/4} exp(t·arccos(t/u) − √(u²−t²))`.
pub fn bessel_envelope(t: f64, u: f64) -> f64 {
    let c = BESSEL_ENVELOPE_CONSTANT;
    let width = c * t.cbrt();
    if (u - t).abs() <= width {
        c / t.cbrt()
    } else if u < t {
        c * (t * (t - u)).powf(-0.25)
    } else {
        let root = (u * u - t * t).sqrt();
        c * root.powf(-0.5) * (t * (t / u).acos() - root).exp()
    }
}

impl ScaledBesselValue {
    pub fn envelope(&self) -> f64 {
        bessel_envelope(self.t, self.u)
    }
}
