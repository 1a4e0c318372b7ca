//! Geometric and spectral sides of the amplified pre-trace formula at a point.

use std::f64::consts::PI;

use serde::Serialize;

use crate::amplifier::{build_amplifier, default_window, AmplifierSpec};
use crate::counting::{enumerate, CountQuery};
use crate::eisenstein::{eisenstein_reduced, SpectralPoint};
use crate::error::{EislabError, Result};
use crate::kernel::{build_compact_kernel, KernelPair};
use crate::modgroup::{reduce_sl2, UpperHalfPoint};
use crate::numeric::{integrate, CompensatedSum, QuadOptions};

/// Relative interpolation error of a kernel table, checked by node doubling.
const KERNEL_TABLE_ERROR: f64 = 1e-8;
pub const DEFAULT_WINDOW_R: f64 = 6.0;
const TAIL_SPAN: f64 = 30.0;
const EISENSTEIN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeometricSide {
    pub value: f64,
    pub matrices: u64,
    pub budget: f64,
}

/// `Σ_ℓ |y_ℓ|/√ℓ Σ_{det γ = ℓ} |k(u(γz, z))|` at the reduced point.
pub fn geometric_side(z: UpperHalfPoint, kernel: &KernelPair, amp: &AmplifierSpec) -> Result<GeometricSide> {
    let (z, _) = reduce_sl2(z);
    let k_peak = kernel.k(0.0).abs().max(kernel.nodes().fold(0.0, |m, (_, k)| m.max(k.abs())));
    let mut acc = CompensatedSum::<f64>::default();
    let mut matrices = 0;
    let mut budget = 0.0;
    for (ell, y) in amp.y_weights() {
        if y == 0.0 {
            continue;
        }
        let list = enumerate(&CountQuery::new(z, ell, kernel.u_max)?, true)?.matrices.unwrap_or_default();
        let mut inner = CompensatedSum::<f64>::default();
        for m in &list {
            inner.add(kernel.k(m.u).abs());
        }
        let weight = y.abs() / (ell as f64).sqrt();
        acc.add(weight * inner.value());
        matrices += list.len() as u64;
        budget += weight * list.len() as f64 * (KERNEL_TABLE_ERROR * k_peak + kernel.tail_bound);
    }
    Ok(GeometricSide { value: acc.value(), matrices, budget })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralSide {
    pub value: f64,
    pub quadrature_error: f64,
    /// Mass of the integrand in `window_r < |r − T| < window_r + 30`.
    pub window_tail: f64,
}

fn spectral_integral(
    z: UpperHalfPoint,
    kernel: &KernelPair,
    amp: &AmplifierSpec,
    lo: f64,
    hi: f64,
) -> Result<(f64, f64)> {
    if hi <= lo {
        return Ok((0.0, 0.0));
    }
    let failure = std::sync::Mutex::new(None);
    let integrand = |r: f64| {
        let a = amp.amplify(r);
        match eisenstein_reduced(z, SpectralPoint::critical(r), EISENSTEIN_TOL) {
            Ok(e) => kernel.h(r) * a * a * e.total.norm_sqr() / (4.0 * PI),
            Err(err) => {
                failure.lock().unwrap().get_or_insert(err);
                0.0
            }
        }
    };
    let opts = QuadOptions {
        abs_tol: 1e-12,
        rel_tol: 1e-8,
        initial_panels: 4 + (hi - lo).ceil() as usize,
        max_intervals: 2000,
    };
    let res = integrate(integrand, lo, hi, opts);
    if let Some(err) = failure.into_inner().unwrap() {
        return Err(err);
    }
    Ok((res.value, res.error))
}

/// `(1/4π) ∫_{|r−T| ≤ window_r} h(r) A_{ir} |E(z, 1/2+ir)|² dr`, a lower bound
/// for the continuous-spectrum contribution since the integrand is non-negative.
pub fn spectral_lower(
    z: UpperHalfPoint,
    kernel: &KernelPair,
    amp: &AmplifierSpec,
    window_r: f64,
) -> Result<SpectralSide> {
    let (z, _) = reduce_sl2(z);
    let t = kernel.t;
    let floor = 0.5;
    let (value, quadrature_error) = spectral_integral(z, kernel, amp, (t - window_r).max(floor), t + window_r)?;
    let (upper, e1) = spectral_integral(z, kernel, amp, t + window_r, t + window_r + TAIL_SPAN)?;
    let (lower, e2) =
        spectral_integral(z, kernel, amp, (t - window_r - TAIL_SPAN).max(floor), (t - window_r).max(floor))?;
    Ok(SpectralSide { value, quadrature_error, window_tail: upper + lower + e1 + e2 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PretraceReport {
    pub z: UpperHalfPoint,
    pub t: f64,
    pub n: u64,
    pub spectral_lhs: f64,
    pub geometric_rhs: f64,
    pub margin: f64,
    pub truncation_budget: f64,
    pub window_tail: f64,
    pub matrices: u64,
}

/// Builds the compact kernel and the amplifier, then checks
/// `spectral ≤ geometric + budget`.
pub fn pretrace_check(z: UpperHalfPoint, t: f64, n: u64) -> Result<PretraceReport> {
    if !(1.0..=64.0).contains(&t) || !(2..=101).contains(&n) {
        return Err(EislabError::Domain(format!("pre-trace check needs 1 ≤ T ≤ 64 and 2 ≤ N ≤ 101, got T = {t}, N = {n}")));
    }
    let kernel = build_compact_kernel(t)?;
    let amp = build_amplifier(n, t, default_window())?;
    pretrace_with(z, &kernel, &amp)
}

pub fn pretrace_with(z: UpperHalfPoint, kernel: &KernelPair, amp: &AmplifierSpec) -> Result<PretraceReport> {
    let geo = geometric_side(z, kernel, amp)?;
    let spec = spectral_lower(z, kernel, amp, DEFAULT_WINDOW_R)?;
    let budget = geo.budget + spec.quadrature_error;
    let report = PretraceReport {
        z,
        t: kernel.t,
        n: amp.n,
        spectral_lhs: spec.value,
        geometric_rhs: geo.value,
        margin: geo.value + budget - spec.value,
        truncation_budget: budget,
        window_tail: spec.window_tail,
        matrices: geo.matrices,
    };
    if report.margin < 0.0 {
        return Err(EislabError::CheckFailed(format!("pre-trace inequality violated: {report:?}")));
    }
    Ok(report)
}
