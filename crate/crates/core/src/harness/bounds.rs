//! Pointwise bounds for `E(z, 1/2 + iT)` high in the cusp: the Fourier-expansion
//! envelope and the short-interval mean-square bound.

use serde::Serialize;

use crate::eisenstein::{eisenstein_fourier, f_remainder, SpectralPoint};
use crate::error::{EislabError, Result};
use crate::modgroup::UpperHalfPoint;
use crate::numeric::{integrate, QuadOptions};

pub const EPSILON: f64 = 0.05;
const TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundCheck {
    pub z: UpperHalfPoint,
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// `(t/y)^{1/2} log²t + t^{1/6+ε}`.
pub fn fourier_envelope(y: f64, t: f64) -> f64 {
    (t / y).sqrt() * t.ln().powi(2) + t.powf(1.0 / 6.0 + EPSILON)
}

/// `|F(z, 1/2+it)|` against [`fourier_envelope`], for `y ≥ 1`, `t ≥ 8`.
pub fn bound_via_fe_check(z: UpperHalfPoint, t: f64) -> Result<BoundCheck> {
    if z.y < 1.0 || t < 8.0 {
        return Err(EislabError::Domain(format!("needs y ≥ 1 and t ≥ 8, got y = {}, t = {t}", z.y)));
    }
    let lhs = f_remainder(z, SpectralPoint::critical(t), TOL)?.norm();
    let rhs = fourier_envelope(z.y, t);
    Ok(BoundCheck { z, t, lhs, rhs, ratio: lhs / rhs })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegralCheck {
    pub bound: BoundCheck,
    pub integral: f64,
    pub quadrature_error: f64,
}

fn critical_norm_sqr(z: UpperHalfPoint, tau: f64) -> Result<f64> {
    if tau == 0.0 {
        // E(z, 1/2) vanishes identically at level one.
        return Ok(0.0);
    }
    Ok(eisenstein_fourier(z, tau, TOL)?.total.norm_sqr())
}

/// `∫_{|r| ≤ 4 log T} |E(z, 1/2 + i(T + r))|² dr` at relative tolerance `rel_tol`.
pub fn short_interval_mean_square(z: UpperHalfPoint, t: f64, rel_tol: f64) -> Result<(f64, f64)> {
    let half = 4.0 * t.ln();
    let failure = std::sync::Mutex::new(None);
    let f = |r: f64| match critical_norm_sqr(z, t + r) {
        Ok(v) => v,
        Err(e) => {
            failure.lock().unwrap().get_or_insert(e);
            0.0
        }
    };
    let opts = QuadOptions {
        abs_tol: 0.0,
        rel_tol,
        initial_panels: 8 + (2.0 * half * z.y.ln().abs().max(1.0)).ceil() as usize,
        max_intervals: 4000,
    };
    let res = integrate(f, -half, half, opts);
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    Ok((res.value, res.error))
}

/// `|E(z, 1/2+iT)|²` against `y log⁶T + log⁵T ∫_{|r|≤4 log T} |E(z, 1/2+iT+ir)|² dr`.
pub fn young_integral_check(z: UpperHalfPoint, t: f64) -> Result<IntegralCheck> {
    if z.y < 1.0 || t < 2.0 {
        return Err(EislabError::Domain(format!("needs y ≥ 1 and T ≥ 2, got y = {}, T = {t}", z.y)));
    }
    let lhs = critical_norm_sqr(z, t)?;
    let (integral, quadrature_error) = short_interval_mean_square(z, t, 1e-8)?;
    let lt = t.ln();
    let rhs = z.y * lt.powi(6) + lt.powi(5) * integral;
    Ok(IntegralCheck { bound: BoundCheck { z, t, lhs, rhs, ratio: lhs / rhs }, integral, quadrature_error })
}
