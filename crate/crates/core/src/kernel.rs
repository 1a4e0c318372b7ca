//! Selberg transform chain `h → g → q → k`, its numerical inverse, and the
//! tabulated point-pair kernels `k_T` used by the pre-trace harness.
//!
//! The point-pair invariant is `u = |z − w|²/(Im z · Im w)`, so
//! `u = 4 sinh²(ρ/2)` for hyperbolic distance `ρ`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{EislabError, Result};
use crate::numeric::{integrate, integrate_fixed, QuadOptions, Reflect, UniformTable};

/// Nodes per unit of `1/bandwidth` in every table.
pub const TABLE_RESOLUTION: f64 = 0.1;
/// `|k_T(u)| < TAIL_LEVEL · T` beyond `u_max`.
pub const TAIL_LEVEL: f64 = 1e-12;
const G_FLOOR: f64 = 1e-16;

pub const H_WINDOW_FLOOR: f64 = 0.3;
pub const KERNEL_SUP_CONSTANT: f64 = 0.35;
pub const KERNEL_DECAY_CONSTANT: f64 = 0.35;

pub fn u_from_rho(rho: f64) -> f64 {
    let s = (0.5 * rho).sinh();
    4.0 * s * s
}

pub fn rho_from_u(u: f64) -> f64 {
    2.0 * (0.5 * u.max(0.0).sqrt()).asinh()
}

/// `h(r) = e^{−(r/w)²}` for `centre = 0`, otherwise `e^{−((r−T)/w)²} + e^{−((r+T)/w)²}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianShape {
    pub centre: f64,
    pub width: f64,
}

impl GaussianShape {
    fn amplitude(&self) -> f64 {
        let base = self.width / PI.sqrt();
        if self.centre == 0.0 {
            0.5 * base
        } else {
            base
        }
    }

    pub fn h(&self, r: f64) -> f64 {
        let w = self.width;
        if self.centre == 0.0 {
            (-(r / w).powi(2)).exp()
        } else {
            (-((r - self.centre) / w).powi(2)).exp() + (-((r + self.centre) / w).powi(2)).exp()
        }
    }

    pub fn g(&self, xi: f64) -> f64 {
        let w = self.width;
        self.amplitude() * (self.centre * xi).cos() * (-(w * xi).powi(2) / 4.0).exp()
    }

    pub fn g_prime(&self, xi: f64) -> f64 {
        let (w, c) = (self.width, self.centre);
        let damp = (-(w * xi).powi(2) / 4.0).exp();
        -self.amplitude() * damp * (c * (c * xi).sin() + 0.5 * w * w * xi * (c * xi).cos())
    }

    /// Majorant of `|g′(ξ)|` such that `|g′|/sinh ξ` is decreasing.
    fn g_prime_majorant(&self, xi: f64) -> f64 {
        let w = self.width;
        self.amplitude() * (-(w * xi).powi(2) / 4.0).exp() * (self.centre + 0.5 * w * w * xi)
    }
}

fn bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    }
}

fn bump_prime(s: f64) -> f64 {
    let d = 1.0 - s * s;
    if d <= 0.0 {
        0.0
    } else {
        -2.0 * s / (d * d) * bump(s)
    }
}

/// `g = g₀ ∗ g₀` with `g₀(η) = c · bump(η/a) · cos(Tη)`, hence `h = ĝ₀² ≥ 0`
/// and `k` supported on `u ≤ 4 sinh²(a)`. With `a = asinh(1/2)` that is `u ≤ 1`.
#[derive(Debug, Clone, Serialize)]
pub struct CompactShape {
    pub t: f64,
    pub half_support: f64,
    pub norm: f64,
    #[serde(skip_serializing)]
    g_table: UniformTable,
    #[serde(skip_serializing)]
    g_prime_table: UniformTable,
}

impl CompactShape {
    pub fn new(t: f64) -> Self {
        let a = 0.5f64.asinh();
        let bump_hat_half = |r: f64| 0.5 * (bump_transform(a, r - t) + bump_transform(a, r + t));
        let norm = 1.0 / bump_hat_half(t);
        let omega = t + 40.0 / a;
        let n = ((2.0 * a) * omega / TABLE_RESOLUTION).ceil() as usize + 1;
        let step = 2.0 * a / (n - 1) as f64;
        let g0 = |eta: f64| bump(eta / a) * (t * eta).cos();
        let g0p = |eta: f64| bump_prime(eta / a) / a * (t * eta).cos() - t * bump(eta / a) * (t * eta).sin();
        let convolve = |xi: f64, f: &(dyn Fn(f64) -> f64 + Sync)| {
            let lo = xi - a;
            if lo >= a {
                return 0.0;
            }
            let opts = QuadOptions {
                abs_tol: 1e-16,
                rel_tol: 1e-13,
                initial_panels: 4 + ((a - lo) * (2.0 * t + 20.0 / a) / PI).ceil() as usize,
                ..QuadOptions::default()
            };
            norm * norm * integrate(|eta| g0(eta) * f(xi - eta), lo, a, opts).value
        };
        let (gv, gpv): (Vec<f64>, Vec<f64>) = (0..n)
            .into_par_iter()
            .map(|i| {
                let xi = i as f64 * step;
                (convolve(xi, &g0), convolve(xi, &g0p))
            })
            .unzip();
        Self {
            t,
            half_support: a,
            norm,
            g_table: UniformTable { start: 0.0, step, values: gv, reflect: Reflect::Even },
            g_prime_table: UniformTable { start: 0.0, step, values: gpv, reflect: Reflect::Odd },
        }
    }

    fn extent(&self) -> f64 {
        2.0 * self.half_support
    }

    pub fn h(&self, r: f64) -> f64 {
        let a = self.half_support;
        let half = 0.5 * (bump_transform(a, r - self.t) + bump_transform(a, r + self.t));
        (self.norm * half).powi(2)
    }

    pub fn g(&self, xi: f64) -> f64 {
        if xi.abs() >= self.extent() {
            0.0
        } else {
            self.g_table.eval(xi.abs())
        }
    }

    pub fn g_prime(&self, xi: f64) -> f64 {
        if xi.abs() >= self.extent() {
            0.0
        } else {
            self.g_prime_table.eval(xi.abs()) * xi.signum()
        }
    }
}

/// `∫_{−a}^{a} bump(η/a) cos(ωη) dη`.
fn bump_transform(a: f64, omega: f64) -> f64 {
    let opts = QuadOptions {
        abs_tol: 1e-16,
        rel_tol: 1e-13,
        initial_panels: 4 + (omega.abs() * a / PI).ceil() as usize,
        ..QuadOptions::default()
    };
    2.0 * a * integrate(|s| bump(s) * (omega * a * s).cos(), 0.0, 1.0, opts).value
}

#[derive(Debug, Clone, Serialize)]
pub enum KernelShape {
    Gaussian(GaussianShape),
    Compact(CompactShape),
}

impl KernelShape {
    pub fn h(&self, r: f64) -> f64 {
        match self {
            Self::Gaussian(s) => s.h(r),
            Self::Compact(s) => s.h(r),
        }
    }

    pub fn g(&self, xi: f64) -> f64 {
        match self {
            Self::Gaussian(s) => s.g(xi),
            Self::Compact(s) => s.g(xi),
        }
    }

    pub fn g_prime(&self, xi: f64) -> f64 {
        match self {
            Self::Gaussian(s) => s.g_prime(xi),
            Self::Compact(s) => s.g_prime(xi),
        }
    }

    /// `g` vanishes, or is negligible, for `|ξ|` beyond this.
    pub fn extent(&self) -> f64 {
        match self {
            Self::Gaussian(s) => 2.0 * (-G_FLOOR.ln()).sqrt() / s.width,
            Self::Compact(s) => s.extent(),
        }
    }

    /// Frequency scale of `g`, which sets table spacing and panel counts.
    pub fn bandwidth(&self) -> f64 {
        match self {
            Self::Gaussian(s) => s.centre + 6.0 * s.width,
            Self::Compact(s) => s.t + 40.0 / s.half_support,
        }
    }

    pub fn centre(&self) -> f64 {
        match self {
            Self::Gaussian(s) => s.centre,
            Self::Compact(s) => s.t,
        }
    }
}

/// `g(ξ) = (1/2π) ∫ e^{−irξ} h(r) dr` for even `h`, truncated to `|r| ≤ r_max`.
pub fn selberg_g(h: impl Fn(f64) -> f64, r_max: f64, xi: f64) -> f64 {
    let opts = QuadOptions {
        abs_tol: 1e-15,
        rel_tol: 1e-13,
        initial_panels: 8 + (r_max * xi.abs() / PI).ceil() as usize,
        ..QuadOptions::default()
    };
    integrate(|r| h(r) * (r * xi).cos(), 0.0, r_max, opts).value / PI
}

/// `q(v) = g(2 log(√(v+1) + √v)) / 2`.
pub fn selberg_q(g: impl Fn(f64) -> f64, v: f64) -> f64 {
    0.5 * g(2.0 * v.sqrt().asinh())
}

/// Integral over `w ≥ 0` of `f(ξ)` where `sinh²(ξ/2) = u/4 + w²`, written with
/// `w = √(1 + u/4) sinh τ` so the integrand is smooth in `τ`.
fn abel_integral(u: f64, extent: f64, bandwidth: f64, tol: f64, f: impl Fn(f64) -> f64) -> f64 {
    let s2 = u / 4.0;
    let top = (0.5 * extent).sinh().powi(2);
    if s2 >= top {
        return 0.0;
    }
    let scale = (1.0 + s2).sqrt();
    let tau_max = ((top - s2).sqrt() / scale).asinh();
    let opts = QuadOptions {
        abs_tol: tol,
        rel_tol: 1e-12,
        initial_panels: 4 + (tau_max * bandwidth / PI).ceil() as usize,
        max_intervals: 20_000,
    };
    integrate(
        |tau| {
            let w = scale * tau.sinh();
            let xi = 2.0 * (s2 + w * w).sqrt().asinh();
            f(xi) * scale * tau.cosh()
        },
        0.0,
        tau_max,
        opts,
    )
    .value
}

/// `k(u) = −(1/π) ∫_{u/4}^∞ (v − u/4)^{−1/2} dq(v)`, with `q′(v) = g′(ξ)/sinh ξ`.
pub fn selberg_k(shape: &KernelShape, u: f64) -> f64 {
    if let KernelShape::Gaussian(g) = shape {
        let rho = rho_from_u(u);
        if g.centre >= CONTOUR_MIN_CENTRE && rho * g.centre >= 4.0 {
            return gaussian_k_contour(g, rho);
        }
    }
    selberg_k_real_axis(shape, u)
}

const CONTOUR_MIN_CENTRE: f64 = 16.0;
const CONTOUR_DEPTH: f64 = 40.0;

/// Gaussian case of [`selberg_k`] in the form
/// `k = −(1/2π) Re ∫_ρ^∞ F(ξ) e^{iTξ} (sinh((ξ−ρ)/2) sinh((ξ+ρ)/2))^{−1/2} dξ`
/// with `g′ = Re(F e^{iTξ})`, integrated along `ξ = ρ + is²` up to `Ts² = 40`.
fn gaussian_k_contour(g: &GaussianShape, rho: f64) -> f64 {
    let (c, w) = (g.centre, g.width);
    let amp = g.amplitude();
    let top = (CONTOUR_DEPTH / c).sqrt();
    let phase = Complex64::from_polar(1.0, c * rho);
    let rotate = Complex64::new(0.0, 1.0) * Complex64::from_polar(1.0, -PI / 4.0);
    let integrand = |s: f64| {
        let eta = s * s;
        let xi = Complex64::new(rho, eta);
        let f = -amp * (-(w * w) * xi * xi / 4.0).exp() * (0.5 * w * w * xi - Complex64::new(0.0, c));
        let half = 0.5 * eta;
        let sinc = if half < 1e-4 { 1.0 - half * half / 6.0 } else { half.sin() / half };
        let jacobian = 2.0 / (0.5 * sinc).sqrt();
        let far = Complex64::new(rho, half).sinh().sqrt();
        f * jacobian / far * (-c * eta).exp()
    };
    let opts = QuadOptions { abs_tol: 0.0, rel_tol: 1e-13, initial_panels: 8, max_intervals: 2000 };
    let total = integrate(integrand, 0.0, top, opts).value * phase * rotate;
    -total.re / (2.0 * PI)
}

/// [`selberg_k`] by quadrature along the real axis.
pub fn selberg_k_real_axis(shape: &KernelShape, u: f64) -> f64 {
    let scale = (1.0 + shape.bandwidth()) * shape.g(0.0).abs();
    let integrand = |xi: f64| if xi == 0.0 { 0.0 } else { shape.g_prime(xi) / xi.sinh() };
    -2.0 / PI * abel_integral(u, shape.extent(), shape.bandwidth(), 1e-15 * scale, integrand)
}

/// `k(0) = −(1/2π) ∫₀^∞ g′(ξ)/sinh(ξ/2) dξ`, computed in `ξ` rather than along the Abel integral.
pub fn k_at_origin(shape: &KernelShape) -> f64 {
    let ext = shape.extent();
    let opts = QuadOptions {
        abs_tol: 1e-15,
        rel_tol: 1e-13,
        initial_panels: 8 + (ext * shape.bandwidth() / PI).ceil() as usize,
        ..QuadOptions::default()
    };
    let f = |xi: f64| if xi == 0.0 { 0.0 } else { shape.g_prime(xi) / (0.5 * xi).sinh() };
    -integrate(f, 0.0, ext, opts).value / (2.0 * PI)
}

/// Upper bound for `|k(u)|`, non-increasing in `u`.
fn gaussian_tail_envelope(shape: &GaussianShape, extent: f64, u: f64) -> f64 {
    2.0 / PI * abel_integral(u, extent, 1.0, 0.0, |xi| shape.g_prime_majorant(xi) / xi.sinh())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelProperties {
    pub h_min_sampled: f64,
    pub h_min_window: f64,
    pub k_sup_ratio: f64,
    pub k_decay_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelPair {
    pub t: f64,
    pub shape: KernelShape,
    pub u_max: f64,
    pub tail_bound: f64,
    pub properties: Option<KernelProperties>,
    #[serde(skip_serializing)]
    table: UniformTable,
}

impl KernelPair {
    pub fn h(&self, r: f64) -> f64 {
        self.shape.h(r)
    }

    /// Interpolated `k(u)`; zero beyond `u_max`, where `|k| ≤ tail_bound`.
    pub fn k(&self, u: f64) -> f64 {
        if u > self.u_max {
            0.0
        } else {
            self.table.eval(rho_from_u(u))
        }
    }

    pub fn table_len(&self) -> usize {
        self.table.values.len()
    }

    /// `(u, k(u))` at every table node up to `u_max`.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let rho_max = rho_from_u(self.u_max);
        self.table
            .values
            .iter()
            .enumerate()
            .map(move |(i, &k)| (i as f64 * self.table.step, k))
            .take_while(move |&(rho, _)| rho <= rho_max)
            .map(|(rho, k)| (u_from_rho(rho), k))
    }

    pub fn forward(&self) -> SphericalTransform {
        spherical_forward(|u| self.k(u), self.u_max, self.shape.bandwidth())
    }
}

/// Tabulates `k` on a uniform grid in `ρ` with spacing `resolution / bandwidth`.
pub fn build_kernel(shape: KernelShape, resolution: f64) -> KernelPair {
    let omega = shape.bandwidth();
    let ext = shape.extent();
    let t = shape.centre();
    let (rho_max, tail_bound) = match &shape {
        KernelShape::Compact(_) => (ext, 0.0),
        KernelShape::Gaussian(g) => {
            let level = TAIL_LEVEL * t.max(1.0);
            let (mut lo, mut hi) = (0.0, ext);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if gaussian_tail_envelope(g, ext, u_from_rho(mid)) > level {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            (hi, gaussian_tail_envelope(g, ext, u_from_rho(hi)))
        }
    };
    let step = resolution / omega;
    let n = (rho_max / step).ceil() as usize + 4;
    let values: Vec<f64> =
        (0..n).into_par_iter().map(|i| selberg_k(&shape, u_from_rho(i as f64 * step))).collect();
    KernelPair {
        t,
        shape,
        u_max: u_from_rho(rho_max),
        tail_bound,
        properties: None,
        table: UniformTable { start: 0.0, step, values, reflect: Reflect::Even },
    }
}

/// Measures the four localisation properties of a built kernel.
pub fn kernel_properties(pair: &KernelPair) -> KernelProperties {
    let t = pair.t;
    let samples = ((2.0 * t + 10.0) / 0.01) as usize;
    let h_min_sampled = (0..=samples).map(|i| pair.h(i as f64 * 0.01)).fold(f64::INFINITY, f64::min);
    let h_min_window = (0..=1000).map(|i| pair.h(t + i as f64 * 1e-3)).fold(f64::INFINITY, f64::min);
    let k_sup_ratio = pair.table.values.iter().fold(0.0f64, |m, v| m.max(v.abs())) / t;
    let lo = t.powi(-2);
    let k_decay_ratio = pair
        .nodes()
        .filter(|&(u, _)| (lo..=1.0).contains(&u))
        .map(|(u, k)| k.abs() * u.powf(0.25) / t.sqrt())
        .fold(0.0f64, f64::max);
    KernelProperties { h_min_sampled, h_min_window, k_sup_ratio, k_decay_ratio }
}

fn check_properties(p: &KernelProperties) -> Result<()> {
    let mut failed = Vec::new();
    if p.h_min_sampled < 0.0 {
        failed.push(format!("h negative at a sample ({:e})", p.h_min_sampled));
    }
    if p.h_min_window < H_WINDOW_FLOOR {
        failed.push(format!("h below {H_WINDOW_FLOOR} on [T, T+1] ({})", p.h_min_window));
    }
    if p.k_sup_ratio > KERNEL_SUP_CONSTANT {
        failed.push(format!("max|k|/T = {} exceeds {KERNEL_SUP_CONSTANT}", p.k_sup_ratio));
    }
    if p.k_decay_ratio > KERNEL_DECAY_CONSTANT {
        failed.push(format!("|k| u^(1/4) / T^(1/2) = {} exceeds {KERNEL_DECAY_CONSTANT}", p.k_decay_ratio));
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(EislabError::PropertyFailure(failed.join("; ")))
    }
}

/// Gaussian test kernel `h_T(r) = e^{−(r−T)²} + e^{−(r+T)²}` with its property suite.
pub fn build_test_kernel(t: f64) -> Result<KernelPair> {
    if !(1.0..=512.0).contains(&t) {
        return Err(EislabError::Domain(format!("kernel centre T = {t} outside [1, 512]")));
    }
    let mut pair = build_kernel(KernelShape::Gaussian(GaussianShape { centre: t, width: 1.0 }), TABLE_RESOLUTION);
    let props = kernel_properties(&pair);
    pair.properties = Some(props);
    check_properties(&props)?;
    Ok(pair)
}

/// Kernel supported on `u ≤ 1` with `h ≥ 0` everywhere and `h(T) ≈ 1`.
pub fn build_compact_kernel(t: f64) -> Result<KernelPair> {
    if !(1.0..=512.0).contains(&t) {
        return Err(EislabError::Domain(format!("kernel centre T = {t} outside [1, 512]")));
    }
    Ok(build_kernel(KernelShape::Compact(CompactShape::new(t)), TABLE_RESOLUTION))
}

/// Inverse chain `k → q → g → h`, with `g` tabulated once.
#[derive(Debug, Clone)]
pub struct SphericalTransform {
    g: UniformTable,
    xi_end: f64,
    bandwidth: f64,
}

/// `q(v) = 2∫₀^∞ k(4v + 4w²) dw`, `g(ξ) = 2q(sinh²(ξ/2))`, `h(r) = 2∫₀^∞ g(ξ) cos(rξ) dξ`.
///
/// Every quadrature uses a node set fixed by `(u_end, bandwidth)`, so the
/// result is linear in `k`.
pub fn spherical_forward(k: impl Fn(f64) -> f64 + Sync, u_end: f64, bandwidth: f64) -> SphericalTransform {
    let xi_end = rho_from_u(u_end);
    let step = TABLE_RESOLUTION / bandwidth;
    let n = (xi_end / step).ceil() as usize + 4;
    let q = |v: f64| {
        let room = u_end / 4.0 - v;
        if room <= 0.0 {
            return 0.0;
        }
        let scale = (1.0 + v).sqrt();
        let tau_max = (room.sqrt() / scale).asinh();
        let panels = 4 + (2.0 * tau_max * bandwidth / PI).ceil() as usize;
        2.0 * integrate_fixed(
            |tau| {
                let w = scale * tau.sinh();
                k(4.0 * (v + w * w)) * scale * tau.cosh()
            },
            0.0,
            tau_max,
            panels,
        )
    };
    let values: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let s = (0.5 * i as f64 * step).sinh();
            2.0 * q(s * s)
        })
        .collect();
    SphericalTransform { g: UniformTable { start: 0.0, step, values, reflect: Reflect::Even }, xi_end, bandwidth }
}

impl SphericalTransform {
    pub fn g(&self, xi: f64) -> f64 {
        if xi.abs() > self.xi_end {
            0.0
        } else {
            self.g.eval(xi.abs())
        }
    }

    pub fn h(&self, r: f64) -> f64 {
        let panels = 8 + (2.0 * self.xi_end * (self.bandwidth + r.abs()) / PI).ceil() as usize;
        2.0 * integrate_fixed(|xi| self.g(xi) * (r * xi).cos(), 0.0, self.xi_end, panels)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_fourier_pair() {
        let shape = GaussianShape { centre: 0.0, width: 1.0 };
        for &xi in &[0.0, 0.3, 1.0, 2.5] {
            let numeric = selberg_g(|r| shape.h(r), 40.0, xi);
            let closed = (-xi * xi / 4.0).exp() / (2.0 * PI.sqrt());
            assert!((numeric - closed).abs() < 1e-12, "{xi}");
            assert!((selberg_g(|r| shape.h(r), 40.0, -xi) - numeric).abs() < 1e-15);
        }
        let total = 2.0 * integrate(|xi| shape.g(xi), 0.0, 20.0, QuadOptions::default()).value;
        assert!((total - shape.h(0.0)).abs() < 1e-10);
    }

    #[test]
    fn q_substitution() {
        let shape = GaussianShape { centre: 3.0, width: 1.0 };
        assert_eq!(selberg_q(|x| shape.g(x), 0.0), shape.g(0.0) / 2.0);
        let mut prev = -1.0;
        for i in 0..100 {
            let xi = 2.0 * (i as f64 * 0.1).sqrt().asinh();
            assert!(xi > prev);
            prev = xi;
        }
    }

    #[test]
    fn k_at_origin_two_ways() {
        for shape in [
            KernelShape::Gaussian(GaussianShape { centre: 0.0, width: 5.0 }),
            KernelShape::Gaussian(GaussianShape { centre: 12.0, width: 1.0 }),
            KernelShape::Compact(CompactShape::new(10.0)),
        ] {
            let a = selberg_k(&shape, 0.0);
            let b = k_at_origin(&shape);
            assert!((a - b).abs() < 1e-8 * a.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn node_doubling() {
        let shape = KernelShape::Gaussian(GaussianShape { centre: 16.0, width: 1.0 });
        let coarse = build_kernel(shape.clone(), TABLE_RESOLUTION);
        let peak = coarse.table.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let step = coarse.table.step;
        for i in 0..coarse.table.values.len() - 6 {
            let rho = (i as f64 + 0.5) * step;
            let u = u_from_rho(rho);
            if u > coarse.u_max {
                break;
            }
            let exact = selberg_k(&shape, u);
            assert!((coarse.k(u) - exact).abs() <= 1e-8 * peak, "rho {rho}");
        }
    }

    #[test]
    fn compact_kernel_support_and_positivity() {
        let pair = build_compact_kernel(10.0).unwrap();
        assert!((pair.u_max - 1.0).abs() < 1e-12);
        assert_eq!(pair.k(1.0001), 0.0);
        assert!(selberg_k(&pair.shape, 1.0).abs() < 1e-12);
        assert!((pair.h(10.0) - 1.0).abs() < 0.05);
        for i in 0..400 {
            assert!(pair.h(i as f64 * 0.1) >= 0.0);
        }
    }

    #[test]
    fn contour_matches_real_axis() {
        for &c in &[16.0, 40.0] {
            let shape = KernelShape::Gaussian(GaussianShape { centre: c, width: 1.0 });
            let peak = selberg_k_real_axis(&shape, 0.0).abs();
            for &rho in &[4.0 / c, 0.3, 0.77, 1.5, 3.0, 6.0] {
                let u = u_from_rho(rho);
                let a = selberg_k(&shape, u);
                let b = selberg_k_real_axis(&shape, u);
                assert!((a - b).abs() < 1e-10 * peak, "T {c} rho {rho}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn tail_envelope_dominates() {
        let g = GaussianShape { centre: 16.0, width: 1.0 };
        let shape = KernelShape::Gaussian(g);
        let ext = shape.extent();
        for &rho in &[0.5, 2.0, 4.0, 7.0] {
            let u = u_from_rho(rho);
            assert!(selberg_k(&shape, u).abs() <= gaussian_tail_envelope(&g, ext, u));
        }
    }
}
