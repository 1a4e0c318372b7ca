//! Eisenstein series of square-free level `q`, one per cusp `1/v` (`v | q`),
//! evaluated through the level-lowering identity
//! `E_a(z,s) = ζ_q(2s) μ(v) (qv)^{-s} Σ_{β|v} Σ_{γ|w} μ(βγ) β^s γ^{-s} E(βγz, s)`,
//! plus an independent coset-sum oracle for `Re s ≥ 2`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::eisenstein::{epstein, eisenstein_lattice, eisenstein_reduced, EisensteinValue, SpectralPoint, DEFAULT_LATTICE_RADIUS};
use crate::error::{EislabError, Result};
use crate::modgroup::{apply, IntegerMatrix2, UpperHalfPoint};
use crate::numeric::{divisors, factorize, gcd, is_squarefree, mobius, CompensatedSum};
use crate::specfun::zeta;

/// The cusp `1/v` of Γ₀(q); `w = q/v` is its width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Cusp {
    pub q: u64,
    pub v: u64,
    pub w: u64,
}

impl Cusp {
    pub fn new(q: u64, v: u64) -> Result<Self> {
        if q == 0 || !is_squarefree(q) {
            return Err(EislabError::NotSquareFree(q));
        }
        if v == 0 || !q.is_multiple_of(v) {
            return Err(EislabError::Domain(format!("{v} does not divide {q}")));
        }
        Ok(Self { q, v, w: q / v })
    }

    /// The cusp `1/w`, image under the Fricke involution.
    pub fn dual(&self) -> Self {
        Self { q: self.q, v: self.w, w: self.v }
    }

    pub fn is_infinity(&self) -> bool {
        self.v == self.q
    }
}

pub fn cusps(q: u64) -> Result<Vec<Cusp>> {
    if q == 0 || !is_squarefree(q) {
        return Err(EislabError::NotSquareFree(q));
    }
    Ok(divisors(q).into_iter().map(|v| Cusp { q, v, w: q / v }).collect())
}

/// `ζ_q(s) = Π_{p|q} (1 − p^{-s})^{-1}`.
pub fn zeta_q(q: u64, s: Complex64) -> Result<Complex64> {
    let mut acc = Complex64::new(1.0, 0.0);
    for (p, _) in factorize(q) {
        let f = 1.0 - (-s * (p as f64).ln()).exp();
        if f.norm() == 0.0 {
            return Err(EislabError::Domain(format!("p^(-s) = 1 for p = {p}")));
        }
        acc /= f;
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CuspEisensteinValue {
    pub total: Complex64,
    pub delta_a: u8,
    pub phi_a: Complex64,
    pub remainder: Complex64,
}

/// Weights `c_m` with `E_a(z) = Σ_{m|q} c_m E(mz)`; `m = βγ`, `β = (m, v)`.
fn lowering_weights(cusp: &Cusp, s: Complex64) -> Result<Vec<(u64, Complex64)>> {
    let q = cusp.q;
    let outer = zeta_q(q, 2.0 * s)? * mobius(cusp.v) as f64 * (-s * ((q * cusp.v) as f64).ln()).exp();
    Ok(divisors(q)
        .into_iter()
        .map(|m| {
            let beta = gcd(m as i64, cusp.v as i64) as u64;
            let gamma = m / beta;
            let w = outer * mobius(m) as f64 * (s * ((beta as f64).ln() - (gamma as f64).ln())).exp();
            (m, w)
        })
        .collect())
}

/// `φ_a(s) = ζ_q(2s) μ(v) (qv)^{-s} φ(s) Σ_{β|v} μ(β) β · Σ_{γ|w} μ(γ) γ^{1−2s}`.
pub fn phi_cusp(cusp: &Cusp, s: SpectralPoint, phi: Complex64) -> Result<Complex64> {
    let sc = s.s();
    let q = cusp.q;
    let outer = zeta_q(q, 2.0 * sc)? * mobius(cusp.v) as f64 * (-sc * ((q * cusp.v) as f64).ln()).exp();
    let beta_sum: f64 = divisors(cusp.v).into_iter().map(|b| (mobius(b) * b as i64) as f64).sum();
    let gamma_sum: Complex64 = divisors(cusp.w)
        .into_iter()
        .map(|g| mobius(g) as f64 * ((1.0 - 2.0 * sc) * (g as f64).ln()).exp())
        .sum();
    Ok(outer * phi * beta_sum * gamma_sum)
}

/// `y^s` and `y^{1−s}` coefficients of `Σ_m c_m E(mz, s)`, given `φ(s)`.
pub fn constant_term_coefficients(cusp: &Cusp, s: SpectralPoint, phi: Complex64) -> Result<(Complex64, Complex64)> {
    let sc = s.s();
    let weights = lowering_weights(cusp, sc)?;
    let ys = weights.iter().map(|&(m, w)| w * (sc * (m as f64).ln()).exp()).sum();
    let y1s = weights.iter().map(|&(m, w)| w * phi * ((1.0 - sc) * (m as f64).ln()).exp()).sum();
    Ok((ys, y1s))
}

/// Level-1 values `E(mz, s)` for every `m | q`, shared by all cusps of `q`.
#[derive(Debug, Clone)]
pub struct LevelPoint {
    pub q: u64,
    pub z: UpperHalfPoint,
    pub s: SpectralPoint,
    level_one: Vec<(u64, EisensteinValue)>,
    phi: Complex64,
}

impl LevelPoint {
    pub fn new(q: u64, z: UpperHalfPoint, s: SpectralPoint, tol: f64) -> Result<Self> {
        if q == 0 || !is_squarefree(q) {
            return Err(EislabError::NotSquareFree(q));
        }
        let level_one = divisors(q)
            .into_par_iter()
            .map(|m| {
                let mz = UpperHalfPoint::new(m as f64 * z.x, m as f64 * z.y)?;
                Ok((m, eisenstein_reduced(mz, s, tol)?))
            })
            .collect::<Result<Vec<_>>>()?;
        let phi = if s.t < 0.0 {
            crate::eisenstein::scattering_phi(SpectralPoint::new(s.sigma, -s.t))?.conj()
        } else {
            crate::eisenstein::scattering_phi(s)?
        };
        Ok(Self { q, z, s, level_one, phi })
    }

    pub fn cusp_value(&self, cusp: &Cusp) -> Result<CuspEisensteinValue> {
        if cusp.q != self.q {
            return Err(EislabError::Domain(format!("cusp of level {} used at level {}", cusp.q, self.q)));
        }
        let sc = self.s.s();
        let weights = lowering_weights(cusp, sc)?;
        let mut rem = CompensatedSum::<Complex64>::default();
        for ((m, wgt), (m2, val)) in weights.iter().zip(&self.level_one) {
            debug_assert_eq!(m, m2);
            rem.add(wgt * val.remainder);
        }
        let remainder = rem.value();
        let delta_a = u8::from(cusp.is_infinity());
        let phi_a = phi_cusp(cusp, self.s, self.phi)?;
        let ly = self.z.y.ln();
        let main = (sc * ly).exp() * delta_a as f64 + phi_a * ((1.0 - sc) * ly).exp();
        Ok(CuspEisensteinValue { total: main + remainder, delta_a, phi_a, remainder })
    }

    /// `Σ_m c_m E(mz)` formed from the stored totals (no constant-term split).
    pub fn combined_total(&self, cusp: &Cusp) -> Result<Complex64> {
        let weights = lowering_weights(cusp, self.s.s())?;
        Ok(weights.iter().zip(&self.level_one).map(|((_, w), (_, v))| w * v.total).sum())
    }
}

/// `E_a(z, s)` through the level-lowering identity.
pub fn eisenstein_cusp(cusp: &Cusp, z: UpperHalfPoint, s: SpectralPoint, tol: f64) -> Result<CuspEisensteinValue> {
    LevelPoint::new(cusp.q, z, s, tol)?.cusp_value(cusp)
}

/// `F_a(z, s) = E_a − δ_a y^s − φ_a y^{1−s}`.
pub fn f_remainder_cusp(cusp: &Cusp, z: UpperHalfPoint, s: SpectralPoint, tol: f64) -> Result<Complex64> {
    Ok(eisenstein_cusp(cusp, z, s, tol)?.remainder)
}

/// The level-lowering combination of level-1 lattice sums, for `Re s ≥ 2`.
pub fn eisenstein_cusp_lowered_lattice(cusp: &Cusp, z: UpperHalfPoint, s: SpectralPoint) -> Result<Complex64> {
    let weights = lowering_weights(cusp, s.s())?;
    let mut acc = CompensatedSum::<Complex64>::default();
    for (m, w) in weights {
        let mz = UpperHalfPoint::new(m as f64 * z.x, m as f64 * z.y)?;
        acc.add(w * eisenstein_lattice(mz, s)?.value);
    }
    Ok(acc.value())
}

/// Coset sum `½ (y/w)^s Σ* |cvz + d|^{-2s}` over `(c,d) = 1`, `(c,w) = 1`,
/// `(d,v) = 1`, for `Re s ≥ 2`. Coprimality is removed by Möbius inversion
/// so that each piece is an Epstein zeta of a rescaled point.
pub fn eisenstein_cusp_direct(cusp: &Cusp, z: UpperHalfPoint, s: SpectralPoint) -> Result<Complex64> {
    if s.sigma < 2.0 {
        return Err(EislabError::Domain(format!("coset oracle needs sigma >= 2, got {}", s.sigma)));
    }
    let sc = s.s();
    let mut acc = CompensatedSum::<Complex64>::default();
    for e in divisors(cusp.w) {
        for g in divisors(cusp.v) {
            let scale = (e * cusp.v / g) as f64;
            let zz = UpperHalfPoint::new(scale * z.x, scale * z.y)?;
            let (ep, _) = epstein(zz, sc, DEFAULT_LATTICE_RADIUS)?;
            acc.add(ep * (mobius(e) * mobius(g)) as f64 * (-2.0 * sc * (g as f64).ln()).exp());
        }
    }
    let pre = 0.5 * (sc * (z.y / cusp.w as f64).ln()).exp() * zeta_q(cusp.q, 2.0 * sc)? / zeta(2.0 * sc)?;
    Ok(pre * acc.value())
}

/// A Γ₀(q) element with small entries, for invariance checks.
pub fn gamma0_element(q: u64, c_mult: i64, d: i64) -> Option<IntegerMatrix2> {
    let c = c_mult * q as i64;
    let (g, x, y) = crate::numeric::ext_gcd(d, c);
    if g.abs() != 1 {
        return None;
    }
    // x·d + y·c = g ⇒ (a, b) = (x·g, −y·g).
    let m = IntegerMatrix2::new(x * g, -y * g, c, d);
    (m.det() == 1).then_some(m)
}

pub fn apply_gamma0(m: &IntegerMatrix2, z: UpperHalfPoint) -> UpperHalfPoint {
    apply(m, z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eisenstein::{eisenstein_fourier, DEFAULT_TOL};
    use crate::numeric::euler_phi;

    fn pt(x: f64, y: f64) -> UpperHalfPoint {
        UpperHalfPoint::new(x, y).unwrap()
    }

    #[test]
    fn cusp_lists() {
        assert_eq!(cusps(1).unwrap(), vec![Cusp { q: 1, v: 1, w: 1 }]);
        let c6: Vec<(u64, u64)> = cusps(6).unwrap().iter().map(|c| (c.v, c.w)).collect();
        assert_eq!(c6, vec![(1, 6), (2, 3), (3, 2), (6, 1)]);
        for q in 1..=210u64 {
            match cusps(q) {
                Ok(list) => {
                    assert_eq!(list.len(), 1 << factorize(q).len());
                    for c in list {
                        assert_eq!(c.dual().dual(), c);
                        assert_eq!(c.v * c.w, q);
                    }
                }
                Err(e) => assert_eq!(e, EislabError::NotSquareFree(q)),
            }
        }
    }

    #[test]
    fn zeta_q_examples() {
        assert_eq!(zeta_q(1, Complex64::new(0.3, 2.0)).unwrap(), Complex64::new(1.0, 0.0));
        assert!((zeta_q(6, Complex64::new(2.0, 0.0)).unwrap() - 1.5).norm() < 1e-15);
        for &q in &[2u64, 6, 30, 210] {
            let bound = q as f64 / euler_phi(q) as f64;
            for k in 0..50 {
                let t = 0.37 * k as f64 + 0.1;
                assert!(zeta_q(q, Complex64::new(1.0, 2.0 * t)).unwrap().norm() <= bound * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn constant_term_identities() {
        for &q in &[2u64, 3, 5, 6, 7, 10, 30, 210] {
            for c in cusps(q).unwrap() {
                for &s in &[Complex64::new(0.5, 7.3), Complex64::new(2.0, 0.0), Complex64::new(0.5, 140.0)] {
                    let phi = Complex64::new(0.8, -0.6);
                    let (ys, from_weights) =
                        constant_term_coefficients(&c, SpectralPoint::new(s.re, s.im), phi).unwrap();
                    let want = if c.is_infinity() { 1.0 } else { 0.0 };
                    assert!((ys - want).norm() < 1e-12, "q={q} v={} s={s}: {ys}", c.v);
                    let closed = phi_cusp(&c, SpectralPoint::new(s.re, s.im), phi).unwrap();
                    assert!((from_weights - closed).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn level_one_reduces_to_level_one_evaluator() {
        let z = pt(0.13, 1.4);
        let c = Cusp::new(1, 1).unwrap();
        let a = eisenstein_cusp(&c, z, SpectralPoint::critical(21.0), DEFAULT_TOL).unwrap();
        let b = eisenstein_fourier(z, 21.0, DEFAULT_TOL).unwrap();
        assert!((a.total - b.total).norm() < 1e-12);
        assert!((a.remainder - b.remainder).norm() < 1e-12);
        assert_eq!(a.phi_a, crate::eisenstein::scattering_phi(SpectralPoint::critical(21.0)).unwrap());
        let s = SpectralPoint::new(2.0, 0.0);
        let d = eisenstein_cusp_direct(&c, z, s).unwrap();
        let l = eisenstein_lattice(z, s).unwrap().value;
        assert!((d - l).norm() < 1e-13 * l.norm());
    }

    #[test]
    fn stored_parts_add_up() {
        let z = pt(0.2, 0.7);
        let lp = LevelPoint::new(6, z, SpectralPoint::critical(9.0), DEFAULT_TOL).unwrap();
        for c in cusps(6).unwrap() {
            let v = lp.cusp_value(&c).unwrap();
            let s = Complex64::new(0.5, 9.0);
            let rebuilt = (s * z.y.ln()).exp() * v.delta_a as f64 + v.phi_a * ((1.0 - s) * z.y.ln()).exp() + v.remainder;
            assert_eq!(v.total, rebuilt);
            let comb = lp.combined_total(&c).unwrap();
            assert!((comb - v.total).norm() < 1e-9 * comb.norm().max(1.0));
        }
    }
}
