//! Counting integer matrices `γ` of determinant `ℓ` with `u(γz, z) ≤ δ`,
//! split into generic, upper-triangular and parabolic classes, with a fast
//! constructive count for the parabolic class and the lemma checks built on
//! these counts.

use serde::Serialize;

use crate::error::{EislabError, Result};
use crate::modgroup::{IntegerMatrix2, UpperHalfPoint};
use crate::numeric::{divisors, isqrt, primes_in};

pub const FEASIBILITY_CAP: f64 = 1e8;
const RANGE_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum MatrixClass {
    Generic,
    Upper,
    Parabolic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CountQuery {
    pub z: UpperHalfPoint,
    pub ell: u64,
    pub delta: f64,
}

impl CountQuery {
    pub fn new(z: UpperHalfPoint, ell: u64, delta: f64) -> Result<Self> {
        if ell == 0 {
            return Err(EislabError::Domain("determinant must be positive".into()));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(EislabError::Domain(format!("delta must be positive, got {delta}")));
        }
        Ok(Self { z, ell, delta })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CountedMatrix {
    pub matrix: IntegerMatrix2,
    pub u: f64,
    pub class: MatrixClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct CountBreakdown {
    pub m_star: u64,
    pub m_u: u64,
    pub m_p: u64,
    pub matrices: Option<Vec<CountedMatrix>>,
}

impl CountBreakdown {
    pub fn total(&self) -> u64 {
        self.m_star + self.m_u + self.m_p
    }

    fn from_list(mut list: Vec<CountedMatrix>, keep: bool) -> Self {
        list.sort_by_key(|m| (m.matrix.a, m.matrix.b, m.matrix.c, m.matrix.d));
        let count = |c: MatrixClass| list.iter().filter(|m| m.class == c).count() as u64;
        Self {
            m_star: count(MatrixClass::Generic),
            m_u: count(MatrixClass::Upper),
            m_p: count(MatrixClass::Parabolic),
            matrices: keep.then_some(list),
        }
    }
}

pub fn classify(g: &IntegerMatrix2, ell: u64) -> Result<MatrixClass> {
    if g.det() != ell as i64 {
        return Err(EislabError::DetMismatch { found: g.det(), expected: ell as i64 });
    }
    Ok(classify_unchecked(g, ell))
}

fn classify_unchecked(g: &IntegerMatrix2, ell: u64) -> MatrixClass {
    let tr = (g.a + g.d) as i128;
    if tr * tr == 4 * ell as i128 {
        MatrixClass::Parabolic
    } else if g.c == 0 {
        MatrixClass::Upper
    } else {
        MatrixClass::Generic
    }
}

/// `u(γz, z) = |−cz² + (a−d)z + b|² / (ℓ y²)`.
pub fn u_of(g: &IntegerMatrix2, z: UpperHalfPoint) -> f64 {
    let (a, b, c, d) = (g.a as f64, g.b as f64, g.c as f64, g.d as f64);
    let re = (a - d).mul_add(z.x, b) - c * (z.x * z.x - z.y * z.y);
    let im = z.y * (2.0f64 * c).mul_add(-z.x, a - d);
    (re * re + im * im) / (g.det() as f64 * z.y * z.y)
}

/// Largest `ρ` with `ρ + 1/ρ − 2 ≤ δ`; then `ℓ/|cz+d|² ∈ [1/G, G]`.
pub fn ratio_bound(delta: f64) -> f64 {
    1.0 + delta / 2.0 + (delta + delta * delta / 4.0).sqrt()
}

/// Candidate count the exhaustive enumeration would visit.
pub fn predicted_work(q: &CountQuery) -> f64 {
    let g = ratio_bound(q.delta);
    let l = q.ell as f64;
    (2.0 * (l * g).sqrt() / q.z.y + 1.0) * (2.0 * (l * g).sqrt() + 1.0) * (2.0 * (l * q.delta).sqrt() + 1.0)
}

fn check_feasible(q: &CountQuery) -> Result<()> {
    let w = predicted_work(q);
    if w > FEASIBILITY_CAP {
        return Err(EislabError::Feasibility { predicted: w, cap: FEASIBILITY_CAP });
    }
    Ok(())
}

fn push_if_inside(out: &mut Vec<CountedMatrix>, g: IntegerMatrix2, q: &CountQuery) {
    let u = u_of(&g, q.z);
    if u <= q.delta {
        out.push(CountedMatrix { matrix: g, u, class: classify_unchecked(&g, q.ell) });
    }
}

/// Upper-triangular and parabolic `c = 0` matrices: `ad = ℓ`, `|b + (a−d)x| ≤ y√(ℓδ)`.
fn enumerate_c_zero(q: &CountQuery, out: &mut Vec<CountedMatrix>) {
    let l = q.ell as i64;
    let width = q.z.y * (q.ell as f64 * q.delta).sqrt() * (1.0 + RANGE_MARGIN) + RANGE_MARGIN;
    for a in divisors(q.ell) {
        for sign in [1i64, -1] {
            let a = sign * a as i64;
            let d = l / a;
            let centre = -((a - d) as f64) * q.z.x;
            let lo = (centre - width).ceil() as i64;
            let hi = (centre + width).floor() as i64;
            for b in lo..=hi {
                push_if_inside(out, IntegerMatrix2::new(a, b, 0, d), q);
            }
        }
    }
}

fn enumerate_all(q: &CountQuery) -> Vec<CountedMatrix> {
    let (x, y) = (q.z.x, q.z.y);
    let l = q.ell as f64;
    let g = ratio_bound(q.delta) * (1.0 + RANGE_MARGIN);
    let mut out = Vec::new();
    enumerate_c_zero(q, &mut out);
    let c_max = ((l * g).sqrt() / y).floor() as i64;
    let a_width = (l * q.delta).sqrt() * (1.0 + RANGE_MARGIN) + RANGE_MARGIN;
    for c in (-c_max..=c_max).filter(|&c| c != 0) {
        let cf = c as f64;
        let room = l * g - cf * cf * y * y;
        if room < 0.0 {
            continue;
        }
        let r = room.sqrt();
        let d_lo = (-cf * x - r).ceil() as i64;
        let d_hi = (-cf * x + r).floor() as i64;
        for d in d_lo..=d_hi {
            let centre = d as f64 + 2.0 * cf * x;
            let a_lo = (centre - a_width).ceil() as i64;
            let a_hi = (centre + a_width).floor() as i64;
            for a in a_lo..=a_hi {
                let num = a * d - q.ell as i64;
                if num % c != 0 {
                    continue;
                }
                push_if_inside(&mut out, IntegerMatrix2::new(a, num / c, c, d), q);
            }
        }
    }
    out
}

/// Exhaustive count of all three classes at `(z, ℓ, δ)`.
pub fn enumerate(q: &CountQuery, keep_matrices: bool) -> Result<CountBreakdown> {
    check_feasible(q)?;
    Ok(CountBreakdown::from_list(enumerate_all(q), keep_matrices))
}

/// Only the upper-triangular class, which needs just the `c = 0` branch.
pub fn count_upper(q: &CountQuery) -> u64 {
    let mut out = Vec::new();
    enumerate_c_zero(q, &mut out);
    out.iter().filter(|m| m.class == MatrixClass::Upper).count() as u64
}

/// Constructive parabolic count for `ℓ = m²`: trace `±2m`, `e = a − d` even
/// with `|e − 2cx| ≤ m√δ`, and `b = −e²/(4c)`.
pub fn parabolic_fast(q: &CountQuery, keep_matrices: bool) -> Result<CountBreakdown> {
    let m = isqrt(q.ell);
    if m * m != q.ell {
        return Err(EislabError::NonSquare(q.ell));
    }
    let (x, y) = (q.z.x, q.z.y);
    let mi = m as i64;
    let mf = m as f64;
    let mut out = Vec::new();
    // c = 0: a = d = ±m.
    let b_max = (mf * y * q.delta.sqrt() * (1.0 + RANGE_MARGIN)).floor() as i64;
    for sign in [1i64, -1] {
        for b in -b_max..=b_max {
            push_if_inside(&mut out, IntegerMatrix2::new(sign * mi, b, 0, sign * mi), q);
        }
    }
    let g = ratio_bound(q.delta) * (1.0 + RANGE_MARGIN);
    let floor = (1.0 - q.delta.sqrt() / 2.0).max(0.0);
    let c_max = (mf * (g - floor * floor).max(0.0).sqrt() / y).floor() as i64;
    let e_width = mf * q.delta.sqrt() * (1.0 + RANGE_MARGIN) + RANGE_MARGIN;
    for c in (-c_max..=c_max).filter(|&c| c != 0) {
        let centre = 2.0 * c as f64 * x;
        let mut e = (centre - e_width).ceil() as i64;
        if e.rem_euclid(2) != 0 {
            e += 1;
        }
        let e_hi = (centre + e_width).floor() as i64;
        while e <= e_hi {
            if (e * e) % (4 * c) == 0 {
                let b = -(e * e) / (4 * c);
                for trace in [2 * mi, -2 * mi] {
                    let a = (trace + e) / 2;
                    let d = (trace - e) / 2;
                    push_if_inside(&mut out, IntegerMatrix2::new(a, b, c, d), q);
                }
            }
            e += 2;
        }
    }
    out.retain(|cm| cm.class == MatrixClass::Parabolic);
    Ok(CountBreakdown::from_list(out, keep_matrices))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LemmaReport {
    pub z: UpperHalfPoint,
    pub l: u64,
    pub delta: f64,
    pub sum: u64,
    pub bound: f64,
    pub ratio: f64,
}

pub const LEMMA_EPSILON: f64 = 0.1;

/// `Σ_{ℓ ≤ L} M_*(z, ℓ, δ)` against `L^ε(L/y + L^{3/2}δ^{1/2} + L²δ)`.
pub fn check_lemma_generic(z: UpperHalfPoint, l: u64, delta: f64) -> Result<LemmaReport> {
    let mut sum = 0;
    for ell in 1..=l {
        sum += enumerate(&CountQuery::new(z, ell, delta)?, false)?.m_star;
    }
    let lf = l as f64;
    let bound = lf.powf(LEMMA_EPSILON) * (lf / z.y + lf.powf(1.5) * delta.sqrt() + lf * lf * delta);
    Ok(LemmaReport { z, l, delta, sum, bound, ratio: sum as f64 / bound })
}

/// `Σ_{ℓ₁, ℓ₂ ≤ L prime} M_u(z, ℓ₁ℓ₂, δ)` against `L^ε(L + L³δ^{1/2}y)`.
pub fn check_lemma_upper(z: UpperHalfPoint, l: u64, delta: f64) -> Result<LemmaReport> {
    let primes = primes_in(2, l);
    let mut sum = 0;
    for &p in &primes {
        for &r in &primes {
            sum += count_upper(&CountQuery::new(z, p * r, delta)?);
        }
    }
    let lf = l as f64;
    let bound = lf.powf(LEMMA_EPSILON) * (lf + lf.powi(3) * delta.sqrt() * z.y);
    Ok(LemmaReport { z, l, delta, sum, bound, ratio: sum as f64 / bound })
}

/// `M_p(z, m², δ)` against `1 + ℓ^{1/2}δ^{1/2}y + ℓ^{3/4}δ^{3/8}y^{-1/2}`; `l` holds `m`.
pub fn check_lemma_parabolic(z: UpperHalfPoint, m: u64, delta: f64) -> Result<LemmaReport> {
    let ell = m * m;
    let sum = parabolic_fast(&CountQuery::new(z, ell, delta)?, false)?.m_p;
    let lf = ell as f64;
    let bound = 1.0 + lf.sqrt() * delta.sqrt() * z.y + lf.powf(0.75) * delta.powf(0.375) / z.y.sqrt();
    Ok(LemmaReport { z, l: m, delta, sum, bound, ratio: sum as f64 / bound })
}

/// `Σ_{γ: det γ = ℓ, u(γz,z) ≤ 1} |k(u(γz, z))|`.
pub fn stieltjes_weighted_count(z: UpperHalfPoint, ell: u64, kernel: impl Fn(f64) -> f64) -> Result<f64> {
    let b = enumerate(&CountQuery::new(z, ell, 1.0)?, true)?;
    let list = b.matrices.unwrap_or_default();
    let mut acc = crate::numeric::CompensatedSum::<f64>::default();
    for m in list {
        acc.add(kernel(m.u).abs());
    }
    Ok(acc.value())
}

/// `∫₀¹ |k(δ)| dM(δ)` for `M(δ) = δ^α`, by the midpoint rule in `δ^α`.
pub fn stieltjes_synthetic(kernel: impl Fn(f64) -> f64, alpha: f64, bins: usize) -> f64 {
    // Substituting v = δ^α turns dM into dv on [0, 1].
    let mut acc = crate::numeric::CompensatedSum::<f64>::default();
    for i in 0..bins {
        let v = (i as f64 + 0.5) / bins as f64;
        acc.add(kernel(v.powf(1.0 / alpha)).abs());
    }
    acc.value() / bins as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modgroup::{apply, point_pair_u};

    fn pt(x: f64, y: f64) -> UpperHalfPoint {
        UpperHalfPoint::new(x, y).unwrap()
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(&IntegerMatrix2::IDENTITY, 1).unwrap(), MatrixClass::Parabolic);
        assert_eq!(classify(&IntegerMatrix2::INVERSION, 1).unwrap(), MatrixClass::Generic);
        assert_eq!(classify(&IntegerMatrix2::new(2, 1, 0, 1), 2).unwrap(), MatrixClass::Upper);
        assert!(matches!(classify(&IntegerMatrix2::new(2, 1, 0, 1), 3), Err(EislabError::DetMismatch { .. })));
    }

    #[test]
    fn u_formula_matches_point_pair_invariant() {
        let z = pt(0.3, 0.8);
        for g in [IntegerMatrix2::new(2, 1, 1, 1), IntegerMatrix2::new(3, -2, 5, 1), IntegerMatrix2::new(1, 4, 0, 7)] {
            let direct = point_pair_u(apply(&g, z), z);
            assert!((u_of(&g, z) - direct).abs() < 1e-12 * direct.max(1.0));
        }
    }

    #[test]
    fn identity_level_example() {
        let b = enumerate(&CountQuery::new(UpperHalfPoint::i(), 1, 0.1).unwrap(), true).unwrap();
        assert_eq!((b.m_star, b.m_u, b.m_p), (2, 0, 2));
        let mats: Vec<IntegerMatrix2> = b.matrices.unwrap().iter().map(|m| m.matrix).collect();
        assert!(mats.contains(&IntegerMatrix2::new(0, -1, 1, 0)) && mats.contains(&IntegerMatrix2::new(0, 1, -1, 0)));
    }

    #[test]
    fn parabolic_example() {
        let q = CountQuery::new(UpperHalfPoint::i(), 4, 0.01).unwrap();
        let b = parabolic_fast(&q, true).unwrap();
        let mats: Vec<IntegerMatrix2> = b.matrices.unwrap().iter().map(|m| m.matrix).collect();
        assert_eq!(mats, vec![IntegerMatrix2::new(-2, 0, 0, -2), IntegerMatrix2::new(2, 0, 0, 2)]);
        assert!(matches!(parabolic_fast(&CountQuery::new(UpperHalfPoint::i(), 5, 0.1).unwrap(), false), Err(EislabError::NonSquare(5))));
    }

    #[test]
    fn feasibility_guard_trips() {
        let q = CountQuery::new(pt(0.0, 1e-3), 1_000_000, 0.9).unwrap();
        assert!(matches!(enumerate(&q, false), Err(EislabError::Feasibility { .. })));
    }

    #[test]
    fn level_one_has_no_upper_class() {
        for &(x, y) in &[(0.0, 1.0), (0.4, 0.95), (-0.3, 3.0)] {
            for &d in &[0.01, 0.3, 0.99] {
                let b = enumerate(&CountQuery::new(pt(x, y), 1, d).unwrap(), false).unwrap();
                assert_eq!(b.m_u, 0);
            }
        }
    }
}
