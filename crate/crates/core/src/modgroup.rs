//! Integer matrices acting on the upper half-plane, reduction into the
//! standard fundamental domain of SL₂(ℤ), Atkin–Lehner operators and
//! height-maximizing reduction for the group generated by Γ₀(q) and its
//! Atkin–Lehner involutions.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{EislabError, Result};
use crate::numeric::{divisors, ext_gcd, gcd, is_squarefree};

const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UpperHalfPoint {
    pub x: f64,
    pub y: f64,
}

impl UpperHalfPoint {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && y > 0.0) {
            return Err(EislabError::Domain(format!("point must satisfy y > 0, got ({x}, {y})")));
        }
        Ok(Self { x, y })
    }

    pub fn i() -> Self {
        Self { x: 0.0, y: 1.0 }
    }

    pub fn as_complex(self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    fn from_complex(z: Complex64) -> Self {
        Self { x: z.re, y: z.im }
    }

    pub fn in_standard_domain(self, tol: f64) -> bool {
        self.x.abs() <= 0.5 + tol && self.x * self.x + self.y * self.y >= 1.0 - tol
    }
}

/// `(a b; c d)` with integer entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct IntegerMatrix2 {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl IntegerMatrix2 {
    pub const IDENTITY: Self = Self { a: 1, b: 0, c: 0, d: 1 };
    pub const INVERSION: Self = Self { a: 0, b: -1, c: 1, d: 0 };

    pub const fn new(a: i64, b: i64, c: i64, d: i64) -> Self {
        Self { a, b, c, d }
    }

    pub const fn translation(n: i64) -> Self {
        Self { a: 1, b: n, c: 0, d: 1 }
    }

    pub fn det(&self) -> i64 {
        self.a * self.d - self.b * self.c
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    /// Same Möbius map with the common factor of the entries removed and
    /// the sign normalised so that the first nonzero of `(c, d)` is positive.
    pub fn primitive(&self) -> Self {
        let g = gcd(gcd(self.a, self.b), gcd(self.c, self.d)).max(1);
        let sign = if self.c < 0 || (self.c == 0 && self.d < 0) { -1 } else { 1 };
        Self { a: sign * self.a / g, b: sign * self.b / g, c: sign * self.c / g, d: sign * self.d / g }
    }

    /// Bottom-row factor `cz + d`.
    pub fn denominator(&self, z: UpperHalfPoint) -> Complex64 {
        z.as_complex() * self.c as f64 + self.d as f64
    }
}

/// `(az + b)/(cz + d)`; the imaginary part is formed as `det·y/|cz+d|²`.
pub fn apply(g: &IntegerMatrix2, z: UpperHalfPoint) -> UpperHalfPoint {
    let zc = z.as_complex();
    let den = g.denominator(z);
    let w = (zc * g.a as f64 + g.b as f64) / den;
    UpperHalfPoint { x: w.re, y: g.det() as f64 * z.y / den.norm_sqr() }
}

/// `|z − w|² / (Im z · Im w)`.
pub fn point_pair_u(z: UpperHalfPoint, w: UpperHalfPoint) -> f64 {
    let dx = z.x - w.x;
    let dy = z.y - w.y;
    (dx * dx + dy * dy) / (z.y * w.y)
}

/// `−1/(qz)`.
pub fn fricke(q: u64, z: UpperHalfPoint) -> UpperHalfPoint {
    let w = -1.0 / (z.as_complex() * q as f64);
    UpperHalfPoint::from_complex(w)
}

/// Reduce into `{|x| ≤ 1/2, |z| ≥ 1}`; returns `(γz, γ)` with `det γ = 1`.
/// Boundary ties are sent to the `x ≤ 0` side.
pub fn reduce_sl2(z: UpperHalfPoint) -> (UpperHalfPoint, IntegerMatrix2) {
    let mut g = IntegerMatrix2::IDENTITY;
    let mut w = z;
    for _ in 0..100_000 {
        let n = w.x.round();
        if n != 0.0 {
            let t = IntegerMatrix2::translation(-(n as i64));
            g = t.mul(&g);
            w = apply(&t, w);
        }
        if w.x * w.x + w.y * w.y < 1.0 - BOUNDARY_TOL {
            g = IntegerMatrix2::INVERSION.mul(&g);
            w = apply(&IntegerMatrix2::INVERSION, w);
        } else {
            break;
        }
    }
    if w.x > 0.5 - BOUNDARY_TOL {
        let t = IntegerMatrix2::translation(-1);
        g = t.mul(&g);
        w = apply(&t, w);
    }
    if (w.x * w.x + w.y * w.y - 1.0).abs() <= BOUNDARY_TOL && w.x > BOUNDARY_TOL {
        g = IntegerMatrix2::INVERSION.mul(&g);
    }
    if g.c < 0 || (g.c == 0 && g.d < 0) {
        g = IntegerMatrix2::new(-g.a, -g.b, -g.c, -g.d);
    }
    (apply(&g, z), g)
}

/// An Atkin–Lehner matrix `(dα, β; qγ, dδ)` of determinant `d`, `d | q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AtkinLehnerElement {
    pub q: u64,
    pub d: u64,
    pub matrix: IntegerMatrix2,
}

impl AtkinLehnerElement {
    /// The representative with bottom-left entry `q`.
    pub fn new(q: u64, d: u64) -> Result<Self> {
        if !is_squarefree(q) {
            return Err(EislabError::NotSquareFree(q));
        }
        if d == 0 || !q.is_multiple_of(d) {
            return Err(EislabError::Domain(format!("{d} does not divide {q}")));
        }
        Self::with_bottom_row(q, d, 1, 1).ok_or_else(|| EislabError::Domain(format!("no W_{d} for q = {q}")))
    }

    /// Completes the bottom row `(qγ, dδ)` when `gcd(dδ, (q/d)γ) = 1`.
    fn with_bottom_row(q: u64, d: u64, gamma: i64, delta: i64) -> Option<Self> {
        let (qi, di) = (q as i64, d as i64);
        let e = qi / di;
        let (g, s, t) = ext_gcd(di * delta, e * gamma);
        if g.abs() != 1 {
            return None;
        }
        // s·dδ + t·eγ = g  ⇒  α = s/g, β = −t/g gives dαδ − eβγ = 1.
        let (alpha, beta) = (s * g, -t * g);
        let matrix = IntegerMatrix2::new(di * alpha, beta, qi * gamma, di * delta);
        debug_assert_eq!(matrix.det(), di);
        Some(Self { q, d, matrix })
    }

    /// Checks the determinant and the congruence pattern.
    pub fn validate(&self) -> Result<()> {
        let (q, d) = (self.q as i64, self.d as i64);
        let m = &self.matrix;
        if m.det() != d {
            return Err(EislabError::DetMismatch { found: m.det(), expected: d });
        }
        if m.c % q != 0 || m.a % d != 0 || m.d % d != 0 {
            return Err(EislabError::Domain("matrix violates the Atkin-Lehner congruences".into()));
        }
        Ok(())
    }

    pub fn apply(&self, z: UpperHalfPoint) -> UpperHalfPoint {
        apply(&self.matrix, z)
    }
}

/// One step of an Atkin–Lehner reduction: the element applied and the
/// translation that followed it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReductionStep {
    pub element: AtkinLehnerElement,
    pub shift: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct A0qWord {
    pub q: u64,
    pub initial_shift: i64,
    pub steps: Vec<ReductionStep>,
}

impl A0qWord {
    /// The whole word as one primitive integer matrix (acting projectively).
    pub fn matrix(&self) -> IntegerMatrix2 {
        let mut m = IntegerMatrix2::translation(self.initial_shift);
        for s in &self.steps {
            m = IntegerMatrix2::translation(s.shift).mul(&s.element.matrix.mul(&m)).primitive();
        }
        m
    }
}

pub const MAX_REDUCTION_LEVEL: u64 = 210;
const A0Q_ITERATION_LIMIT: usize = 1000;

fn centering_shift(x: f64) -> i64 {
    let mut n = -x.round();
    if x + n > 0.5 - BOUNDARY_TOL {
        n -= 1.0;
    }
    n as i64
}

/// The height-maximizing element over all of A₀(q) at `z`, if one beats the identity.
fn best_lift(q: u64, z: UpperHalfPoint) -> Option<AtkinLehnerElement> {
    let qf = q as f64;
    let mut best: Option<(f64, AtkinLehnerElement)> = None;
    let mut best_ratio = 1.0 - 1e-12;
    for d in divisors(q) {
        let df = d as f64;
        // Height ratio is d / |qγz + dδ|²; it can exceed 1 only if (qγy)² < d.
        let gamma_max = (df.sqrt() / (qf * z.y)).floor() as i64;
        for gamma in -gamma_max..=gamma_max {
            let re_c = qf * gamma as f64 * z.x;
            let im2 = (qf * gamma as f64 * z.y).powi(2);
            let room = df - im2;
            if room <= 0.0 {
                continue;
            }
            let r = room.sqrt();
            let lo = ((-re_c - r) / df).ceil() as i64;
            let hi = ((-re_c + r) / df).floor() as i64;
            for delta in lo..=hi {
                let re = re_c + df * delta as f64;
                let norm = (re * re + im2) / df;
                if norm >= best_ratio {
                    continue;
                }
                if let Some(el) = AtkinLehnerElement::with_bottom_row(q, d, gamma, delta) {
                    best_ratio = norm;
                    best = Some((norm, el));
                }
            }
        }
    }
    best.map(|(_, el)| el)
}

/// Iterate height-maximizing Atkin–Lehner steps and translations until no
/// element of A₀(q) raises `Im z`. The result has `Im z ≥ √3/(2q)`.
pub fn reduce_a0q(q: u64, z: UpperHalfPoint) -> Result<(UpperHalfPoint, A0qWord)> {
    if q == 0 || !is_squarefree(q) {
        return Err(EislabError::NotSquareFree(q));
    }
    if q > MAX_REDUCTION_LEVEL {
        return Err(EislabError::Domain(format!("level {q} exceeds {MAX_REDUCTION_LEVEL}")));
    }
    let initial_shift = centering_shift(z.x);
    let mut w = apply(&IntegerMatrix2::translation(initial_shift), z);
    let mut word = A0qWord { q, initial_shift, steps: Vec::new() };
    for _ in 0..A0Q_ITERATION_LIMIT {
        match best_lift(q, w) {
            None => return Ok((w, word)),
            Some(element) => {
                let moved = element.apply(w);
                let shift = centering_shift(moved.x);
                w = apply(&IntegerMatrix2::translation(shift), moved);
                word.steps.push(ReductionStep { element, shift });
            }
        }
    }
    Err(EislabError::IterationLimit("reduce_a0q"))
}

/// `√3/(2q)`, the minimal height of a reduced point.
pub fn height_floor(q: u64) -> f64 {
    3f64.sqrt() / (2.0 * q as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::{HashSet, VecDeque};

    fn pt(x: f64, y: f64) -> UpperHalfPoint {
        UpperHalfPoint::new(x, y).unwrap()
    }

    fn close(a: UpperHalfPoint, b: UpperHalfPoint, tol: f64) -> bool {
        (a.x - b.x).abs() <= tol && (a.y - b.y).abs() <= tol
    }

    fn random_sl2(rng: &mut ChaCha8Rng) -> IntegerMatrix2 {
        loop {
            let c: i64 = rng.gen_range(-9..=9);
            let d: i64 = rng.gen_range(-9..=9);
            if gcd(c, d) != 1 {
                continue;
            }
            let (_, s, t) = ext_gcd(d, c);
            // s·d + t·c = 1 with a = s, b = −t.
            let m = IntegerMatrix2::new(s, -t, c, d);
            if m.det() == 1 {
                return m;
            }
            let m = IntegerMatrix2::new(-s, t, -c, -d);
            if m.det() == 1 {
                return m;
            }
        }
    }

    #[test]
    fn apply_examples() {
        let i = UpperHalfPoint::i();
        assert_eq!(apply(&IntegerMatrix2::IDENTITY, i), i);
        assert!(close(apply(&IntegerMatrix2::INVERSION, i), i, 1e-15));
        assert!(close(apply(&IntegerMatrix2::translation(1), i), pt(1.0, 1.0), 1e-15));
    }

    #[test]
    fn height_formula_for_random_integer_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let m = IntegerMatrix2::new(rng.gen_range(-20..=20), rng.gen_range(-20..=20), rng.gen_range(-20..=20), rng.gen_range(-20..=20));
            if m.det() < 1 {
                continue;
            }
            let z = pt(rng.gen_range(-3.0..3.0), rng.gen_range(0.05..4.0));
            let w = apply(&m, z);
            let lhs = w.y * m.denominator(z).norm_sqr();
            let rhs = m.det() as f64 * z.y;
            assert!((lhs - rhs).abs() <= 1e-12 * rhs);
        }
    }

    #[test]
    fn point_pair_examples_and_invariance() {
        let i = UpperHalfPoint::i();
        assert_eq!(point_pair_u(i, i), 0.0);
        assert!((point_pair_u(i, pt(0.0, 2.0)) - 0.5).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let g = random_sl2(&mut rng);
            let z = pt(rng.gen_range(-2.0..2.0), rng.gen_range(0.2..3.0));
            let w = pt(rng.gen_range(-2.0..2.0), rng.gen_range(0.2..3.0));
            let before = point_pair_u(z, w);
            let after = point_pair_u(apply(&g, z), apply(&g, w));
            assert!((before - after).abs() <= 1e-12 * before.max(1.0));
            assert!((point_pair_u(w, z) - before).abs() <= 1e-15 * before.max(1.0));
        }
    }

    #[test]
    fn point_pair_invariant_under_rational_det_one() {
        // (a/n, b/n; c/n, d/n) with ad − bc = n²; acts like the integer matrix.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let m = IntegerMatrix2::new(rng.gen_range(-12..=12), rng.gen_range(-12..=12), rng.gen_range(-12..=12), rng.gen_range(-12..=12));
            if m.det() < 1 {
                continue;
            }
            let z = pt(rng.gen_range(-2.0..2.0), rng.gen_range(0.2..3.0));
            let w = pt(rng.gen_range(-2.0..2.0), rng.gen_range(0.2..3.0));
            let before = point_pair_u(z, w);
            let after = point_pair_u(apply(&m, z), apply(&m, w));
            assert!((before - after).abs() <= 1e-11 * before.max(1.0));
        }
    }

    #[test]
    fn reduce_sl2_examples() {
        let (w, g) = reduce_sl2(UpperHalfPoint::i());
        assert_eq!(g, IntegerMatrix2::IDENTITY);
        assert!(close(w, UpperHalfPoint::i(), 1e-15));
        let (w, g) = reduce_sl2(pt(0.0, 0.5));
        assert!(close(w, pt(0.0, 2.0), 1e-14));
        assert_eq!(g.primitive(), IntegerMatrix2::new(0, -1, 1, 0).primitive());
    }

    /// Breadth-first search over words in S, T, T⁻¹ (length ≤ 30, bounded entries).
    fn brute_force_max_height(z: UpperHalfPoint) -> (f64, Vec<UpperHalfPoint>) {
        let gens = [IntegerMatrix2::INVERSION, IntegerMatrix2::translation(1), IntegerMatrix2::translation(-1)];
        let mut seen = HashSet::new();
        let mut queue = VecDeque::new();
        queue.push_back((IntegerMatrix2::IDENTITY, 0));
        seen.insert(IntegerMatrix2::IDENTITY.primitive());
        let mut best = 0.0_f64;
        let mut in_domain = Vec::new();
        while let Some((m, len)) = queue.pop_front() {
            let w = apply(&m, z);
            best = best.max(w.y);
            if w.in_standard_domain(1e-12) {
                in_domain.push(w);
            }
            if len == 30 {
                continue;
            }
            for g in &gens {
                let n = g.mul(&m);
                if [n.a, n.b, n.c, n.d].iter().any(|e| e.abs() > 40) {
                    continue;
                }
                if seen.insert(n.primitive()) {
                    queue.push_back((n, len + 1));
                }
            }
        }
        (best, in_domain)
    }

    #[test]
    fn reduce_sl2_matches_word_search() {
        for &(x, y) in &[(0.7, 0.1), (0.31, 0.07), (-2.4, 0.33), (5.5, 0.9)] {
            let z = pt(x, y);
            let (w, g) = reduce_sl2(z);
            let (best, hits) = brute_force_max_height(z);
            assert!((w.y - best).abs() < 1e-12, "{x},{y}: {} vs {best}", w.y);
            assert!(hits.iter().any(|h| close(*h, w, 1e-10)));
            assert_eq!(g.det(), 1);
            assert!(w.in_standard_domain(1e-12));
        }
    }

    #[test]
    fn reduce_sl2_output_in_domain_and_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let z = pt(rng.gen_range(-50.0..50.0), 10f64.powf(rng.gen_range(-4.0..1.0)));
            let (w, g) = reduce_sl2(z);
            assert_eq!(g.det(), 1);
            assert!(w.in_standard_domain(1e-12), "{z:?} -> {w:?}");
            assert_eq!(apply(&g, z), w);
            assert!(w.x <= 0.5 - 1e-12 || w.x <= 0.0);
        }
    }

    #[test]
    fn reduce_sl2_boundary_ties_go_left() {
        let (w, _) = reduce_sl2(pt(0.5, 2.0));
        assert!((w.x + 0.5).abs() < 1e-15);
        let th = 1.2_f64;
        let (w, _) = reduce_sl2(pt(th.cos(), th.sin()));
        assert!(w.x <= 0.0);
    }

    #[test]
    fn fricke_examples() {
        assert!(close(fricke(1, UpperHalfPoint::i()), UpperHalfPoint::i(), 1e-15));
        assert!(close(fricke(4, pt(0.0, 0.5)), pt(0.0, 0.5), 1e-15));
        let z = pt(0.3, 0.7);
        for q in [1, 2, 6, 30] {
            assert!(close(fricke(q, fricke(q, z)), z, 1e-14));
        }
    }

    #[test]
    fn atkin_lehner_representatives() {
        for q in [1u64, 2, 6, 30, 210] {
            for d in divisors(q) {
                let w = AtkinLehnerElement::new(q, d).unwrap();
                w.validate().unwrap();
            }
        }
        assert!(matches!(AtkinLehnerElement::new(12, 2), Err(EislabError::NotSquareFree(12))));
        let bad = AtkinLehnerElement { q: 6, d: 2, matrix: IntegerMatrix2::new(2, 1, 6, 2) };
        assert_eq!(bad.validate(), Err(EislabError::DetMismatch { found: -2, expected: 2 }));
        let bad = AtkinLehnerElement { q: 6, d: 2, matrix: IntegerMatrix2::new(1, 0, 6, 2) };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn reduce_a0q_examples() {
        let (w, word) = reduce_a0q(1, UpperHalfPoint::i()).unwrap();
        assert!(close(w, UpperHalfPoint::i(), 1e-15));
        assert!(word.steps.is_empty());
        assert!(reduce_a0q(4, UpperHalfPoint::i()).is_err());
    }

    #[test]
    fn reduce_a0q_height_floor_and_idempotence() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for &q in &[2u64, 3, 5, 6, 7, 10] {
            for _ in 0..500 {
                let z = pt(rng.gen_range(-3.0..3.0), 10f64.powf(rng.gen_range(-3.0..0.5)));
                let (w, word) = reduce_a0q(q, z).unwrap();
                assert!(w.y >= height_floor(q) * (1.0 - 1e-12), "q={q} z={z:?} -> {w:?}");
                let (again, word2) = reduce_a0q(q, w).unwrap();
                assert!(word2.steps.is_empty() && close(again, w, 1e-12));
                let m = word.matrix();
                let direct = apply(&m, z);
                assert!((direct.y - w.y).abs() <= 1e-9 * w.y);
            }
        }
    }
}
