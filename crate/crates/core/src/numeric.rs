//! Numerical plumbing: compensated summation, adaptive Gauss–Kronrod
//! quadrature and the small amount of elementary number theory the rest
//! of the crate needs.

use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

/// Scalar types that can be summed and integrated.
pub trait Scalar:
    Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn magnitude(self) -> f64;
}

impl Scalar for f64 {
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

/// Kahan–Babuška (Neumaier) compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum<T: Scalar> {
    sum: T,
    carry: T,
}

impl CompensatedSum<f64> {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl CompensatedSum<Complex64> {
    pub fn add(&mut self, x: Complex64) {
        let mut re = CompensatedSum { sum: self.sum.re, carry: self.carry.re };
        let mut im = CompensatedSum { sum: self.sum.im, carry: self.carry.im };
        re.add(x.re);
        im.add(x.im);
        self.sum = Complex64::new(re.sum, im.sum);
        self.carry = Complex64::new(re.carry, im.carry);
    }

    pub fn value(&self) -> Complex64 {
        self.sum + self.carry
    }
}

pub fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = CompensatedSum::<f64>::default();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

pub fn kahan_sum_complex(values: impl IntoIterator<Item = Complex64>) -> Complex64 {
    let mut acc = CompensatedSum::<Complex64>::default();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

// ---------------------------------------------------------------------------
// Adaptive Gauss–Kronrod (7/15) quadrature
// ---------------------------------------------------------------------------

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: f64,
    pub evaluations: usize,
}

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
    /// Number of equal panels the interval is split into before refinement.
    pub initial_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-13, rel_tol: 1e-12, max_intervals: 4000, initial_panels: 1 }
    }
}

fn gk15<T: Scalar>(f: &impl Fn(f64) -> T, a: f64, b: f64) -> (T, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod = kronrod + pair * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + pair * WG[j / 2];
        }
    }
    let k = kronrod * half;
    let g = gauss * half;
    (k, (k - g).magnitude())
}

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive Gauss–Kronrod quadrature of `f` over `[a, b]`.
///
/// The panel with the largest error estimate is bisected until the summed
/// estimate meets `max(abs_tol, rel_tol * |value|)`.
pub fn integrate<T: Scalar>(f: impl Fn(f64) -> T, a: f64, b: f64, opts: QuadOptions) -> QuadResult<T> {
    if a == b {
        return QuadResult { value: T::default(), error: 0.0, evaluations: 0 };
    }
    let panels = opts.initial_panels.max(1);
    let width = (b - a) / panels as f64;
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    let mut total = T::default();
    let mut total_err = 0.0;
    for i in 0..panels {
        let lo = a + width * i as f64;
        let hi = if i + 1 == panels { b } else { a + width * (i + 1) as f64 };
        let (value, error) = gk15(&f, lo, hi);
        evaluations += 15;
        total = total + value;
        total_err += error;
        heap.push(Panel { a: lo, b: hi, value, error });
    }
    let mut since_resum = 0;
    loop {
        if since_resum >= 256 {
            total = heap.iter().fold(T::default(), |acc, p| acc + p.value);
            total_err = heap.iter().map(|p| p.error).sum();
            since_resum = 0;
        }
        let target = opts.abs_tol.max(opts.rel_tol * total.magnitude());
        if total_err <= target || heap.len() >= opts.max_intervals {
            total_err = heap.iter().map(|p| p.error).sum();
            // Sum in a fixed order so results do not depend on heap layout.
            let mut items: Vec<_> = heap.into_vec();
            items.sort_by(|p, q| p.a.total_cmp(&q.a));
            let value = items.iter().fold(T::default(), |acc, p| acc + p.value);
            return QuadResult { value, error: total_err, evaluations };
        }
        let worst = heap.pop().expect("non-empty heap");
        let mid = 0.5 * (worst.a + worst.b);
        since_resum += 1;
        if mid <= worst.a || mid >= worst.b {
            total_err -= worst.error;
            heap.push(Panel { error: 0.0, ..worst });
            continue;
        }
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        evaluations += 30;
        total = total + (v1 + v2 - worst.value);
        total_err += e1 + e2 - worst.error;
        heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2 });
    }
}

/// Composite 15-point Kronrod rule on `panels` equal panels. The node set
/// depends only on `(a, b, panels)`, so the result is linear in `f`.
pub fn integrate_fixed<T: Scalar>(f: impl Fn(f64) -> T, a: f64, b: f64, panels: usize) -> T {
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    let mut total = T::default();
    for i in 0..panels {
        let lo = a + width * i as f64;
        let hi = if i + 1 == panels { b } else { lo + width };
        total = total + gk15(&f, lo, hi).0;
    }
    total
}

// ---------------------------------------------------------------------------
// Tabulated functions
// ---------------------------------------------------------------------------

/// Samples `f(start + i·step)` with six-point Lagrange interpolation.
#[derive(Debug, Clone)]
pub struct UniformTable {
    pub start: f64,
    pub step: f64,
    pub values: Vec<f64>,
    pub reflect: Reflect,
}

/// How the stencil continues below `start`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reflect {
    Clamp,
    Even,
    Odd,
}

impl UniformTable {
    pub fn end(&self) -> f64 {
        self.start + self.step * (self.values.len() - 1) as f64
    }

    fn node(&self, i: i64) -> f64 {
        let n = self.values.len() as i64;
        let v = self.values[i.abs().min(n - 1) as usize];
        if i < 0 && self.reflect == Reflect::Odd {
            -v
        } else {
            v
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.values.len() as i64;
        let pos = (x - self.start) / self.step;
        let mut base = (pos.floor() as i64 - 2).min(n - 6);
        if self.reflect == Reflect::Clamp {
            base = base.max(0);
        }
        let t = pos - base as f64;
        let mut acc = 0.0;
        for j in 0..6i64 {
            let mut w = 1.0;
            for m in 0..6i64 {
                if m != j {
                    w *= (t - m as f64) / (j - m) as f64;
                }
            }
            acc += w * self.node(base + j);
        }
        acc
    }
}

// ---------------------------------------------------------------------------
// Elementary number theory
// ---------------------------------------------------------------------------

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a as i64
}

/// Extended Euclid: returns `(g, x, y)` with `a*x + b*y = g = gcd(a, b) >= 0`.
pub fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let (mut old_r, mut r) = (a, b);
    let (mut old_s, mut s) = (1i64, 0i64);
    let (mut old_t, mut t) = (0i64, 1i64);
    while r != 0 {
        let q = old_r.div_euclid(r);
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
        (old_t, t) = (t, old_t - q * t);
    }
    if old_r < 0 {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

/// Prime factorization by trial division, primes in increasing order.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut k = 0;
            while n.is_multiple_of(p) {
                n /= p;
                k += 1;
            }
            out.push((p, k));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_squarefree(n: u64) -> bool {
    n >= 1 && factorize(n).iter().all(|&(_, k)| k == 1)
}

pub fn mobius(n: u64) -> i64 {
    let f = factorize(n);
    if f.iter().any(|&(_, k)| k > 1) {
        0
    } else if f.len().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Positive divisors in increasing order.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut out = vec![1u64];
    for (p, k) in factorize(n) {
        let len = out.len();
        let mut pk = 1;
        for _ in 0..k {
            pk *= p;
            for i in 0..len {
                out.push(out[i] * pk);
            }
        }
    }
    out.sort_unstable();
    out
}

pub fn divisor_count(n: u64) -> u64 {
    factorize(n).iter().map(|&(_, k)| k as u64 + 1).product()
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n).iter().fold(n, |acc, &(p, _)| acc / p * (p - 1))
}

/// Exact integer square root.
pub fn isqrt(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

pub fn is_square(n: u64) -> bool {
    let r = isqrt(n);
    r * r == n
}

/// Primes in `[lo, hi]` by a segmented sieve of Eratosthenes.
pub fn primes_in(lo: u64, hi: u64) -> Vec<u64> {
    if hi < 2 || hi < lo {
        return Vec::new();
    }
    let lo = lo.max(2);
    let root = isqrt(hi);
    let mut small = vec![true; (root + 1) as usize];
    let mut base = Vec::new();
    for i in 2..=root as usize {
        if small[i] {
            base.push(i as u64);
            let mut j = i * i;
            while j <= root as usize {
                small[j] = false;
                j += i;
            }
        }
    }
    let mut seg = vec![true; (hi - lo + 1) as usize];
    for &p in &base {
        let start = (p * p).max(lo.div_ceil(p) * p);
        let mut m = start;
        while m <= hi {
            seg[(m - lo) as usize] = false;
            m += p;
        }
    }
    seg.iter()
        .enumerate()
        .filter(|(_, &is_p)| is_p)
        .map(|(i, _)| lo + i as u64)
        .collect()
}
