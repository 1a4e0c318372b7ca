//! Sup-norm scans of `F(z, 1/2+iT)` and `F_a(z, 1/2+iT)` over log-uniform grids.

use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eisenstein::{f_remainder, SpectralPoint};
use crate::error::{EislabError, Result};
use crate::levelq::{cusps, LevelPoint};
use crate::modgroup::UpperHalfPoint;

pub const EPSILON: f64 = 0.05;
pub const DEFAULT_T_LIST: [f64; 4] = [16.0, 32.0, 64.0, 128.0];
pub const DEFAULT_Q_LIST: [u64; 6] = [2, 3, 5, 6, 7, 10];
/// Allowed growth of the level-one max ratio per doubling of `T`.
pub const GROWTH_EXPONENT: f64 = 0.1;
const TOL: f64 = 1e-10;

/// `NYxNX`, optionally `NYxNX@YMIN:YMAX`; the default `y` range is `[T^{-3/4}, T^{3/4}]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub ny: usize,
    pub nx: usize,
    pub y_range: Option<(f64, f64)>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { ny: 24, nx: 13, y_range: None }
    }
}

impl FromStr for GridSpec {
    type Err = EislabError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || EislabError::Domain(format!("grid spec must look like 24x13 or 24x13@0.1:10, got {s:?}"));
        let (dims, range) = match s.split_once('@') {
            Some((d, r)) => (d, Some(r)),
            None => (s, None),
        };
        let (ny, nx) = dims.split_once('x').ok_or_else(bad)?;
        let ny: usize = ny.trim().parse().map_err(|_| bad())?;
        let nx: usize = nx.trim().parse().map_err(|_| bad())?;
        if ny < 2 || nx < 1 {
            return Err(bad());
        }
        let y_range = match range {
            Some(r) => {
                let (lo, hi) = r.split_once(':').ok_or_else(bad)?;
                let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
                let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
                if !(lo > 0.0 && hi > lo) {
                    return Err(bad());
                }
                Some((lo, hi))
            }
            None => None,
        };
        Ok(Self { ny, nx, y_range })
    }
}

impl std::fmt::Display for GridSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.ny, self.nx)?;
        if let Some((lo, hi)) = self.y_range {
            write!(f, "@{lo}:{hi}")?;
        }
        Ok(())
    }
}

impl GridSpec {
    pub fn points(&self, t: f64) -> Vec<UpperHalfPoint> {
        let (lo, hi) = self.y_range.unwrap_or((t.powf(-0.75), t.powf(0.75)));
        let (llo, lhi) = (lo.ln(), hi.ln());
        let mut out = Vec::with_capacity(self.ny * self.nx);
        for i in 0..self.ny {
            let y = (llo + (lhi - llo) * i as f64 / (self.ny - 1) as f64).exp();
            for j in 0..self.nx {
                let x = if self.nx == 1 { 0.0 } else { -0.5 + j as f64 / (self.nx - 1) as f64 };
                out.push(UpperHalfPoint { x, y });
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRow {
    pub t: f64,
    pub q: u64,
    pub v: u64,
    pub x: f64,
    pub y: f64,
    pub abs_f: f64,
    pub envelope: f64,
    pub ratio: f64,
    pub abs_e: f64,
    /// Ratio to `q^{−1/2+ε} T^{3/8+ε}`, for the cusp at infinity with `y ≥ 1/q`.
    pub sharp_ratio: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanReport {
    pub grid: String,
    pub t_list: Vec<f64>,
    pub q_list: Vec<u64>,
    pub epsilon: f64,
    pub version: String,
    pub rows: Vec<ScanRow>,
    #[serde(skip)]
    pub wall_time_s: f64,
}

pub fn level_one_envelope(y: f64, t: f64) -> f64 {
    y.powf(-0.5) + t.powf(0.375)
}

pub fn level_q_envelope(q: u64, y: f64, t: f64) -> f64 {
    (q as f64).powf(-0.5 + EPSILON) * (y.powf(-0.5) + t.powf(0.375 + EPSILON))
}

pub fn level_q_sharp_envelope(q: u64, t: f64) -> f64 {
    (q as f64).powf(-0.5 + EPSILON) * t.powf(0.375 + EPSILON)
}

fn check_t_list(t_list: &[f64], lo: f64, hi: f64) -> Result<()> {
    match t_list.iter().find(|&&t| !(lo..=hi).contains(&t)) {
        Some(t) => Err(EislabError::Domain(format!("scan T = {t} outside [{lo}, {hi}]"))),
        None => Ok(()),
    }
}

pub fn level_one_row(z: UpperHalfPoint, t: f64) -> Result<ScanRow> {
    let s = SpectralPoint::critical(t);
    let f = f_remainder(z, s, TOL)?;
    let main = crate::eisenstein::main_terms(z.y, s)?;
    let envelope = level_one_envelope(z.y, t);
    Ok(ScanRow {
        t,
        q: 1,
        v: 1,
        x: z.x,
        y: z.y,
        abs_f: f.norm(),
        envelope,
        ratio: f.norm() / envelope,
        abs_e: (f + main).norm(),
        sharp_ratio: None,
    })
}

/// One row per cusp of `Γ₀(q)` at `z`.
pub fn level_q_rows(q: u64, z: UpperHalfPoint, t: f64) -> Result<Vec<ScanRow>> {
    let point = LevelPoint::new(q, z, SpectralPoint::critical(t), TOL)?;
    cusps(q)?
        .iter()
        .map(|c| {
            let val = point.cusp_value(c)?;
            let abs_f = val.remainder.norm();
            let envelope = level_q_envelope(q, z.y, t);
            let sharp_ratio = (c.is_infinity() && z.y >= 1.0 / q as f64)
                .then(|| abs_f / level_q_sharp_envelope(q, t));
            Ok(ScanRow {
                t,
                q,
                v: c.v,
                x: z.x,
                y: z.y,
                abs_f,
                envelope,
                ratio: abs_f / envelope,
                abs_e: val.total.norm(),
                sharp_ratio,
            })
        })
        .collect()
}

fn sort_rows(rows: &mut [ScanRow]) {
    rows.sort_by(|a, b| {
        (a.q, a.t, a.v)
            .partial_cmp(&(b.q, b.t, b.v))
            .unwrap()
            .then(a.y.total_cmp(&b.y))
            .then(a.x.total_cmp(&b.x))
    });
}

/// Level-one scan; `y < √3/2` points are evaluated through their reduction.
pub fn supnorm_scan_level1(t_list: &[f64], grid: &GridSpec) -> Result<ScanReport> {
    check_t_list(t_list, 8.0, 512.0)?;
    let start = Instant::now();
    let cells: Vec<(f64, UpperHalfPoint)> =
        t_list.iter().flat_map(|&t| grid.points(t).into_iter().map(move |z| (t, z))).collect();
    let mut rows = cells.into_par_iter().map(|(t, z)| level_one_row(z, t)).collect::<Result<Vec<_>>>()?;
    sort_rows(&mut rows);
    Ok(ScanReport {
        grid: grid.to_string(),
        t_list: t_list.to_vec(),
        q_list: vec![1],
        epsilon: EPSILON,
        version: super::VERSION.to_string(),
        rows,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

pub fn supnorm_scan_levelq(q_list: &[u64], t_list: &[f64], grid: &GridSpec) -> Result<ScanReport> {
    check_t_list(t_list, 1.0, 128.0)?;
    let start = Instant::now();
    let cells: Vec<(u64, f64, UpperHalfPoint)> = q_list
        .iter()
        .flat_map(|&q| t_list.iter().flat_map(move |&t| grid.points(t).into_iter().map(move |z| (q, t, z))))
        .collect();
    let nested = cells.into_par_iter().map(|(q, t, z)| level_q_rows(q, z, t)).collect::<Result<Vec<_>>>()?;
    let mut rows: Vec<ScanRow> = nested.into_iter().flatten().collect();
    sort_rows(&mut rows);
    Ok(ScanReport {
        grid: grid.to_string(),
        t_list: t_list.to_vec(),
        q_list: q_list.to_vec(),
        epsilon: EPSILON,
        version: super::VERSION.to_string(),
        rows,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

fn sig12(v: f64) -> String {
    format!("{v:.11e}")
}

impl ScanReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("T,q,v,x,y,abs_F,envelope,ratio\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                sig12(r.t),
                r.q,
                r.v,
                sig12(r.x),
                sig12(r.y),
                sig12(r.abs_f),
                sig12(r.envelope),
                sig12(r.ratio)
            );
        }
        out
    }

    /// `(q, T, max ratio)` in row order.
    pub fn max_ratios(&self) -> Vec<(u64, f64, f64)> {
        let mut out: Vec<(u64, f64, f64)> = Vec::new();
        for r in &self.rows {
            match out.last_mut() {
                Some(last) if last.0 == r.q && last.1 == r.t => last.2 = last.2.max(r.ratio),
                _ => out.push((r.q, r.t, r.ratio)),
            }
        }
        out
    }

    pub fn max_ratio(&self) -> f64 {
        self.rows.iter().map(|r| r.ratio).fold(0.0, f64::max)
    }

    pub fn max_sharp_ratio(&self) -> f64 {
        self.rows.iter().filter_map(|r| r.sharp_ratio).fold(0.0, f64::max)
    }
}

/// `log(M(T₂)/M(T₁)) / log(T₂/T₁)` for consecutive entries.
pub fn growth_exponents(max_by_t: &[(f64, f64)]) -> Vec<f64> {
    max_by_t.windows(2).map(|w| (w[1].1 / w[0].1).ln() / (w[1].0 / w[0].0).ln()).collect()
}
