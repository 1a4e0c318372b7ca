//! `eislab` command-line front end.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::{json, Value};

use eislab::amplifier::{amplifier_rows, default_window};
use eislab::counting::{enumerate, parabolic_fast, CountQuery};
use eislab::eisenstein::{eisenstein_reduced, SpectralPoint, DEFAULT_TOL};
use eislab::harness::acceptance::{run_all, run_criterion};
use eislab::harness::baselines::Baselines;
use eislab::harness::pretrace::pretrace_check;
use eislab::harness::scan::{supnorm_scan_level1, supnorm_scan_levelq, GridSpec, DEFAULT_T_LIST};
use eislab::kernel::build_test_kernel;
use eislab::levelq::{Cusp, LevelPoint};
use eislab::modgroup::UpperHalfPoint;

#[derive(Parser)]
#[command(name = "eislab", version, about = "Numerical laboratory for Eisenstein series sup-norms")]
struct Cli {
    /// TOML file with `grid` and `baselines` keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Emit a single JSON object instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Point {
    #[arg(long, allow_hyphen_values = true)]
    x: f64,
    #[arg(long)]
    y: f64,
}

#[derive(Subcommand)]
enum Command {
    /// One value of E(z, s) or E_a(z, s).
    Eval {
        #[arg(long, default_value_t = 1)]
        q: u64,
        /// Cusp 1/v of Γ₀(q); defaults to the cusp at infinity.
        #[arg(long = "cusp-v")]
        cusp_v: Option<u64>,
        #[command(flatten)]
        point: Point,
        #[arg(long = "T", allow_hyphen_values = true)]
        t: f64,
        #[arg(long, default_value_t = 0.5)]
        sigma: f64,
    },
    /// Sup-norm scan written as CSV.
    Scan {
        #[arg(long, conflicts_with = "q")]
        level1: bool,
        #[arg(long, value_delimiter = ',')]
        q: Option<Vec<u64>>,
        #[arg(long = "T", value_delimiter = ',')]
        t: Option<Vec<f64>>,
        #[arg(long)]
        grid: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Matrices of determinant ell within point-pair distance delta.
    Count {
        #[command(flatten)]
        point: Point,
        #[arg(long)]
        ell: u64,
        #[arg(long)]
        delta: f64,
        #[arg(long = "fast-parabolic")]
        fast_parabolic: bool,
        #[arg(long)]
        list: bool,
    },
    /// A_N and B_N against the main term 2N w(1).
    Amplifier {
        #[arg(long = "N", value_delimiter = ',', required = true)]
        n: Vec<u64>,
        #[arg(long = "T")]
        t: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        offset: f64,
    },
    /// Spectral and geometric sides of the amplified pre-trace inequality.
    Pretrace {
        #[command(flatten)]
        point: Point,
        #[arg(long = "T")]
        t: f64,
        #[arg(long = "N")]
        n: u64,
    },
    /// Build the Gaussian test kernel and report its properties.
    Kernel {
        #[arg(long = "T")]
        t: f64,
        /// Also run the kernel acceptance criterion.
        #[arg(long)]
        selftest: bool,
    },
    /// The full acceptance battery.
    Selftest {
        /// Run only these criteria.
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<u8>>,
        /// Write the JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Write the measured constants as a baseline file.
        #[arg(long = "emit-baselines")]
        emit_baselines: Option<PathBuf>,
    },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Config {
    grid: Option<String>,
    baselines: Option<PathBuf>,
}

fn load_config(path: Option<&Path>) -> Result<Config> {
    let Some(path) = path else { return Ok(Config::default()) };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut cfg: Config = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if let (Some(b), Some(dir)) = (&cfg.baselines, path.parent()) {
        if b.is_relative() {
            cfg.baselines = Some(dir.join(b));
        }
    }
    Ok(cfg)
}

fn init_threads() -> Result<()> {
    let Ok(raw) = std::env::var("EISLAB_THREADS") else { return Ok(()) };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).with_context(|| {
        format!("EISLAB_THREADS must be a positive integer, got {raw:?}")
    })?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn envelope(inputs: Value, outputs: Value, error_budget: Value) -> Value {
    json!({
        "inputs": inputs,
        "outputs": outputs,
        "error_budget": error_budget,
        "versions": { "eislab": eislab::harness::VERSION },
    })
}

fn complex(c: num_complex::Complex64) -> Value {
    json!({ "re": c.re, "im": c.im, "abs": c.norm() })
}

fn point(p: &Point) -> Result<UpperHalfPoint> {
    Ok(UpperHalfPoint::new(p.x, p.y)?)
}

fn emit(json_mode: bool, value: Value, text: impl FnOnce() -> String) {
    let out = if json_mode { serde_json::to_string_pretty(&value).expect("json") + "\n" } else { text() };
    let _ = std::io::stdout().lock().write_all(out.as_bytes());
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run() -> Result<bool> {
    let cli = Cli::parse();
    init_threads()?;
    let config = load_config(cli.config.as_deref())?;
    let json_mode = cli.json;
    match cli.command {
        Command::Eval { q, cusp_v, point: p, t, sigma } => {
            let z = point(&p)?;
            let s = SpectralPoint::new(sigma, t);
            let inputs = json!({ "q": q, "cusp_v": cusp_v.unwrap_or(q), "x": z.x, "y": z.y, "T": t, "sigma": sigma });
            if q == 1 {
                let v = eisenstein_reduced(z, s, DEFAULT_TOL)?;
                let value = envelope(
                    inputs,
                    json!({ "E": complex(v.total), "main_terms": complex(v.main_terms), "F": complex(v.remainder), "n_max": v.n_max }),
                    json!({ "tolerance": DEFAULT_TOL, "tail_estimate": v.tail_estimate }),
                );
                emit(json_mode, value, || {
                    format!("E = {} {:+}i\n|E| = {}\n|F| = {}\nterms = {}\n", v.total.re, v.total.im, v.total.norm(), v.remainder.norm(), v.n_max)
                });
            } else {
                let cusp = Cusp::new(q, cusp_v.unwrap_or(q))?;
                let v = LevelPoint::new(q, z, s, DEFAULT_TOL)?.cusp_value(&cusp)?;
                let value = envelope(
                    inputs,
                    json!({ "E": complex(v.total), "delta": v.delta_a, "phi": complex(v.phi_a), "F": complex(v.remainder) }),
                    json!({ "tolerance": DEFAULT_TOL }),
                );
                emit(json_mode, value, || {
                    format!("E_a = {} {:+}i\n|E_a| = {}\n|F_a| = {}\n", v.total.re, v.total.im, v.total.norm(), v.remainder.norm())
                });
            }
            Ok(true)
        }
        Command::Scan { level1, q, t, grid, out } => {
            let grid: GridSpec = grid.or(config.grid).as_deref().unwrap_or("24x13").parse()?;
            let t_list = t.unwrap_or_else(|| DEFAULT_T_LIST.to_vec());
            let report = match (level1, q) {
                (true, _) | (false, None) => supnorm_scan_level1(&t_list, &grid)?,
                (false, Some(qs)) => supnorm_scan_levelq(&qs, &t_list, &grid)?,
            };
            let csv = report.to_csv();
            if let Some(path) = &out {
                std::fs::write(path, &csv).with_context(|| format!("writing {}", path.display()))?;
            }
            let maxima: Vec<Value> =
                report.max_ratios().iter().map(|(q, t, m)| json!({ "q": q, "T": t, "max_ratio": m })).collect();
            let value = envelope(
                json!({ "grid": report.grid, "T": report.t_list, "q": report.q_list, "epsilon": report.epsilon }),
                json!({ "rows": report.rows.len(), "max_ratio": report.max_ratio(), "max_sharp_ratio": report.max_sharp_ratio(), "by_level_and_T": maxima, "out": out }),
                json!({ "tolerance": 1e-10 }),
            );
            if json_mode {
                emit(true, value, String::new);
            } else if out.is_none() {
                emit(false, Value::Null, || csv);
            } else {
                eprintln!("{} rows, max ratio {:.6e}", report.rows.len(), report.max_ratio());
            }
            Ok(true)
        }
        Command::Count { point: p, ell, delta, fast_parabolic, list } => {
            let q = CountQuery::new(point(&p)?, ell, delta)?;
            let b = if fast_parabolic { parabolic_fast(&q, list)? } else { enumerate(&q, list)? };
            let value = envelope(
                json!({ "x": p.x, "y": p.y, "ell": ell, "delta": delta, "fast_parabolic": fast_parabolic }),
                json!({ "m_star": b.m_star, "m_u": b.m_u, "m_p": b.m_p, "total": b.total(), "matrices": b.matrices }),
                json!({ "exact": true }),
            );
            emit(json_mode, value, || {
                let mut s = format!("m_star = {}\nm_u = {}\nm_p = {}\ntotal = {}\n", b.m_star, b.m_u, b.m_p, b.total());
                for m in b.matrices.iter().flatten() {
                    let g = &m.matrix;
                    s.push_str(&format!("({} {}; {} {})  u = {:.12e}  {:?}\n", g.a, g.b, g.c, g.d, m.u, m.class));
                }
                s
            });
            Ok(true)
        }
        Command::Amplifier { n, t, offset } => {
            let report = amplifier_rows(&n, t, offset, &default_window())?;
            let value = envelope(
                json!({ "N": n, "T": t, "offset": offset }),
                serde_json::to_value(&report)?,
                json!({ "summation": "compensated" }),
            );
            emit(json_mode, value, || {
                let mut s = String::from("N,A,B,main,ratio\n");
                for r in &report.rows {
                    s.push_str(&format!("{},{:.11e},{:.11e},{:.11e},{:.11e}\n", r.n, r.a, r.b, r.main, r.ratio));
                }
                s
            });
            Ok(true)
        }
        Command::Pretrace { point: p, t, n } => {
            let r = pretrace_check(point(&p)?, t, n)?;
            let value = envelope(
                json!({ "x": p.x, "y": p.y, "T": t, "N": n }),
                json!({ "spectral_lhs": r.spectral_lhs, "geometric_rhs": r.geometric_rhs, "margin": r.margin, "matrices": r.matrices }),
                json!({ "truncation_budget": r.truncation_budget, "window_tail": r.window_tail }),
            );
            emit(json_mode, value, || {
                format!(
                    "spectral = {:.12e}\ngeometric = {:.12e}\nmargin = {:.12e}\nbudget = {:.3e}\n",
                    r.spectral_lhs, r.geometric_rhs, r.margin, r.truncation_budget
                )
            });
            Ok(true)
        }
        Command::Kernel { t, selftest } => {
            let pair = build_test_kernel(t)?;
            let props = pair.properties.expect("test kernel carries properties");
            let criterion = if selftest {
                let baselines = Baselines::load(config.baselines.as_deref())?;
                Some(run_criterion(9, &baselines)?)
            } else {
                None
            };
            let value = envelope(
                json!({ "T": t }),
                json!({ "u_max": pair.u_max, "nodes": pair.table_len(), "k0": pair.k(0.0), "properties": props, "selftest": criterion.as_ref().map(|c| c.summary()) }),
                json!({ "tail_bound": pair.tail_bound }),
            );
            emit(json_mode, value, || {
                let mut s = format!(
                    "u_max = {:.6e}\nnodes = {}\nk(0) = {:.12e}\ntail = {:.3e}\nmax|k|/T = {:.6}\nmax|k|u^(1/4)/T^(1/2) = {:.6}\nmin h on [T,T+1] = {:.6}\n",
                    pair.u_max,
                    pair.table_len(),
                    pair.k(0.0),
                    pair.tail_bound,
                    props.k_sup_ratio,
                    props.k_decay_ratio,
                    props.h_min_window
                );
                if let Some(c) = &criterion {
                    s.push_str(&c.summary());
                    s.push('\n');
                }
                s
            });
            Ok(criterion.is_none_or(|c| c.pass))
        }
        Command::Selftest { only, report, emit_baselines } => {
            let baselines = Baselines::load(config.baselines.as_deref())?;
            let full = match only {
                None => run_all(&baselines, |c| eprintln!("{}", c.line()))?,
                Some(ids) => {
                    if let Some(bad) = ids.iter().find(|&&i| !(1..=12).contains(&i)) {
                        bail!("no acceptance criterion {bad}");
                    }
                    let criteria = ids
                        .iter()
                        .map(|&id| {
                            let c = run_criterion(id, &baselines)?;
                            eprintln!("{}", c.line());
                            Ok(c)
                        })
                        .collect::<Result<Vec<_>>>()?;
                    eislab::harness::acceptance::AcceptanceReport {
                        version: eislab::harness::VERSION.to_string(),
                        criteria,
                    }
                }
            };
            if let Some(path) = &report {
                std::fs::write(path, full.to_json())?;
            }
            if let Some(path) = &emit_baselines {
                let text = toml::to_string(&full.measured_baselines())?;
                std::fs::write(path, text)?;
            }
            let value = serde_json::to_value(&full)?;
            emit(json_mode, envelope(json!({ "only": value_ids(&full) }), value, json!({})), || {
                full.criteria.iter().map(|c| c.summary() + "\n").collect()
            });
            Ok(full.criteria.iter().all(|c| c.pass))
        }
    }
}

fn value_ids(r: &eislab::harness::acceptance::AcceptanceReport) -> Vec<u8> {
    r.criteria.iter().map(|c| c.id).collect()
}
