//! `opl`: exact, combinatorial and Monte Carlo study of the correlation
//! between the directional connectivity events `a -> s` and `s -> b` in a
//! randomly oriented random graph.
//!
//! Every subcommand prints a human-readable result on stdout (kept
//! deterministic for fixed inputs; timings go to stderr) and appends one
//! self-describing JSON record to the run log.

mod cache;
mod rational;
mod records;

use clap::{CommandFactory, Parser, Subcommand};
use opl_core::{
    cov_polynomial_from_counts, find_c_roots, find_critical_in_poly, main_formula, mc_estimate,
    mc_scan, quartic_discriminant, truncated_series, CutOff, Params, RngStream, DEEP_BUDGET,
    DEFAULT_BUDGET, DEFAULT_SCAN_GRID,
};
use rational::{parse_grid, parse_rational, rational_text};
use records::{append_record, run_record};
use serde_json::{json, Value};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "opl",
    version,
    about = "Correlation of directional connectivity in randomly oriented random graphs",
    after_help = "Exit codes: 0 success, 2 parameter error, 3 budget refusal."
)]
struct Cli {
    /// Worker threads for enumeration and sampling (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Run-record log, one JSON object per line
    #[arg(long, global = true, default_value = "opl-runs.jsonl")]
    out: PathBuf,

    /// Census cache directory; the OPL_CACHE environment variable overrides
    /// this flag
    #[arg(long, global = true)]
    cache: Option<PathBuf>,

    /// Raise the enumeration budget from 3^15 to 3^21 (unlocks n = 7; a
    /// long parallel run)
    #[arg(long, global = true)]
    deep: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact event probabilities and covariance at one (n, p)
    Exact {
        #[arg(long)]
        n: usize,
        /// Edge probability, as `a/b` or a decimal
        #[arg(long)]
        p: String,
    },
    /// Exact covariance polynomial coefficients for one n
    Poly {
        #[arg(long)]
        n: usize,
    },
    /// Critical probabilities: exact sign-change brackets for one n, or the
    /// scaled constants with --asymptotic
    Roots {
        #[arg(long, required_unless_present = "asymptotic")]
        n: Option<usize>,
        /// Report the scaled critical constants instead of exact brackets
        #[arg(long)]
        asymptotic: bool,
        #[arg(long, default_value = "0")]
        lo: String,
        #[arg(long, default_value = "1")]
        hi: String,
        /// Bracket width target for bisection refinement
        #[arg(long, default_value = "1/100000")]
        tol: String,
    },
    /// Pair-class breakdown of the truncated-path covariance
    Pairs {
        #[arg(long)]
        n: usize,
        /// Path length cut-off
        #[arg(long = "L")]
        l: usize,
        #[arg(long)]
        p: String,
        /// Also write the breakdown as CSV to this path
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Closed-form sparse-regime covariance at (c, n)
    Asym {
        /// Scaled parameter, p = 2c/n; valid for 0 <= c < 1
        #[arg(long)]
        c: f64,
        #[arg(long)]
        n: usize,
        /// Also print the truncated contribution series with this many terms
        #[arg(long)]
        series: Option<usize>,
    },
    /// Monte Carlo estimate at one (n, p)
    Mc {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: String,
        #[arg(long)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        stream: u64,
    },
    /// Monte Carlo scan over a probability grid
    Scan {
        #[arg(long)]
        n: usize,
        /// Grid: `lo:hi:count` or a comma list of probabilities
        #[arg(long)]
        grid: String,
        #[arg(long)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        stream: u64,
    },
    /// Summarize the run-record log
    Report {},
}

enum AppError {
    Core(opl_core::Error),
    Io(std::io::Error),
    Msg(String),
}

impl std::fmt::Display for AppError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AppError::Core(e) => write!(f, "{e}"),
            AppError::Io(e) => write!(f, "{e}"),
            AppError::Msg(m) => write!(f, "{m}"),
        }
    }
}

impl From<opl_core::Error> for AppError {
    fn from(e: opl_core::Error) -> Self {
        AppError::Core(e)
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Io(e)
    }
}

impl From<String> for AppError {
    fn from(m: String) -> Self {
        AppError::Msg(m)
    }
}

impl AppError {
    fn exit_code(&self) -> u8 {
        match self {
            AppError::Core(
                opl_core::Error::BudgetExceeded { .. } | opl_core::Error::PathGuard { .. },
            ) => 3,
            _ => 2,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if threads == 0 {
            Cli::command()
                .error(clap::error::ErrorKind::InvalidValue, "--threads must be positive")
                .exit();
        }
        // A duplicate initialization only happens in tests; ignore it.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn budget(cli: &Cli) -> u128 {
    if cli.deep {
        DEEP_BUDGET
    } else {
        DEFAULT_BUDGET
    }
}

fn run(cli: &Cli) -> Result<(), AppError> {
    let start = Instant::now();
    let cache_dir = cache::resolve_cache_dir(cli.cache.as_deref());
    match &cli.command {
        Command::Exact { n, p } => {
            let p = parse_rational(p)?;
            let params = Params::new(*n, p.clone())?;
            let (table, cached) = cache::counts_for(&cache_dir, *n, budget(cli))?;
            if cached {
                eprintln!("census for n = {n} loaded from cache");
            }
            let (p_a, p_b, p_ab) = table.probabilities(&p)?;
            let cov = &p_ab - &p_a * &p_b;
            println!("n = {}, m = {}", table.n(), table.m());
            println!("p = {}", rational_text(&p));
            println!("P_A = {}", rational_text(&p_a));
            println!("P_B = {}", rational_text(&p_b));
            println!("P_AB = {}", rational_text(&p_ab));
            println!("cov = {}", rational_text(&cov));
            let result = json!({
                "n": table.n(),
                "m": table.m(),
                "p": rational_text(&p),
                "p_a": rational_text(&p_a),
                "p_b": rational_text(&p_b),
                "p_ab": rational_text(&p_ab),
                "cov": rational_text(&cov),
            });
            let params_echo = json!({"n": n, "p": rational_text(params.p()), "deep": cli.deep});
            finish(cli, "exact", params_echo, result, None, start)
        }
        Command::Poly { n } => {
            let (table, _) = cache::counts_for(&cache_dir, *n, budget(cli))?;
            let poly = cov_polynomial_from_counts(&table);
            println!("n = {}, degree = {}", poly.n(), poly.degree());
            let coeffs: Vec<String> = poly.coefficients().iter().map(rational_text).collect();
            for (d, c) in coeffs.iter().enumerate() {
                println!("p^{d} {c}");
            }
            let result = json!({"n": n, "degree": poly.degree(), "coefficients": coeffs});
            finish(cli, "poly", json!({"n": n, "deep": cli.deep}), result, None, start)
        }
        Command::Roots { n, asymptotic, lo, hi, tol } => {
            if *asymptotic {
                let roots = find_c_roots(1e-10)?;
                let disc = quartic_discriminant();
                println!("c1 = {:.6}", roots.c1);
                println!("c2 = {:.6}", roots.c2);
                println!("discriminant = {disc}");
                let result = json!({"c1": roots.c1, "c2": roots.c2, "discriminant": disc});
                return finish(cli, "roots", json!({"asymptotic": true}), result, None, start);
            }
            let n = n.expect("clap enforces --n without --asymptotic");
            let lo = parse_rational(lo)?;
            let hi = parse_rational(hi)?;
            let tol = parse_rational(tol)?;
            let (table, _) = cache::counts_for(&cache_dir, n, budget(cli))?;
            let poly = cov_polynomial_from_counts(&table);
            let brackets = find_critical_in_poly(&poly, &lo, &hi, &tol, DEFAULT_SCAN_GRID)?;
            if brackets.is_empty() {
                println!(
                    "no sign change in ({}, {})",
                    rational_text(&lo),
                    rational_text(&hi)
                );
            }
            for b in &brackets {
                println!(
                    "bracket [{}, {}]",
                    rational_text(&b.lo),
                    rational_text(&b.hi)
                );
            }
            let result = json!({
                "n": n,
                "brackets": brackets
                    .iter()
                    .map(|b| json!({"lo": rational_text(&b.lo), "hi": rational_text(&b.hi)}))
                    .collect::<Vec<_>>(),
            });
            let params_echo = json!({
                "n": n,
                "lo": rational_text(&lo),
                "hi": rational_text(&hi),
                "tol": rational_text(&tol),
                "deep": cli.deep,
            });
            finish(cli, "roots", params_echo, result, None, start)
        }
        Command::Pairs { n, l, p, csv } => {
            let p = parse_rational(p)?;
            let cutoff = CutOff::new(*l)?;
            let sum = opl_core::cov_pairsum(*n, cutoff, &p)?;
            println!("n = {}, L = {}, p = {}", sum.n, sum.cutoff, rational_text(&sum.p));
            println!("pairs = {}", sum.pair_count);
            for row in &sum.rows {
                println!(
                    "{:<14} {:<12} {:>8} pairs   {}",
                    row.class.label().to_string(),
                    row.class.parameter_string(),
                    row.pairs,
                    rational_text(&row.subtotal)
                );
            }
            println!("total = {}", rational_text(&sum.total));
            if let Some(path) = csv {
                std::fs::write(path, sum.to_csv())?;
                eprintln!("breakdown written to {}", path.display());
            }
            let result = json!({
                "n": sum.n,
                "L": sum.cutoff,
                "p": rational_text(&sum.p),
                "pair_count": sum.pair_count,
                "total": rational_text(&sum.total),
                "rows": sum.rows.iter().map(|row| json!({
                    "variant": row.class.label().to_string(),
                    "parameters": row.class.parameter_string(),
                    "pairs": row.pairs,
                    "subtotal": rational_text(&row.subtotal),
                })).collect::<Vec<_>>(),
            });
            let params_echo =
                json!({"n": n, "L": l, "p": rational_text(&p), "csv": csv.as_ref().map(|c| c.display().to_string())});
            finish(cli, "pairs", params_echo, result, None, start)
        }
        Command::Asym { c, n, series } => {
            let r = main_formula(*c, *n)?;
            println!("c = {}, n = {}", r.c, r.n);
            println!("value = {:+.12e}", r.value);
            println!("type1 = {:+.12e}", r.type1);
            println!("type2 = {:+.12e}", r.type2);
            let mut result = json!({
                "c": r.c,
                "n": r.n,
                "value": r.value,
                "type1": r.type1,
                "type2": r.type2,
            });
            if let Some(terms) = series {
                let (t1, t2) = truncated_series(*c, *terms)?;
                println!("series({terms}) type1 = {t1:+.12e}");
                println!("series({terms}) type2 = {t2:+.12e}");
                result["series"] =
                    json!({"terms": terms, "type1_series": t1, "type2_series": t2});
            }
            finish(
                cli,
                "asym",
                json!({"c": c, "n": n, "series": series}),
                result,
                None,
                start,
            )
        }
        Command::Mc { n, p, samples, seed, stream } => {
            let p = parse_rational(p)?;
            let params = Params::new(*n, p)?;
            let rng = RngStream::new(*seed, *stream);
            let est = mc_estimate(&params, *samples, &rng)?;
            println!("n = {}, p = {}, samples = {}", est.n, est.p_exact, est.samples);
            println!("seed = {}, stream = {}, batches = {}", est.seed, est.stream, est.stream_count);
            println!("pA_hat = {}", est.p_a_hat);
            println!("pB_hat = {}", est.p_b_hat);
            println!("pAB_hat = {}", est.p_ab_hat);
            println!("cov_hat = {}", est.cov_hat);
            println!("std_err = {}", est.std_err);
            eprintln!("sampled in {:.3}s", est.wall_time);
            let result = estimate_value(&est);
            let params_echo = json!({
                "n": n,
                "p": est.p_exact,
                "samples": samples,
                "seed": seed,
                "stream": stream,
            });
            finish(cli, "mc", params_echo, result, Some((*seed, *stream)), start)
        }
        Command::Scan { n, grid, samples, seed, stream } => {
            let grid = parse_grid(grid)?;
            let rng = RngStream::new(*seed, *stream);
            let curve = mc_scan(*n, &grid, *samples, &rng)?;
            print!("{}", curve.to_csv());
            let result = json!({
                "n": n,
                "rows": curve.rows.iter().map(estimate_value).collect::<Vec<_>>(),
            });
            let params_echo = json!({
                "n": n,
                "grid": grid.iter().map(rational_text).collect::<Vec<_>>(),
                "samples": samples,
                "seed": seed,
                "stream": stream,
            });
            finish(cli, "scan", params_echo, result, Some((*seed, *stream)), start)
        }
        Command::Report {} => {
            let text = std::fs::read_to_string(&cli.out).map_err(|e| {
                AppError::Msg(format!("cannot read {}: {e}", cli.out.display()))
            })?;
            let mut by_command: std::collections::BTreeMap<String, u64> = Default::default();
            let mut first: Option<String> = None;
            let mut last: Option<String> = None;
            let mut total = 0u64;
            for (lineno, line) in text.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let record: Value = serde_json::from_str(line).map_err(|e| {
                    AppError::Msg(format!("bad record on line {}: {e}", lineno + 1))
                })?;
                if record["schema_version"] != json!(records::SCHEMA_VERSION) {
                    return Err(AppError::Msg(format!(
                        "unsupported schema_version on line {}",
                        lineno + 1
                    )));
                }
                let command = record["command"].as_str().unwrap_or("?").to_string();
                *by_command.entry(command).or_insert(0) += 1;
                total += 1;
                let stamp = record["timestamp"].as_str().unwrap_or("").to_string();
                if first.is_none() {
                    first = Some(stamp.clone());
                }
                last = Some(stamp);
            }
            println!("records = {total}");
            for (command, count) in &by_command {
                println!("  {command:<8} {count}");
            }
            if let (Some(first), Some(last)) = (&first, &last) {
                println!("first = {first}");
                println!("last = {last}");
            }
            let result = json!({
                "records": total,
                "by_command": by_command,
                "first": first,
                "last": last,
            });
            finish(cli, "report", json!({"out": cli.out.display().to_string()}), result, None, start)
        }
    }
}

/// Reproducible view of an estimate: everything except the measured time.
fn estimate_value(est: &opl_core::McEstimate) -> Value {
    let mut v = serde_json::to_value(est).expect("estimates serialize");
    v.as_object_mut().expect("object").remove("wall_time");
    v
}

fn finish(
    cli: &Cli,
    command: &str,
    params: Value,
    result: Value,
    seed: Option<(u64, u64)>,
    start: Instant,
) -> Result<(), AppError> {
    let record = run_record(command, params, result, seed, start.elapsed().as_secs_f64());
    append_record(&cli.out, &record)?;
    Ok(())
}
