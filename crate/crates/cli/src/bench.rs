//! `bench`: wall time of the direct and the spectral evaluation of the full
//! H-family, with the cross-route residual as a validity check.

use std::time::Instant;

use clap::{Args, ValueEnum};
use serde::Serialize;

use rsvd_core::domain::{sample_phase_point, SWEEP_MIN_GAP, SWEEP_THETA_RANGE};
use rsvd_core::equivalence::Transform;
use rsvd_core::vandiejen::MAX_DIRECT_N;
use rsvd_core::{build_lax, char_poly_eigen, eval_all_h, Params, PhasePoint};

use crate::common::{max_rel, to_json, CliError, CliResult, CouplingArgs, Echo};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Routes {
    Both,
    Direct,
    Spectral,
}

#[derive(Debug, Args, Serialize)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 2)]
    pub n_min: usize,
    #[arg(long, default_value_t = 8)]
    pub n_max: usize,
    #[arg(long, value_enum, default_value_t = Routes::Both)]
    pub routes: Routes,
    /// Timed repetitions per route and n; the fastest is reported.
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub couplings: CouplingArgs,
    /// Largest accepted cross-route residual.
    #[arg(long, default_value_t = 1e-9)]
    pub tol_residual: f64,
    /// Emit a JSON report instead of CSV.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Serialize)]
struct Row {
    n: usize,
    direct_seconds: Option<f64>,
    spectral_seconds: Option<f64>,
    residual: Option<f64>,
}

#[derive(Debug, Serialize)]
struct BenchReport<'a> {
    config: Echo<'a, BenchArgs>,
    rows: &'a [Row],
    /// Smallest n at which the spectral route is faster.
    crossover: Option<usize>,
    passed: bool,
}

fn fastest<T>(repeats: usize, mut f: impl FnMut() -> CliResult<T>) -> CliResult<(f64, T)> {
    let mut best = f64::INFINITY;
    let mut last = None;
    for _ in 0..repeats {
        let clock = Instant::now();
        let value = f()?;
        best = best.min(clock.elapsed().as_secs_f64());
        last = Some(value);
    }
    Ok((best, last.expect("at least one repeat")))
}

fn spectral_family(point: &PhasePoint, params: &Params) -> CliResult<Vec<f64>> {
    let n = point.n();
    let k = char_poly_eigen(&build_lax(point, params)?)?;
    Ok(Transform::new(n, n)?.vd_from_lax(&k.as_slice()[..=n]))
}

fn csv_cell(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.16e}")).unwrap_or_default()
}

pub fn run(args: &BenchArgs) -> CliResult<bool> {
    let params = args.couplings.params()?;
    if args.n_min == 0 || args.n_min > args.n_max {
        return Err(CliError::usage(format!(
            "need 1 <= n-min <= n-max (got {}..{})",
            args.n_min, args.n_max
        )));
    }
    if args.routes != Routes::Spectral && args.n_max > MAX_DIRECT_N {
        return Err(CliError::usage(format!(
            "the direct route is limited to n <= {MAX_DIRECT_N}; use --routes spectral for larger n"
        )));
    }
    if args.repeats == 0 {
        return Err(CliError::usage("--repeats must be at least 1"));
    }
    let mut rows = Vec::new();
    for n in args.n_min..=args.n_max {
        let point = sample_phase_point(n, args.seed.wrapping_add(n as u64), SWEEP_MIN_GAP, SWEEP_THETA_RANGE)?;
        let direct = match args.routes {
            Routes::Spectral => None,
            _ => Some(fastest(args.repeats, || {
                Ok(eval_all_h(&point, &params)?.values().to_vec())
            })?),
        };
        let spectral = match args.routes {
            Routes::Direct => None,
            _ => Some(fastest(args.repeats, || spectral_family(&point, &params))?),
        };
        let residual = match (&direct, &spectral) {
            (Some((_, d)), Some((_, s))) => Some(max_rel(s, d)),
            _ => None,
        };
        rows.push(Row {
            n,
            direct_seconds: direct.map(|(t, _)| t),
            spectral_seconds: spectral.map(|(t, _)| t),
            residual,
        });
    }
    let passed = rows.iter().all(|r| r.residual.is_none_or(|x| x <= args.tol_residual));
    let crossover = rows
        .iter()
        .find(|r| matches!((r.direct_seconds, r.spectral_seconds), (Some(d), Some(s)) if s < d))
        .map(|r| r.n);
    let report = BenchReport {
        config: Echo { command: "bench", args },
        rows: &rows,
        crossover,
        passed,
    };
    if args.json {
        println!("{}", to_json(&report));
    } else {
        let mut w = csv::Writer::from_writer(std::io::stdout().lock());
        w.write_record(["n", "direct_seconds", "spectral_seconds", "residual"])?;
        for r in &rows {
            w.write_record([
                r.n.to_string(),
                csv_cell(r.direct_seconds),
                csv_cell(r.spectral_seconds),
                csv_cell(r.residual),
            ])?;
        }
        w.flush()?;
        eprintln!("{}", to_json(&report));
    }
    if !passed {
        eprintln!("cross-route residual exceeds {:e}; timings are invalid", args.tol_residual);
    }
    Ok(passed)
}
