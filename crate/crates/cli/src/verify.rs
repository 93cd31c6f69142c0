//! `verify`: numeric sweep of every identity between the two families over
//! seeded random points, with per-check maxima and a pass/fail verdict.

use clap::Args;
use rayon::prelude::*;
use serde::Serialize;

use rsvd_core::domain::{sample_phase_point, sweep_params, SWEEP_MIN_GAP, SWEEP_THETA_RANGE};
use rsvd_core::dynamics::{bracket_from_gradients, grad_observable, Gradient, Observable};
use rsvd_core::equivalence::{elem_sym, eval_all_ch, eval_all_ck, verify_recursions, Transform};
use rsvd_core::lax::{assemble, build_factors, lax_residuals, structural_residuals};
use rsvd_core::{char_poly_eigen, eval_all_h, extract_actions, main_hamiltonian, Params};

use crate::common::{max_rel, rel, to_json, CliError, CliResult, Echo};

/// Largest `n` of the numeric sweep.
const MAX_SWEEP_N: usize = 6;
/// Largest `n` of the bracket sweep.
const MAX_BRACKET_N: usize = 4;
const MAX_REPORTED_ERRORS: usize = 8;

#[derive(Debug, Clone, Args, Serialize)]
pub struct Tolerances {
    /// H-family from the Lax invariants against direct evaluation.
    #[arg(long, default_value_t = 1e-9)]
    pub tol_equivalence: f64,
    /// K_0..K_n from the direct H-family.
    #[arg(long, default_value_t = 1e-9)]
    pub tol_inverse: f64,
    /// Numeric round trip through both transforms.
    #[arg(long, default_value_t = 1e-12)]
    pub tol_round_trip: f64,
    /// CLC L = I, det = 1, Hermiticity, K palindrome.
    #[arg(long, default_value_t = 1e-10)]
    pub tol_structure: f64,
    /// H_1 = 2(H - n).
    #[arg(long, default_value_t = 1e-12)]
    pub tol_anchor_h: f64,
    /// K_1 = -2H.
    #[arg(long, default_value_t = 1e-10)]
    pub tol_anchor_k: f64,
    /// Both families against their pullbacks at the spectral actions.
    #[arg(long, default_value_t = 1e-9)]
    pub tol_pullback: f64,
    /// Pullback against the elementary-symmetric product formula.
    #[arg(long, default_value_t = 1e-12)]
    pub tol_product: f64,
    /// One-variable recursions of the pullbacks.
    #[arg(long, default_value_t = 1e-11)]
    pub tol_recursion: f64,
    /// |{F, G}| / (1 + |F||G|) within and across the families.
    #[arg(long, default_value_t = 1e-8)]
    pub tol_bracket: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    /// Smallest particle number.
    #[arg(long, default_value_t = 1)]
    pub n_min: usize,
    /// Largest particle number (at most 6).
    #[arg(long, default_value_t = 4)]
    pub n_max: usize,
    /// Sampled points per particle number.
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
    /// Base seed; point `i` of size `n` uses a seed derived from `(seed, n, i)`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Fixed coupling mu; without mu, nu, kappa the built-in 20 triples are cycled.
    #[arg(long, allow_negative_numbers = true)]
    pub mu: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub nu: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub kappa: Option<f64>,
    #[arg(long, default_value_t = SWEEP_MIN_GAP)]
    pub min_gap: f64,
    #[arg(long, default_value_t = SWEEP_THETA_RANGE)]
    pub theta_range: f64,
    /// Fault injection: add this to L[0][0] before the spectral route.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub perturb: f64,
    /// Also check Poisson brackets (n <= 4).
    #[arg(long)]
    pub include_brackets: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Check {
    Equivalence,
    Inverse,
    RoundTrip,
    Structure,
    AnchorH,
    AnchorK,
    PullbackH,
    PullbackK,
    Product,
    Recursion,
    Brackets,
}

const CHECKS: [Check; 11] = [
    Check::Equivalence,
    Check::Inverse,
    Check::RoundTrip,
    Check::Structure,
    Check::AnchorH,
    Check::AnchorK,
    Check::PullbackH,
    Check::PullbackK,
    Check::Product,
    Check::Recursion,
    Check::Brackets,
];

impl Check {
    fn name(self) -> &'static str {
        match self {
            Check::Equivalence => "equivalence",
            Check::Inverse => "inverse",
            Check::RoundTrip => "round_trip",
            Check::Structure => "lax_structure",
            Check::AnchorH => "anchor_h1",
            Check::AnchorK => "anchor_k1",
            Check::PullbackH => "pullback_h",
            Check::PullbackK => "pullback_k",
            Check::Product => "product_formula",
            Check::Recursion => "recursions",
            Check::Brackets => "brackets",
        }
    }

    fn description(self) -> &'static str {
        match self {
            Check::Equivalence => "max_l |vd_from_lax(K)_l - H_l| / (1 + |H_l|)",
            Check::Inverse => "max_m |lax_from_vd(H)_m - K_m| / (1 + |K_m|), m <= n",
            Check::RoundTrip => "max_m |lax_from_vd(vd_from_lax(K))_m - K_m| / (1 + |K_m|)",
            Check::Structure => "max of |CLCL - I|, |det L - 1|, |L - L^*|, factor residuals and K palindrome",
            Check::AnchorH => "|H_1 - 2(H - n)| / (1 + |2(H - n)|)",
            Check::AnchorK => "|K_1 + 2H| / (1 + |2H|)",
            Check::PullbackH => "max_l |H_l - cH_l(q)| / (1 + |H_l|), q from spec(L)",
            Check::PullbackK => "max_m |K_m - cK_m(q)| / (1 + |K_m|), q from spec(L)",
            Check::Product => "max_l |cH_l(q) - 4^l e_l(sinh^2(q/2))| / (1 + |cH_l(q)|)",
            Check::Recursion => "pullback recursions when one action is appended",
            Check::Brackets => "max |{F, G}| / (1 + |F||G|) over F, G in {H_1..H_n, K_1..K_n}",
        }
    }

    fn tolerance(self, t: &Tolerances) -> f64 {
        match self {
            Check::Equivalence => t.tol_equivalence,
            Check::Inverse => t.tol_inverse,
            Check::RoundTrip => t.tol_round_trip,
            Check::Structure => t.tol_structure,
            Check::AnchorH => t.tol_anchor_h,
            Check::AnchorK => t.tol_anchor_k,
            Check::PullbackH | Check::PullbackK => t.tol_pullback,
            Check::Product => t.tol_product,
            Check::Recursion => t.tol_recursion,
            Check::Brackets => t.tol_bracket,
        }
    }
}

#[derive(Debug, Clone)]
enum Measure {
    Skipped,
    Value(f64),
    Failed(String),
}

struct PointOutcome {
    n: usize,
    index: usize,
    seed: u64,
    measures: Vec<Measure>,
}

#[derive(Debug, Clone, Copy, Serialize)]
struct PointRef {
    n: usize,
    index: usize,
    seed: u64,
}

#[derive(Debug, Serialize)]
struct CheckReport {
    check: &'static str,
    description: &'static str,
    tolerance: f64,
    /// `null` when the check was not evaluated at any point.
    max_residual: Option<f64>,
    worst_point: Option<PointRef>,
    points_evaluated: usize,
    points_failed: usize,
    errors: Vec<String>,
    passed: bool,
}

#[derive(Debug, Serialize)]
struct SizeSummary {
    n: usize,
    max_residuals: Vec<(&'static str, Option<f64>)>,
}

#[derive(Debug, Serialize)]
struct VerifyReport<'a> {
    config: Echo<'a, VerifyArgs>,
    passed: bool,
    failing_checks: Vec<&'static str>,
    points: usize,
    checks: Vec<CheckReport>,
    per_n: Vec<SizeSummary>,
}

/// Seed of point `index` at size `n`.
fn point_seed(base: u64, n: usize, index: usize) -> u64 {
    base.wrapping_mul(1_000_003).wrapping_add(1000 * n as u64 + index as u64)
}

fn fixed_params(args: &VerifyArgs) -> CliResult<Option<Params>> {
    match (args.mu, args.nu, args.kappa) {
        (None, None, None) => Ok(None),
        (Some(mu), Some(nu), Some(kappa)) => Ok(Some(Params::new(mu, nu, kappa)?)),
        _ => Err(CliError::usage("give all of --mu, --nu, --kappa or none of them")),
    }
}

fn validate(args: &VerifyArgs) -> CliResult<()> {
    if args.n_min == 0 || args.n_min > args.n_max || args.n_max > MAX_SWEEP_N {
        return Err(CliError::usage(format!(
            "need 1 <= n-min <= n-max <= {MAX_SWEEP_N} (got {}..{})",
            args.n_min, args.n_max
        )));
    }
    if args.samples == 0 {
        return Err(CliError::usage("--samples must be at least 1"));
    }
    if !args.perturb.is_finite() {
        return Err(CliError::usage("--perturb must be finite"));
    }
    sample_phase_point(1, 0, args.min_gap, args.theta_range)?;
    let t = &args.tolerances;
    if CHECKS.iter().any(|c| c.tolerance(t).is_nan() || c.tolerance(t) < 0.0) {
        return Err(CliError::usage("tolerances must be nonnegative"));
    }
    Ok(())
}

fn bracket_measure(n: usize, point: &rsvd_core::PhasePoint, params: &Params) -> Measure {
    let grads: Result<Vec<Gradient>, _> = (1..=n)
        .map(Observable::VanDiejen)
        .chain((1..=n).map(Observable::LaxCoefficient))
        .map(|o| grad_observable(o, point, params))
        .collect();
    match grads {
        Ok(grads) => {
            let mut worst: f64 = 0.0;
            for a in 0..grads.len() {
                for b in a + 1..grads.len() {
                    let (f, g) = (&grads[a], &grads[b]);
                    worst = worst.max(bracket_from_gradients(f, g).abs() / (1.0 + f.value.abs() * g.value.abs()));
                }
            }
            Measure::Value(worst)
        }
        Err(e) => Measure::Failed(e.to_string()),
    }
}

fn evaluate_point(args: &VerifyArgs, fixed: Option<Params>, n: usize, index: usize) -> PointOutcome {
    let seed = point_seed(args.seed, n, index);
    let mut measures = vec![Measure::Skipped; CHECKS.len()];
    let mut set = |c: Check, m: Measure| {
        let i = CHECKS.iter().position(|x| *x == c).expect("known check");
        measures[i] = m;
    };
    let params = fixed.unwrap_or_else(|| {
        let all = sweep_params();
        all[index % all.len()]
    });
    let point = match sample_phase_point(n, seed, args.min_gap, args.theta_range) {
        Ok(p) => p,
        Err(e) => {
            for c in CHECKS {
                set(c, Measure::Failed(e.to_string()));
            }
            return PointOutcome { n, index, seed, measures };
        }
    };

    if args.include_brackets && n <= MAX_BRACKET_N {
        set(Check::Brackets, bracket_measure(n, &point, &params));
    }

    let h = main_hamiltonian(&point, &params);
    let direct = match eval_all_h(&point, &params) {
        Ok(v) => v.values().to_vec(),
        Err(e) => {
            for c in [Check::Equivalence, Check::Inverse, Check::AnchorH, Check::PullbackH] {
                set(c, Measure::Failed(e.to_string()));
            }
            Vec::new()
        }
    };
    if !direct.is_empty() {
        set(Check::AnchorH, Measure::Value(rel(direct[1], 2.0 * (h - n as f64))));
    }

    let factors = build_factors(&point, &params);
    let exact = assemble(&factors);
    let lax = if args.perturb != 0.0 {
        exact.perturbed(args.perturb)
    } else {
        exact.clone()
    };
    let factor_residual = structural_residuals(&factors, &exact).max();
    let r = lax_residuals(&lax);
    let lax_residual = r.clcl.max(r.hermiticity).max(r.det);

    let k = match char_poly_eigen(&lax) {
        Ok(k) => k,
        Err(e) => {
            for c in [
                Check::Equivalence,
                Check::Inverse,
                Check::RoundTrip,
                Check::Structure,
                Check::AnchorK,
                Check::PullbackK,
            ] {
                set(c, Measure::Failed(e.to_string()));
            }
            return PointOutcome { n, index, seed, measures };
        }
    };
    set(
        Check::Structure,
        Measure::Value(factor_residual.max(lax_residual).max(k.palindrome_residual())),
    );
    set(Check::AnchorK, Measure::Value(rel(k.get(1), -2.0 * h)));
    let k_low = &k.as_slice()[..=n];
    let transform = Transform::new(n, n).expect("1 <= n");
    let mapped = transform.vd_from_lax(k_low);
    set(Check::RoundTrip, Measure::Value(max_rel(&transform.lax_from_vd(&mapped), k_low)));
    if !direct.is_empty() {
        set(Check::Equivalence, Measure::Value(max_rel(&mapped, &direct)));
        set(Check::Inverse, Measure::Value(max_rel(&transform.lax_from_vd(&direct), k_low)));
    }

    match extract_actions(&lax) {
        Ok(q) => {
            let q = q.q();
            let ch = eval_all_ch(q);
            if !direct.is_empty() {
                set(Check::PullbackH, Measure::Value(max_rel(&ch, &direct)));
            }
            set(Check::PullbackK, Measure::Value(max_rel(&eval_all_ck(q), k_low)));
            let s: Vec<f64> = q.iter().map(|x| (x / 2.0).sinh().powi(2)).collect();
            let product: Result<Vec<f64>, _> = (0..=n)
                .map(|l| elem_sym(&s, l).map(|e| 4f64.powi(l as i32) * e))
                .collect();
            set(
                Check::Product,
                match product {
                    Ok(p) => Measure::Value(max_rel(&p, &ch)),
                    Err(e) => Measure::Failed(e.to_string()),
                },
            );
            let q_extra = 0.05 + 2.95 * ((index as f64 + 1.0) * 0.618_033_988_749_895).fract();
            set(Check::Recursion, Measure::Value(verify_recursions(q, q_extra).max()));
        }
        Err(e) => {
            for c in [Check::PullbackH, Check::PullbackK, Check::Product, Check::Recursion] {
                set(c, Measure::Failed(e.to_string()));
            }
        }
    }
    PointOutcome { n, index, seed, measures }
}

fn summarize(check: Check, slot: usize, outcomes: &[PointOutcome], tol: f64) -> CheckReport {
    let mut report = CheckReport {
        check: check.name(),
        description: check.description(),
        tolerance: tol,
        max_residual: None,
        worst_point: None,
        points_evaluated: 0,
        points_failed: 0,
        errors: Vec::new(),
        passed: true,
    };
    for o in outcomes {
        let here = PointRef {
            n: o.n,
            index: o.index,
            seed: o.seed,
        };
        match &o.measures[slot] {
            Measure::Skipped => continue,
            Measure::Value(v) => {
                report.points_evaluated += 1;
                if report.max_residual.is_none_or(|m| *v > m || v.is_nan()) {
                    report.max_residual = Some(*v);
                    report.worst_point = Some(here);
                }
                if v.is_nan() || *v > tol {
                    report.points_failed += 1;
                }
            }
            Measure::Failed(msg) => {
                report.points_evaluated += 1;
                report.points_failed += 1;
                if report.errors.len() < MAX_REPORTED_ERRORS {
                    report.errors.push(format!("n={} index={}: {msg}", o.n, o.index));
                }
            }
        }
    }
    report.passed = report.points_failed == 0;
    report
}

pub fn run(args: &VerifyArgs) -> CliResult<bool> {
    validate(args)?;
    let fixed = fixed_params(args)?;
    let jobs: Vec<(usize, usize)> = (args.n_min..=args.n_max)
        .flat_map(|n| (0..args.samples).map(move |i| (n, i)))
        .collect();
    let outcomes: Vec<PointOutcome> = jobs
        .par_iter()
        .map(|&(n, i)| evaluate_point(args, fixed, n, i))
        .collect();

    let checks: Vec<CheckReport> = CHECKS
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != Check::Brackets || args.include_brackets)
        .map(|(slot, c)| summarize(*c, slot, &outcomes, c.tolerance(&args.tolerances)))
        .collect();
    let per_n = (args.n_min..=args.n_max)
        .map(|n| {
            let of_n: Vec<&PointOutcome> = outcomes.iter().filter(|o| o.n == n).collect();
            let max_residuals = CHECKS
                .iter()
                .enumerate()
                .filter(|(_, c)| **c != Check::Brackets || args.include_brackets)
                .map(|(slot, c)| {
                    let worst = of_n
                        .iter()
                        .filter_map(|o| match o.measures[slot] {
                            Measure::Value(v) => Some(v),
                            _ => None,
                        })
                        .reduce(f64::max);
                    (c.name(), worst)
                })
                .collect();
            SizeSummary { n, max_residuals }
        })
        .collect();

    let failing_checks: Vec<&'static str> = checks.iter().filter(|c| !c.passed).map(|c| c.check).collect();
    let passed = failing_checks.is_empty();
    for c in checks.iter().filter(|c| !c.passed) {
        let worst = c.max_residual.map_or_else(|| "n/a".to_string(), |v| format!("{v:e}"));
        eprintln!(
            "check {} failed at {} of {} points (max residual {worst}, tolerance {:e})",
            c.check, c.points_failed, c.points_evaluated, c.tolerance
        );
    }
    let report = VerifyReport {
        config: Echo { command: "verify", args },
        passed,
        failing_checks,
        points: outcomes.len(),
        checks,
        per_n,
    };
    println!("{}", to_json(&report));
    Ok(passed)
}
