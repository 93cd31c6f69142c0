//! Options shared by several subcommands, error reporting and JSON output.

use std::fmt;
use std::process::ExitCode;

use clap::Args;
use serde::Serialize;

use rsvd_core::domain::{sample_phase_point, SWEEP_MIN_GAP, SWEEP_THETA_RANGE};
use rsvd_core::{Error, Params, PhasePoint};

/// A failed command: machine-readable kind, message and exit code.
#[derive(Debug, Serialize)]
pub struct CliError {
    pub kind: String,
    pub message: String,
    #[serde(skip)]
    pub exit: u8,
}

/// Exit code for a verification failure.
pub const EXIT_FAILURE: u8 = 1;
/// Exit code for a usage or validation error.
pub const EXIT_USAGE: u8 = 2;

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            kind: "InvalidArgument".into(),
            message: message.into(),
            exit: EXIT_USAGE,
        }
    }

    pub fn report(&self) -> ExitCode {
        #[derive(Serialize)]
        struct Wrapped<'a> {
            error: &'a CliError,
        }
        println!("{}", to_json(&Wrapped { error: self }));
        eprintln!("error: {self}");
        ExitCode::from(self.exit)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let exit = match e {
            Error::ZeroCoupling { .. }
            | Error::SignViolation { .. }
            | Error::NonFinite(_)
            | Error::OrderingViolation { .. }
            | Error::NonPositive { .. }
            | Error::LengthMismatch { .. }
            | Error::EmptyVector
            | Error::InvalidArgument(_) => EXIT_USAGE,
            _ => EXIT_FAILURE,
        };
        CliError {
            kind: e.kind().into(),
            message: e.to_string(),
            exit,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError {
            kind: "Io".into(),
            message: e.to_string(),
            exit: EXIT_USAGE,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError {
            kind: "Io".into(),
            message: e.to_string(),
            exit: EXIT_USAGE,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize")
}

/// The parsed command line, echoed at the top of every report.
#[derive(Debug, Serialize)]
pub struct Echo<'a, A: Serialize> {
    pub command: &'static str,
    #[serde(flatten)]
    pub args: &'a A,
}

/// The couplings `(mu, nu, kappa)`.
#[derive(Debug, Clone, Args, Serialize)]
pub struct CouplingArgs {
    /// Coupling mu (nonzero).
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub mu: f64,
    /// Coupling nu (nonzero).
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub nu: f64,
    /// Coupling kappa (same sign as nu, or zero).
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub kappa: f64,
}

impl CouplingArgs {
    pub fn params(&self) -> CliResult<Params> {
        Ok(Params::new(self.mu, self.nu, self.kappa)?)
    }
}

/// Where the phase point comes from: an explicit `--point` or a seeded sample.
#[derive(Debug, Clone, Args, Serialize)]
pub struct PointArgs {
    /// Number of particles (inferred from `--point` when omitted).
    #[arg(long)]
    pub n: Option<usize>,
    /// Seed of the sampled point.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Explicit point "lambda_1,...,lambda_n;theta_1,...,theta_n".
    #[arg(long, allow_hyphen_values = true)]
    pub point: Option<String>,
    /// Minimum gap between sampled positions.
    #[arg(long, default_value_t = SWEEP_MIN_GAP)]
    pub min_gap: f64,
    /// Sampled momenta lie in [-theta_range, theta_range].
    #[arg(long, default_value_t = SWEEP_THETA_RANGE)]
    pub theta_range: f64,
}

impl PointArgs {
    /// The explicit point if given, otherwise `fallback(n)` when no seed is
    /// given either, otherwise the seeded sample.
    pub fn resolve_with(
        &self,
        default_n: usize,
        fallback: impl FnOnce(usize) -> Option<PhasePoint>,
    ) -> CliResult<PhasePoint> {
        if let Some(text) = &self.point {
            if self.seed.is_some() {
                return Err(CliError::usage("give either --point or --seed, not both"));
            }
            let point = parse_point(text)?;
            if let Some(n) = self.n {
                if n != point.n() {
                    return Err(Error::LengthMismatch {
                        expected: n,
                        found: point.n(),
                    }
                    .into());
                }
            }
            return Ok(point);
        }
        let n = self.n.unwrap_or(default_n);
        if n == 0 {
            return Err(CliError::usage("--n must be at least 1"));
        }
        if self.seed.is_none() {
            if let Some(p) = fallback(n) {
                return Ok(p);
            }
        }
        Ok(sample_phase_point(n, self.seed.unwrap_or(0), self.min_gap, self.theta_range)?)
    }

    pub fn resolve(&self, default_n: usize) -> CliResult<PhasePoint> {
        self.resolve_with(default_n, |_| None)
    }
}

fn parse_list(text: &str, what: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| CliError::usage(format!("cannot parse {what} entry {s:?}: {e}")))
        })
        .collect()
}

/// Parses "lambda_1,...;theta_1,..." and validates the result.
pub fn parse_point(text: &str) -> CliResult<PhasePoint> {
    let (lambda, theta) = text
        .split_once(';')
        .ok_or_else(|| CliError::usage(format!("point {text:?} must look like \"l1,l2;t1,t2\"")))?;
    Ok(PhasePoint::new(parse_list(lambda, "lambda")?, parse_list(theta, "theta")?)?)
}

/// `|a - b| / (1 + |b|)`.
pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + b.abs())
}

/// Largest entrywise [`rel`] between two slices.
pub fn max_rel(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| rel(*x, *y)).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_points() {
        let p = parse_point("3, 1.5;0.4,-0.9").unwrap();
        assert_eq!(p.lambda(), &[3.0, 1.5]);
        assert_eq!(p.theta(), &[0.4, -0.9]);
    }

    #[test]
    fn rejects_malformed_points() {
        assert_eq!(parse_point("1,2").unwrap_err().exit, EXIT_USAGE);
        assert_eq!(parse_point("1,x;0,0").unwrap_err().exit, EXIT_USAGE);
        assert_eq!(parse_point("1,2;0,0").unwrap_err().kind, "OrderingViolation");
        assert_eq!(parse_point("2,1;0").unwrap_err().kind, "LengthMismatch");
    }

    #[test]
    fn core_errors_map_to_exit_codes() {
        assert_eq!(CliError::from(Error::ZeroCoupling { name: "mu" }).exit, EXIT_USAGE);
        assert_eq!(CliError::from(Error::IdentityFailure("x".into())).exit, EXIT_FAILURE);
    }
}
