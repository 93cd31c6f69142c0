//! `identities`: exact big-integer verification of the coefficient identities
//! and of the inverse pair, with the small matrices printed.

use clap::Args;
use serde::Serialize;

use rsvd_core::equivalence::{coeff_matrix, verify_exact_identities, CoeffFlavor, IdentityReport};

use crate::common::{to_json, CliError, CliResult, Echo};

/// Largest accepted `--n-max`.
pub const MAX_N: usize = 60;
/// Matrices are printed up to this size.
pub const MAX_PRINTED_N: usize = 10;

#[derive(Debug, Args, Serialize)]
pub struct IdentitiesArgs {
    /// Largest particle number checked (1..=60).
    #[arg(long, default_value_t = 30)]
    pub n_max: usize,
}

#[derive(Debug, Serialize)]
struct MatrixPair {
    n: usize,
    forward: Vec<Vec<u64>>,
    inverse: Vec<Vec<u64>>,
}

#[derive(Debug, Serialize)]
struct IdentitiesOutput<'a> {
    config: Echo<'a, IdentitiesArgs>,
    passed: bool,
    total_cells: u64,
    #[serde(flatten)]
    report: IdentityReport,
    /// Forward and inverse coefficient matrices (unsigned) for `n <= 10`.
    matrices: Vec<MatrixPair>,
}

fn matrices(n_max: usize) -> CliResult<Vec<MatrixPair>> {
    (1..=n_max.min(MAX_PRINTED_N))
        .map(|n| {
            let rows = |flavor| -> CliResult<Vec<Vec<u64>>> {
                coeff_matrix(n, n, flavor)?
                    .to_u64_rows()
                    .ok_or_else(|| CliError::usage(format!("entries of the n = {n} matrix exceed u64")))
            };
            Ok(MatrixPair {
                n,
                forward: rows(CoeffFlavor::ForwardA)?,
                inverse: rows(CoeffFlavor::InverseB)?,
            })
        })
        .collect()
}

pub fn run(args: &IdentitiesArgs) -> CliResult<bool> {
    if args.n_max == 0 || args.n_max > MAX_N {
        return Err(CliError::usage(format!("--n-max must lie in 1..={MAX_N}, got {}", args.n_max)));
    }
    let report = verify_exact_identities(args.n_max)?;
    let output = IdentitiesOutput {
        config: Echo {
            command: "identities",
            args,
        },
        passed: report.passed(),
        total_cells: report.total_cells(),
        matrices: matrices(args.n_max)?,
        report,
    };
    println!("{}", to_json(&output));
    Ok(output.passed)
}
