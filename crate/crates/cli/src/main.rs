//! `rsvd`: evaluation, verification sweeps, exact identity checks, flows and
//! benchmarks for the rational BC_n Ruijsenaars-Schneider-van Diejen system.
//!
//! Exit codes: 0 when every check passes, 1 on a verification failure,
//! 2 on a usage or validation error.

mod bench;
mod common;
mod eval;
mod flow;
mod identities;
mod verify;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use common::EXIT_FAILURE;

#[derive(Debug, Parser)]
#[command(name = "rsvd", version, about = "Commuting Hamiltonians of the rational BC_n RSvD system")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Both Hamiltonian families, the Lax spectrum and the actions at one point.
    Eval(eval::EvalArgs),
    /// Numeric sweep of every relation between the two families.
    Verify(verify::VerifyArgs),
    /// Exact verification of the coefficient identities.
    Identities(identities::IdentitiesArgs),
    /// Hamiltonian flow of H with conservation and scattering checks.
    Flow(flow::FlowArgs),
    /// Timing of the direct and spectral routes to the H-family.
    Bench(bench::BenchArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Eval(a) => eval::run(a),
        Command::Verify(a) => verify::run(a),
        Command::Identities(a) => identities::run(a),
        Command::Flow(a) => flow::run(a),
        Command::Bench(a) => bench::run(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAILURE),
        Err(e) => e.report(),
    }
}
