//! `symrel` command-line front end.
//!
//! Exit codes: 0 every case verified, 1 a falsification, 2 a usage error,
//! 3 a resource cap was hit.

mod args;
mod commands;
mod report;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use report::{CliError, Report};

fn run(cli: &Cli) -> Result<Report, CliError> {
    let g = &cli.global;
    match &cli.command {
        Command::Verify(a) => commands::verify(g, a),
        Command::Table(a) => commands::table(g, a),
        Command::SolveC(a) => commands::solve_c(g, a),
        Command::BernoulliRelations(a) => commands::bernoulli_relations(g, a),
        Command::Families => Ok(commands::families()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cli.global.jobs).build();
    let result = match pool {
        Ok(pool) => pool.install(|| run(&cli)),
        Err(e) => Err(CliError::Resource(format!("cannot start worker threads: {e}"))),
    };
    match result {
        Ok(report) => {
            let mut out = std::io::stdout().lock();
            // A closed pipe downstream is not worth a panic.
            let _ = out.write_all(report.render(cli.global.format).as_bytes());
            report.status.exit_code()
        }
        Err(e) => {
            eprintln!("symrel: {}", e.message());
            e.exit_code()
        }
    }
}
