//! `kpnlab`: command-line front end for the k-PN toolkit.
//!
//! Every subcommand prints a JSON report. Exit codes: 0 when the examined
//! claim holds, 1 when it is falsified (the report carries the witness),
//! 2 on usage or operational errors.

mod commands;
mod goldens;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use commands::{Command, Status};
use report::RunReport;

#[derive(Parser, Debug)]
#[command(
    name = "kpnlab",
    version,
    about = "Verification toolkit for k-PN monomials over GF(p^e)"
)]
pub struct Cli {
    /// Also write the report to this file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true, env = "KPNLAB_JOBS")]
    jobs: Option<usize>,
    /// Replay every witness through the library before reporting.
    #[arg(long, global = true)]
    verify_witness: bool,
    #[command(subcommand)]
    command: Command,
}

pub fn build_report(cmd: &Command, verify: bool) -> anyhow::Result<(RunReport, Status)> {
    let start = Instant::now();
    let outcome = commands::execute(cmd, verify)?;
    let report = RunReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        bank_checksum: kpnlab::cases::BANK_CHECKSUM.to_string(),
        command: cmd.name(),
        params: cmd.params(),
        payload: outcome.payload,
        witnesses: outcome.witnesses,
        duration_ms: start.elapsed().as_millis() as u64,
        jobs: rayon::current_num_threads(),
    };
    Ok((report, outcome.status))
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    if let commands::Command::Goldens(g) = &cli.command {
        return goldens::run(g, cli.verify_witness);
    }
    let (report, status) = build_report(&cli.command, cli.verify_witness)?;
    print!("{}", report.to_json());
    if let Some(path) = &cli.out {
        report.write(path)?;
    }
    Ok(match status {
        Status::Holds => ExitCode::SUCCESS,
        Status::Falsified => ExitCode::from(1),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be positive");
            return ExitCode::from(2);
        }
        pool = pool.num_threads(jobs);
    }
    let pool = match pool.build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| run(cli)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
