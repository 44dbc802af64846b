//! The golden report corpus: a fixed list of invocations whose canonical
//! reports are stored one file each and compared byte for byte.

use std::path::Path;
use std::process::ExitCode;

use anyhow::{ensure, Context};
use clap::Parser;

use crate::commands::{GoldensArgs, GoldensMode};
use crate::{build_report, Cli};

pub const CORPUS: &[&str] = &[
    "lemma skr --k 2 --r 6",
    "lemma skr --k 3 --r 8",
    "lemma skr --k 4 --r 7",
    "lemma lucas --alpha 1000 --beta 37 --p 7",
    "lemma nonquad --p 5",
    "lemma nonquad --p 499",
    "classify --p 13 --k 3",
    "classify --p 5 --ext 2 --k 2",
    "classify --p 7 --ext 2 --k 2",
    "classify --p 5 --ext 2 --k 3",
    "classify --p 7 --ext 2 --k 3",
    "classify --p 5 --ext 4 --k 2 --coprime --frobenius",
    "classify --p 5 --ext 4 --k 3 --coprime --frobenius",
    "test --p 5 --ext 4 --k 2 --n 7",
    "test --p 5 --ext 4 --k 2 --n 27",
    "test --p 7 --ext 2 --k 2 --n 9 --full",
    "exceptional --case k2-d1",
    "exceptional --case k2-d2",
    "exceptional --case k2-d3",
    "exceptional --case k3-e1",
    "exceptional --case k3-e2",
    "weil --p 5",
    "counterexample --p 5",
    "counterexample --p 13",
    "coeff --case k2-d0 --p 7 --t 1",
    "coeff --case k2-d1 --p 7 --t 2",
    "coeff --case k2-half-b --p 5 --t 1",
    "coeff --case k3-e2 --p 7 --t 1",
    "coeff --case k3-half --p 7 --t 1",
    "collide --p 17 --ext 4 --case k3-e1 --b 5",
    "collide --p 101 --ext 4 --case k3-e2 --b 34 --strategy birthday --budget 1000000",
    "collide --p 5 --ext 2 --n 3 --dirs 1;2",
];

/// File name for an invocation: its words joined by underscores, with
/// characters outside `[A-Za-z0-9.-]` dropped.
pub fn file_name(invocation: &str) -> String {
    let words: Vec<String> = invocation
        .split_whitespace()
        .map(|w| {
            w.trim_start_matches("--")
                .chars()
                .filter(|c| c.is_ascii_alphanumeric() || *c == '-' || *c == '.')
                .collect()
        })
        .collect();
    words.join("_") + ".json"
}

fn render(invocation: &str, verify: bool) -> anyhow::Result<String> {
    let argv = std::iter::once("kpnlab").chain(invocation.split_whitespace());
    let cli = Cli::try_parse_from(argv).with_context(|| format!("parsing `{invocation}`"))?;
    let (report, _) =
        build_report(&cli.command, verify).with_context(|| format!("running `{invocation}`"))?;
    Ok(report.canonical())
}

pub fn run(args: &GoldensArgs, verify: bool) -> anyhow::Result<ExitCode> {
    let dir = &args.dir;
    match args.mode {
        GoldensMode::Record => {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            for inv in CORPUS {
                let path = dir.join(file_name(inv));
                std::fs::write(&path, render(inv, verify)?)
                    .with_context(|| format!("writing {}", path.display()))?;
                println!("recorded {}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        GoldensMode::Check => {
            ensure!(
                dir.is_dir(),
                "golden directory {} does not exist",
                dir.display()
            );
            let mismatches = check(dir, verify)?;
            for m in &mismatches {
                println!("MISMATCH {m}");
            }
            println!(
                "{} of {} reports match",
                CORPUS.len() - mismatches.len(),
                CORPUS.len()
            );
            Ok(if mismatches.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

/// Names of golden files that are missing or differ from a fresh run.
fn check(dir: &Path, verify: bool) -> anyhow::Result<Vec<String>> {
    let mut bad = Vec::new();
    for inv in CORPUS {
        let name = file_name(inv);
        let fresh = render(inv, verify)?;
        match std::fs::read_to_string(dir.join(&name)) {
            Ok(stored) if stored == fresh => {}
            _ => bad.push(name),
        }
    }
    Ok(bad)
}
