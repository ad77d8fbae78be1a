//! Acceptance suite: runs every criterion and prints one PASS/FAIL line each,
//! followed by its diagnostic notes. Exits non-zero if any criterion fails.
//!
//! `cargo test -p qnrate-cli --test acceptance` runs all of them; pass check
//! numbers (`-- 4 9`) to run a subset.

use std::process::{Command, ExitCode};

use qnrate_cli::acceptance::{run_check, run_check_with, CheckReport, IDS};

/// Determinism is checked through the real binary rather than in-process.
fn binary(args: &[String]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_qnrate")).args(args).output().map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(String::from_utf8_lossy(&out.stderr).trim().to_string())
    }
}

fn check(id: u8) -> CheckReport {
    match id {
        11 => run_check_with(id, &binary),
        _ => run_check(id),
    }
}

/// Check numbers given on the command line; libtest-style flags are ignored.
fn selected() -> Vec<u8> {
    let picked: Vec<u8> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).filter(|id| IDS.contains(id)).collect();
    if picked.is_empty() {
        IDS.to_vec()
    } else {
        picked
    }
}

fn main() -> ExitCode {
    let mut failed = Vec::new();
    for id in selected() {
        let report = check(id);
        println!("{}", report.line());
        for note in &report.notes {
            println!("    {note}");
        }
        if !report.passed {
            failed.push(id.to_string());
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {}", failed.join(", "));
        ExitCode::FAILURE
    }
}
