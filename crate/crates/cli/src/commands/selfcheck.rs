use super::{parse_flag, Report};
use crate::acceptance::{run_check, IDS};
use crate::cli::SelfcheckArgs;
use crate::config::{List, Settings};
use crate::error::{CliError, Result};

/// Runs the selected checks, printing one line per check followed by its
/// diagnostics; fails if any check fails.
pub fn run(args: &SelfcheckArgs, mut s: Settings) -> Result<Report> {
    let only: List<u8> = s.value("only", parse_flag("only", args.only.as_deref())?, List(IDS.to_vec()))?;
    if let Some(bad) = only.0.iter().find(|id| !IDS.contains(id)) {
        return Err(CliError::Usage(format!("no check numbered {bad}; checks are 1–11")));
    }
    let mut failed = Vec::new();
    for &id in &only.0 {
        let report = run_check(id);
        println!("{}", report.line());
        for note in &report.notes {
            println!("    {note}");
        }
        if !report.passed {
            failed.push(id.to_string());
        }
    }
    if failed.is_empty() {
        Ok(Report::default())
    } else {
        Err(CliError::ChecksFailed(format!("failed checks: {}", failed.join(", "))))
    }
}
