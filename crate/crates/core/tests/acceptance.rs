//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! with the measured numbers, and exits non-zero if any criterion fails.

use pluripot::acceptance::{CriterionReport, CRITERIA};

fn main() {
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    let mut ran = 0;
    for (i, criterion) in CRITERIA.iter().enumerate() {
        let id = i as u32 + 1;
        let name = format!("criterion_{id:02}");
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        ran += 1;
        let report = criterion().unwrap_or_else(|e| CriterionReport {
            id,
            title: "error",
            passed: false,
            detail: e.to_string(),
        });
        println!("{}", report.line());
        if !report.passed {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
