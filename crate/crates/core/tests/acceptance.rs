//! Acceptance gate: one line per criterion, nonzero exit on any failure.

use omsq::runner::selfcheck::{run, Oracles, CHECK_COUNT};

fn main() {
    let report = run(&Oracles::default());
    assert_eq!(report.checks.len(), CHECK_COUNT);
    for line in report.lines() {
        println!("{line}");
    }
    let failed: Vec<u32> = report.checks.iter().filter(|c| !c.passed).map(|c| c.id).collect();
    println!("acceptance: {} of {} criteria passed", CHECK_COUNT - failed.len(), CHECK_COUNT);
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
