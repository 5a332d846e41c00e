//! Run the built-in reference scenarios, optionally a subset:
//! `cargo run --example reference_suite -- S3 S9`.

use nsx::suite::{reference_scenarios, run_reference_suite, RunOptions};

fn main() {
    let only: Vec<String> = std::env::args().skip(1).collect();
    for p in reference_scenarios() {
        println!("{:>4}  {}", p.id, p.anchor);
    }
    println!();
    let report = run_reference_suite(&RunOptions::default(), (!only.is_empty()).then_some(&only[..]));
    print!("{}", report.text());
    let failed: Vec<&str> = report.scenarios.iter().filter(|s| !s.passed()).map(|s| s.id.as_str()).collect();
    println!("\nscenarios not as expected: {failed:?}");
}
