//! Scenario files: parse, print canonically, run, and emit the report.

use nsx::dsl::{parse, print};
use nsx::suite::{run_scenario, Report, RunOptions};

const SOURCE: &str = r#"
scenario demo "a contact form and a degenerate 2-form"
chart C3 (x, y, z)
form a on C3 = d(z) + x*d(y)
check contact a
check closed d(a)
check equal a /\ d(a) = d(x) /\ d(y) /\ d(z)

chart R4 (t, y1, y2, y3)
form w on R4 = d(t) /\ d(y1) + y1*d(y2) /\ d(y3)
check rank_at w at (0, 0, 0, 0) = 2
check closed w expect fail note "d(y1 dy2 dy3) is not zero"
"#;

fn main() -> nsx::Result<()> {
    let s = parse(SOURCE)?;
    println!("{}", print(&s));
    let opts = RunOptions::default();
    let report = Report::new(opts.seed, vec![run_scenario(&s, "inline example", &opts)]);
    print!("{}", report.text());
    println!("passed: {}", report.passed());

    match parse("chart C (x, y)\nform w on C = d(x) /\\ ") {
        Ok(_) => unreachable!(),
        Err(e) => println!("malformed input -> {e}"),
    }
    Ok(())
}
