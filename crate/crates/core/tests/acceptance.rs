//! Acceptance criteria, one line per criterion.

use std::process::ExitCode;

use polyens::verify::{run_all, Status, VerifyOptions};

fn main() -> ExitCode {
    let quick = std::env::args().any(|a| a == "--quick");
    let report = run_all(VerifyOptions {
        quick,
        ..VerifyOptions::default()
    });
    println!("acceptance: {} criteria (quick = {quick})", report.criteria.len());
    for c in &report.criteria {
        println!("{}", c.line());
    }
    let failed = report.criteria.iter().filter(|c| c.status == Status::Fail).count();
    println!(
        "acceptance result: {} ({} failed)",
        if failed == 0 { "ok" } else { "FAILED" },
        failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
