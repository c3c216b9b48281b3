//! Runs every acceptance criterion and prints one PASS/FAIL line per criterion.

use std::process::ExitCode;

use si2d_core::verify;

fn main() -> ExitCode {
    let reports = verify::run_all();
    for report in &reports {
        println!("{}", report.summary());
    }
    let failed: Vec<u8> = reports.iter().filter(|r| !r.pass).map(|r| r.id).collect();
    if failed.is_empty() {
        println!("acceptance: {} criteria passed", reports.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
