//! Runs the twelve acceptance criteria and prints one line per criterion.

use std::process::ExitCode;

use eislab::harness::acceptance::{run_criterion, CRITERIA};
use eislab::harness::baselines::Baselines;

fn main() -> ExitCode {
    let baselines = Baselines::embedded();
    let mut failed = Vec::new();
    for id in 1..=CRITERIA {
        match run_criterion(id, &baselines) {
            Ok(c) => {
                println!("{}", c.line());
                if !c.accepted() {
                    failed.push(id);
                }
            }
            Err(e) => {
                println!("criterion {id:>2} FAIL error: {e}");
                failed.push(id);
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {CRITERIA} criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing criteria {failed:?}");
        ExitCode::FAILURE
    }
}
