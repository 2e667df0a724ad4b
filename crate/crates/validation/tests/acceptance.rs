//! Runs every acceptance criterion and prints one PASS/FAIL line each.
//!
//! Pass criterion numbers as arguments to run a subset:
//! `cargo test -p kinetics-validation --test acceptance -- 4 7`.

use std::process::ExitCode;
use std::time::Instant;

use kinetics_validation::CRITERIA;

fn main() -> ExitCode {
    let only: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = Vec::new();
    for c in CRITERIA
        .iter()
        .filter(|c| only.is_empty() || only.contains(&c.id))
    {
        let start = Instant::now();
        let (pass, detail) = match (c.check)() {
            Ok(v) => (v.pass, v.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        println!(
            "{} [{:>2}] {} ({:.1} s): {detail}",
            if pass { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            start.elapsed().as_secs_f64()
        );
        if !pass {
            failed.push(c.id);
        }
    }
    if failed.is_empty() {
        println!("all acceptance criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
