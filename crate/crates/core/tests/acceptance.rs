//! Desk-scale acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p dehnlab --test acceptance`. Set
//! `DEHNLAB_ACCEPTANCE=1,4` to run a subset and `DEHNLAB_SEED` to change the
//! master seed.

use std::process::ExitCode;

use dehnlab::acceptance::{self, CriterionResult, DEFAULT_SUITE_SEED};

fn main() -> ExitCode {
    let seed = std::env::var("DEHNLAB_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_SUITE_SEED);
    let only: Option<Vec<u32>> = std::env::var("DEHNLAB_ACCEPTANCE")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let criteria: [(u32, fn(u64) -> CriterionResult); 9] = [
        (1, acceptance::criterion_1),
        (2, acceptance::criterion_2),
        (3, acceptance::criterion_3),
        (4, acceptance::criterion_4),
        (5, acceptance::criterion_5),
        (6, acceptance::criterion_6),
        (7, acceptance::criterion_7),
        (8, acceptance::criterion_8),
        (9, acceptance::criterion_9),
    ];
    let mut failed = Vec::new();
    for (id, run) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let r = run(seed);
        println!("{r}");
        for line in &r.detail {
            println!("    {line}");
        }
        if !r.passed {
            failed.push(r.id.clone());
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
