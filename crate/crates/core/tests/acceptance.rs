//! Prints one pass/fail line per acceptance criterion. Failures are reported, not
//! panicked on, so every criterion is always measured.

use tfweyl::verification::run_criterion;

fn main() {
    let seed = std::env::var("TFWEYL_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(20240601);
    let mut failed = Vec::new();
    for id in 1..=10 {
        let outcome = run_criterion(id, seed);
        println!("{}", outcome.line());
        if !outcome.passed {
            failed.push(id);
        }
    }
    println!("acceptance: {} of 10 criteria pass; failing: {:?}", 10 - failed.len(), failed);
}
