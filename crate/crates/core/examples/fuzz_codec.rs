//! A short seeded fuzz of the codec. The CLI's `fuzz-protocol` runs the
//! same harness at full size.

use sumbrella::fuzz::{chunking_trials, fuzz_protocol};

pub fn run_example(n: u64, seed: u64) -> bool {
    let report = fuzz_protocol(n, seed);
    println!(
        "seed {seed}: {} round trips, {} corruptions tried, {} undetected, {} resync failures",
        report.round_trips, report.resync_trials, report.undetected_corruptions, report.resync_failures
    );
    for f in report.failures.iter().take(5) {
        println!("  #{}: {}", f.index, f.what);
    }
    let bad = chunking_trials(50, 40, seed);
    println!("chunking: {} of 50 trials disagreed", bad.len());
    report.passed() && bad.is_empty()
}

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(42);
    if !run_example(5_000, seed) {
        std::process::exit(3);
    }
}
