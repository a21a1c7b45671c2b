use std::io::Write;

use twisted_core::acceptance::run_all;

const SEED: u64 = 0x5eed_2026;

#[test]
fn acceptance_criteria() {
    let results = run_all(SEED, 1.0);
    // Written to the stderr handle directly so the lines show without --nocapture.
    let mut err = std::io::stderr().lock();
    for r in &results {
        writeln!(err, "{}", r.line()).unwrap();
    }
    let failed: Vec<u32> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
