// Simulate a morning of requests with batched matching.
//
// ```text
// cargo run --example simulate
// ```

use std::error::Error;

use rideshare::harness::report::Summary;
use rideshare::harness::{self, RunConfig};
use rideshare::sim::{self, EventKind};
use rideshare::MatcherKind;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let cfg = RunConfig { drivers: 25, riders: 50, horizon_seconds: 600, grid: 15, seed: 1, ..Default::default() };
    let net = harness::network(&cfg, None, None)?;
    let scenario = harness::instance(&cfg, &net, None)?.to_scenario(&net, cfg.speed)?;

    let report = sim::run(&scenario, &cfg.sim(MatcherKind::Greedy), &net)?;
    let s = Summary::of("greedy", &report);
    println!(
        "matched {}/{} riders, {:.0} m extra driving, mean wait {:.1} s",
        s.matched, s.riders, s.overhead_sum, s.delay_mean
    );
    for b in report.batches.iter().take(5) {
        println!(
            "batch {:>2} t={:>4} pool={:>2} matched={:>2} cost={:.3}",
            b.index, b.clock, b.snapshot.total_riders, b.snapshot.matched_count, b.cost
        );
    }
    let first_drop = report.events.iter().find(|e| e.kind == EventKind::Dropoff);
    if let Some(e) = first_drop {
        println!("first dropoff: {e}");
    }
    assert!(report.defects.is_empty());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
