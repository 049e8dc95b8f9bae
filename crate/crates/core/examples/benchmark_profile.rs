// The large reference workload: 668 riders and 200 drivers over 30 minutes,
// arriving in fixed groups per 30 s batch.
//
// ```text
// cargo run --release --example benchmark_profile
// ```

use std::error::Error;

use rideshare::harness::{generate, grid_network, GenParams, GridSpec};
use rideshare::roadnet::NetConfig;
use rideshare::{rng, sim, MatcherKind, SimConfig};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let params = GenParams::benchmark();
    let net = grid_network(GridSpec::random(40, 100.0, 300.0), &mut rng::stream(7, &[0]), NetConfig::default())?;
    let inst = generate(&net, &params, &mut rng::stream(7, &[1]))?;
    println!("{} riders, {} drivers", inst.riders().count(), inst.drivers().count());

    let cfg = SimConfig { matcher: rideshare::Matcher::with_defaults(MatcherKind::Greedy), ..Default::default() };
    let report = sim::run(&inst.to_scenario(&net, params.speed)?, &cfg, &net)?;
    let arrivals: Vec<usize> = report.batches.iter().map(|b| b.rider_arrivals).collect();
    println!("rider arrivals per batch: {arrivals:?}");
    println!(
        "matching rate {:.3}, overhead {:.0} m",
        report.matching_rate.unwrap_or(0.0),
        report.cumulative.overhead_sum
    );
    assert_eq!(report.batches.len(), 60);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
