// Run the biogeography-based optimiser on one batch and watch it converge.
//
// ```text
// cargo run --example bbo_batch
// ```

use std::error::Error;

use rideshare::bbo::{evolve_population, init_population};
use rideshare::harness::{self, RunConfig};
use rideshare::matchers::greedy_match;
use rideshare::{BBOConfig, Batch, CostParams};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let cfg = RunConfig { drivers: 10, riders: 40, horizon_seconds: 300, grid: 12, seed: 3, ..Default::default() };
    let net = harness::network(&cfg, None, None)?;
    let scenario = harness::instance(&cfg, &net, None)?.to_scenario(&net, cfg.speed)?;
    let now = 180.0;
    let riders: Vec<_> = scenario.riders.iter().filter(|r| r.early <= now).cloned().collect();
    let drivers: Vec<_> = scenario.drivers.iter().filter(|d| d.early <= now).cloned().collect();
    let batch = Batch::new(&net, &riders, &drivers, now, CostParams::default());

    let bbo = BBOConfig { generation_limit: 30, seed: 5, ..Default::default() };
    bbo.validate()?;
    let start = init_population(&batch, &bbo);
    let costs: Vec<String> = start.candidates.iter().map(|c| format!("{:.3}", c.cost())).collect();
    println!("initial habitats: {}", costs.join(" "));

    let (pop, trace) = evolve_population(&batch, &bbo);
    println!("best cost by generation: {:?}", trace.iter().map(|c| (c * 1e4).round() / 1e4).collect::<Vec<_>>());
    println!("greedy {:.4}  bbo {:.4}", greedy_match(&batch).cost, pop.best.cost());
    assert!(trace.windows(2).all(|w| w[1] <= w[0]));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
