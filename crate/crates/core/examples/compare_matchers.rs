// Match one batch with each of the four strategies.
//
// ```text
// cargo run --example compare_matchers
// ```

use std::error::Error;

use rideshare::harness::{self, RunConfig};
use rideshare::{Batch, CostParams, Matcher, MatcherKind};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let cfg = RunConfig { drivers: 8, riders: 24, horizon_seconds: 300, grid: 12, seed: 11, ..Default::default() };
    let net = harness::network(&cfg, None, None)?;
    let scenario = harness::instance(&cfg, &net, None)?.to_scenario(&net, cfg.speed)?;

    // everyone who has shown up by t = 120 s forms one pool
    let now = 120.0;
    let riders: Vec<_> = scenario.riders.iter().filter(|r| r.early <= now).cloned().collect();
    let drivers: Vec<_> = scenario.drivers.iter().filter(|d| d.early <= now).cloned().collect();
    let batch = Batch::new(&net, &riders, &drivers, now, CostParams::default());
    println!("{} riders, {} drivers", riders.len(), drivers.len());

    for kind in MatcherKind::ALL {
        let plan = cfg.matcher_for(kind).run(&batch, cfg.seed);
        plan.check(&batch)?;
        println!("{:<7} matched {:>2}  cost {:.4}", kind.name(), plan.matched(), plan.cost);
    }
    let greedy = Matcher::with_defaults(MatcherKind::Greedy).run(&batch, 0);
    println!("unmatched under greedy: {:?}", greedy.unmatched.iter().map(|r| r.0).collect::<Vec<_>>());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
