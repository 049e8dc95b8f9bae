// Sweep BBO's initialisation ratio and rollback switch on one instance.
//
// ```text
// cargo run --example sweep
// ```

use std::error::Error;

use rideshare::harness::{self, RunConfig, SweepCase};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let cfg = RunConfig { drivers: 8, riders: 30, horizon_seconds: 300, grid: 12, seed: 2, ..Default::default() };
    let net = harness::network(&cfg, None, None)?;
    let inst = harness::instance(&cfg, &net, None)?;
    let rows = harness::sweep(&cfg, &SweepCase::reference(), &inst, &net)?;
    println!("case  H     RB     overhead   M_R     cost");
    for r in &rows {
        println!(
            "{:>4}  {:<4}  {:<5}  {:>9.0}  {:.3}  {:.4}",
            r.case,
            r.hybrid_ratio,
            r.rollback,
            r.overhead_sum,
            r.matching_rate.unwrap_or(f64::NAN),
            r.cost.unwrap_or(f64::NAN)
        );
    }
    print!("{}", harness::report::rows_csv(&rows));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
