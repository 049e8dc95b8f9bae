// Insert riders into a driver's schedule at the cheapest feasible position.
//
// ```text
// cargo run --example insertion
// ```

use std::error::Error;

use rideshare::domain::{distance_overhead, insert_rider, validate_schedule};
use rideshare::roadnet::{load_network, NetConfig};
use rideshare::{Driver, DriverId, Rider, RiderId};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    // a straight road 0 - 1 - 2 - 3 - 4, 100 m per block
    let nodes: Vec<_> = (0..5).map(|i| (i, 0.0, i as f64)).collect();
    let edges: Vec<_> = (0..4).map(|i| (i, i + 1, 100.0)).collect();
    let net = load_network(nodes, edges, NetConfig::default())?;
    let v = |i: u64| net.node(i).ok_or("missing vertex");

    let mut driver = Driver::new(DriverId(1), v(0)?, v(4)?, 0.0, 200.0, 3, 10.0)?;
    let riders = [
        Rider::new(RiderId(1), v(1)?, v(3)?, 0.0, 60.0)?,
        Rider::new(RiderId(2), v(2)?, v(4)?, 0.0, 60.0)?,
        // going the wrong way: costs a detour
        Rider::new(RiderId(3), v(3)?, v(0)?, 0.0, 200.0)?,
    ];
    for r in &riders {
        match insert_rider(&driver, r, &net, 0.0) {
            Some(ins) => {
                println!(
                    "rider {} -> pickup at {}, dropoff at {}, +{} m",
                    r.id.0, ins.pickup_index, ins.dropoff_index, ins.added_distance
                );
                assert!(validate_schedule(&driver, &ins.schedule, &net, 0.0).is_ok());
                driver.schedule = ins.schedule;
            }
            None => println!("rider {} does not fit", r.id.0),
        }
    }
    let stops: Vec<String> = driver
        .schedule
        .stops()
        .iter()
        .map(|s| match s.rider() {
            Some(r) => format!("{}@{}", r.0, net.ext_id(s.vertex)),
            None => format!("@{}", net.ext_id(s.vertex)),
        })
        .collect();
    println!("schedule: {}", stops.join(" -> "));
    println!("overhead: {} m", distance_overhead(&driver, &net)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
