// Load a small road network and query shortest paths.
//
// ```text
// cargo run --example shortest_paths
// ```

use std::error::Error;

use rideshare::roadnet::{load_network, NetConfig};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    // (id, lat, lon) and undirected (u, v, meters)
    let nodes = [(1, 0.0, 0.0), (2, 0.0, 1.0), (3, 1.0, 1.0), (4, 1.0, 0.0), (5, 2.0, 0.5)];
    let edges = [(1, 2, 400.0), (2, 3, 300.0), (3, 4, 350.0), (4, 1, 900.0), (3, 5, 200.0)];
    let net = load_network(nodes, edges, NetConfig::default())?;

    let (a, b) = (net.node(1).ok_or("no node 1")?, net.node(5).ok_or("no node 5")?);
    let path = net.msp(a, b)?;
    let hops: Vec<u64> = path.hops.iter().map(|&v| net.ext_id(v)).collect();
    println!("1 -> 5: {} m via {hops:?}", path.distance);
    assert_eq!(path.distance, 900.0);

    // the detour through 4 is longer than going 1 -> 2 -> 3 -> 4
    let d14 = net.distance(a, net.node(4).ok_or("no node 4")?)?;
    println!("1 -> 4: {d14} m");
    assert_eq!(d14, 900.0);

    let tour = net.schedule_distance(&[a, b, a])?;
    println!("round trip 1 -> 5 -> 1: {tour} m, {} cached pairs", net.cache_len());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
