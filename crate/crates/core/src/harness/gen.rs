//! Synthetic road networks and instances.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::instance::{Instance, InstanceRecord};
use crate::rng::Rng;
use crate::roadnet::{load_network, LoadError, NetConfig, NodeId, RoadNetwork};

#[derive(Debug, Error)]
pub enum GenError {
    #[error("no reachable origin/destination pair found after {0} draws")]
    NoReachablePair(usize),
    #[error("invalid generator parameters: {0}")]
    Params(String),
    #[error(transparent)]
    Load(#[from] LoadError),
}

/// An `n × n` lattice. Vertex `(i, j)` has external id `i·n + j` and sits at
/// coordinates `(i·s, j·s)` where `s` is the mean edge weight.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub min_weight: f64,
    pub max_weight: f64,
}

impl GridSpec {
    pub fn unit(n: usize) -> Self {
        Self { n, min_weight: 1.0, max_weight: 1.0 }
    }

    pub fn random(n: usize, min_weight: f64, max_weight: f64) -> Self {
        Self { n, min_weight, max_weight }
    }
}

pub fn grid_network(spec: GridSpec, rng: &mut Rng, cfg: NetConfig) -> Result<RoadNetwork, GenError> {
    if spec.n == 0 || !(spec.min_weight > 0.0 && spec.min_weight <= spec.max_weight) {
        return Err(GenError::Params(format!("bad grid {spec:?}")));
    }
    let n = spec.n as u64;
    let s = (spec.min_weight + spec.max_weight) / 2.0;
    let nodes: Vec<_> = (0..n * n).map(|id| (id, (id / n) as f64 * s, (id % n) as f64 * s)).collect();
    let mut weight = || {
        if spec.min_weight == spec.max_weight {
            spec.min_weight
        } else {
            rng.gen_range(spec.min_weight..=spec.max_weight).round().max(spec.min_weight)
        }
    };
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let id = i * n + j;
            if j + 1 < n {
                edges.push((id, id + 1, weight()));
            }
            if i + 1 < n {
                edges.push((id, id + n, weight()));
            }
        }
    }
    Ok(load_network(nodes, edges, cfg)?)
}

/// Node and edge file contents for `net`.
pub fn network_text(net: &RoadNetwork) -> (String, String) {
    let mut nodes = String::from("# id lat lon\n");
    for v in net.nodes() {
        let x = net.vertex(v);
        let _ = writeln!(nodes, "{} {} {}", x.ext_id, x.lat, x.lon);
    }
    let mut edges = String::from("# u v w\n");
    for (u, v, w) in net.edge_records() {
        let _ = writeln!(edges, "{u} {v} {w}");
    }
    (nodes, edges)
}

pub fn save_network(net: &RoadNetwork, nodes: &Path, edges: &Path) -> std::io::Result<()> {
    let (n, e) = network_text(net);
    std::fs::write(nodes, n)?;
    std::fs::write(edges, e)
}

/// When riders and drivers show up.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ArrivalProfile {
    /// Integer arrival times drawn uniformly from `[0, horizon)`.
    Uniform,
    /// Fixed arrival counts per window of `window_seconds`. Group `g` of
    /// size `k` spreads its arrivals evenly over `(g·w, (g+1)·w]`. Groups past
    /// the horizon share the last window.
    Grouped {
        window_seconds: u64,
        riders: Vec<usize>,
        drivers: Vec<usize>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub driver_count: usize,
    pub rider_count: usize,
    pub horizon_seconds: u64,
    pub capacity: u32,
    /// Driver deadline as a multiple of the direct travel time.
    pub driver_slack: f64,
    /// Rider deadline as a multiple of the direct travel time.
    pub rider_slack: f64,
    /// Speed used to turn distances into travel times.
    pub speed: f64,
    /// Scales the rider count of a uniform profile.
    pub rate_multiplier: f64,
    pub profile: ArrivalProfile,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            driver_count: 20,
            rider_count: 60,
            horizon_seconds: 600,
            capacity: 3,
            driver_slack: 2.0,
            rider_slack: 2.0,
            speed: 10.0,
            rate_multiplier: 1.0,
            profile: ArrivalProfile::Uniform,
        }
    }
}

impl GenParams {
    /// 668 riders and 200 drivers over 30 minutes: 11 riders per 30 s window
    /// plus a final group of 8; 22 drivers up front, 3 per window after, and
    /// a final one.
    pub fn benchmark() -> Self {
        let mut riders = vec![11; 60];
        riders.push(8);
        let mut drivers = vec![22];
        drivers.extend(std::iter::repeat_n(3, 59));
        drivers.push(1);
        Self {
            driver_count: 200,
            rider_count: 668,
            horizon_seconds: 1800,
            profile: ArrivalProfile::Grouped {
                window_seconds: 30,
                riders,
                drivers,
            },
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), GenError> {
        let bad = |m: &str| Err(GenError::Params(m.to_string()));
        if self.driver_slack < 1.0 || self.rider_slack < 1.0 {
            return bad("slack factors must be at least 1");
        }
        if !(self.speed > 0.0) {
            return bad("speed must be positive");
        }
        if self.capacity == 0 {
            return bad("capacity must be positive");
        }
        if !(self.rate_multiplier >= 0.0 && self.rate_multiplier.is_finite()) {
            return bad("rate multiplier must be non-negative");
        }
        if self.horizon_seconds == 0 {
            return bad("horizon must be positive");
        }
        if let ArrivalProfile::Grouped { window_seconds, riders, drivers } = &self.profile {
            if *window_seconds == 0 || !self.horizon_seconds.is_multiple_of(*window_seconds) {
                return bad("window must divide the horizon");
            }
            if riders.iter().sum::<usize>() != self.rider_count
                || drivers.iter().sum::<usize>() != self.driver_count
            {
                return bad("group sizes must sum to the counts");
            }
        }
        Ok(())
    }

    fn effective_riders(&self) -> usize {
        match self.profile {
            ArrivalProfile::Uniform => (self.rider_count as f64 * self.rate_multiplier).round() as usize,
            ArrivalProfile::Grouped { .. } => self.rider_count,
        }
    }
}

fn grouped_times(groups: &[usize], window: u64, horizon: u64) -> Vec<f64> {
    let last = horizon / window - 1;
    let mut out = Vec::new();
    for (g, &k) in groups.iter().enumerate() {
        let base = (g as u64).min(last) * window;
        for j in 0..k as u64 {
            out.push((base + (window * (j + 1)).div_ceil(k as u64)) as f64);
        }
    }
    out
}

const MAX_DRAWS: usize = 10_000;

fn sample_trip(net: &RoadNetwork, rng: &mut Rng) -> Result<(NodeId, NodeId, f64), GenError> {
    let n = net.vertex_count() as u32;
    if n >= 2 {
        for _ in 0..MAX_DRAWS {
            let o = NodeId(rng.gen_range(0..n));
            let d = NodeId(rng.gen_range(0..n));
            if o == d {
                continue;
            }
            if let Ok(dist) = net.distance(o, d) {
                return Ok((o, d, dist));
            }
        }
    }
    Err(GenError::NoReachablePair(MAX_DRAWS))
}

/// Draws an instance on `net`. Riders get ids `1..=R` and drivers
/// `R+1..=R+D`; records are ordered by appearance time.
pub fn generate(net: &RoadNetwork, p: &GenParams, rng: &mut Rng) -> Result<Instance, GenError> {
    p.validate()?;
    let riders = p.effective_riders();
    let (rider_times, driver_times) = match &p.profile {
        ArrivalProfile::Uniform => {
            let mut draw = |k| (0..k).map(|_| rng.gen_range(0..p.horizon_seconds) as f64).collect::<Vec<_>>();
            let r = draw(riders);
            (r, draw(p.driver_count))
        }
        ArrivalProfile::Grouped { window_seconds, riders, drivers } => (
            grouped_times(riders, *window_seconds, p.horizon_seconds),
            grouped_times(drivers, *window_seconds, p.horizon_seconds),
        ),
    };
    let mut records = Vec::with_capacity(rider_times.len() + driver_times.len());
    for (i, &t) in rider_times.iter().enumerate() {
        let (o, d, dist) = sample_trip(net, rng)?;
        records.push(InstanceRecord {
            id: i as u64 + 1,
            origin: net.ext_id(o),
            destination: net.ext_id(d),
            early: t,
            late: t + p.rider_slack * dist / p.speed,
            load: 1,
        });
    }
    for (i, &t) in driver_times.iter().enumerate() {
        let (o, d, dist) = sample_trip(net, rng)?;
        records.push(InstanceRecord {
            id: (rider_times.len() + i) as u64 + 1,
            origin: net.ext_id(o),
            destination: net.ext_id(d),
            early: t,
            late: t + p.driver_slack * dist / p.speed,
            load: -(p.capacity as i64),
        });
    }
    records.sort_by(|a, b| a.early.total_cmp(&b.early));
    Ok(Instance { records })
}

/// Random connected graph used by tests and examples: a random spanning tree
/// plus `extra` chords, integer weights in `1..=max_weight`.
pub fn random_connected(n: usize, extra: usize, max_weight: u32, rng: &mut Rng) -> Result<RoadNetwork, GenError> {
    if n == 0 || max_weight == 0 {
        return Err(GenError::Params("empty graph".into()));
    }
    let mut order: Vec<u64> = (0..n as u64).collect();
    order.shuffle(rng);
    let nodes: Vec<_> = (0..n as u64)
        .map(|i| (i, rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0)))
        .collect();
    let mut edges = Vec::new();
    for k in 1..n {
        let parent = order[rng.gen_range(0..k)];
        edges.push((order[k], parent, rng.gen_range(1..=max_weight) as f64));
    }
    for _ in 0..extra {
        let u = rng.gen_range(0..n as u64);
        let v = rng.gen_range(0..n as u64);
        if u != v {
            edges.push((u, v, rng.gen_range(1..=max_weight) as f64));
        }
    }
    Ok(load_network(nodes, edges, NetConfig::default())?)
}
