//! Experiment plumbing: instance files and generation, configs, reports and
//! the command-line front end.

pub mod cli;
pub mod config;
pub mod gen;
pub mod instance;
pub mod report;

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::{ConfigError, RunConfig};
pub use gen::{generate, grid_network, ArrivalProfile, GenError, GenParams, GridSpec};
pub use instance::{load_instance, save_instance, Instance, InstanceError, InstanceRecord};
pub use report::{ReportError, Summary};

use crate::matchers::MatcherKind;
use crate::rng;
use crate::roadnet::{load_network_files, LoadError, RoadNetwork};
use crate::sim::{self, SimError, SimReport};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Network(#[from] LoadError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("{0}")]
    Usage(String),
}

const GRID_STREAM: u64 = 0x6721;
const INSTANCE_STREAM: u64 = 0x1257;

/// Loads a network from files when both paths are given, otherwise builds
/// the configured grid from the run seed.
pub fn network(cfg: &RunConfig, nodes: Option<&Path>, edges: Option<&Path>) -> Result<RoadNetwork, HarnessError> {
    match (nodes, edges) {
        (Some(n), Some(e)) => Ok(load_network_files(n, e, cfg.net())?),
        (None, None) => {
            let mut rng = rng::stream(cfg.seed, &[GRID_STREAM]);
            Ok(grid_network(cfg.grid_spec(), &mut rng, cfg.net())?)
        }
        _ => Err(HarnessError::Usage(
            "--network-nodes and --network-edges must be given together".into(),
        )),
    }
}

/// Loads `path` or, when absent, generates an instance from the config.
pub fn instance(cfg: &RunConfig, net: &RoadNetwork, path: Option<&Path>) -> Result<Instance, HarnessError> {
    match path {
        Some(p) => Ok(load_instance(p)?),
        None => {
            let mut rng = rng::stream(cfg.seed, &[INSTANCE_STREAM]);
            Ok(generate(net, &cfg.gen()?, &mut rng)?)
        }
    }
}

pub fn run_one(cfg: &RunConfig, kind: MatcherKind, inst: &Instance, net: &RoadNetwork) -> Result<SimReport, HarnessError> {
    let scenario = inst.to_scenario(net, cfg.speed)?;
    Ok(sim::run(&scenario, &cfg.sim(kind), net)?)
}

/// Runs every matcher on the same instance and seed, in the fixed order
/// greedy, nn, sa, bbo.
pub fn compare(cfg: &RunConfig, inst: &Instance, net: &RoadNetwork) -> Result<Vec<SimReport>, HarnessError> {
    MatcherKind::ALL
        .par_iter()
        .map(|&k| run_one(cfg, k, inst, net))
        .collect()
}

/// One BBO parameter set of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepCase {
    pub population_size: usize,
    pub generation_limit: usize,
    pub hybrid_ratio: f64,
    pub elite_count: usize,
    pub rollback: bool,
    pub alpha: f64,
}

impl SweepCase {
    /// The four reference cases: H ∈ {0.85, 1} × rollback ∈ {on, off},
    /// N = 20, 10 generations, one elite, α = 0.5.
    pub fn reference() -> Vec<Self> {
        let mut out = Vec::new();
        for hybrid_ratio in [0.85, 1.0] {
            for rollback in [true, false] {
                out.push(Self {
                    population_size: 20,
                    generation_limit: 10,
                    hybrid_ratio,
                    elite_count: 1,
                    rollback,
                    alpha: 0.5,
                });
            }
        }
        out
    }

    fn apply(&self, cfg: &RunConfig) -> RunConfig {
        RunConfig {
            population_size: self.population_size,
            generation_limit: self.generation_limit,
            hybrid_ratio: self.hybrid_ratio,
            elite_count: self.elite_count,
            rollback: self.rollback,
            alpha: self.alpha,
            ..cfg.clone()
        }
    }
}

/// A sweep result row, shaped like a per-case results table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub case: usize,
    pub population_size: usize,
    pub generation_limit: usize,
    pub hybrid_ratio: f64,
    pub elite_count: usize,
    pub rollback: bool,
    pub alpha: f64,
    pub base_driver_distance: f64,
    pub base_rider_distance: f64,
    pub matched_trip_distance: f64,
    pub overhead_sum: f64,
    pub matching_rate: Option<f64>,
    pub cost: Option<f64>,
}

/// Runs BBO once per case, all with the run seed so cases sharing an
/// initialisation ratio start from the same population.
pub fn sweep(cfg: &RunConfig, cases: &[SweepCase], inst: &Instance, net: &RoadNetwork) -> Result<Vec<SweepRow>, HarnessError> {
    cases
        .par_iter()
        .enumerate()
        .map(|(i, case)| {
            let r = run_one(&case.apply(cfg), MatcherKind::Bbo, inst, net)?;
            let c = &r.cumulative;
            Ok(SweepRow {
                case: i + 1,
                population_size: case.population_size,
                generation_limit: case.generation_limit,
                hybrid_ratio: case.hybrid_ratio,
                elite_count: case.elite_count,
                rollback: case.rollback,
                alpha: case.alpha,
                base_driver_distance: c.base_driver_distance,
                base_rider_distance: c.base_rider_distance,
                matched_trip_distance: c.matched_trip_distance,
                overhead_sum: c.overhead_sum,
                matching_rate: r.matching_rate,
                cost: r.cost,
            })
        })
        .collect()
}
