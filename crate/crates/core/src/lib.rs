//! Dynamic peer-to-peer ridesharing on weighted road networks.
//!
//! Riders and drivers appear over time; requests are pooled into fixed-length
//! batches and each batch is matched by one of four strategies: greedy
//! first-come first-serve, nearest neighbour, simulated annealing, or a
//! biogeography-based optimiser working on whole-fleet candidate assignments.
//!
//! Module map:
//! - [`roadnet`]: graph storage and cached shortest-path queries
//! - [`domain`]: riders, drivers, schedules, feasibility and best insertion
//! - [`metrics`]: matching rate, distance overhead, delay and weighted cost
//! - [`matchers`]: the batch matchers and their shared assignment state
//! - [`bbo`]: the biogeography-based optimiser
//! - [`sim`]: the discrete-time world loop
//! - [`harness`]: instance generation and I/O, configs, reports, CLI

pub mod bbo;
pub mod domain;
pub mod harness;
pub mod matchers;
pub mod metrics;
pub mod rng;
pub mod roadnet;
pub mod sim;

pub use bbo::BBOConfig;
pub use domain::{Driver, DriverId, Rider, RiderId, Schedule};
pub use matchers::{Batch, MatchPlan, Matcher, MatcherKind};
pub use metrics::{CostParams, MetricsSnapshot};
pub use roadnet::{NetConfig, NodeId, RoadNetwork};
pub use sim::{SimConfig, SimReport};
