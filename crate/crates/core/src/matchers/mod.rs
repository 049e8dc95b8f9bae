//! Batch matchers.
//!
//! Every matcher consumes one [`Batch`] (the waiting rider pool plus the
//! active fleet at a batch boundary) and returns a [`MatchPlan`]. All of them
//! build on [`Solution`], one complete driver/rider assignment over private
//! copies of the drivers.

mod greedy;
mod nn;
mod sa;

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bbo::{self, BBOConfig};
use crate::domain::{insert_rider, validate_schedule, Driver, DriverId, Rider, RiderId, Schedule};
use crate::metrics::{weighted_cost, CostParams};
use crate::rng::Rng;
use crate::roadnet::RoadNetwork;

pub use greedy::greedy_match;
pub use nn::nn_match;
pub use sa::{sa_match, sa_match_traced, SAParams};

/// Riders and drivers taking part in one optimisation round.
#[derive(Debug)]
pub struct Batch<'a> {
    pub net: &'a RoadNetwork,
    /// Waiting riders in arrival order (ties by id).
    pub pool: Vec<Rider>,
    /// Active drivers ordered by id.
    pub drivers: Vec<Driver>,
    pub now: f64,
    pub cost: CostParams,
    base_route: Vec<f64>,
    pool_msp_sum: f64,
}

impl<'a> Batch<'a> {
    pub fn new(
        net: &'a RoadNetwork,
        pool: &[Rider],
        drivers: &[Driver],
        now: f64,
        cost: CostParams,
    ) -> Self {
        let mut pool = pool.to_vec();
        pool.sort_by(|a, b| a.request_time.total_cmp(&b.request_time).then(a.id.cmp(&b.id)));
        let mut drivers = drivers.to_vec();
        drivers.sort_by_key(|d| d.id);
        let base_route = drivers
            .iter()
            .map(|d| d.remaining_distance(net).unwrap_or(f64::INFINITY))
            .collect();
        let pool_msp_sum = pool
            .iter()
            .filter_map(|r| net.distance(r.origin, r.destination).ok())
            .sum();
        Self {
            net,
            pool,
            drivers,
            now,
            cost,
            base_route,
            pool_msp_sum,
        }
    }

    /// The same batch scored with different objective weights.
    pub fn with_cost(&self, cost: CostParams) -> Batch<'a> {
        Batch {
            net: self.net,
            pool: self.pool.clone(),
            drivers: self.drivers.clone(),
            now: self.now,
            cost,
            base_route: self.base_route.clone(),
            pool_msp_sum: self.pool_msp_sum,
        }
    }

    /// Summed shortest-path length of the pool riders' own trips.
    pub fn pool_msp_sum(&self) -> f64 {
        self.pool_msp_sum
    }

    /// Batch cost for `added` meters of extra driving and `matched` riders.
    pub fn cost_of(&self, added: f64, matched: usize) -> f64 {
        if self.pool.is_empty() {
            return 0.0;
        }
        let rate = matched as f64 / self.pool.len() as f64;
        weighted_cost(self.cost.alpha, added, self.pool_msp_sum, rate).unwrap_or(f64::INFINITY)
    }
}

/// One rider placed with one driver. `schedule` is the driver's schedule
/// after every assignment in the plan has been applied, so all entries for a
/// driver carry the same schedule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub rider: RiderId,
    pub driver: DriverId,
    pub schedule: Schedule,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MatchPlan {
    pub assignments: Vec<Assignment>,
    pub unmatched: Vec<RiderId>,
    /// Batch objective value of the plan.
    pub cost: f64,
    /// Extra meters the plan adds to the fleet's remaining routes.
    pub added_distance: f64,
}

impl MatchPlan {
    pub fn matched(&self) -> usize {
        self.assignments.len()
    }

    /// Checks the plan invariants against the batch it was produced for.
    pub fn check(&self, batch: &Batch) -> Result<(), String> {
        let mut seen = std::collections::HashSet::new();
        for id in self
            .assignments
            .iter()
            .map(|a| a.rider)
            .chain(self.unmatched.iter().copied())
        {
            if !seen.insert(id) {
                return Err(format!("rider {id} listed twice"));
            }
        }
        if seen.len() != batch.pool.len() || batch.pool.iter().any(|r| !seen.contains(&r.id)) {
            return Err("plan does not cover the pool exactly".into());
        }
        for a in &self.assignments {
            let driver = batch
                .drivers
                .iter()
                .find(|d| d.id == a.driver)
                .ok_or_else(|| format!("unknown driver {}", a.driver))?;
            if !a.schedule.riders().any(|r| r == a.rider) {
                return Err(format!("rider {} missing from driver schedule", a.rider));
            }
            let verdict = validate_schedule(driver, &a.schedule, batch.net, batch.now);
            if !verdict.is_ok() {
                return Err(format!("driver {}: {:?}", a.driver, verdict.violations));
            }
        }
        Ok(())
    }
}

/// A complete assignment for one batch over private driver copies.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub drivers: Vec<Driver>,
    /// Driver index per pool rider.
    pub assigned: Vec<Option<usize>>,
    route: Vec<f64>,
    cost: f64,
}

/// Saved state of a few drivers so that a tentative change can be undone.
#[derive(Clone, Debug)]
pub struct Checkpoint {
    drivers: Vec<(usize, Driver, f64)>,
    assigned: Vec<Option<usize>>,
    cost: f64,
}

impl Solution {
    pub fn empty(batch: &Batch) -> Self {
        let mut s = Self {
            drivers: batch.drivers.clone(),
            assigned: vec![None; batch.pool.len()],
            route: batch.base_route.clone(),
            cost: 0.0,
        };
        s.refresh(batch);
        s
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn matched_count(&self) -> usize {
        self.assigned.iter().filter(|a| a.is_some()).count()
    }

    pub fn added_distance(&self, batch: &Batch) -> f64 {
        self.route
            .iter()
            .zip(&batch.base_route)
            .filter(|(_, b)| b.is_finite())
            .map(|(r, b)| r - b)
            .sum()
    }

    /// Recomputes the cached cost from scratch.
    pub fn refresh(&mut self, batch: &Batch) {
        self.cost = batch.cost_of(self.added_distance(batch), self.matched_count());
    }

    /// Cost recomputed without touching the cache.
    pub fn recomputed_cost(&self, batch: &Batch) -> f64 {
        let route: Vec<f64> = self
            .drivers
            .iter()
            .map(|d| d.remaining_distance(batch.net).unwrap_or(f64::INFINITY))
            .collect();
        let added: f64 = route
            .iter()
            .zip(&batch.base_route)
            .filter(|(_, b)| b.is_finite())
            .map(|(r, b)| r - b)
            .sum();
        batch.cost_of(added, self.matched_count())
    }

    /// Pool riders assigned to driver `d`, in pool order.
    pub fn riders_of(&self, d: usize) -> Vec<usize> {
        self.assigned
            .iter()
            .enumerate()
            .filter(|(_, a)| **a == Some(d))
            .map(|(r, _)| r)
            .collect()
    }

    /// Drivers serving at least one pool rider, ascending.
    pub fn matched_drivers(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self.assigned.iter().flatten().copied().collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn checkpoint(&self, drivers: &[usize]) -> Checkpoint {
        Checkpoint {
            drivers: drivers
                .iter()
                .map(|&d| (d, self.drivers[d].clone(), self.route[d]))
                .collect(),
            assigned: self.assigned.clone(),
            cost: self.cost,
        }
    }

    /// Adds driver `d`, as it was before pool rider `r` was inserted into it,
    /// to the checkpoint.
    pub fn note_insert(&self, cp: &mut Checkpoint, batch: &Batch, d: usize, r: usize) {
        if cp.drivers.iter().any(|(x, _, _)| *x == d) {
            return;
        }
        let mut driver = self.drivers[d].clone();
        driver.remove_rider(batch.pool[r].id);
        let route = driver.remaining_distance(batch.net).unwrap_or(f64::INFINITY);
        cp.drivers.push((d, driver, route));
    }

    pub fn restore(&mut self, cp: Checkpoint) {
        for (d, driver, route) in cp.drivers {
            self.drivers[d] = driver;
            self.route[d] = route;
        }
        self.assigned = cp.assigned;
        self.cost = cp.cost;
    }

    fn set_schedule(&mut self, batch: &Batch, d: usize, schedule: Schedule) {
        self.drivers[d].schedule = schedule;
        self.route[d] = self.drivers[d]
            .remaining_distance(batch.net)
            .unwrap_or(f64::INFINITY);
    }

    /// Replaces driver `d` wholesale with another solution's copy of it.
    pub fn copy_driver_from(&mut self, other: &Solution, d: usize) {
        self.drivers[d] = other.drivers[d].clone();
        self.route[d] = other.route[d];
    }

    /// Inserts pool rider `r` into driver `d`. The rider must be unassigned.
    pub fn assign_to(&mut self, batch: &Batch, r: usize, d: usize) -> bool {
        debug_assert!(self.assigned[r].is_none());
        match insert_rider(&self.drivers[d], &batch.pool[r], batch.net, batch.now) {
            Some(ins) => {
                self.set_schedule(batch, d, ins.schedule);
                self.assigned[r] = Some(d);
                self.refresh(batch);
                true
            }
            None => false,
        }
    }

    /// Inserts pool rider `r` with the driver of least added distance, ties to
    /// the lowest driver id. Returns the chosen driver.
    pub fn assign_best(&mut self, batch: &Batch, r: usize) -> Option<usize> {
        self.assign_best_except(batch, r, None)
    }

    pub fn assign_best_except(
        &mut self,
        batch: &Batch,
        r: usize,
        skip: Option<usize>,
    ) -> Option<usize> {
        debug_assert!(self.assigned[r].is_none());
        let rider = &batch.pool[r];
        let mut best: Option<(f64, usize, Schedule)> = None;
        for (d, driver) in self.drivers.iter().enumerate() {
            if Some(d) == skip {
                continue;
            }
            if let Some(ins) = insert_rider(driver, rider, batch.net, batch.now) {
                if best.as_ref().is_none_or(|(b, _, _)| ins.added_distance < *b) {
                    best = Some((ins.added_distance, d, ins.schedule));
                }
            }
        }
        let (_, d, schedule) = best?;
        self.set_schedule(batch, d, schedule);
        self.assigned[r] = Some(d);
        self.refresh(batch);
        Some(d)
    }

    /// Inserts pool rider `r` with a uniformly random feasible driver other
    /// than `skip`. Drawing drivers in shuffled order and keeping the first
    /// feasible one is uniform over the feasible set.
    pub fn assign_random(
        &mut self,
        batch: &Batch,
        r: usize,
        skip: Option<usize>,
        rng: &mut Rng,
    ) -> Option<usize> {
        let mut order: Vec<usize> = (0..self.drivers.len()).filter(|&d| Some(d) != skip).collect();
        order.shuffle(rng);
        order.into_iter().find(|&d| self.assign_to(batch, r, d))
    }

    /// Removes pool rider `r` from its driver, if any.
    pub fn unassign(&mut self, batch: &Batch, r: usize) -> Option<usize> {
        let d = self.assigned[r].take()?;
        self.drivers[d].remove_rider(batch.pool[r].id);
        self.route[d] = self.drivers[d]
            .remaining_distance(batch.net)
            .unwrap_or(f64::INFINITY);
        self.refresh(batch);
        Some(d)
    }

    /// Rebuilds the rider index after drivers were replaced wholesale.
    pub fn reindex(&mut self, batch: &Batch) {
        self.assigned.iter_mut().for_each(|a| *a = None);
        let by_id: std::collections::HashMap<RiderId, usize> =
            batch.pool.iter().enumerate().map(|(i, r)| (r.id, i)).collect();
        for (d, driver) in self.drivers.iter().enumerate() {
            for rid in driver.pending_stops().iter().filter_map(|s| match s.kind {
                crate::domain::StopKind::Pickup { rider, .. } => Some(rider),
                _ => None,
            }) {
                if let Some(&r) = by_id.get(&rid) {
                    self.assigned[r] = Some(d);
                }
            }
        }
        self.refresh(batch);
    }

    pub fn to_plan(&self, batch: &Batch) -> MatchPlan {
        let mut plan = MatchPlan {
            cost: self.cost,
            added_distance: self.added_distance(batch),
            ..Default::default()
        };
        for (r, a) in self.assigned.iter().enumerate() {
            let id = batch.pool[r].id;
            match a {
                Some(d) => plan.assignments.push(Assignment {
                    rider: id,
                    driver: self.drivers[*d].id,
                    schedule: self.drivers[*d].schedule.clone(),
                }),
                None => plan.unmatched.push(id),
            }
        }
        plan
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown matcher {0:?}; expected one of greedy, nn, sa, bbo")]
pub struct UnknownMatcher(pub String);

/// Matcher names accepted on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatcherKind {
    Greedy,
    Nn,
    Sa,
    Bbo,
}

impl MatcherKind {
    pub const ALL: [MatcherKind; 4] = [Self::Greedy, Self::Nn, Self::Sa, Self::Bbo];

    pub fn name(self) -> &'static str {
        match self {
            Self::Greedy => "greedy",
            Self::Nn => "nn",
            Self::Sa => "sa",
            Self::Bbo => "bbo",
        }
    }
}

impl fmt::Display for MatcherKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MatcherKind {
    type Err = UnknownMatcher;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "greedy" => Ok(Self::Greedy),
            "nn" => Ok(Self::Nn),
            "sa" => Ok(Self::Sa),
            "bbo" => Ok(Self::Bbo),
            _ => Err(UnknownMatcher(s.to_string())),
        }
    }
}

/// A configured matcher.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum Matcher {
    Greedy,
    Nn,
    Sa(SAParams),
    Bbo(BBOConfig),
}

impl Matcher {
    pub fn kind(&self) -> MatcherKind {
        match self {
            Self::Greedy => MatcherKind::Greedy,
            Self::Nn => MatcherKind::Nn,
            Self::Sa(_) => MatcherKind::Sa,
            Self::Bbo(_) => MatcherKind::Bbo,
        }
    }

    pub fn with_defaults(kind: MatcherKind) -> Self {
        match kind {
            MatcherKind::Greedy => Self::Greedy,
            MatcherKind::Nn => Self::Nn,
            MatcherKind::Sa => Self::Sa(SAParams::default()),
            MatcherKind::Bbo => Self::Bbo(BBOConfig::default()),
        }
    }

    /// Runs the matcher on `batch`. `seed` replaces any seed in the
    /// matcher's own parameters.
    pub fn run(&self, batch: &Batch, seed: u64) -> MatchPlan {
        match self {
            Self::Greedy => greedy_match(batch),
            Self::Nn => nn_match(batch),
            Self::Sa(p) => sa_match(batch, &SAParams { seed, ..p.clone() }),
            Self::Bbo(c) => bbo::evolve(batch, &BBOConfig { seed, ..c.clone() }).0,
        }
    }
}

/// Convenience wrapper: builds the batch and runs `matcher` on it.
pub fn match_pool(
    matcher: &Matcher,
    pool: &[Rider],
    drivers: &[Driver],
    net: &RoadNetwork,
    now: f64,
    cost: CostParams,
    seed: u64,
) -> MatchPlan {
    let batch = Batch::new(net, pool, drivers, now, cost);
    matcher.run(&batch, seed)
}
