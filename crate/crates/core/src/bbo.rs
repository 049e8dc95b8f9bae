//! Biogeography-based optimisation of one batch.
//!
//! Each habitat is a [`Solution`]: a full assignment of the batch's rider
//! pool over its own copy of the fleet (a "virtual map"). Habitats exchange
//! features, where a feature is one matched vehicle together with the pool
//! riders it carries.
//!
//! One generation: rank habitats and set linear emigration rates, save the
//! elites, migrate every habitat against a frozen copy of the previous
//! generation, mutate, then overwrite the worst habitats with the elites.

use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matchers::{Batch, MatchPlan, Solution};
use crate::metrics::CostParams;
use crate::rng::{self, Rng};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("population size must be at least 2, got {0}")]
    Population(usize),
    #[error("elite count {0} must be below population size {1}")]
    Elites(usize, usize),
    #[error("generation limit must be at least 1")]
    Generations,
    #[error("{0} = {1} is outside [0, 1]")]
    Probability(&'static str, f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BBOConfig {
    pub population_size: usize,
    pub generation_limit: usize,
    pub elite_count: usize,
    /// Fraction of the initial population built by random assignment.
    pub hybrid_ratio: f64,
    pub rollback: bool,
    pub mutation_probability: f64,
    pub alpha: f64,
    pub seed: u64,
}

impl Default for BBOConfig {
    fn default() -> Self {
        Self {
            population_size: 20,
            generation_limit: 10,
            elite_count: 1,
            hybrid_ratio: 0.85,
            rollback: true,
            mutation_probability: 0.1,
            alpha: 0.5,
            seed: 0,
        }
    }
}

impl BBOConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.population_size < 2 {
            return Err(ConfigError::Population(self.population_size));
        }
        if self.elite_count >= self.population_size {
            return Err(ConfigError::Elites(self.elite_count, self.population_size));
        }
        if self.generation_limit < 1 {
            return Err(ConfigError::Generations);
        }
        for (name, p) in [
            ("hybrid_ratio", self.hybrid_ratio),
            ("mutation_probability", self.mutation_probability),
            ("alpha", self.alpha),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(ConfigError::Probability(name, p));
            }
        }
        Ok(())
    }

    /// Number of initial habitats built by random assignment.
    pub fn random_count(&self) -> usize {
        ((self.population_size as f64 * self.hybrid_ratio).ceil() as usize).min(self.population_size)
    }
}

/// How a habitat was seeded.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Origin {
    Random,
    Greedy,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CandidateSolution {
    pub solution: Solution,
    pub origin: Origin,
    /// Immigration rate `lambda`.
    pub immigration: f64,
    /// Emigration rate `mu`.
    pub emigration: f64,
}

impl CandidateSolution {
    pub fn cost(&self) -> f64 {
        self.solution.cost()
    }
}

#[derive(Clone, Debug)]
pub struct Population {
    pub candidates: Vec<CandidateSolution>,
    pub generation: usize,
    pub best: Solution,
}

impl Population {
    fn best_index(&self) -> usize {
        ranking(&self.candidates)[0]
    }
}

/// Candidate indices ordered best first; equal costs keep index order.
fn ranking(cands: &[CandidateSolution]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..cands.len()).collect();
    idx.sort_by(|&a, &b| cands[a].cost().total_cmp(&cands[b].cost()).then(a.cmp(&b)));
    idx
}

const INIT_STREAM: u64 = u64::MAX;

/// Builds the initial habitats. The first `random_count()` are filled by
/// random feasible assignment, the rest greedily. Every habitat walks the
/// pool starting from a different rider so greedy habitats differ.
pub fn init_population(batch: &Batch, cfg: &BBOConfig) -> Population {
    let n = cfg.population_size;
    let pool = batch.pool.len();
    let mut starts: Vec<usize> = (0..pool).collect();
    starts.shuffle(&mut rng::stream(cfg.seed, &[INIT_STREAM]));
    let random = cfg.random_count();
    let candidates: Vec<CandidateSolution> = (0..n)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng::stream(cfg.seed, &[k as u64, 0]);
            let mut sol = Solution::empty(batch);
            let origin = if k < random { Origin::Random } else { Origin::Greedy };
            if pool > 0 {
                let start = starts[k % pool];
                for step in 0..pool {
                    let r = (start + step) % pool;
                    match origin {
                        Origin::Random => sol.assign_random(batch, r, None, &mut rng),
                        Origin::Greedy => sol.assign_best(batch, r),
                    };
                }
            }
            CandidateSolution {
                solution: sol,
                origin,
                immigration: 0.0,
                emigration: 0.0,
            }
        })
        .collect();
    let mut pop = Population {
        best: candidates[0].solution.clone(),
        candidates,
        generation: 0,
    };
    pop.best = pop.candidates[pop.best_index()].solution.clone();
    pop
}

/// Rank-based linear rates: the rank-`i` habitat (best is 1) of `N` gets
/// `mu = (N - i + 1) / (N + 1)` and `lambda = 1 - mu`.
pub fn compute_rates(pop: &mut Population) {
    let n = pop.candidates.len() as f64;
    for (rank, k) in ranking(&pop.candidates).into_iter().enumerate() {
        let mu = (n - rank as f64) / (n + 1.0);
        let c = &mut pop.candidates[k];
        c.emigration = mu;
        c.immigration = 1.0 - mu;
    }
}

/// Roulette-wheel pick over emigration rates, never returning `exclude`.
fn select_emigrant(pop: &[CandidateSolution], exclude: usize, rng: &mut Rng) -> Option<usize> {
    let total: f64 = pop
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != exclude)
        .map(|(_, c)| c.emigration)
        .sum();
    if total <= 0.0 {
        return None;
    }
    let mut spin = rng.gen::<f64>() * total;
    let mut last = None;
    for (i, c) in pop.iter().enumerate() {
        if i == exclude {
            continue;
        }
        last = Some(i);
        if spin < c.emigration {
            return Some(i);
        }
        spin -= c.emigration;
    }
    last
}

/// Result of moving one vehicle into a habitat.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MigrationOutcome {
    /// The vehicle already carried the same riders.
    Unchanged,
    Applied,
    /// Displaced riders could not be rehomed; the habitat was restored.
    RolledBack,
    /// Displaced riders could not be rehomed and were left unmatched.
    Stranded(Vec<usize>),
}

/// Copies the emigrant's version of vehicle `v` into `target`:
/// riders of the emigrant's vehicle are pulled off whatever driver carries
/// them in the target, the target's own riders on `v` go to a waiting list,
/// `v` takes the emigrant's schedule, and the waiting list is re-matched
/// greedily. With `rollback`, a waiting rider that cannot be re-matched
/// undoes the whole step.
pub fn migrate_vehicle(
    target: &mut Solution,
    emigrant: &Solution,
    v: usize,
    batch: &Batch,
    rollback: bool,
) -> MigrationOutcome {
    let incoming = emigrant.riders_of(v);
    let current = target.riders_of(v);
    if incoming == current {
        return MigrationOutcome::Unchanged;
    }
    let saved = rollback.then(|| target.clone());

    for &r in &incoming {
        if let Some(d) = target.assigned[r] {
            if d != v {
                target.unassign(batch, r);
            }
        }
    }
    let waiting: Vec<usize> = current
        .iter()
        .copied()
        .filter(|r| !incoming.contains(r))
        .collect();
    target.copy_driver_from(emigrant, v);
    for &r in &current {
        target.assigned[r] = None;
    }
    for &r in &incoming {
        target.assigned[r] = Some(v);
    }
    target.refresh(batch);

    let stranded: Vec<usize> = waiting
        .into_iter()
        .filter(|&r| target.assign_best(batch, r).is_none())
        .collect();
    if stranded.is_empty() {
        return MigrationOutcome::Applied;
    }
    match saved {
        Some(saved) => {
            *target = saved;
            MigrationOutcome::RolledBack
        }
        None => MigrationOutcome::Stranded(stranded),
    }
}

/// Immigration for habitat `k`: each of its matched vehicles triggers, with
/// probability `lambda_k`, the import of one matched vehicle from a habitat
/// chosen by roulette over emigration rates.
pub fn migrate(
    k: usize,
    target: &mut CandidateSolution,
    snapshot: &[CandidateSolution],
    batch: &Batch,
    cfg: &BBOConfig,
    rng: &mut Rng,
) -> Vec<MigrationOutcome> {
    let features = target.solution.matched_drivers().len();
    let mut outcomes = Vec::new();
    for _ in 0..features {
        if rng.gen::<f64>() >= target.immigration {
            continue;
        }
        let Some(j) = select_emigrant(snapshot, k, rng) else {
            continue;
        };
        let emigrant = &snapshot[j].solution;
        let vehicles = emigrant.matched_drivers();
        if vehicles.is_empty() {
            continue;
        }
        let v = vehicles[rng.gen_range(0..vehicles.len())];
        outcomes.push(migrate_vehicle(&mut target.solution, emigrant, v, batch, cfg.rollback));
    }
    outcomes
}

/// With probability `mutation_probability`, takes one uniformly chosen pool
/// rider off its driver and puts it back with a uniform choice among the
/// drivers that can take it plus the option of leaving it unmatched.
///
/// The unmatched option matters: a rider whose detour costs more than the
/// mean pool trip raises the batch cost when served, and no other operator
/// ever drops a rider.
pub fn mutate(sol: &mut Solution, batch: &Batch, cfg: &BBOConfig, rng: &mut Rng) -> bool {
    if batch.pool.is_empty() || rng.gen::<f64>() >= cfg.mutation_probability {
        return false;
    }
    let r = rng.gen_range(0..batch.pool.len());
    sol.unassign(batch, r);
    let mut options: Vec<Option<usize>> = (0..sol.drivers.len()).map(Some).collect();
    options.push(None);
    options.shuffle(rng);
    for choice in options {
        match choice {
            Some(d) if sol.assign_to(batch, r, d) => break,
            Some(_) => {}
            None => break,
        }
    }
    true
}

/// Runs the full optimisation on one batch. Returns the best plan found and
/// the best cost after initialisation and after each generation.
pub fn evolve(batch: &Batch, cfg: &BBOConfig) -> (MatchPlan, Vec<f64>) {
    let mut pop = evolve_population(batch, cfg);
    let trace = std::mem::take(&mut pop.1);
    (pop.0.best.to_plan(batch), trace)
}

/// As [`evolve`], returning the final population.
pub fn evolve_population(batch: &Batch, cfg: &BBOConfig) -> (Population, Vec<f64>) {
    let reweighted;
    let batch = if batch.cost.alpha == cfg.alpha {
        batch
    } else {
        reweighted = batch.with_cost(CostParams { alpha: cfg.alpha });
        &reweighted
    };
    let mut pop = init_population(batch, cfg);
    let mut trace = vec![pop.best.cost()];
    if batch.pool.is_empty() {
        return (pop, trace);
    }
    for g in 1..=cfg.generation_limit {
        compute_rates(&mut pop);
        let order = ranking(&pop.candidates);
        let elites: Vec<CandidateSolution> = order[..cfg.elite_count.min(order.len())]
            .iter()
            .map(|&k| pop.candidates[k].clone())
            .collect();
        let snapshot = pop.candidates.clone();
        pop.candidates
            .par_iter_mut()
            .enumerate()
            .for_each(|(k, cand)| {
                let mut rng = rng::stream(cfg.seed, &[k as u64, g as u64]);
                migrate(k, cand, &snapshot, batch, cfg, &mut rng);
                mutate(&mut cand.solution, batch, cfg, &mut rng);
                cand.solution.refresh(batch);
            });
        let order = ranking(&pop.candidates);
        for (slot, elite) in order.iter().rev().zip(elites) {
            pop.candidates[*slot] = elite;
        }
        pop.generation = g;
        let gen_best = &pop.candidates[pop.best_index()].solution;
        if gen_best.cost() < pop.best.cost() {
            pop.best = gen_best.clone();
        }
        trace.push(gen_best.cost());
    }
    (pop, trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Driver, DriverId, Rider, RiderId};
    use crate::roadnet::{load_network, NetConfig, NodeId, RoadNetwork};

    fn path(n: u64) -> RoadNetwork {
        load_network(
            (0..n).map(|i| (i, 0.0, i as f64)),
            (0..n - 1).map(|i| (i, i + 1, 1.0)),
            NetConfig::default(),
        )
        .unwrap()
    }

    fn cfg() -> BBOConfig {
        BBOConfig {
            seed: 11,
            ..Default::default()
        }
    }

    #[test]
    fn config_checks() {
        assert!(BBOConfig::default().validate().is_ok());
        let bad = BBOConfig {
            population_size: 1,
            ..Default::default()
        };
        assert_eq!(bad.validate(), Err(ConfigError::Population(1)));
        let bad = BBOConfig {
            elite_count: 20,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        assert_eq!(BBOConfig::default().random_count(), 17);
    }

    #[test]
    fn rates_for_three() {
        let net = path(4);
        let d = Driver::new(DriverId(1), NodeId(0), NodeId(3), 0.0, 10.0, 3, 1.0).unwrap();
        let r = Rider::new(RiderId(1), NodeId(0), NodeId(3), 0.0, 10.0).unwrap();
        let batch = Batch::new(&net, &[r], &[d], 0.0, CostParams::default());
        let mut pop = init_population(
            &batch,
            &BBOConfig {
                population_size: 3,
                ..cfg()
            },
        );
        compute_rates(&mut pop);
        // identical costs: rank follows index
        let mus: Vec<f64> = pop.candidates.iter().map(|c| c.emigration).collect();
        assert_eq!(mus, vec![0.75, 0.5, 0.25]);
        for c in &pop.candidates {
            assert_eq!(c.immigration + c.emigration, 1.0);
        }
    }

    #[test]
    fn zero_immigration_leaves_target() {
        let net = path(6);
        let drivers = [
            Driver::new(DriverId(1), NodeId(0), NodeId(5), 0.0, 20.0, 3, 1.0).unwrap(),
            Driver::new(DriverId(2), NodeId(5), NodeId(0), 0.0, 20.0, 3, 1.0).unwrap(),
        ];
        let riders = [
            Rider::new(RiderId(1), NodeId(1), NodeId(2), 0.0, 20.0).unwrap(),
            Rider::new(RiderId(2), NodeId(4), NodeId(3), 0.0, 20.0).unwrap(),
        ];
        let batch = Batch::new(&net, &riders, &drivers, 0.0, CostParams::default());
        let mut pop = init_population(&batch, &cfg());
        compute_rates(&mut pop);
        let snapshot = pop.candidates.clone();
        let mut target = pop.candidates[0].clone();
        target.immigration = 0.0;
        let before = target.clone();
        let mut rng = rng::stream(1, &[]);
        assert!(migrate(0, &mut target, &snapshot, &batch, &cfg(), &mut rng).is_empty());
        assert_eq!(target, before);
    }

    #[test]
    fn zero_mutation_is_identity() {
        let net = path(4);
        let d = Driver::new(DriverId(1), NodeId(0), NodeId(3), 0.0, 10.0, 3, 1.0).unwrap();
        let r = Rider::new(RiderId(1), NodeId(1), NodeId(2), 0.0, 10.0).unwrap();
        let batch = Batch::new(&net, &[r], &[d], 0.0, CostParams::default());
        let mut sol = Solution::empty(&batch);
        let before = sol.clone();
        let c = BBOConfig {
            mutation_probability: 0.0,
            ..cfg()
        };
        let mut rng = rng::stream(3, &[]);
        for _ in 0..100 {
            assert!(!mutate(&mut sol, &batch, &c, &mut rng));
        }
        assert_eq!(sol, before);

        // single rider, single driver, rider unmatched: one mutation either
        // assigns it or leaves it where it was
        let always = BBOConfig {
            mutation_probability: 1.0,
            ..cfg()
        };
        let mut seen = [false; 2];
        for _ in 0..40 {
            let mut s = before.clone();
            mutate(&mut s, &batch, &always, &mut rng);
            if s == before {
                seen[0] = true;
            } else {
                assert_eq!(s.assigned, vec![Some(0)]);
                seen[1] = true;
            }
        }
        assert_eq!(seen, [true, true]);
    }

    #[test]
    fn forced_pairing_population_is_uniform() {
        let net = path(4);
        let d = Driver::new(DriverId(1), NodeId(0), NodeId(3), 0.0, 10.0, 3, 1.0).unwrap();
        let r = Rider::new(RiderId(1), NodeId(1), NodeId(2), 0.0, 10.0).unwrap();
        let batch = Batch::new(&net, &[r], &[d], 0.0, CostParams::default());
        let pop = init_population(
            &batch,
            &BBOConfig {
                population_size: 2,
                ..cfg()
            },
        );
        assert_eq!(pop.candidates[0].solution, pop.candidates[1].solution);
        assert_eq!(pop.candidates[0].solution.assigned, vec![Some(0)]);
    }

    #[test]
    fn hybrid_ratio_endpoints() {
        let net = path(6);
        let d = Driver::new(DriverId(1), NodeId(0), NodeId(5), 0.0, 20.0, 3, 1.0).unwrap();
        let riders: Vec<Rider> = (1..=3)
            .map(|i| Rider::new(RiderId(i), NodeId(i as u32), NodeId(5), 0.0, 20.0).unwrap())
            .collect();
        let batch = Batch::new(&net, &riders, &[d], 0.0, CostParams::default());
        for (h, expect) in [(0.0, Origin::Greedy), (1.0, Origin::Random)] {
            let pop = init_population(
                &batch,
                &BBOConfig {
                    hybrid_ratio: h,
                    ..cfg()
                },
            );
            assert!(pop.candidates.iter().all(|c| c.origin == expect));
        }
    }

    #[test]
    fn trace_never_increases() {
        let net = path(8);
        let drivers: Vec<Driver> = (0..3)
            .map(|i| Driver::new(DriverId(i), NodeId(i as u32), NodeId(7 - i as u32), 0.0, 30.0, 2, 1.0).unwrap())
            .collect();
        let riders: Vec<Rider> = (0..6)
            .map(|i| Rider::new(RiderId(i), NodeId(i as u32 % 7), NodeId((i as u32 * 3 + 1) % 8), 0.0, 25.0))
            .filter_map(Result::ok)
            .collect();
        let batch = Batch::new(&net, &riders, &drivers, 0.0, CostParams::default());
        for seed in 0..10 {
            let (plan, trace) = evolve(&batch, &BBOConfig { seed, ..cfg() });
            assert!(trace.windows(2).all(|w| w[1] <= w[0]), "{trace:?}");
            assert_eq!(plan.cost, *trace.last().unwrap());
            plan.check(&batch).unwrap();
        }
    }
}
