use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{Batch, MatchPlan, Solution};
use crate::rng;

/// Annealing schedule. The search starts from the greedy plan and performs
/// `iterations_per_temperature` moves per temperature level, cooling
/// geometrically until `min_temperature`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SAParams {
    pub initial_temperature: f64,
    pub cooling_rate: f64,
    pub iterations_per_temperature: usize,
    pub min_temperature: f64,
    pub seed: u64,
}

impl Default for SAParams {
    fn default() -> Self {
        Self {
            initial_temperature: 1.0,
            cooling_rate: 0.95,
            iterations_per_temperature: 50,
            min_temperature: 1e-3,
            seed: 0,
        }
    }
}

impl SAParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.initial_temperature > 0.0 && self.min_temperature > 0.0) {
            return Err("temperatures must be positive".into());
        }
        if !(self.cooling_rate > 0.0 && self.cooling_rate < 1.0) {
            return Err(format!("cooling rate {} outside (0, 1)", self.cooling_rate));
        }
        Ok(())
    }

    /// Total number of moves the schedule performs.
    pub fn move_budget(&self) -> usize {
        let mut t = self.initial_temperature;
        let mut levels = 0;
        while t > self.min_temperature {
            levels += 1;
            t *= self.cooling_rate;
        }
        levels * self.iterations_per_temperature
    }
}

enum Move {
    Reassign,
    Unassign,
    Assign,
}

/// Applies one random neighbourhood move in place. Returns `None` when the
/// drawn move had nothing to act on; the solution is then unchanged.
/// On success the returned checkpoint undoes the move.
fn perturb(sol: &mut Solution, batch: &Batch, rng: &mut rng::Rng) -> Option<super::Checkpoint> {
    let mv = match rng.gen_range(0..3) {
        0 => Move::Reassign,
        1 => Move::Unassign,
        _ => Move::Assign,
    };
    let assigned: Vec<usize> = (0..sol.assigned.len()).filter(|&r| sol.assigned[r].is_some()).collect();
    let unassigned: Vec<usize> = (0..sol.assigned.len()).filter(|&r| sol.assigned[r].is_none()).collect();
    match mv {
        Move::Reassign | Move::Unassign => {
            if assigned.is_empty() {
                return None;
            }
            let r = assigned[rng.gen_range(0..assigned.len())];
            let from = sol.assigned[r]?;
            if let Move::Unassign = mv {
                let cp = sol.checkpoint(&[from]);
                sol.unassign(batch, r);
                return Some(cp);
            }
            let mut cp = sol.checkpoint(&[from]);
            sol.unassign(batch, r);
            match sol.assign_random(batch, r, Some(from), rng) {
                Some(to) => {
                    sol.note_insert(&mut cp, batch, to, r);
                    Some(cp)
                }
                None => {
                    sol.restore(cp);
                    None
                }
            }
        }
        Move::Assign => {
            if unassigned.is_empty() {
                return None;
            }
            let r = unassigned[rng.gen_range(0..unassigned.len())];
            let mut cp = sol.checkpoint(&[]);
            let to = sol.assign_random(batch, r, None, rng)?;
            sol.note_insert(&mut cp, batch, to, r);
            Some(cp)
        }
    }
}

/// Simulated annealing over batch assignments, returning the best plan seen.
pub fn sa_match(batch: &Batch, params: &SAParams) -> MatchPlan {
    sa_match_traced(batch, params).0
}

/// As [`sa_match`], also returning the best-so-far cost after every move.
pub fn sa_match_traced(batch: &Batch, params: &SAParams) -> (MatchPlan, Vec<f64>) {
    let mut current = Solution::empty(batch);
    for r in 0..batch.pool.len() {
        current.assign_best(batch, r);
    }
    let mut best = current.clone();
    let mut trace = vec![best.cost()];
    if batch.pool.is_empty() || params.validate().is_err() {
        return (best.to_plan(batch), trace);
    }
    let mut rng = rng::stream(params.seed, &[0x5A]);
    let mut temperature = params.initial_temperature;
    while temperature > params.min_temperature {
        for _ in 0..params.iterations_per_temperature {
            let before = current.cost();
            if let Some(cp) = perturb(&mut current, batch, &mut rng) {
                let delta = current.cost() - before;
                let accept = delta <= 0.0 || rng.gen::<f64>() < (-delta / temperature).exp();
                if !accept {
                    current.restore(cp);
                } else if current.cost() < best.cost() {
                    best = current.clone();
                }
            }
            trace.push(best.cost());
        }
        temperature *= params.cooling_rate;
    }
    (best.to_plan(batch), trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Driver, DriverId, Rider, RiderId};
    use crate::matchers::greedy_match;
    use crate::metrics::CostParams;
    use crate::roadnet::NodeId;

    fn tiny() -> (crate::roadnet::RoadNetwork, Vec<Driver>, Vec<Rider>) {
        let net = crate::matchers::tests::path_graph(6);
        let drivers = vec![
            Driver::new(DriverId(1), NodeId(0), NodeId(5), 0.0, 12.0, 1, 1.0).unwrap(),
            Driver::new(DriverId(2), NodeId(5), NodeId(0), 0.0, 12.0, 2, 1.0).unwrap(),
        ];
        let riders = vec![
            Rider::new(RiderId(1), NodeId(1), NodeId(4), 0.0, 9.0).unwrap(),
            Rider::new(RiderId(2), NodeId(4), NodeId(2), 1.0, 9.0).unwrap(),
            Rider::new(RiderId(3), NodeId(0), NodeId(3), 2.0, 9.0).unwrap(),
        ];
        (net, drivers, riders)
    }

    #[test]
    fn zero_moves_returns_greedy() {
        let (net, drivers, riders) = tiny();
        let batch = Batch::new(&net, &riders, &drivers, 2.0, CostParams::default());
        let params = SAParams {
            iterations_per_temperature: 0,
            ..Default::default()
        };
        assert_eq!(sa_match(&batch, &params), greedy_match(&batch));
    }

    #[test]
    fn never_worse_than_greedy_and_monotone() {
        let (net, drivers, riders) = tiny();
        let batch = Batch::new(&net, &riders, &drivers, 2.0, CostParams::default());
        let greedy = greedy_match(&batch);
        for seed in 0..5 {
            let (plan, trace) = sa_match_traced(&batch, &SAParams { seed, ..Default::default() });
            assert!(plan.cost <= greedy.cost);
            assert!(trace.windows(2).all(|w| w[1] <= w[0]));
            plan.check(&batch).unwrap();
        }
    }

    #[test]
    fn default_budget() {
        // 135 cooling levels from 1 to 1e-3 at 0.95
        assert_eq!(SAParams::default().move_budget(), 135 * 50);
    }
}
