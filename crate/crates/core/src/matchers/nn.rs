use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::{Batch, MatchPlan, Solution};

#[derive(PartialEq)]
struct Ranked(f64, usize);

impl Eq for Ranked {}

impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Nearest-neighbour matching. For each rider in arrival order the drivers
/// are queued by straight-line distance from their current vertex to the
/// pickup; the first one that can take the rider gets it.
pub fn nn_match(batch: &Batch) -> MatchPlan {
    let mut sol = Solution::empty(batch);
    for r in 0..batch.pool.len() {
        let origin = batch.pool[r].origin;
        let mut queue: BinaryHeap<Reverse<Ranked>> = sol
            .drivers
            .iter()
            .enumerate()
            .map(|(d, drv)| Reverse(Ranked(batch.net.euclidean(drv.location, origin), d)))
            .collect();
        while let Some(Reverse(Ranked(_, d))) = queue.pop() {
            if sol.assign_to(batch, r, d) {
                break;
            }
        }
    }
    sol.to_plan(batch)
}
