use super::{Batch, MatchPlan, Solution};

/// First-come first-serve: each rider in arrival order goes to the feasible
/// driver with the smallest added distance, committed immediately.
pub fn greedy_match(batch: &Batch) -> MatchPlan {
    let mut sol = Solution::empty(batch);
    for r in 0..batch.pool.len() {
        sol.assign_best(batch, r);
    }
    sol.to_plan(batch)
}
