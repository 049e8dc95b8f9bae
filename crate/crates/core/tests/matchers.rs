mod common;

use proptest::prelude::*;
use rideshare::bbo::{self, evolve_population};
use rideshare::domain::validate_schedule;
use rideshare::matchers::{greedy_match, nn_match, sa_match, Batch, Matcher, MatcherKind, SAParams};
use rideshare::metrics::CostParams;
use rideshare::BBOConfig;

use common::{exhaustive_optimum, floyd_warshall, micro_instance, Schedules};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    /// Whatever a matcher returns is executable and internally consistent.
    #[test]
    fn every_plan_passes_validation(seed in 0u64..10_000, kind in 0usize..4, now in 0u32..4) {
        let (net, drivers, riders) = micro_instance(seed);
        let batch = Batch::new(&net, &riders, &drivers, now as f64, CostParams::default());
        let plan = Matcher::with_defaults(MatcherKind::ALL[kind]).run(&batch, seed);
        prop_assert!(plan.check(&batch).is_ok(), "{:?}", plan.check(&batch));
        for a in &plan.assignments {
            let d = batch.drivers.iter().find(|d| d.id == a.driver).unwrap();
            prop_assert!(validate_schedule(d, &a.schedule, &net, batch.now).is_ok());
        }
        prop_assert_eq!(plan.assignments.len() + plan.unmatched.len(), riders.len());
    }
}

#[test]
fn sa_reaches_the_optimum_with_a_large_budget() {
    let (net, drivers, riders) = micro_instance(7);
    let fw = floyd_warshall(&net);
    let batch = Batch::new(&net, &riders, &drivers, 0.0, CostParams::default());
    let opt = exhaustive_optimum(&batch.drivers, &batch.pool, &fw, 0.0, 0.5, Schedules::InsertionOrders);
    // 200 moves per level over ~50 levels: about 10^4 moves
    let params = SAParams {
        iterations_per_temperature: 200,
        cooling_rate: 0.87,
        ..Default::default()
    };
    assert!((9_000..=11_000).contains(&params.move_budget()));
    let hits = (0..20)
        .filter(|&seed| sa_match(&batch, &SAParams { seed, ..params.clone() }).cost <= opt + 1e-9)
        .count();
    assert!(hits >= 18, "{hits}/20");
}

#[test]
fn bbo_reaches_the_optimum_on_a_micro_instance() {
    let (net, drivers, riders) = micro_instance(3);
    let fw = floyd_warshall(&net);
    let batch = Batch::new(&net, &riders, &drivers, 0.0, CostParams::default());
    let opt = exhaustive_optimum(&batch.drivers, &batch.pool, &fw, 0.0, 0.5, Schedules::InsertionOrders);
    let hits = (0..20)
        .filter(|&seed| {
            let cfg = BBOConfig { generation_limit: 50, seed, ..Default::default() };
            bbo::evolve(&batch, &cfg).0.cost <= opt + 1e-9
        })
        .count();
    assert!(hits >= 18, "{hits}/20");
}

#[test]
fn nothing_beats_the_enumerated_optimum() {
    for seed in 0..15 {
        let (net, drivers, riders) = micro_instance(100 + seed);
        let fw = floyd_warshall(&net);
        let batch = Batch::new(&net, &riders, &drivers, 0.0, CostParams::default());
        let opt = exhaustive_optimum(&batch.drivers, &batch.pool, &fw, 0.0, 0.5, Schedules::AllOrders);
        for plan in [greedy_match(&batch), nn_match(&batch), sa_match(&batch, &SAParams::default())] {
            assert!(plan.cost >= opt - 1e-9, "seed {seed}: {} < {opt}", plan.cost);
        }
    }
}

#[test]
fn parallel_population_matches_between_runs() {
    let (net, drivers, riders) = micro_instance(42);
    let batch = Batch::new(&net, &riders, &drivers, 0.0, CostParams::default());
    let cfg = BBOConfig { seed: 5, ..Default::default() };
    let (a, ta) = evolve_population(&batch, &cfg);
    let (b, tb) = evolve_population(&batch, &cfg);
    assert_eq!(ta, tb);
    assert_eq!(a.best, b.best);
    let costs = |p: &bbo::Population| p.candidates.iter().map(|c| c.cost()).collect::<Vec<_>>();
    assert_eq!(costs(&a), costs(&b));
}

#[test]
fn alpha_in_config_overrides_batch_weights() {
    let (net, drivers, riders) = micro_instance(8);
    let batch = Batch::new(&net, &riders, &drivers, 0.0, CostParams { alpha: 0.5 });
    let only_rate = Batch::new(&net, &riders, &drivers, 0.0, CostParams { alpha: 0.0 });
    let cfg = BBOConfig { alpha: 0.0, seed: 2, ..Default::default() };
    let plan = bbo::evolve(&batch, &cfg).0;
    assert!((plan.cost - (1.0 - plan.matched() as f64 / 3.0)).abs() < 1e-12);
    assert_eq!(plan, bbo::evolve(&only_rate, &cfg).0);
}
