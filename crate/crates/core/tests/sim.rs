use std::collections::HashMap;

use rideshare::domain::{Driver, DriverId, Rider, RiderId, RiderState};
use rideshare::harness::{self, RunConfig};
use rideshare::matchers::{Batch, Matcher, MatcherKind};
use rideshare::metrics::CostParams;
use rideshare::roadnet::{load_network, NetConfig, NodeId};
use rideshare::sim::{self, advance_tick, EventKind, Scenario, SimConfig, WorldState};

fn small(seed: u64) -> RunConfig {
    RunConfig {
        seed,
        drivers: 10,
        riders: 40,
        horizon_seconds: 300,
        grid: 10,
        ..Default::default()
    }
}

/// Re-runs the world loop by hand, checking per-tick invariants.
#[test]
fn per_tick_invariants_hold() {
    for seed in 0..4 {
        let cfg = small(seed);
        let net = harness::network(&cfg, None, None).unwrap();
        let inst = harness::instance(&cfg, &net, None).unwrap();
        let scenario = inst.to_scenario(&net, cfg.speed).unwrap();
        let mut drivers = scenario.drivers.clone();
        let mut riders = scenario.riders.clone();
        drivers.sort_by(|a, b| a.early.total_cmp(&b.early));
        riders.sort_by(|a, b| a.early.total_cmp(&b.early));
        let mut w = WorldState::new();
        let (mut di, mut ri) = (0, 0);
        let matcher = Matcher::with_defaults(MatcherKind::Greedy);
        for step in 0..=3000u64 {
            assert_eq!(w.clock, step as f64);
            while di < drivers.len() && drivers[di].early <= w.clock {
                w.admit_driver(drivers[di].clone());
                di += 1;
            }
            while ri < riders.len() && riders[ri].early <= w.clock && step <= 300 {
                w.admit_rider(riders[ri].clone());
                ri += 1;
            }
            if step > 0 && step % 30 == 0 && step <= 300 {
                w.expire_unservable(&net, cfg.speed);
                let pool = w.pool();
                let fleet = w.active_drivers();
                let batch = Batch::new(&net, &pool, &fleet, w.clock, CostParams::default());
                w.commit(&matcher.run(&batch, step));
            }
            let counts = w.lifecycle_counts();
            assert_eq!(counts.iter().sum::<usize>(), w.riders.len());
            let odo: Vec<f64> = w.drivers.iter().map(|d| d.odometer).collect();
            advance_tick(&mut w, &net, 1.0);
            for (i, d) in w.drivers.iter().enumerate() {
                assert_eq!(d.onboard, w.executed_load(i));
                if i < odo.len() {
                    assert!(d.odometer - odo[i] <= d.speed * 1.0 + 1e-9, "teleport");
                }
            }
        }
        assert!(w.defects.is_empty(), "{:?}", w.defects);
        assert!(w.riders.iter().all(|r| r.state != RiderState::Matched && r.state != RiderState::OnBoard));
    }
}

#[test]
fn report_totals_are_consistent() {
    for kind in MatcherKind::ALL {
        let cfg = small(3);
        let net = harness::network(&cfg, None, None).unwrap();
        let inst = harness::instance(&cfg, &net, None).unwrap();
        let r = harness::run_one(&cfg, kind, &inst, &net).unwrap();
        assert!(r.defects.is_empty(), "{kind}: {:?}", r.defects);
        assert_eq!(r.batches.len(), 10);
        let per_batch: usize = r.batches.iter().map(|b| b.snapshot.matched_count).sum();
        assert_eq!(per_batch, r.cumulative.matched_count);
        assert_eq!(r.cumulative.total_riders, inst.riders().count());
        let c = &r.cumulative;
        assert!((c.matched_trip_distance - c.base_driver_distance - c.overhead_sum).abs() < 1e-6);
        // every rider ends in a terminal set once the fleet has drained
        assert_eq!(r.delivered + r.expired + r.waiting_at_end, c.total_riders);
        assert_eq!(r.delivered, c.matched_count);
        let matched = r.events.iter().filter(|e| e.kind == EventKind::Match).count();
        assert_eq!(matched, c.matched_count);
        // a rider is matched at a boundary no earlier than its arrival
        let arrived: HashMap<RiderId, f64> = r
            .events
            .iter()
            .filter(|e| e.kind == EventKind::Arrival)
            .map(|e| (e.rider, e.t))
            .collect();
        for e in r.events.iter().filter(|e| e.kind == EventKind::Match) {
            assert!(e.t >= arrived[&e.rider] && e.t % 30.0 == 0.0);
        }
    }
}

#[test]
fn event_log_is_line_per_event() {
    let cfg = small(1);
    let net = harness::network(&cfg, None, None).unwrap();
    let inst = harness::instance(&cfg, &net, None).unwrap();
    let r = harness::run_one(&cfg, MatcherKind::Greedy, &inst, &net).unwrap();
    let log = r.event_log();
    assert_eq!(log.lines().count(), r.events.len());
    for line in log.lines() {
        let f: Vec<&str> = line.split(' ').collect();
        assert_eq!(f.len(), 4, "{line}");
        assert!(f[0].starts_with("t=") && f[0][2..].parse::<f64>().is_ok());
        assert!(["kind=arrival", "kind=match", "kind=pickup", "kind=dropoff", "kind=expire"].contains(&f[1]));
        assert!(f[2].starts_with("rider="));
        assert!(f[3].starts_with("driver="));
    }
}

#[test]
fn unservable_riders_expire() {
    // the only driver appears after the rider's deadline has passed
    let net = load_network([(0, 0.0, 0.0), (1, 0.0, 1.0)], [(0, 1, 10.0)], NetConfig::default()).unwrap();
    let rider = Rider::new(RiderId(1), NodeId(0), NodeId(1), 0.0, 25.0).unwrap();
    let driver = Driver::new(DriverId(1), NodeId(0), NodeId(1), 40.0, 100.0, 3, 1.0).unwrap();
    let cfg = SimConfig { batch_seconds: 10, horizon_seconds: 60, speed: 1.0, ..Default::default() };
    let r = sim::run(&Scenario { drivers: vec![driver], riders: vec![rider] }, &cfg, &net).unwrap();
    assert_eq!((r.expired, r.delivered), (1, 0));
    let expire = r.events.iter().find(|e| e.kind == EventKind::Expire).unwrap();
    assert_eq!(expire.t, 20.0);
    assert_eq!(r.matching_rate, Some(0.0));
}

#[test]
fn waiting_driver_serves_an_early_request_on_time() {
    // rider asks at t=3 for a pickup at the driver's origin; driver waits
    let net = load_network([(0, 0.0, 0.0), (1, 0.0, 1.0), (2, 0.0, 2.0)], [(0, 1, 4.0), (1, 2, 4.0)], NetConfig::default()).unwrap();
    let rider = Rider::new(RiderId(7), NodeId(1), NodeId(2), 3.0, 60.0).unwrap();
    let driver = Driver::new(DriverId(2), NodeId(0), NodeId(2), 0.0, 60.0, 1, 1.0).unwrap();
    let cfg = SimConfig { batch_seconds: 10, horizon_seconds: 30, speed: 1.0, ..Default::default() };
    let r = sim::run(&Scenario { drivers: vec![driver], riders: vec![rider] }, &cfg, &net).unwrap();
    let t = |k| r.events.iter().find(|e| e.kind == k).unwrap().t;
    assert_eq!((t(EventKind::Match), t(EventKind::Pickup), t(EventKind::Dropoff)), (10.0, 14.0, 18.0));
    assert_eq!(r.cumulative.overhead_sum, 0.0);
    assert_eq!(r.cumulative.matching_delays, vec![7.0]);
}
