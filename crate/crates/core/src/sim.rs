//! Discrete-time world simulation with periodic batch matching.
//!
//! The clock advances in whole ticks. At every tick new riders and drivers
//! are admitted; at every batch boundary the waiting pool is pruned of
//! riders that can no longer be served and handed to the configured
//! matcher, whose plan is committed irrevocably. Vehicles then move along
//! shortest paths between their stops, with stop events stamped at the exact
//! (fractional) time they happen.

use std::collections::VecDeque;
use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{
    distance_overhead, Driver, DriverId, Rider, RiderId, RiderState, Schedule, StopKind, TIME_EPS,
};
use crate::matchers::{Batch, Matcher};
use crate::metrics::{self, CostParams, MetricsSnapshot};
use crate::rng;
use crate::roadnet::{NodeId, RoadNetwork};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("batch length {batch}s is not a multiple of the tick {tick}s")]
    BatchTick { batch: u64, tick: u64 },
    #[error("horizon {horizon}s is not a multiple of the batch length {batch}s")]
    HorizonBatch { horizon: u64, batch: u64 },
    #[error("tick must be positive")]
    ZeroTick,
    #[error("fleet speed must be positive")]
    Speed,
    #[error("objective weight {0} outside [0, 1]")]
    Alpha(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub batch_seconds: u64,
    pub tick_seconds: u64,
    pub horizon_seconds: u64,
    pub matcher: Matcher,
    pub alpha: f64,
    /// Fleet speed in meters per second.
    pub speed: f64,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            batch_seconds: 30,
            tick_seconds: 1,
            horizon_seconds: 1800,
            matcher: Matcher::Greedy,
            alpha: 0.5,
            speed: 10.0,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.tick_seconds == 0 || self.batch_seconds == 0 {
            return Err(SimError::ZeroTick);
        }
        if !self.batch_seconds.is_multiple_of(self.tick_seconds) {
            return Err(SimError::BatchTick {
                batch: self.batch_seconds,
                tick: self.tick_seconds,
            });
        }
        if !self.horizon_seconds.is_multiple_of(self.batch_seconds) {
            return Err(SimError::HorizonBatch {
                horizon: self.horizon_seconds,
                batch: self.batch_seconds,
            });
        }
        if !(self.speed > 0.0 && self.speed.is_finite()) {
            return Err(SimError::Speed);
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(SimError::Alpha(self.alpha));
        }
        Ok(())
    }

    pub fn batch_count(&self) -> u64 {
        self.horizon_seconds / self.batch_seconds
    }
}

/// Riders and drivers of one run, each appearing at its early time.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Scenario {
    pub drivers: Vec<Driver>,
    pub riders: Vec<Rider>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Arrival,
    Match,
    Pickup,
    Dropoff,
    Expire,
}

impl EventKind {
    fn name(self) -> &'static str {
        match self {
            Self::Arrival => "arrival",
            Self::Match => "match",
            Self::Pickup => "pickup",
            Self::Dropoff => "dropoff",
            Self::Expire => "expire",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub kind: EventKind,
    pub rider: RiderId,
    pub driver: Option<DriverId>,
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t={:.3} kind={} rider={} driver=", self.t, self.kind.name(), self.rider)?;
        match self.driver {
            Some(d) => write!(f, "{d}"),
            None => f.write_str("-"),
        }
    }
}

/// Everything that moves during a run.
#[derive(Clone, Debug)]
pub struct WorldState {
    pub clock: f64,
    /// Drivers that have appeared so far.
    pub drivers: Vec<Driver>,
    /// Riders admitted so far.
    pub riders: Vec<Rider>,
    pub match_time: Vec<Option<f64>>,
    pub dropoff_time: Vec<Option<f64>>,
    pub events: Vec<Event>,
    /// Constraint breaches seen while executing committed plans.
    pub defects: Vec<String>,
    /// Remaining hops of each driver's current leg.
    legs: Vec<VecDeque<NodeId>>,
    pickups: Vec<u32>,
    dropoffs: Vec<u32>,
    driver_index: std::collections::HashMap<DriverId, usize>,
    rider_index: std::collections::HashMap<RiderId, usize>,
}

impl WorldState {
    pub fn new() -> Self {
        Self {
            clock: 0.0,
            drivers: Vec::new(),
            riders: Vec::new(),
            match_time: Vec::new(),
            dropoff_time: Vec::new(),
            events: Vec::new(),
            defects: Vec::new(),
            legs: Vec::new(),
            pickups: Vec::new(),
            dropoffs: Vec::new(),
            driver_index: Default::default(),
            rider_index: Default::default(),
        }
    }

    pub fn admit_driver(&mut self, driver: Driver) {
        self.driver_index.insert(driver.id, self.drivers.len());
        self.drivers.push(driver);
        self.legs.push(VecDeque::new());
        self.pickups.push(0);
        self.dropoffs.push(0);
    }

    pub fn admit_rider(&mut self, mut rider: Rider) {
        rider.state = RiderState::Waiting;
        self.events.push(Event {
            t: self.clock,
            kind: EventKind::Arrival,
            rider: rider.id,
            driver: None,
        });
        self.rider_index.insert(rider.id, self.riders.len());
        self.riders.push(rider);
        self.match_time.push(None);
        self.dropoff_time.push(None);
    }

    pub fn pool(&self) -> Vec<Rider> {
        self.riders
            .iter()
            .filter(|r| r.state == RiderState::Waiting)
            .cloned()
            .collect()
    }

    pub fn active_drivers(&self) -> Vec<Driver> {
        self.drivers
            .iter()
            .filter(|d| !d.is_finished())
            .cloned()
            .collect()
    }

    /// Counts of riders per lifecycle set: waiting, committed, delivered, expired.
    pub fn lifecycle_counts(&self) -> [usize; 4] {
        let mut c = [0; 4];
        for r in &self.riders {
            let slot = match r.state {
                RiderState::Waiting => 0,
                RiderState::Matched | RiderState::OnBoard => 1,
                RiderState::Delivered => 2,
                RiderState::Expired => 3,
            };
            c[slot] += 1;
        }
        c
    }

    /// Pickups minus dropoffs executed for driver `i`.
    pub fn executed_load(&self, i: usize) -> u32 {
        self.pickups[i] - self.dropoffs[i]
    }

    /// Marks waiting riders that no driver could still deliver as expired.
    pub fn expire_unservable(&mut self, net: &RoadNetwork, speed: f64) -> usize {
        let now = self.clock;
        let mut n = 0;
        for r in &mut self.riders {
            if r.state == RiderState::Waiting && !r.still_servable(net, now, speed) {
                r.state = RiderState::Expired;
                self.events.push(Event {
                    t: now,
                    kind: EventKind::Expire,
                    rider: r.id,
                    driver: None,
                });
                n += 1;
            }
        }
        n
    }

    /// Replaces driver `i`'s schedule, dropping any path computed for the old
    /// next stop.
    pub fn set_schedule(&mut self, i: usize, schedule: Schedule) {
        self.drivers[i].schedule = schedule;
        self.legs[i].clear();
    }

    /// Applies a matcher's plan at the current clock.
    pub fn commit(&mut self, plan: &crate::matchers::MatchPlan) {
        let now = self.clock;
        for a in &plan.assignments {
            let Some(&d) = self.driver_index.get(&a.driver) else {
                self.defects.push(format!("plan names unknown driver {}", a.driver));
                continue;
            };
            let Some(&r) = self.rider_index.get(&a.rider) else {
                self.defects.push(format!("plan names unknown rider {}", a.rider));
                continue;
            };
            if self.drivers[d].schedule != a.schedule {
                self.set_schedule(d, a.schedule.clone());
            }
            self.riders[r].state = RiderState::Matched;
            self.match_time[r] = Some(now);
            self.events.push(Event {
                t: now,
                kind: EventKind::Match,
                rider: a.rider,
                driver: Some(a.driver),
            });
        }
    }
}

impl Default for WorldState {
    fn default() -> Self {
        Self::new()
    }
}

/// Moves every driver forward by `tick` seconds from the current clock and
/// advances the clock.
pub fn advance_tick(w: &mut WorldState, net: &RoadNetwork, tick: f64) {
    let t0 = w.clock;
    for i in 0..w.drivers.len() {
        advance_driver(w, i, net, t0, t0 + tick);
    }
    w.clock = t0 + tick;
}

fn advance_driver(w: &mut WorldState, i: usize, net: &RoadNetwork, t0: f64, t1: f64) {
    if w.drivers[i].is_finished() {
        return;
    }
    if !w.drivers[i].departed {
        let d = &w.drivers[i];
        let depart = if d.has_pending_riders() {
            t0 >= d.early
        } else {
            // idle drivers wait at the origin until they must leave
            let direct = net.distance(d.location, d.destination).unwrap_or(0.0);
            t0 + (t1 - t0) > d.late - direct / d.speed
        };
        if !depart {
            return;
        }
        w.drivers[i].departed = true;
    }
    let mut time = t0;
    loop {
        let d = &mut w.drivers[i];
        if d.offset > 0.0 {
            let need = d.offset / d.speed;
            if time + need > t1 {
                let moved = (t1 - time) * d.speed;
                d.offset -= moved;
                d.odometer += moved;
                return;
            }
            time += need;
            d.odometer += d.offset;
            d.offset = 0.0;
        }
        let Some(stop) = d.schedule.stops().get(d.next_stop).copied() else {
            return;
        };
        if d.location == stop.vertex {
            match stop.kind {
                StopKind::Pickup {
                    rider, seats, not_before,
                } => {
                    if not_before > t1 {
                        return;
                    }
                    time = time.max(not_before);
                    d.onboard += seats;
                    w.pickups[i] += seats;
                    let id = d.id;
                    if let Some(&r) = w.rider_index.get(&rider) {
                        w.riders[r].state = RiderState::OnBoard;
                    }
                    w.events.push(Event {
                        t: time,
                        kind: EventKind::Pickup,
                        rider,
                        driver: Some(id),
                    });
                }
                StopKind::Dropoff {
                    rider, seats, deadline,
                } => {
                    d.onboard -= seats;
                    w.dropoffs[i] += seats;
                    let id = d.id;
                    if time > deadline + TIME_EPS {
                        w.defects.push(format!(
                            "rider {rider} dropped at {time:.3} after deadline {deadline:.3}"
                        ));
                    }
                    if let Some(&r) = w.rider_index.get(&rider) {
                        w.riders[r].state = RiderState::Delivered;
                        w.dropoff_time[r] = Some(time);
                    }
                    w.events.push(Event {
                        t: time,
                        kind: EventKind::Dropoff,
                        rider,
                        driver: Some(id),
                    });
                }
                StopKind::DriverDest => {
                    if time > d.late + TIME_EPS {
                        w.defects.push(format!(
                            "driver {} arrived at {time:.3} after deadline {:.3}",
                            d.id, d.late
                        ));
                    }
                }
                StopKind::DriverOrigin => {}
            }
            let d = &mut w.drivers[i];
            d.next_stop += 1;
            w.legs[i].clear();
            continue;
        }
        if w.legs[i].is_empty() {
            match net.msp(d.location, stop.vertex) {
                Ok(p) => w.legs[i].extend(p.hops.into_iter().skip(1)),
                Err(e) => {
                    w.defects.push(format!("driver {}: {e}", d.id));
                    return;
                }
            }
        }
        let Some(next) = w.legs[i].pop_front() else {
            return;
        };
        let weight = net.edge_weight(d.location, next).unwrap_or(0.0);
        d.location = next;
        d.offset = weight;
    }
}

/// Outcome of one batch boundary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchMetrics {
    pub index: u64,
    pub clock: f64,
    pub rider_arrivals: usize,
    pub driver_arrivals: usize,
    pub active_drivers: usize,
    pub expired: usize,
    /// Pool-restricted snapshot: `total_riders` is the pool size,
    /// `matched_count` the riders matched here and `overhead_sum` the extra
    /// distance this batch's plan adds.
    pub snapshot: MetricsSnapshot,
    pub cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub matcher: String,
    pub config: SimConfig,
    pub batches: Vec<BatchMetrics>,
    /// Instance-wide totals.
    pub cumulative: MetricsSnapshot,
    pub matching_rate: Option<f64>,
    pub cost: Option<f64>,
    pub overhead_mean: f64,
    pub delay_mean: f64,
    pub delay_max: f64,
    pub delivered: usize,
    pub expired: usize,
    pub waiting_at_end: usize,
    pub defects: Vec<String>,
    /// Matcher wall-clock per batch in milliseconds. Not serialised so that
    /// reports stay byte-identical across runs.
    #[serde(skip)]
    pub batch_wall_ms: Vec<f64>,
    #[serde(skip)]
    pub events: Vec<Event>,
}

impl SimReport {
    /// Event log, one line per event.
    pub fn event_log(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&e.to_string());
            out.push('\n');
        }
        out
    }
}

/// Runs `scenario` to the horizon, then keeps vehicles moving (without
/// further matching) until every committed rider has been dropped off.
pub fn run(scenario: &Scenario, cfg: &SimConfig, net: &RoadNetwork) -> Result<SimReport, SimError> {
    cfg.validate()?;
    let mut drivers = scenario.drivers.clone();
    drivers.sort_by(|a, b| a.early.total_cmp(&b.early).then(a.id.cmp(&b.id)));
    let mut riders = scenario.riders.clone();
    riders.sort_by(|a, b| a.early.total_cmp(&b.early).then(a.id.cmp(&b.id)));
    let mut drivers = drivers.into_iter().peekable();
    let mut riders = riders.into_iter().peekable();

    let tick = cfg.tick_seconds as f64;
    let ticks_per_batch = cfg.batch_seconds / cfg.tick_seconds;
    let horizon_ticks = cfg.horizon_seconds / cfg.tick_seconds;
    let cost = CostParams { alpha: cfg.alpha };
    let mut w = WorldState::new();
    let mut batches = Vec::new();
    let mut wall = Vec::new();
    let (mut rider_arrivals, mut driver_arrivals) = (0, 0);

    for step in 0..=horizon_ticks {
        w.clock = step as f64 * tick;
        while let Some(d) = drivers.next_if(|d| d.early <= w.clock) {
            w.admit_driver(d);
            driver_arrivals += 1;
        }
        while let Some(r) = riders.next_if(|r| r.early <= w.clock) {
            w.admit_rider(r);
            rider_arrivals += 1;
        }
        if step > 0 && step % ticks_per_batch == 0 {
            let index = step / ticks_per_batch;
            let expired = w.expire_unservable(net, cfg.speed);
            let pool = w.pool();
            let fleet = w.active_drivers();
            let batch = Batch::new(net, &pool, &fleet, w.clock, cost);
            let started = Instant::now();
            let plan = cfg.matcher.run(&batch, rng::derive(cfg.seed, &[index]));
            wall.push(started.elapsed().as_secs_f64() * 1e3);
            if let Err(e) = plan.check(&batch) {
                w.defects.push(format!("batch {index}: invalid plan: {e}"));
            }
            w.commit(&plan);
            let delays = plan
                .assignments
                .iter()
                .filter_map(|a| batch.pool.iter().find(|r| r.id == a.rider))
                .map(|r| w.clock - r.request_time)
                .collect();
            batches.push(BatchMetrics {
                index,
                clock: w.clock,
                rider_arrivals,
                driver_arrivals,
                active_drivers: fleet.len(),
                expired,
                snapshot: MetricsSnapshot {
                    matched_count: plan.matched(),
                    total_riders: pool.len(),
                    overhead_sum: plan.added_distance,
                    rider_msp_sum: batch.pool_msp_sum(),
                    matching_delays: delays,
                    driver_count: fleet.len(),
                    ..Default::default()
                },
                cost: plan.cost,
            });
            rider_arrivals = 0;
            driver_arrivals = 0;
        }
        if step < horizon_ticks {
            advance_tick(&mut w, net, tick);
        }
    }

    let limit = w
        .riders
        .iter()
        .map(|r| r.late)
        .chain(w.drivers.iter().map(|d| d.late))
        .fold(w.clock, f64::max)
        + 2.0 * tick;
    while w.clock <= limit && w.drivers.iter().any(Driver::has_pending_riders) {
        advance_tick(&mut w, net, tick);
    }
    if w.drivers.iter().any(Driver::has_pending_riders) {
        w.defects
            .push("committed riders still undelivered after every deadline".to_string());
    }

    Ok(summarize(w, batches, wall, cfg, net))
}

fn summarize(
    w: WorldState,
    batches: Vec<BatchMetrics>,
    wall: Vec<f64>,
    cfg: &SimConfig,
    net: &RoadNetwork,
) -> SimReport {
    let mut snap = MetricsSnapshot {
        total_riders: w.riders.len(),
        driver_count: w.drivers.len(),
        ..Default::default()
    };
    for (r, rider) in w.riders.iter().enumerate() {
        let direct = net.distance(rider.origin, rider.destination).unwrap_or(0.0);
        snap.rider_msp_sum += direct;
        if let Some(t) = w.match_time[r] {
            snap.matched_count += 1;
            snap.matching_delays.push(t - rider.request_time);
        }
    }
    snap.base_rider_distance = snap.rider_msp_sum;
    for d in &w.drivers {
        snap.base_driver_distance += net.distance(d.origin, d.destination).unwrap_or(0.0);
        snap.matched_trip_distance += d.route_distance(net).unwrap_or(0.0);
        snap.overhead_sum += distance_overhead(d, net).unwrap_or(0.0);
    }
    let rate = metrics::matching_rate(&snap).ok();
    let cost = metrics::cost(CostParams { alpha: cfg.alpha }, &snap).ok();
    let (delay_mean, delay_max) = metrics::matching_delay_stats(&snap);
    let [waiting, _, delivered, expired] = w.lifecycle_counts();
    SimReport {
        matcher: cfg.matcher.kind().name().to_string(),
        config: cfg.clone(),
        batches,
        overhead_mean: snap.overhead_mean(),
        cumulative: snap,
        matching_rate: rate,
        cost,
        delay_mean,
        delay_max,
        delivered,
        expired,
        waiting_at_end: waiting,
        defects: w.defects,
        batch_wall_ms: wall,
        events: w.events,
    }
}
