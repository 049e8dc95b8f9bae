//! Riders, drivers and their stop schedules.
//!
//! A [`Driver`] carries its whole [`Schedule`] (visited and pending stops)
//! together with its progress along it. Pending stops are always planned from
//! the driver's current anchor vertex: the vertex it stands on, or the far end
//! of the edge it is traversing.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::roadnet::{NodeId, RoadNetwork, RouteError};

/// Slack used when comparing simulated event times against planned deadlines.
pub const TIME_EPS: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RiderId(pub u64);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DriverId(pub u64);

impl fmt::Display for RiderId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl fmt::Display for DriverId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RiderState {
    Waiting,
    Matched,
    OnBoard,
    Delivered,
    Expired,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("rider {0}: early time {1} is after late time {2}")]
    RiderWindow(RiderId, f64, f64),
    #[error("rider {0}: origin equals destination")]
    RiderLoop(RiderId),
    #[error("rider {0}: needs at least one seat")]
    RiderSeats(RiderId),
    #[error("driver {0}: early time {1} is after late time {2}")]
    DriverWindow(DriverId, f64, f64),
    #[error("driver {0}: speed must be positive, got {1}")]
    DriverSpeed(DriverId, f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rider {
    pub id: RiderId,
    pub origin: NodeId,
    pub destination: NodeId,
    /// Earliest pickup time.
    pub early: f64,
    /// Latest dropoff time.
    pub late: f64,
    /// Submission time; equal to `early`.
    pub request_time: f64,
    pub seats: u32,
    pub state: RiderState,
}

impl Rider {
    pub fn new(
        id: RiderId,
        origin: NodeId,
        destination: NodeId,
        early: f64,
        late: f64,
    ) -> Result<Self, DomainError> {
        Self::with_seats(id, origin, destination, early, late, 1)
    }

    pub fn with_seats(
        id: RiderId,
        origin: NodeId,
        destination: NodeId,
        early: f64,
        late: f64,
        seats: u32,
    ) -> Result<Self, DomainError> {
        if !(early <= late) {
            return Err(DomainError::RiderWindow(id, early, late));
        }
        if origin == destination {
            return Err(DomainError::RiderLoop(id));
        }
        if seats == 0 {
            return Err(DomainError::RiderSeats(id));
        }
        Ok(Self {
            id,
            origin,
            destination,
            early,
            late,
            request_time: early,
            seats,
            state: RiderState::Waiting,
        })
    }

    /// Whether some driver moving at `speed` could still deliver this rider
    /// if it stood at the origin at time `now`.
    pub fn still_servable(&self, net: &RoadNetwork, now: f64, speed: f64) -> bool {
        match net.distance(self.origin, self.destination) {
            Ok(d) => now.max(self.early) + d / speed <= self.late,
            Err(_) => false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StopKind {
    DriverOrigin,
    DriverDest,
    Pickup { rider: RiderId, seats: u32, not_before: f64 },
    Dropoff { rider: RiderId, seats: u32, deadline: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stop {
    pub vertex: NodeId,
    pub kind: StopKind,
}

impl Stop {
    pub fn pickup(rider: &Rider) -> Self {
        Self {
            vertex: rider.origin,
            kind: StopKind::Pickup {
                rider: rider.id,
                seats: rider.seats,
                not_before: rider.early,
            },
        }
    }

    pub fn dropoff(rider: &Rider) -> Self {
        Self {
            vertex: rider.destination,
            kind: StopKind::Dropoff {
                rider: rider.id,
                seats: rider.seats,
                deadline: rider.late,
            },
        }
    }

    pub fn rider(&self) -> Option<RiderId> {
        match self.kind {
            StopKind::Pickup { rider, .. } | StopKind::Dropoff { rider, .. } => Some(rider),
            _ => None,
        }
    }
}

/// Ordered stop sequence `(d_o, p_1, ..., p_n, d_d)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    stops: Vec<Stop>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScheduleError {
    #[error("schedule must start at the driver origin and end at the driver destination")]
    Endpoints,
    #[error("rider {0} appears more than once")]
    Duplicate(RiderId),
    #[error("rider {0} is dropped off before being picked up")]
    Precedence(RiderId),
    #[error("rider {0} is picked up but never dropped off")]
    MissingDropoff(RiderId),
    #[error("driver endpoint stop inside the schedule")]
    InnerEndpoint,
}

impl Schedule {
    pub fn new(origin: NodeId, destination: NodeId) -> Self {
        Self {
            stops: vec![
                Stop {
                    vertex: origin,
                    kind: StopKind::DriverOrigin,
                },
                Stop {
                    vertex: destination,
                    kind: StopKind::DriverDest,
                },
            ],
        }
    }

    /// Wraps a raw stop list after checking the structural invariants.
    pub fn from_stops(stops: Vec<Stop>) -> Result<Self, ScheduleError> {
        let s = Self { stops };
        s.check_structure()?;
        Ok(s)
    }

    pub fn stops(&self) -> &[Stop] {
        &self.stops
    }

    pub fn len(&self) -> usize {
        self.stops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stops.len() <= 2
    }

    pub fn vertices(&self) -> Vec<NodeId> {
        self.stops.iter().map(|s| s.vertex).collect()
    }

    /// Riders with a pickup in this schedule, in pickup order.
    pub fn riders(&self) -> impl Iterator<Item = RiderId> + '_ {
        self.stops.iter().filter_map(|s| match s.kind {
            StopKind::Pickup { rider, .. } => Some(rider),
            _ => None,
        })
    }

    pub fn check_structure(&self) -> Result<(), ScheduleError> {
        let n = self.stops.len();
        if n < 2
            || self.stops[0].kind != StopKind::DriverOrigin
            || self.stops[n - 1].kind != StopKind::DriverDest
        {
            return Err(ScheduleError::Endpoints);
        }
        let mut seen: HashMap<RiderId, (bool, bool)> = HashMap::new();
        for stop in &self.stops[1..n - 1] {
            match stop.kind {
                StopKind::DriverOrigin | StopKind::DriverDest => {
                    return Err(ScheduleError::InnerEndpoint)
                }
                StopKind::Pickup { rider, .. } => {
                    let e = seen.entry(rider).or_default();
                    if e.0 || e.1 {
                        return Err(ScheduleError::Duplicate(rider));
                    }
                    e.0 = true;
                }
                StopKind::Dropoff { rider, .. } => {
                    let e = seen.entry(rider).or_default();
                    if e.1 {
                        return Err(ScheduleError::Duplicate(rider));
                    }
                    if !e.0 {
                        return Err(ScheduleError::Precedence(rider));
                    }
                    e.1 = true;
                }
            }
        }
        if let Some((&rider, _)) = seen.iter().find(|(_, (p, d))| *p && !*d) {
            return Err(ScheduleError::MissingDropoff(rider));
        }
        Ok(())
    }
}

/// One reason a schedule cannot be executed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    Structure { detail: String },
    Unreachable { from: NodeId, to: NodeId },
    LateDropoff { rider: RiderId, at: f64, deadline: f64 },
    OverCapacity { stop: usize, load: u32, capacity: u32 },
    DriverLate { at: f64, deadline: f64 },
}

/// Outcome of [`validate_schedule`]; an empty violation list means feasible.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Verdict {
    pub violations: Vec<Violation>,
}

impl Verdict {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Driver {
    pub id: DriverId,
    pub origin: NodeId,
    pub destination: NodeId,
    /// Earliest departure from the origin.
    pub early: f64,
    /// Latest arrival at the destination.
    pub late: f64,
    pub capacity: u32,
    /// Meters per second.
    pub speed: f64,
    /// Current anchor vertex (`d_loc`).
    pub location: NodeId,
    /// Meters still to drive before reaching `location`.
    pub offset: f64,
    /// Meters driven so far.
    pub odometer: f64,
    pub departed: bool,
    pub schedule: Schedule,
    /// Index of the first stop not yet visited.
    pub next_stop: usize,
    /// Seats currently occupied.
    pub onboard: u32,
}

/// Best feasible placement of a rider into a driver's schedule.
#[derive(Clone, Debug, PartialEq)]
pub struct Insertion {
    pub schedule: Schedule,
    pub added_distance: f64,
    pub pickup_index: usize,
    pub dropoff_index: usize,
}

impl Driver {
    pub fn new(
        id: DriverId,
        origin: NodeId,
        destination: NodeId,
        early: f64,
        late: f64,
        capacity: u32,
        speed: f64,
    ) -> Result<Self, DomainError> {
        if !(early <= late) {
            return Err(DomainError::DriverWindow(id, early, late));
        }
        if !(speed > 0.0 && speed.is_finite()) {
            return Err(DomainError::DriverSpeed(id, speed));
        }
        Ok(Self {
            id,
            origin,
            destination,
            early,
            late,
            capacity,
            speed,
            location: origin,
            offset: 0.0,
            odometer: 0.0,
            departed: false,
            schedule: Schedule::new(origin, destination),
            next_stop: 1,
            onboard: 0,
        })
    }

    pub fn pending_stops(&self) -> &[Stop] {
        &self.schedule.stops()[self.next_stop.min(self.schedule.len())..]
    }

    /// Whether the driver still has riders to pick up or drop off.
    pub fn has_pending_riders(&self) -> bool {
        self.pending_stops().iter().any(|s| s.rider().is_some())
    }

    pub fn is_finished(&self) -> bool {
        self.next_stop >= self.schedule.len()
    }

    /// `d_load`: seats assigned or occupied.
    pub fn load(&self) -> u32 {
        self.onboard + pending_pickup_seats(self.pending_stops())
    }

    /// Time at which the driver can next stand on `location`.
    pub fn ready_time(&self, now: f64) -> f64 {
        if self.departed {
            now + self.offset / self.speed
        } else {
            now.max(self.early)
        }
    }

    /// Meters from the anchor through all pending stops.
    pub fn remaining_distance(&self, net: &RoadNetwork) -> Result<f64, RouteError> {
        let mut prev = self.location;
        let mut dist = 0.0;
        for stop in self.pending_stops() {
            dist += net.distance(prev, stop.vertex)?;
            prev = stop.vertex;
        }
        Ok(dist)
    }

    /// Total length of the driver's trip: driven so far plus still planned.
    pub fn route_distance(&self, net: &RoadNetwork) -> Result<f64, RouteError> {
        Ok(self.odometer + self.offset + self.remaining_distance(net)?)
    }

    /// Removes a not-yet-picked-up rider from the pending part of the
    /// schedule. Returns whether anything was removed.
    pub fn remove_rider(&mut self, rider: RiderId) -> bool {
        let pending = self.pending_stops();
        let picked_up_later = pending
            .iter()
            .any(|s| matches!(s.kind, StopKind::Pickup { rider: r, .. } if r == rider));
        if !picked_up_later {
            return false;
        }
        let start = self.next_stop;
        let mut idx = 0;
        self.schedule.stops.retain(|s| {
            let keep = idx < start || s.rider() != Some(rider);
            idx += 1;
            keep
        });
        true
    }
}

fn pending_pickup_seats(stops: &[Stop]) -> u32 {
    stops
        .iter()
        .map(|s| match s.kind {
            StopKind::Pickup { seats, .. } => seats,
            _ => 0,
        })
        .sum()
}

/// Walks `pending` from the driver's anchor starting at `now`, returning the
/// planned route length. With `stop_early` the walk aborts at the first
/// violation.
fn trace(
    driver: &Driver,
    pending: &[Stop],
    net: &RoadNetwork,
    now: f64,
    stop_early: bool,
    violations: &mut Vec<Violation>,
) -> f64 {
    let mut t = driver.ready_time(now);
    let mut prev = driver.location;
    let mut load = driver.onboard;
    let mut dist = 0.0;
    for (i, stop) in pending.iter().enumerate() {
        let leg = match net.distance(prev, stop.vertex) {
            Ok(d) => d,
            Err(_) => {
                violations.push(Violation::Unreachable {
                    from: prev,
                    to: stop.vertex,
                });
                return f64::INFINITY;
            }
        };
        dist += leg;
        t += leg / driver.speed;
        prev = stop.vertex;
        match stop.kind {
            StopKind::Pickup {
                seats, not_before, ..
            } => {
                t = t.max(not_before);
                load += seats;
                if load > driver.capacity {
                    violations.push(Violation::OverCapacity {
                        stop: driver.next_stop + i,
                        load,
                        capacity: driver.capacity,
                    });
                }
            }
            StopKind::Dropoff {
                rider,
                seats,
                deadline,
            } => {
                load = load.saturating_sub(seats);
                if t > deadline {
                    violations.push(Violation::LateDropoff {
                        rider,
                        at: t,
                        deadline,
                    });
                }
            }
            StopKind::DriverDest => {
                if t > driver.late {
                    violations.push(Violation::DriverLate {
                        at: t,
                        deadline: driver.late,
                    });
                }
            }
            StopKind::DriverOrigin => {}
        }
        if stop_early && !violations.is_empty() {
            return dist;
        }
    }
    dist
}

/// Checks whether `sched` can be executed by `driver` starting at `now`:
/// dropoff deadlines, driver arrival deadline and seat capacity. Stops before
/// `driver.next_stop` are treated as already visited.
pub fn validate_schedule(
    driver: &Driver,
    sched: &Schedule,
    net: &RoadNetwork,
    now: f64,
) -> Verdict {
    let mut violations = Vec::new();
    if let Err(e) = sched.check_structure() {
        violations.push(Violation::Structure {
            detail: e.to_string(),
        });
        return Verdict { violations };
    }
    let pending = &sched.stops()[driver.next_stop.min(sched.len())..];
    let load = driver.onboard + pending_pickup_seats(pending);
    if load > driver.capacity {
        violations.push(Violation::OverCapacity {
            stop: driver.next_stop,
            load,
            capacity: driver.capacity,
        });
    }
    trace(driver, pending, net, now, false, &mut violations);
    Verdict { violations }
}

/// Best-insertion of `rider` into `driver`'s pending stops.
///
/// Every pickup/dropoff position pair after the visited prefix is tried; the
/// feasible pair with the smallest route increase wins, ties going to the
/// lowest pickup index and then the lowest dropoff index. Returns `None` when
/// no placement satisfies the constraints.
pub fn insert_rider(driver: &Driver, rider: &Rider, net: &RoadNetwork, now: f64) -> Option<Insertion> {
    if driver.load() + rider.seats > driver.capacity || driver.is_finished() {
        return None;
    }
    let speed = driver.speed;
    let start = driver.ready_time(now);
    let to_origin = net.distance(driver.location, rider.origin).ok()?;
    let trip = net.distance(rider.origin, rider.destination).ok()?;
    let lower_bound = start.max(rider.early - to_origin / speed) + to_origin / speed + trip / speed;
    if lower_bound > rider.late + TIME_EPS {
        return None;
    }

    let pending = driver.pending_stops();
    let mut scratch = Vec::new();
    let base = trace(driver, pending, net, now, false, &mut scratch);
    if !base.is_finite() {
        return None;
    }

    let pickup = Stop::pickup(rider);
    let dropoff = Stop::dropoff(rider);
    let n = pending.len();
    let mut candidate = Vec::with_capacity(n + 2);
    let mut best: Option<(f64, usize, usize)> = None;
    for p in 0..n {
        for q in p..n {
            candidate.clear();
            candidate.extend_from_slice(&pending[..p]);
            candidate.push(pickup);
            candidate.extend_from_slice(&pending[p..q]);
            candidate.push(dropoff);
            candidate.extend_from_slice(&pending[q..]);
            scratch.clear();
            let dist = trace(driver, &candidate, net, now, true, &mut scratch);
            if scratch.is_empty() && best.is_none_or(|(b, _, _)| dist < b) {
                best = Some((dist, p, q));
            }
        }
    }
    let (dist, p, q) = best?;
    let mut stops = driver.schedule.stops()[..driver.next_stop].to_vec();
    stops.extend_from_slice(&pending[..p]);
    stops.push(pickup);
    stops.extend_from_slice(&pending[p..q]);
    stops.push(dropoff);
    stops.extend_from_slice(&pending[q..]);
    Some(Insertion {
        schedule: Schedule { stops },
        added_distance: dist - base,
        pickup_index: driver.next_stop + p,
        dropoff_index: driver.next_stop + q + 1,
    })
}

/// `d_dov`: total trip length minus the direct origin-destination distance.
pub fn distance_overhead(driver: &Driver, net: &RoadNetwork) -> Result<f64, RouteError> {
    let direct = net.distance(driver.origin, driver.destination)?;
    Ok((driver.route_distance(net)? - direct).max(0.0))
}
