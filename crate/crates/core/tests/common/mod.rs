//! Reference implementations used as test oracles. They share data types
//! with the library but none of its search or timing code.
#![allow(dead_code)]

use rand::Rng as _;
use rideshare::domain::{Driver, DriverId, Rider, RiderId, Stop, StopKind};
use rideshare::harness::gen::{grid_network, GridSpec};
use rideshare::rng::{stream, Rng};
use rideshare::roadnet::{NetConfig, NodeId, RoadNetwork};

/// All-pairs distances; `INFINITY` where unreachable.
pub fn floyd_warshall(net: &RoadNetwork) -> Vec<Vec<f64>> {
    let n = net.vertex_count();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
        for &(j, w) in net.neighbors(NodeId(i as u32)) {
            if w < row[j.index()] {
                row[j.index()] = w;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            let dik = d[i][k];
            if dik.is_infinite() {
                continue;
            }
            for j in 0..n {
                let via = dik + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

/// Walks `pending` for `driver` from time `now` using table distances.
/// Returns the route length, or `None` on any broken constraint. Seats are
/// counted as everything on board plus every pending pickup.
pub fn oracle_walk(driver: &Driver, pending: &[Stop], fw: &[Vec<f64>], now: f64) -> Option<f64> {
    let mut t = if driver.departed {
        now + driver.offset / driver.speed
    } else {
        now.max(driver.early)
    };
    let seats: u32 = pending
        .iter()
        .map(|s| match s.kind {
            StopKind::Pickup { seats, .. } => seats,
            _ => 0,
        })
        .sum();
    if driver.onboard + seats > driver.capacity {
        return None;
    }
    let mut at = driver.location;
    let mut dist = 0.0;
    for s in pending {
        let leg = fw[at.index()][s.vertex.index()];
        if leg.is_infinite() {
            return None;
        }
        dist += leg;
        t += leg / driver.speed;
        at = s.vertex;
        match s.kind {
            StopKind::Pickup { not_before, .. } => t = t.max(not_before),
            StopKind::Dropoff { deadline, .. } if t > deadline => return None,
            StopKind::DriverDest if t > driver.late => return None,
            _ => {}
        }
    }
    Some(dist)
}

/// Exhaustive best insertion: smallest route, then lowest pickup and
/// dropoff positions. Returns `(new pending stops, added distance)`.
pub fn brute_insert(driver: &Driver, rider: &Rider, fw: &[Vec<f64>], now: f64) -> Option<(Vec<Stop>, f64)> {
    let pending = driver.pending_stops().to_vec();
    let base = oracle_walk(driver, &pending, fw, now)?;
    let mut best: Option<(Vec<Stop>, f64)> = None;
    for p in 0..pending.len() {
        for q in p..pending.len() {
            let mut cand = pending[..p].to_vec();
            cand.push(Stop::pickup(rider));
            cand.extend_from_slice(&pending[p..q]);
            cand.push(Stop::dropoff(rider));
            cand.extend_from_slice(&pending[q..]);
            if let Some(d) = oracle_walk(driver, &cand, fw, now) {
                if best.as_ref().is_none_or(|(_, b)| d < *b) {
                    best = Some((cand, d));
                }
            }
        }
    }
    best.map(|(s, d)| (s, d - base))
}

fn interleavings(riders: &[&Rider]) -> Vec<Vec<Stop>> {
    fn go(riders: &[&Rider], picked: &mut Vec<bool>, dropped: &mut Vec<bool>, cur: &mut Vec<Stop>, out: &mut Vec<Vec<Stop>>) {
        if cur.len() == 2 * riders.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..riders.len() {
            if !picked[i] {
                picked[i] = true;
                cur.push(Stop::pickup(riders[i]));
                go(riders, picked, dropped, cur, out);
                cur.pop();
                picked[i] = false;
            } else if !dropped[i] {
                dropped[i] = true;
                cur.push(Stop::dropoff(riders[i]));
                go(riders, picked, dropped, cur, out);
                cur.pop();
                dropped[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(riders, &mut vec![false; riders.len()], &mut vec![false; riders.len()], &mut Vec::new(), &mut out);
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// How schedules are formed for a given rider set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Schedules {
    /// Every precedence-respecting stop order.
    AllOrders,
    /// Best insertion applied rider by rider, over every insertion order.
    InsertionOrders,
}

fn best_route(driver: &Driver, riders: &[&Rider], fw: &[Vec<f64>], now: f64, mode: Schedules) -> Option<f64> {
    let pending = driver.pending_stops().to_vec();
    let tail_at = pending.len() - 1;
    match mode {
        Schedules::AllOrders => interleavings(riders)
            .into_iter()
            .filter_map(|mid| {
                let mut cand = pending[..tail_at].to_vec();
                cand.extend(mid);
                cand.push(pending[tail_at]);
                oracle_walk(driver, &cand, fw, now)
            })
            .min_by(f64::total_cmp),
        Schedules::InsertionOrders => permutations(riders.len())
            .into_iter()
            .filter_map(|order| {
                let mut d = driver.clone();
                for &i in &order {
                    let (stops, _) = brute_insert(&d, riders[i], fw, now)?;
                    let mut all = d.schedule.stops()[..d.next_stop].to_vec();
                    all.extend(stops);
                    d.schedule = rideshare::domain::Schedule::from_stops(all).ok()?;
                }
                oracle_walk(&d, d.pending_stops(), fw, now)
            })
            .min_by(f64::total_cmp),
    }
}

/// Lowest batch cost over every rider-to-driver assignment (including
/// leaving riders unmatched).
pub fn exhaustive_optimum(drivers: &[Driver], pool: &[Rider], fw: &[Vec<f64>], now: f64, alpha: f64, mode: Schedules) -> f64 {
    let msp: f64 = pool.iter().map(|r| fw[r.origin.index()][r.destination.index()]).sum();
    let base: Vec<f64> = drivers
        .iter()
        .map(|d| oracle_walk(d, d.pending_stops(), fw, now).unwrap_or(f64::INFINITY))
        .collect();
    let choices = drivers.len() + 1;
    let total = choices.pow(pool.len() as u32);
    let mut best = f64::INFINITY;
    for code in 0..total {
        let mut c = code;
        let mut groups: Vec<Vec<&Rider>> = vec![Vec::new(); drivers.len()];
        let mut matched = 0;
        for r in pool {
            let k = c % choices;
            c /= choices;
            if k > 0 {
                groups[k - 1].push(r);
                matched += 1;
            }
        }
        let mut added = 0.0;
        let mut ok = true;
        for (d, riders) in drivers.iter().zip(&groups) {
            if riders.is_empty() {
                continue;
            }
            match best_route(d, riders, fw, now, mode) {
                Some(dist) => added += dist - base[drivers.iter().position(|x| x.id == d.id).unwrap()],
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let cost = if pool.is_empty() {
            0.0
        } else {
            alpha * added / msp + (1.0 - alpha) * (1.0 - matched as f64 / pool.len() as f64)
        };
        best = best.min(cost);
    }
    best
}

/// 2 drivers and 3 riders on a 5×5 grid with integer weights, all idle at
/// their origins at time 0.
pub fn micro_instance(seed: u64) -> (RoadNetwork, Vec<Driver>, Vec<Rider>) {
    let mut rng = stream(seed, &[0xC0FFEE]);
    let net = grid_network(GridSpec::random(5, 1.0, 5.0), &mut rng, NetConfig::default()).unwrap();
    let pair = |rng: &mut Rng| loop {
        let o = NodeId(rng.gen_range(0..25));
        let d = NodeId(rng.gen_range(0..25));
        if o != d {
            return (o, d);
        }
    };
    let drivers = (0..2)
        .map(|i| {
            let (o, d) = pair(&mut rng);
            let direct = net.distance(o, d).unwrap();
            Driver::new(DriverId(i + 1), o, d, 0.0, 2.5 * direct + 8.0, 2, 1.0).unwrap()
        })
        .collect();
    let riders = (0..3)
        .map(|i| {
            let (o, d) = pair(&mut rng);
            let trip = net.distance(o, d).unwrap();
            let early = rng.gen_range(0..5) as f64;
            Rider::new(RiderId(i + 1), o, d, early, early + 2.0 * trip + 6.0).unwrap()
        })
        .collect();
    (net, drivers, riders)
}
