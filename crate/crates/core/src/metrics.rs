//! Matching rate, distance overhead, matching delay and the weighted cost.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{distance_overhead, Driver};
use crate::roadnet::{RoadNetwork, RouteError};

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum MetricsError {
    #[error("matching rate is undefined without riders")]
    NoRiders,
    #[error("cost is undefined when the summed rider trip distance is zero")]
    ZeroRiderDistance,
    #[error("objective weight {0} outside [0, 1]")]
    Alpha(f64),
}

/// Weight of the overhead term against the unmatched term.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    pub alpha: f64,
}

impl CostParams {
    pub fn new(alpha: f64) -> Result<Self, MetricsError> {
        if (0.0..=1.0).contains(&alpha) {
            Ok(Self { alpha })
        } else {
            Err(MetricsError::Alpha(alpha))
        }
    }
}

impl Default for CostParams {
    fn default() -> Self {
        Self { alpha: 0.5 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsSnapshot {
    pub matched_count: usize,
    pub total_riders: usize,
    pub overhead_sum: f64,
    pub rider_msp_sum: f64,
    pub matching_delays: Vec<f64>,
    pub base_driver_distance: f64,
    pub base_rider_distance: f64,
    pub matched_trip_distance: f64,
    /// Drivers contributing to `overhead_sum`; used for the mean.
    pub driver_count: usize,
}

impl MetricsSnapshot {
    pub fn overhead_mean(&self) -> f64 {
        if self.driver_count == 0 {
            0.0
        } else {
            self.overhead_sum / self.driver_count as f64
        }
    }
}

/// `|R_s| / |R|`.
pub fn matching_rate(s: &MetricsSnapshot) -> Result<f64, MetricsError> {
    if s.total_riders == 0 {
        return Err(MetricsError::NoRiders);
    }
    Ok(s.matched_count as f64 / s.total_riders as f64)
}

/// Sum of per-driver distance overheads.
pub fn overhead_sum<'a>(
    drivers: impl IntoIterator<Item = &'a Driver>,
    net: &RoadNetwork,
) -> Result<f64, RouteError> {
    drivers
        .into_iter()
        .try_fold(0.0, |acc, d| Ok(acc + distance_overhead(d, net)?))
}

/// The weighted objective from its three aggregates. Shared by whole-run
/// reporting and per-batch optimisation.
pub fn weighted_cost(
    alpha: f64,
    overhead: f64,
    rider_msp_sum: f64,
    rate: f64,
) -> Result<f64, MetricsError> {
    if rider_msp_sum <= 0.0 {
        return Err(MetricsError::ZeroRiderDistance);
    }
    Ok(alpha * overhead / rider_msp_sum + (1.0 - alpha) * (1.0 - rate))
}

/// `alpha * D_ov / sum(MSP(r_o, r_d)) + (1 - alpha) * (1 - M_R)`.
pub fn cost(p: CostParams, s: &MetricsSnapshot) -> Result<f64, MetricsError> {
    if s.rider_msp_sum <= 0.0 {
        return Err(MetricsError::ZeroRiderDistance);
    }
    weighted_cost(p.alpha, s.overhead_sum, s.rider_msp_sum, matching_rate(s)?)
}

/// Mean and maximum matching delay; `(0, 0)` when nobody was matched.
pub fn matching_delay_stats(s: &MetricsSnapshot) -> (f64, f64) {
    if s.matching_delays.is_empty() {
        return (0.0, 0.0);
    }
    let sum: f64 = s.matching_delays.iter().sum();
    let max = s.matching_delays.iter().copied().fold(0.0, f64::max);
    (sum / s.matching_delays.len() as f64, max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn snap(matched: usize, total: usize, overhead: f64, msp: f64) -> MetricsSnapshot {
        MetricsSnapshot {
            matched_count: matched,
            total_riders: total,
            overhead_sum: overhead,
            rider_msp_sum: msp,
            ..Default::default()
        }
    }

    #[test]
    fn rates() {
        assert_eq!(matching_rate(&snap(0, 10, 0.0, 1.0)).unwrap(), 0.0);
        assert_eq!(matching_rate(&snap(10, 10, 0.0, 1.0)).unwrap(), 1.0);
        let r = matching_rate(&snap(321, 668, 0.0, 1.0)).unwrap();
        assert!((r - 0.4805).abs() < 1e-4);
        assert_eq!(matching_rate(&snap(0, 0, 0.0, 1.0)), Err(MetricsError::NoRiders));
    }

    #[test]
    fn cost_edges() {
        let c = cost(CostParams::new(0.0).unwrap(), &snap(1, 4, 123.0, 10.0)).unwrap();
        assert_eq!(c, 0.75);
        let c = cost(CostParams::new(1.0).unwrap(), &snap(1, 4, 0.0, 10.0)).unwrap();
        assert_eq!(c, 0.0);
        assert_eq!(
            cost(CostParams::default(), &snap(1, 4, 0.0, 0.0)),
            Err(MetricsError::ZeroRiderDistance)
        );
        assert!(CostParams::new(1.5).is_err());
    }

    #[test]
    fn table_case_one() {
        let c = weighted_cost(0.5, 1_315_084.0, 3_532_517.0, 0.479).unwrap();
        assert!((c - 0.44664).abs() < 1e-4);
        assert!((2.0 * c - 0.8932).abs() < 5e-4);
    }

    #[test]
    fn delays() {
        let mut s = MetricsSnapshot::default();
        assert_eq!(matching_delay_stats(&s), (0.0, 0.0));
        s.matching_delays = vec![10.0, 20.0];
        assert_eq!(matching_delay_stats(&s), (15.0, 20.0));
    }

    #[test]
    fn overhead_of_no_drivers_is_zero() {
        let net = crate::roadnet::load_network([], [], Default::default()).unwrap();
        assert_eq!(overhead_sum(std::iter::empty(), &net).unwrap(), 0.0);
    }
}
