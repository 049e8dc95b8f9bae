//! Flat run configuration, loadable from TOML with case-insensitive keys.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::gen::{ArrivalProfile, GenParams, GridSpec};
use crate::bbo::BBOConfig;
use crate::matchers::{Matcher, MatcherKind, SAParams, UnknownMatcher};
use crate::roadnet::{NetConfig, DEFAULT_CACHE_ENTRIES};
use crate::sim::SimConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {msg}")]
    File { path: String, msg: String },
    #[error("config: {0}")]
    Toml(String),
    #[error(transparent)]
    Matcher(#[from] UnknownMatcher),
    #[error("unknown arrival profile `{0}` (expected uniform or benchmark)")]
    Profile(String),
}

/// Every tunable of a run. Absent keys keep their defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub matcher: String,
    pub alpha: f64,
    pub speed: f64,
    pub batch_seconds: u64,
    pub tick_seconds: u64,
    pub horizon_seconds: u64,
    pub cache_capacity: usize,

    pub population_size: usize,
    pub generation_limit: usize,
    pub elite_count: usize,
    pub hybrid_ratio: f64,
    pub rollback: bool,
    pub mutation_probability: f64,

    pub initial_temperature: f64,
    pub cooling_rate: f64,
    pub iterations_per_temperature: usize,
    pub min_temperature: f64,

    pub drivers: usize,
    pub riders: usize,
    pub capacity: u32,
    pub driver_slack: f64,
    pub rider_slack: f64,
    pub rate_multiplier: f64,
    /// `uniform` or `benchmark`.
    pub profile: String,
    pub grid: usize,
    pub grid_min_weight: f64,
    pub grid_max_weight: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let bbo = BBOConfig::default();
        let sa = SAParams::default();
        let gen = GenParams::default();
        let sim = SimConfig::default();
        Self {
            seed: 0,
            matcher: "bbo".into(),
            alpha: sim.alpha,
            speed: sim.speed,
            batch_seconds: sim.batch_seconds,
            tick_seconds: sim.tick_seconds,
            horizon_seconds: sim.horizon_seconds,
            cache_capacity: DEFAULT_CACHE_ENTRIES,
            population_size: bbo.population_size,
            generation_limit: bbo.generation_limit,
            elite_count: bbo.elite_count,
            hybrid_ratio: bbo.hybrid_ratio,
            rollback: bbo.rollback,
            mutation_probability: bbo.mutation_probability,
            initial_temperature: sa.initial_temperature,
            cooling_rate: sa.cooling_rate,
            iterations_per_temperature: sa.iterations_per_temperature,
            min_temperature: sa.min_temperature,
            drivers: gen.driver_count,
            riders: gen.rider_count,
            capacity: gen.capacity,
            driver_slack: gen.driver_slack,
            rider_slack: gen.rider_slack,
            rate_multiplier: gen.rate_multiplier,
            profile: "uniform".into(),
            grid: 40,
            grid_min_weight: 100.0,
            grid_max_weight: 300.0,
        }
    }
}

fn lowercase_keys(v: toml::Value) -> toml::Value {
    match v {
        toml::Value::Table(t) => toml::Value::Table(
            t.into_iter()
                .map(|(k, v)| (k.to_ascii_lowercase().replace('-', "_"), lowercase_keys(v)))
                .collect(),
        ),
        other => other,
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let value: toml::Value = toml::from_str(text).map_err(|e| ConfigError::Toml(e.to_string()))?;
        lowercase_keys(value)
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError::Toml(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::File {
            path: path.display().to_string(),
            msg: e.to_string(),
        })?;
        Self::from_toml(&text).map_err(|e| ConfigError::File {
            path: path.display().to_string(),
            msg: e.to_string(),
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("flat config always serialises")
    }

    pub fn bbo(&self) -> BBOConfig {
        BBOConfig {
            population_size: self.population_size,
            generation_limit: self.generation_limit,
            elite_count: self.elite_count,
            hybrid_ratio: self.hybrid_ratio,
            rollback: self.rollback,
            mutation_probability: self.mutation_probability,
            alpha: self.alpha,
            seed: self.seed,
        }
    }

    pub fn sa(&self) -> SAParams {
        SAParams {
            initial_temperature: self.initial_temperature,
            cooling_rate: self.cooling_rate,
            iterations_per_temperature: self.iterations_per_temperature,
            min_temperature: self.min_temperature,
            seed: self.seed,
        }
    }

    pub fn matcher_kind(&self) -> Result<MatcherKind, ConfigError> {
        Ok(self.matcher.parse()?)
    }

    pub fn matcher_for(&self, kind: MatcherKind) -> Matcher {
        match kind {
            MatcherKind::Greedy => Matcher::Greedy,
            MatcherKind::Nn => Matcher::Nn,
            MatcherKind::Sa => Matcher::Sa(self.sa()),
            MatcherKind::Bbo => Matcher::Bbo(self.bbo()),
        }
    }

    pub fn sim(&self, kind: MatcherKind) -> SimConfig {
        SimConfig {
            batch_seconds: self.batch_seconds,
            tick_seconds: self.tick_seconds,
            horizon_seconds: self.horizon_seconds,
            matcher: self.matcher_for(kind),
            alpha: self.alpha,
            speed: self.speed,
            seed: self.seed,
        }
    }

    pub fn net(&self) -> NetConfig {
        NetConfig {
            cache_capacity: self.cache_capacity,
        }
    }

    pub fn grid_spec(&self) -> GridSpec {
        GridSpec::random(self.grid, self.grid_min_weight, self.grid_max_weight)
    }

    pub fn gen(&self) -> Result<GenParams, ConfigError> {
        let base = match self.profile.to_ascii_lowercase().as_str() {
            "uniform" => GenParams {
                driver_count: self.drivers,
                rider_count: self.riders,
                horizon_seconds: self.horizon_seconds,
                profile: ArrivalProfile::Uniform,
                ..Default::default()
            },
            "benchmark" => GenParams::benchmark(),
            other => return Err(ConfigError::Profile(other.to_string())),
        };
        Ok(GenParams {
            capacity: self.capacity,
            driver_slack: self.driver_slack,
            rider_slack: self.rider_slack,
            speed: self.speed,
            rate_multiplier: self.rate_multiplier,
            ..base
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_are_case_insensitive() {
        let c = RunConfig::from_toml("Seed = 9\nPOPULATION_SIZE = 7\nhybrid-ratio = 1.0\nMatcher = \"SA\"").unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.population_size, 7);
        assert_eq!(c.hybrid_ratio, 1.0);
        assert_eq!(c.matcher_kind().unwrap(), MatcherKind::Sa);
        assert_eq!(c.generation_limit, 10);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::from_toml("populaton_size = 3").is_err());
    }

    #[test]
    fn toml_round_trip() {
        let c = RunConfig { seed: 4, rollback: false, ..Default::default() };
        assert_eq!(RunConfig::from_toml(&c.to_toml()).unwrap(), c);
    }
}
