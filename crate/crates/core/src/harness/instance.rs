//! Instance files: one driver or rider per line.
//!
//! ```text
//! # id origin destination early late load
//! 7 102 955 0 1800 -4
//! 12 40 77 31 420 1
//! ```
//!
//! A negative load marks a driver with that many seats; a positive load is a
//! rider party size. Vertices are external node ids of the road network.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufRead, BufReader};
use std::path::Path;

use thiserror::Error;

use crate::domain::{DomainError, Driver, DriverId, Rider, RiderId};
use crate::roadnet::RoadNetwork;
use crate::sim::Scenario;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: load 0 is neither a driver nor a rider")]
    ZeroLoad { line: usize },
    #[error("line {line}: early time {early} is after late time {late}")]
    Window { line: usize, early: f64, late: f64 },
    #[error("duplicate {kind} id {id}")]
    DuplicateId { kind: &'static str, id: u64 },
    #[error("record {id} references vertex {vertex}, which is not in the network")]
    UnknownVertex { id: u64, vertex: u64 },
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InstanceRecord {
    pub id: u64,
    pub origin: u64,
    pub destination: u64,
    pub early: f64,
    pub late: f64,
    pub load: i64,
}

impl InstanceRecord {
    pub fn is_driver(&self) -> bool {
        self.load < 0
    }

    /// Seats offered (drivers) or requested (riders).
    pub fn seats(&self) -> u32 {
        self.load.unsigned_abs() as u32
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Instance {
    pub records: Vec<InstanceRecord>,
}

impl Instance {
    pub fn drivers(&self) -> impl Iterator<Item = &InstanceRecord> {
        self.records.iter().filter(|r| r.is_driver())
    }

    pub fn riders(&self) -> impl Iterator<Item = &InstanceRecord> {
        self.records.iter().filter(|r| !r.is_driver())
    }

    /// Serialises to the text format. Times use the shortest representation
    /// that parses back to the same value.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# id origin destination early late load\n");
        for r in &self.records {
            let _ = writeln!(
                out,
                "{} {} {} {} {} {}",
                r.id, r.origin, r.destination, r.early, r.late, r.load
            );
        }
        out
    }

    /// Resolves vertices against `net` and builds the simulation inputs.
    pub fn to_scenario(&self, net: &RoadNetwork, speed: f64) -> Result<Scenario, InstanceError> {
        let vertex = |id: u64, v: u64| net.node(v).ok_or(InstanceError::UnknownVertex { id, vertex: v });
        let mut scenario = Scenario::default();
        for r in &self.records {
            let (o, d) = (vertex(r.id, r.origin)?, vertex(r.id, r.destination)?);
            if r.is_driver() {
                scenario.drivers.push(Driver::new(
                    DriverId(r.id),
                    o,
                    d,
                    r.early,
                    r.late,
                    r.seats(),
                    speed,
                )?);
            } else {
                scenario.riders.push(Rider::with_seats(
                    RiderId(r.id),
                    o,
                    d,
                    r.early,
                    r.late,
                    r.seats(),
                )?);
            }
        }
        Ok(scenario)
    }
}

fn field<T: std::str::FromStr>(tok: Option<&str>, name: &str, line: usize) -> Result<T, InstanceError> {
    let tok = tok.ok_or_else(|| InstanceError::Parse {
        line,
        msg: format!("missing field `{name}`"),
    })?;
    tok.parse().map_err(|_| InstanceError::Parse {
        line,
        msg: format!("bad {name} `{tok}`"),
    })
}

pub fn parse_instance<R: BufRead>(reader: R) -> Result<Instance, InstanceError> {
    let mut records = Vec::new();
    let mut seen = (HashSet::new(), HashSet::new());
    for (i, text) in reader.lines().enumerate() {
        let line = i + 1;
        let text = text.map_err(|e| InstanceError::Parse {
            line,
            msg: e.to_string(),
        })?;
        let body = text.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut toks = body.split_whitespace();
        let rec = InstanceRecord {
            id: field(toks.next(), "id", line)?,
            origin: field(toks.next(), "origin", line)?,
            destination: field(toks.next(), "destination", line)?,
            early: field(toks.next(), "early", line)?,
            late: field(toks.next(), "late", line)?,
            load: field(toks.next(), "load", line)?,
        };
        if let Some(extra) = toks.next() {
            return Err(InstanceError::Parse {
                line,
                msg: format!("unexpected trailing field `{extra}`"),
            });
        }
        if rec.load == 0 {
            return Err(InstanceError::ZeroLoad { line });
        }
        if !rec.early.is_finite() || !rec.late.is_finite() || rec.early > rec.late {
            return Err(InstanceError::Window {
                line,
                early: rec.early,
                late: rec.late,
            });
        }
        let (set, kind) = if rec.is_driver() {
            (&mut seen.0, "driver")
        } else {
            (&mut seen.1, "rider")
        };
        if !set.insert(rec.id) {
            return Err(InstanceError::DuplicateId { kind, id: rec.id });
        }
        records.push(rec);
    }
    Ok(Instance { records })
}

pub fn load_instance(path: &Path) -> Result<Instance, InstanceError> {
    let file = fs::File::open(path).map_err(|source| InstanceError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_instance(BufReader::new(file))
}

pub fn save_instance(instance: &Instance, path: &Path) -> Result<(), InstanceError> {
    fs::write(path, instance.to_text()).map_err(|source| InstanceError::Io {
        path: path.display().to_string(),
        source,
    })
}
