//! Road network storage and exact shortest-path queries.
//!
//! Vertices are addressed internally by dense [`NodeId`] indices; the external
//! ids found in node files are kept for I/O. Shortest paths are computed with
//! Dijkstra's algorithm and pair distances are memoised in a sharded LRU
//! cache keyed by the unordered vertex pair.

use std::cmp::Ordering;
use std::collections::hash_map::Entry;
use std::collections::{BinaryHeap, HashMap};
use std::fmt;
use std::io::BufRead;
use std::path::Path;

use lru::LruCache;
use parking_lot::Mutex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dense internal vertex index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vertex {
    pub ext_id: u64,
    pub lat: f64,
    pub lon: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LoadError {
    #[error("record {record}: duplicate vertex id {id}")]
    DuplicateVertex { record: usize, id: u64 },
    #[error("record {record}: edge ({u}, {v}) references unknown vertex {missing}")]
    UnknownVertex { record: usize, u: u64, v: u64, missing: u64 },
    #[error("record {record}: edge ({u}, {v}) has non-positive weight {w}")]
    NonPositiveWeight { record: usize, u: u64, v: u64, w: f64 },
    #[error("{file} line {line}: {msg}")]
    Parse { file: String, line: usize, msg: String },
    #[error("i/o error on {file}: {msg}")]
    Io { file: String, msg: String },
}

/// Failure of a path query.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum RouteError {
    #[error("no path from {from} to {to}")]
    Unreachable { from: NodeId, to: NodeId },
    #[error("vertex {0} is not part of this network")]
    UnknownNode(NodeId),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathResult {
    pub distance: f64,
    pub hops: Vec<NodeId>,
}

/// Network-level tuning.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetConfig {
    /// Maximum number of cached vertex-pair distances. Zero disables the cache.
    pub cache_capacity: usize,
}

/// 2^30 bytes at roughly 64 bytes per cached entry.
pub const DEFAULT_CACHE_ENTRIES: usize = 1 << 24;

impl Default for NetConfig {
    fn default() -> Self {
        Self {
            cache_capacity: DEFAULT_CACHE_ENTRIES,
        }
    }
}

const CACHE_SHARDS: usize = 16;

type Shard = Mutex<LruCache<(u32, u32), Option<f64>>>;

struct DistanceCache {
    shards: Vec<Shard>,
    per_shard: usize,
}

impl DistanceCache {
    fn new(capacity: usize) -> Option<Self> {
        if capacity == 0 {
            return None;
        }
        let per_shard = capacity.div_ceil(CACHE_SHARDS).max(1);
        let shards = (0..CACHE_SHARDS)
            .map(|_| Mutex::new(LruCache::unbounded()))
            .collect();
        Some(Self { shards, per_shard })
    }

    fn shard(&self, key: (u32, u32)) -> &Shard {
        let h = (key.0 as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ key.1 as u64;
        &self.shards[(h as usize) % CACHE_SHARDS]
    }

    fn get(&self, key: (u32, u32)) -> Option<Option<f64>> {
        self.shard(key).lock().get(&key).copied()
    }

    fn put(&self, key: (u32, u32), value: Option<f64>) {
        let mut shard = self.shard(key).lock();
        shard.put(key, value);
        while shard.len() > self.per_shard {
            shard.pop_lru();
        }
    }

    fn len(&self) -> usize {
        self.shards.iter().map(|s| s.lock().len()).sum()
    }
}

/// Undirected, positively weighted road graph. Immutable once loaded; the
/// distance cache uses interior locking so the network can be shared across
/// threads.
pub struct RoadNetwork {
    vertices: Vec<Vertex>,
    index: HashMap<u64, NodeId>,
    adj: Vec<Vec<(NodeId, f64)>>,
    edge_count: usize,
    cache: Option<DistanceCache>,
}

impl fmt::Debug for RoadNetwork {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RoadNetwork")
            .field("vertices", &self.vertices.len())
            .field("edges", &self.edge_count)
            .finish()
    }
}

/// Builds a network from node records `(id, lat, lon)` and edge records
/// `(u, v, w)`. Any invalid record rejects the whole load.
pub fn load_network<N, E>(nodes: N, edges: E, cfg: NetConfig) -> Result<RoadNetwork, LoadError>
where
    N: IntoIterator<Item = (u64, f64, f64)>,
    E: IntoIterator<Item = (u64, u64, f64)>,
{
    let mut vertices = Vec::new();
    let mut index = HashMap::new();
    for (record, (id, lat, lon)) in nodes.into_iter().enumerate() {
        match index.entry(id) {
            Entry::Occupied(_) => return Err(LoadError::DuplicateVertex { record, id }),
            Entry::Vacant(slot) => {
                slot.insert(NodeId(vertices.len() as u32));
                vertices.push(Vertex { ext_id: id, lat, lon });
            }
        }
    }
    let mut adj = vec![Vec::new(); vertices.len()];
    let mut edge_count = 0;
    for (record, (u, v, w)) in edges.into_iter().enumerate() {
        let lookup = |id: u64| {
            index.get(&id).copied().ok_or(LoadError::UnknownVertex {
                record,
                u,
                v,
                missing: id,
            })
        };
        let (a, b) = (lookup(u)?, lookup(v)?);
        if !(w > 0.0 && w.is_finite()) {
            return Err(LoadError::NonPositiveWeight { record, u, v, w });
        }
        adj[a.index()].push((b, w));
        if a != b {
            adj[b.index()].push((a, w));
        }
        edge_count += 1;
    }
    Ok(RoadNetwork {
        vertices,
        index,
        adj,
        edge_count,
        cache: DistanceCache::new(cfg.cache_capacity),
    })
}

fn parse_fields<'a>(
    file: &str,
    line: usize,
    text: &'a str,
    expect: usize,
) -> Result<Vec<&'a str>, LoadError> {
    let fields: Vec<&str> = text.split_whitespace().collect();
    if fields.len() != expect {
        return Err(LoadError::Parse {
            file: file.to_string(),
            line,
            msg: format!("expected {expect} fields, found {}", fields.len()),
        });
    }
    Ok(fields)
}

fn parse_num<T: std::str::FromStr>(file: &str, line: usize, s: &str) -> Result<T, LoadError> {
    s.parse().map_err(|_| LoadError::Parse {
        file: file.to_string(),
        line,
        msg: format!("cannot parse {s:?}"),
    })
}

fn read_records<R: BufRead, T>(
    reader: R,
    file: &str,
    expect: usize,
    mut parse: impl FnMut(usize, &[&str]) -> Result<T, LoadError>,
) -> Result<Vec<T>, LoadError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| LoadError::Io {
            file: file.to_string(),
            msg: e.to_string(),
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields = parse_fields(file, i + 1, trimmed, expect)?;
        out.push(parse(i + 1, &fields)?);
    }
    Ok(out)
}

/// Parses node records (`id lat lon` per line, `#` comments).
pub fn read_nodes<R: BufRead>(reader: R, file: &str) -> Result<Vec<(u64, f64, f64)>, LoadError> {
    read_records(reader, file, 3, |line, f| {
        Ok((
            parse_num(file, line, f[0])?,
            parse_num(file, line, f[1])?,
            parse_num(file, line, f[2])?,
        ))
    })
}

/// Parses edge records (`u v w` per line, `#` comments).
pub fn read_edges<R: BufRead>(reader: R, file: &str) -> Result<Vec<(u64, u64, f64)>, LoadError> {
    read_records(reader, file, 3, |line, f| {
        Ok((
            parse_num(file, line, f[0])?,
            parse_num(file, line, f[1])?,
            parse_num(file, line, f[2])?,
        ))
    })
}

fn open(path: &Path) -> Result<std::io::BufReader<std::fs::File>, LoadError> {
    std::fs::File::open(path)
        .map(std::io::BufReader::new)
        .map_err(|e| LoadError::Io {
            file: path.display().to_string(),
            msg: e.to_string(),
        })
}

/// Loads a network from a node file and an edge file.
pub fn load_network_files(
    nodes: &Path,
    edges: &Path,
    cfg: NetConfig,
) -> Result<RoadNetwork, LoadError> {
    let node_recs = read_nodes(open(nodes)?, &nodes.display().to_string())?;
    let edge_recs = read_edges(open(edges)?, &edges.display().to_string())?;
    load_network(node_recs, edge_recs, cfg)
}

#[derive(Copy, Clone, PartialEq)]
struct HeapEntry {
    dist: f64,
    node: u32,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on (dist, node)
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl RoadNetwork {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn vertex(&self, id: NodeId) -> &Vertex {
        &self.vertices[id.index()]
    }

    pub fn node(&self, ext_id: u64) -> Option<NodeId> {
        self.index.get(&ext_id).copied()
    }

    pub fn ext_id(&self, id: NodeId) -> u64 {
        self.vertices[id.index()].ext_id
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.vertices.len() as u32).map(NodeId)
    }

    pub fn neighbors(&self, id: NodeId) -> &[(NodeId, f64)] {
        &self.adj[id.index()]
    }

    /// Iterates every undirected edge once as external `(u, v, w)` records.
    pub fn edge_records(&self) -> impl Iterator<Item = (u64, u64, f64)> + '_ {
        self.adj.iter().enumerate().flat_map(move |(a, list)| {
            list.iter()
                .filter(move |(b, _)| b.index() >= a)
                .map(move |&(b, w)| (self.vertices[a].ext_id, self.ext_id(b), w))
        })
    }

    /// Weight of the lightest edge joining `u` and `v`, if adjacent.
    pub fn edge_weight(&self, u: NodeId, v: NodeId) -> Option<f64> {
        self.adj[u.index()]
            .iter()
            .filter(|(n, _)| *n == v)
            .map(|&(_, w)| w)
            .min_by(f64::total_cmp)
    }

    /// Planar distance between vertex coordinates, in degrees.
    pub fn euclidean(&self, u: NodeId, v: NodeId) -> f64 {
        let (a, b) = (self.vertex(u), self.vertex(v));
        (a.lat - b.lat).hypot(a.lon - b.lon)
    }

    pub fn cache_len(&self) -> usize {
        self.cache.as_ref().map_or(0, DistanceCache::len)
    }

    fn check(&self, id: NodeId) -> Result<(), RouteError> {
        if id.index() < self.vertices.len() {
            Ok(())
        } else {
            Err(RouteError::UnknownNode(id))
        }
    }

    /// Dijkstra from `source`, stopping once `target` is settled. Returns the
    /// predecessor map and target distance.
    fn search(&self, source: NodeId, target: NodeId) -> Option<(f64, Vec<u32>)> {
        let n = self.vertices.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut pred = vec![u32::MAX; n];
        let mut heap = BinaryHeap::new();
        dist[source.index()] = 0.0;
        heap.push(HeapEntry {
            dist: 0.0,
            node: source.0,
        });
        while let Some(HeapEntry { dist: d, node }) = heap.pop() {
            if d > dist[node as usize] {
                continue;
            }
            if node == target.0 {
                return Some((d, pred));
            }
            for &(next, w) in &self.adj[node as usize] {
                let nd = d + w;
                let slot = &mut dist[next.index()];
                if nd < *slot {
                    *slot = nd;
                    pred[next.index()] = node;
                    heap.push(HeapEntry {
                        dist: nd,
                        node: next.0,
                    });
                }
            }
        }
        None
    }

    // The search always runs from the smaller index so that both query
    // directions sum edge weights in the same order, keeping cached and
    // uncached answers bit-identical.
    fn canonical(u: NodeId, v: NodeId) -> (NodeId, NodeId) {
        if u <= v {
            (u, v)
        } else {
            (v, u)
        }
    }

    /// Shortest-path distance between `u` and `v` in meters.
    pub fn distance(&self, u: NodeId, v: NodeId) -> Result<f64, RouteError> {
        self.check(u)?;
        self.check(v)?;
        if u == v {
            return Ok(0.0);
        }
        let (a, b) = Self::canonical(u, v);
        let key = (a.0, b.0);
        let cached = self.cache.as_ref().and_then(|c| c.get(key));
        let found = match cached {
            Some(hit) => hit,
            None => {
                let found = self.search(a, b).map(|(d, _)| d);
                if let Some(cache) = &self.cache {
                    cache.put(key, found);
                }
                found
            }
        };
        found.ok_or(RouteError::Unreachable { from: u, to: v })
    }

    /// Minimal shortest path between `u` and `v`, with its vertex sequence.
    pub fn msp(&self, u: NodeId, v: NodeId) -> Result<PathResult, RouteError> {
        self.check(u)?;
        self.check(v)?;
        if u == v {
            return Ok(PathResult {
                distance: 0.0,
                hops: vec![u],
            });
        }
        let (a, b) = Self::canonical(u, v);
        let (distance, pred) = self
            .search(a, b)
            .ok_or(RouteError::Unreachable { from: u, to: v })?;
        if let Some(cache) = &self.cache {
            cache.put((a.0, b.0), Some(distance));
        }
        let mut hops = vec![b];
        let mut cur = b.0;
        while cur != a.0 {
            cur = pred[cur as usize];
            hops.push(NodeId(cur));
        }
        if u == a {
            hops.reverse();
        }
        Ok(PathResult { distance, hops })
    }

    /// Length of the route visiting `stops` in order, each leg a shortest path.
    pub fn schedule_distance(&self, stops: &[NodeId]) -> Result<f64, RouteError> {
        if stops.is_empty() {
            return Ok(0.0);
        }
        self.check(stops[0])?;
        stops
            .windows(2)
            .try_fold(0.0, |acc, leg| Ok(acc + self.distance(leg[0], leg[1])?))
    }
}
