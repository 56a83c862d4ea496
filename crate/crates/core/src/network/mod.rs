//! Skyway network: rooftop charging stations joined by line-of-sight segments,
//! plus the region grid and per-company density heatmaps built over it.

mod grid;
mod heatmap;
mod region_paths;
mod synthetic;

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap, VecDeque};
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::domain::{ChargingProviderId, NodeId};
use crate::error::{Error, Result};

pub use grid::{CellId, RegionGrid, DEFAULT_GRID_RESOLUTION};
pub use heatmap::{build_all_heatmaps, build_heatmap, DensityHeatmap};
pub use region_paths::{t_shortest_region_paths, RegionPathSearch, DEFAULT_REGION_PATHS};
pub use synthetic::{synthetic_network, SyntheticNetworkConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Heading from `self` towards `other`, radians counter-clockwise from +x.
    pub fn heading_to(&self, other: &Point) -> f64 {
        (other.y - self.y).atan2(other.x - self.x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkywayNode {
    pub id: NodeId,
    pub position: Point,
    pub station_owner: ChargingProviderId,
    pub pad_count: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkywaySegment {
    /// Endpoints as node ids, lower id first.
    pub endpoints: (NodeId, NodeId),
    /// meters
    pub length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Adjacent {
    /// Neighbor node index.
    pub node: usize,
    /// Segment index.
    pub segment: usize,
}

/// Immutable skyway graph. Nodes are stored sorted by id; most queries work
/// on dense node indices which follow that order.
#[derive(Debug, Clone, PartialEq)]
pub struct SkywayNetwork {
    nodes: Vec<SkywayNode>,
    segments: Vec<SkywaySegment>,
    adjacency: Vec<Vec<Adjacent>>,
    charging_providers: BTreeSet<ChargingProviderId>,
}

impl SkywayNetwork {
    /// Builds a network from stations and undirected edges. Segment lengths
    /// come from node positions. Duplicate edges collapse; when the graph is
    /// disconnected only the largest component is kept.
    pub fn new(
        mut nodes: Vec<SkywayNode>,
        edges: &[(NodeId, NodeId)],
        charging_providers: BTreeSet<ChargingProviderId>,
    ) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::EmptyNetwork);
        }
        nodes.sort_by_key(|n| n.id);
        if nodes.windows(2).any(|w| w[0].id == w[1].id) {
            return Err(Error::InvalidNetwork("duplicate node id".into()));
        }
        for n in &nodes {
            if n.pad_count == 0 {
                return Err(Error::InvalidNetwork(format!("node {} has no charging pads", n.id)));
            }
            if !charging_providers.contains(&n.station_owner) {
                return Err(Error::UnknownChargingProvider(n.station_owner));
            }
            if !(n.position.x.is_finite() && n.position.y.is_finite()) {
                return Err(Error::InvalidNetwork(format!("node {} has non-finite position", n.id)));
            }
        }

        let index_of = |id: NodeId| nodes.binary_search_by_key(&id, |n| n.id).map_err(|_| Error::UnknownNode(id));
        let mut pairs = BTreeSet::new();
        for &(a, b) in edges {
            if a == b {
                return Err(Error::InvalidNetwork(format!("self loop at node {a}")));
            }
            let (ia, ib) = (index_of(a)?, index_of(b)?);
            pairs.insert((ia.min(ib), ia.max(ib)));
        }

        // Keep the largest connected component.
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
        for &(a, b) in &pairs {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut component = vec![usize::MAX; nodes.len()];
        let mut sizes = Vec::new();
        for start in 0..nodes.len() {
            if component[start] != usize::MAX {
                continue;
            }
            let c = sizes.len();
            let mut size = 0;
            let mut queue = VecDeque::from([start]);
            component[start] = c;
            while let Some(u) = queue.pop_front() {
                size += 1;
                for &v in &adj[u] {
                    if component[v] == usize::MAX {
                        component[v] = c;
                        queue.push_back(v);
                    }
                }
            }
            sizes.push(size);
        }
        // Lowest component index wins ties, i.e. the one holding the smallest node id.
        let keep = (0..sizes.len()).max_by(|&a, &b| sizes[a].cmp(&sizes[b]).then(b.cmp(&a))).unwrap_or(0);
        if sizes.len() > 1 {
            log::warn!(
                "network has {} components; keeping the largest ({} of {} nodes)",
                sizes.len(),
                sizes[keep],
                nodes.len()
            );
        }

        let mut remap = vec![usize::MAX; nodes.len()];
        let mut kept = Vec::with_capacity(sizes[keep]);
        for (i, n) in nodes.into_iter().enumerate() {
            if component[i] == keep {
                remap[i] = kept.len();
                kept.push(n);
            }
        }
        let mut segments = Vec::new();
        let mut adjacency = vec![Vec::new(); kept.len()];
        for (a, b) in pairs {
            let (a, b) = (remap[a], remap[b]);
            if a == usize::MAX || b == usize::MAX {
                continue;
            }
            let length = kept[a].position.distance(&kept[b].position);
            if !(length > 0.0) {
                return Err(Error::InvalidNetwork(format!(
                    "nodes {} and {} coincide",
                    kept[a].id, kept[b].id
                )));
            }
            let s = segments.len();
            segments.push(SkywaySegment { endpoints: (kept[a].id, kept[b].id), length });
            adjacency[a].push(Adjacent { node: b, segment: s });
            adjacency[b].push(Adjacent { node: a, segment: s });
        }
        for list in &mut adjacency {
            list.sort_by_key(|a| a.node);
        }
        Ok(Self { nodes: kept, segments, adjacency, charging_providers })
    }

    pub fn nodes(&self) -> &[SkywayNode] {
        &self.nodes
    }

    pub fn segments(&self) -> &[SkywaySegment] {
        &self.segments
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, index: usize) -> &SkywayNode {
        &self.nodes[index]
    }

    pub fn segment(&self, index: usize) -> &SkywaySegment {
        &self.segments[index]
    }

    pub fn index_of(&self, id: NodeId) -> Option<usize> {
        self.nodes.binary_search_by_key(&id, |n| n.id).ok()
    }

    pub fn require_index(&self, id: NodeId) -> Result<usize> {
        self.index_of(id).ok_or(Error::UnknownNode(id))
    }

    /// Neighbors of a node index, ordered by neighbor index.
    pub fn neighbors(&self, index: usize) -> &[Adjacent] {
        &self.adjacency[index]
    }

    pub fn segment_between(&self, a: usize, b: usize) -> Option<usize> {
        self.adjacency[a].iter().find(|adj| adj.node == b).map(|adj| adj.segment)
    }

    pub fn charging_providers(&self) -> &BTreeSet<ChargingProviderId> {
        &self.charging_providers
    }

    pub fn total_pads(&self) -> u64 {
        self.nodes.iter().map(|n| u64::from(n.pad_count)).sum()
    }

    /// Shortest distances from every node to `target` together with the next
    /// hop on a shortest path towards it.
    pub fn shortest_path_tree(&self, target: usize) -> ShortestPathTree {
        let n = self.nodes.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut next = vec![None; n];
        let mut heap = BinaryHeap::new();
        dist[target] = 0.0;
        heap.push(HeapEntry { dist: 0.0, node: target });
        while let Some(HeapEntry { dist: d, node: u }) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for adj in &self.adjacency[u] {
                let nd = d + self.segments[adj.segment].length;
                if nd < dist[adj.node] {
                    dist[adj.node] = nd;
                    next[adj.node] = Some(u);
                    heap.push(HeapEntry { dist: nd, node: adj.node });
                }
            }
        }
        ShortestPathTree { target, dist, next }
    }

    /// Serializes to the canonical single-file form.
    pub fn to_canonical(&self) -> CanonicalNetwork {
        CanonicalNetwork {
            charging_providers: self.charging_providers.iter().copied().collect(),
            nodes: self.nodes.clone(),
            segments: self.segments.iter().map(|s| s.endpoints).collect(),
        }
    }

    pub fn from_canonical(canonical: CanonicalNetwork) -> Result<Self> {
        Self::new(
            canonical.nodes,
            &canonical.segments,
            canonical.charging_providers.into_iter().collect(),
        )
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_canonical())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_canonical(serde_json::from_str(text)?)
    }

    /// Renders the three text streams accepted by [`load_network`].
    pub fn to_text_streams(&self) -> (String, String, String) {
        let mut edges = String::new();
        let mut coords = String::new();
        let mut stations = String::new();
        for s in &self.segments {
            edges.push_str(&format!("{} {}\n", s.endpoints.0, s.endpoints.1));
        }
        for n in &self.nodes {
            coords.push_str(&format!("{} {:?} {:?}\n", n.id, n.position.x, n.position.y));
            stations.push_str(&format!("{} {} {}\n", n.id, n.station_owner, n.pad_count));
        }
        (edges, coords, stations)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalNetwork {
    pub charging_providers: Vec<ChargingProviderId>,
    pub nodes: Vec<SkywayNode>,
    pub segments: Vec<(NodeId, NodeId)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShortestPathTree {
    pub target: usize,
    pub dist: Vec<f64>,
    next: Vec<Option<usize>>,
}

impl ShortestPathTree {
    pub fn reachable(&self, from: usize) -> bool {
        self.dist[from].is_finite()
    }

    /// Node indices from `from` to the target, inclusive.
    pub fn path_from(&self, from: usize) -> Option<Vec<usize>> {
        if !self.reachable(from) {
            return None;
        }
        let mut path = vec![from];
        let mut cur = from;
        while let Some(n) = self.next[cur] {
            path.push(n);
            cur = n;
        }
        Some(path)
    }
}

#[derive(Debug, PartialEq)]
struct HeapEntry {
    dist: f64,
    node: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.dist.total_cmp(&self.dist).then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn data_lines<R: BufRead>(reader: R) -> impl Iterator<Item = Result<(usize, Vec<String>)>> {
    reader.lines().enumerate().filter_map(|(i, line)| match line {
        Err(e) => Some(Err(Error::Io(e))),
        Ok(line) => {
            let body = line.split('#').next().unwrap_or("").trim().to_string();
            if body.is_empty() {
                None
            } else {
                Some(Ok((i + 1, body.split_whitespace().map(str::to_string).collect())))
            }
        }
    })
}

fn parse_field<T: std::str::FromStr>(line: usize, field: &str, what: &str) -> Result<T> {
    field.parse().map_err(|_| Error::Parse { line, message: format!("invalid {what} {field:?}") })
}

fn expect_fields(line: usize, fields: &[String], n: usize, shape: &str) -> Result<()> {
    if fields.len() != n {
        return Err(Error::Parse { line, message: format!("expected \"{shape}\", got {} fields", fields.len()) });
    }
    Ok(())
}

/// Reads a network from an edge list (`a b`), coordinates (`id x y`) and
/// station records (`id charging_provider pads`). `#` starts a comment.
pub fn load_network<E: BufRead, C: BufRead, S: BufRead>(
    edge_list: E,
    coords: C,
    stations: S,
) -> Result<SkywayNetwork> {
    use std::collections::BTreeMap;

    let mut positions = BTreeMap::new();
    for item in data_lines(coords) {
        let (line, f) = item?;
        expect_fields(line, &f, 3, "node_id x y")?;
        let id: NodeId = parse_field(line, &f[0], "node id")?;
        let x: f64 = parse_field(line, &f[1], "x coordinate")?;
        let y: f64 = parse_field(line, &f[2], "y coordinate")?;
        if positions.insert(id, Point::new(x, y)).is_some() {
            return Err(Error::Parse { line, message: format!("duplicate coordinates for node {id}") });
        }
    }

    let mut station_of = BTreeMap::new();
    let mut providers = BTreeSet::new();
    for item in data_lines(stations) {
        let (line, f) = item?;
        expect_fields(line, &f, 3, "node_id charging_provider_id pad_count")?;
        let id: NodeId = parse_field(line, &f[0], "node id")?;
        let owner: ChargingProviderId = parse_field(line, &f[1], "charging provider id")?;
        let pads: u32 = parse_field(line, &f[2], "pad count")?;
        if pads == 0 {
            return Err(Error::Parse { line, message: format!("node {id} must have at least one pad") });
        }
        if !positions.contains_key(&id) {
            return Err(Error::Parse { line, message: format!("station at node {id} which has no coordinates") });
        }
        if station_of.insert(id, (owner, pads)).is_some() {
            return Err(Error::Parse { line, message: format!("duplicate station record for node {id}") });
        }
        providers.insert(owner);
    }

    let mut edges = Vec::new();
    let mut used = BTreeSet::new();
    for item in data_lines(edge_list) {
        let (line, f) = item?;
        expect_fields(line, &f, 2, "node_a node_b")?;
        let a: NodeId = parse_field(line, &f[0], "node id")?;
        let b: NodeId = parse_field(line, &f[1], "node id")?;
        for id in [a, b] {
            if !positions.contains_key(&id) {
                return Err(Error::Parse { line, message: format!("node {id} has no coordinates") });
            }
            if !station_of.contains_key(&id) {
                return Err(Error::Parse { line, message: format!("node {id} has no station record") });
            }
        }
        if a == b {
            return Err(Error::Parse { line, message: format!("self loop at node {a}") });
        }
        used.insert(a);
        used.insert(b);
        edges.push((a, b));
    }
    if edges.is_empty() {
        return Err(Error::EmptyNetwork);
    }

    let nodes = used
        .into_iter()
        .map(|id| {
            let (owner, pads) = station_of[&id];
            SkywayNode { id, position: positions[&id], station_owner: owner, pad_count: pads }
        })
        .collect();
    SkywayNetwork::new(nodes, &edges, providers)
}
