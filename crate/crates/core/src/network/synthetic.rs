use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Point, SkywayNetwork, SkywayNode};
use crate::domain::{ChargingProviderId, NodeId};
use crate::error::{Error, Result};

/// Parameters of the synthetic city used when no edge list is supplied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticNetworkConfig {
    pub nodes: usize,
    /// Side of the square service area, meters.
    pub side: f64,
    pub charging_providers: u32,
    /// Fraction of nodes drawn around a dense downtown core.
    pub core_fraction: f64,
    /// Spread of the core as a fraction of `side`.
    pub core_spread: f64,
    /// Extra nearest-neighbour links on top of the spanning tree.
    pub nearest_links: usize,
    pub max_pads: u32,
    /// Ownership locality: company influence decays as exp(-d / (scale * side)).
    pub ownership_scale: f64,
}

impl Default for SyntheticNetworkConfig {
    fn default() -> Self {
        Self {
            nodes: 100,
            side: 40_000.0,
            charging_providers: 5,
            core_fraction: 0.5,
            core_spread: 0.12,
            nearest_links: 3,
            max_pads: 4,
            ownership_scale: 0.25,
        }
    }
}

/// Seeded synthetic skyway network: a dense core plus uniform sprawl, linked
/// by a Euclidean spanning tree and a few nearest-neighbour segments, with
/// charging companies that each dominate part of the city.
pub fn synthetic_network(seed: u64, config: &SyntheticNetworkConfig) -> Result<SkywayNetwork> {
    if config.nodes < 2 {
        return Err(Error::Config("synthetic network needs at least 2 nodes".into()));
    }
    if config.charging_providers == 0 || config.max_pads == 0 {
        return Err(Error::Config("need at least one charging provider and one pad".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let side = config.side;
    let core = Point::new(side * rng.gen_range(0.55..0.7), side * rng.gen_range(0.4..0.6));

    let mut positions = Vec::with_capacity(config.nodes);
    while positions.len() < config.nodes {
        let p = if rng.gen_bool(config.core_fraction.clamp(0.0, 1.0)) {
            // Box-Muller around the core.
            let (u1, u2): (f64, f64) = (rng.gen_range(f64::EPSILON..1.0), rng.gen());
            let r = (-2.0 * u1.ln()).sqrt() * config.core_spread * side;
            let a = std::f64::consts::TAU * u2;
            Point::new(core.x + r * a.cos(), core.y + r * a.sin())
        } else {
            Point::new(rng.gen_range(0.0..side), rng.gen_range(0.0..side))
        };
        if p.x >= 0.0 && p.x <= side && p.y >= 0.0 && p.y <= side {
            positions.push(p);
        }
    }

    let homes: Vec<Point> = (0..config.charging_providers)
        .map(|_| Point::new(rng.gen_range(0.0..side), rng.gen_range(0.0..side)))
        .collect();
    let scale = config.ownership_scale * side;
    let nodes: Vec<SkywayNode> = positions
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let weights: Vec<f64> = homes.iter().map(|h| (-p.distance(h) / scale).exp()).collect();
            let total: f64 = weights.iter().sum();
            let mut pick = rng.gen_range(0.0..total);
            let mut owner = weights.len() - 1;
            for (c, w) in weights.iter().enumerate() {
                if pick < *w {
                    owner = c;
                    break;
                }
                pick -= w;
            }
            SkywayNode {
                id: i as NodeId,
                position: p,
                station_owner: owner as ChargingProviderId,
                pad_count: rng.gen_range(1..=config.max_pads),
            }
        })
        .collect();

    let n = positions.len();
    let mut edges = BTreeSet::new();
    // Prim's spanning tree over the complete Euclidean graph.
    let mut in_tree = vec![false; n];
    let mut best = vec![(f64::INFINITY, 0usize); n];
    best[0].0 = 0.0;
    for _ in 0..n {
        let u = (0..n)
            .filter(|&i| !in_tree[i])
            .min_by(|&a, &b| best[a].0.total_cmp(&best[b].0))
            .expect("nodes remain");
        in_tree[u] = true;
        if u != 0 {
            edges.insert((best[u].1.min(u), best[u].1.max(u)));
        }
        for v in 0..n {
            if !in_tree[v] {
                let d = positions[u].distance(&positions[v]);
                if d < best[v].0 {
                    best[v] = (d, u);
                }
            }
        }
    }
    for u in 0..n {
        let mut others: Vec<usize> = (0..n).filter(|&v| v != u).collect();
        others.sort_by(|&a, &b| positions[u].distance(&positions[a]).total_cmp(&positions[u].distance(&positions[b])));
        for &v in others.iter().take(config.nearest_links) {
            edges.insert((u.min(v), u.max(v)));
        }
    }
    let edges: Vec<(NodeId, NodeId)> = edges.into_iter().map(|(a, b)| (a as NodeId, b as NodeId)).collect();
    SkywayNetwork::new(nodes, &edges, (0..config.charging_providers).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_is_connected_and_deterministic() {
        let cfg = SyntheticNetworkConfig::default();
        let a = synthetic_network(42, &cfg).unwrap();
        let b = synthetic_network(42, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.node_count(), 100);
        let tree = a.shortest_path_tree(0);
        assert!((0..a.node_count()).all(|i| tree.reachable(i)));
        assert_ne!(a, synthetic_network(43, &cfg).unwrap());
    }

    #[test]
    fn full_scale_network_has_492_connected_nodes() {
        let cfg = SyntheticNetworkConfig { nodes: 492, ..Default::default() };
        let net = synthetic_network(1, &cfg).unwrap();
        assert_eq!(net.node_count(), 492);
        let tree = net.shortest_path_tree(100);
        assert!((0..net.node_count()).all(|i| tree.reachable(i)));
    }
}
