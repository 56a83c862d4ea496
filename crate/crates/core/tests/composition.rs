use std::collections::BTreeSet;

use proptest::prelude::*;

use skybroker::composition::{
    can_reach_directly, compose, node_values, CompositionConfig, DirectReachRule, Environment, SwarmState,
};
use skybroker::domain::{
    generate_scenario, normalize_weights, DeliveryRequest, Formation, Partnership, PartnershipTier, Provider,
    ScenarioConfig, Swarm, Techniques,
};
use skybroker::energy::{segment_energy, EnergyModelConfig, RelativeWind, WindField};
use skybroker::network::{synthetic_network, Point, SkywayNetwork, SkywayNode, SyntheticNetworkConfig};
use skybroker::pruning::filter_providers;

fn lower_better(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    values.iter().map(|v| if hi > lo { (hi - v) / (hi - lo) } else { 1.0 }).collect()
}

/// Straight west-to-east line of nodes separated by `gaps` meters.
fn line(gaps: &[f64]) -> SkywayNetwork {
    let mut x = 0.0;
    let mut nodes = vec![SkywayNode { id: 0, position: Point::new(0.0, 0.0), station_owner: 0, pad_count: 2 }];
    for (i, g) in gaps.iter().enumerate() {
        x += g;
        nodes.push(SkywayNode { id: i as u32 + 1, position: Point::new(x, 0.0), station_owner: 0, pad_count: 2 });
    }
    let edges: Vec<(u32, u32)> = (0..gaps.len() as u32).map(|i| (i, i + 1)).collect();
    SkywayNetwork::new(nodes, &edges, BTreeSet::from([0])).unwrap()
}

fn provider(size: usize, battery: f64) -> Provider {
    Provider {
        id: 1,
        swarm: Swarm::homogeneous(size, battery, 3.0, 12.0, Techniques::BASIC, Formation::Vee).unwrap(),
        partnership: Partnership { charging_provider: 0, tier: PartnershipTier::Silver },
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn node_values_match_recomputation(
        rows in proptest::collection::vec((proptest::array::uniform4(0.0f64..100.0), 0.0f64..5000.0), 1..7),
        raw in proptest::array::uniform4(0.0f64..1.0),
        pw in 0.0f64..=1.0,
    ) {
        prop_assume!(raw.iter().sum::<f64>() > 1e-6);
        let w = normalize_weights(raw).unwrap();
        let deltas: Vec<[f64; 4]> = rows.iter().map(|r| r.0).collect();
        let remaining: Vec<f64> = rows.iter().map(|r| r.1).collect();
        let got = node_values(&deltas, &remaining, &w, pw);
        let cols: Vec<Vec<f64>> = (0..4).map(|m| lower_better(&deltas.iter().map(|d| d[m]).collect::<Vec<_>>())).collect();
        let progress = lower_better(&remaining);
        for (i, g) in got.iter().enumerate() {
            let qos: f64 = (0..4).map(|m| w.as_array()[m] * cols[m][i]).sum();
            let expected = (1.0 - pw) * qos + pw * progress[i];
            prop_assert!((g - expected).abs() < 1e-12, "{} vs {}", g, expected);
        }
    }

    #[test]
    fn direct_reach_matches_energy_oracle(
        gaps in proptest::collection::vec(200.0f64..4000.0, 1..5),
        drones in proptest::collection::vec((0.0f64..3.0, 0.0f64..=1.0), 1..5),
        battery in 20.0f64..100.0,
    ) {
        let net = line(&gaps);
        let energy = EnergyModelConfig::default();
        let env = Environment { network: &net, energy: &energy, wind: WindField::calm(), congestion_seed: 7 };
        let p = provider(drones.len(), battery);
        let mut state = SwarmState { drones: p.swarm.drones.clone(), node: 0, time: 0.0 };
        for (d, (payload, charge)) in state.drones.iter_mut().zip(&drones) {
            d.assigned_payload = *payload;
            d.current_energy = battery * charge;
        }
        let packages: Vec<f64> = drones.iter().map(|d| d.0.max(0.1)).collect();
        let w = normalize_weights([1.0; 4]).unwrap();
        let req = DeliveryRequest::new(0, 0, gaps.len() as u32, packages, w).unwrap();

        let per_segment = |slot: usize, len: f64| segment_energy(&state.drones[slot], len, Formation::Vee, &RelativeWind::CALM, slot, &energy);
        let cumulative = (0..drones.len())
            .all(|i| gaps.iter().map(|&g| per_segment(i, g)).sum::<f64>() <= state.drones[i].current_energy + 1e-9);
        let segment_wise = (0..drones.len()).all(|i| {
            per_segment(i, gaps[0]) <= state.drones[i].current_energy + 1e-9
                && gaps.iter().all(|&g| per_segment(i, g) <= battery + 1e-9)
        });
        for (rule, expected) in [(DirectReachRule::Cumulative, cumulative), (DirectReachRule::SegmentWise, segment_wise)] {
            let cfg = CompositionConfig { direct_reach: rule, ..CompositionConfig::default() };
            prop_assert_eq!(can_reach_directly(&p, &state, &req, env, &cfg).unwrap(), expected, "{:?}", rule);
        }
    }
}

#[test]
fn compositions_respect_route_invariants() {
    let net = synthetic_network(9, &SyntheticNetworkConfig { nodes: 60, ..Default::default() }).unwrap();
    let sc = generate_scenario(10, &net, 20, 15, &ScenarioConfig::default()).unwrap();
    let energy = EnergyModelConfig::default();
    let cfg = CompositionConfig::default();
    let mut successes = 0;
    for req in &sc.requests {
        let Ok(cohort) = filter_providers(&sc.providers, req) else { continue };
        let env = Environment { network: &net, energy: &energy, wind: WindField::new(3, &energy), congestion_seed: u64::from(req.id) };
        for p in cohort {
            let out = compose(p, req, env, &cfg).unwrap();
            let q = out.pqos.as_array();
            assert!(q.iter().all(|v| v.is_finite() && *v >= 0.0));
            assert!(out.evaluations > 0);
            let drones: usize = out.routes.iter().map(|r| r.initial_drones.len()).sum();
            assert_eq!(drones, p.swarm.size());
            for route in &out.routes {
                assert_eq!(route.path[0], req.source);
                let idx: Vec<usize> = route.path.iter().map(|&id| net.index_of(id).unwrap()).collect();
                assert!(idx.windows(2).all(|w| net.segment_between(w[0], w[1]).is_some()));
                // Greedy steps never revisit, but the final shortest-path run may
                // pass back through a node left earlier to charge elsewhere.
                assert!(idx.windows(2).all(|w| w[0] != w[1]));
                assert_eq!(route.hops.len() + 1, route.path.len());
                for d in &route.final_drones {
                    assert!(d.current_energy >= -1e-9 && d.current_energy <= d.battery_capacity + 1e-9);
                }
            }
            if out.success {
                successes += 1;
                assert!(out.failure.is_none());
                assert!(out.routes.iter().all(|r| r.arrived && *r.path.last().unwrap() == req.destination));
                assert!(out.arrival_spread <= cfg.arrival_window);
            } else {
                assert!(out.failure.is_some());
            }
        }
    }
    assert!(successes > 0);
}
