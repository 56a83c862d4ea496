use proptest::prelude::*;

use skybroker::domain::{generate_scenario, DeliveryRequest, Scenario, ScenarioConfig};
use skybroker::network::{build_all_heatmaps, synthetic_network, RegionGrid, SkywayNetwork, SyntheticNetworkConfig};
use skybroker::pruning::{
    apply_strategy, capabilities_scores, filter_providers, prune, pruned_count, DensityContext, PruningConfig,
    PruningStrategy, ProviderScore,
};
use skybroker::Error;

fn world(seed: u64) -> (SkywayNetwork, Scenario) {
    let net = synthetic_network(seed, &SyntheticNetworkConfig { nodes: 40, ..Default::default() }).unwrap();
    let scenario = generate_scenario(seed ^ 0x5eed, &net, 20, 10, &ScenarioConfig::default()).unwrap();
    (net, scenario)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn filter_keeps_exactly_the_capable(seed in any::<u64>()) {
        let (_, sc) = world(seed);
        for req in &sc.requests {
            let expected: Vec<u32> = sc
                .providers
                .iter()
                .filter(|p| {
                    p.swarm.drones[0].payload_capacity >= req.packages.iter().copied().fold(0.0, f64::max)
                        && p.swarm.drones.len() >= req.packages.len()
                })
                .map(|p| p.id)
                .collect();
            match filter_providers(&sc.providers, req) {
                Ok(kept) => prop_assert_eq!(kept.iter().map(|p| p.id).collect::<Vec<_>>(), expected),
                Err(Error::NoFeasibleProvider) => prop_assert!(expected.is_empty()),
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            }
        }
    }

    #[test]
    fn more_or_heavier_packages_never_add_providers(seed in any::<u64>(), extra in 0.1f64..2.5) {
        let (_, sc) = world(seed);
        for req in &sc.requests {
            let base: Vec<u32> = filter_providers(&sc.providers, req).map(|v| v.iter().map(|p| p.id).collect()).unwrap_or_default();
            let mut packages = req.packages.clone();
            packages.push(extra);
            let bigger = DeliveryRequest::new(req.id, req.source, req.destination, packages, req.weights).unwrap();
            let after: Vec<u32> = filter_providers(&sc.providers, &bigger).map(|v| v.iter().map(|p| p.id).collect()).unwrap_or_default();
            prop_assert!(after.iter().all(|id| base.contains(id)));
        }
    }

    #[test]
    fn prune_keeps_the_top_scores(scores in proptest::collection::vec(0u32..6, 1..25), k in 0.0f64..99.0) {
        let scores: Vec<ProviderScore> = scores
            .iter()
            .enumerate()
            .map(|(i, &s)| ProviderScore { provider_id: i as u32 * 3, score: f64::from(s), best_region_path: Vec::new() })
            .collect();
        let m = scores.len();
        let kept = prune(&scores, k).unwrap();
        let removed = ((m as f64 * k / 100.0) + 1e-9).floor() as usize;
        prop_assert_eq!(kept.len(), m - removed.min(m - 1));
        prop_assert_eq!(m - kept.len(), pruned_count(m, k));
        let score_of = |id: u32| scores.iter().find(|s| s.provider_id == id).unwrap().score;
        for s in scores.iter().filter(|s| !kept.contains(&s.provider_id)) {
            prop_assert!(kept.iter().all(|&id| score_of(id) >= s.score));
        }
        // input order is preserved
        prop_assert!(kept.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn capabilities_match_spreadsheet(seed in any::<u64>()) {
        let (_, sc) = world(seed);
        let cohort: Vec<_> = sc.providers.iter().collect();
        let got = capabilities_scores(&cohort);
        let column = |f: &dyn Fn(usize) -> f64| -> Vec<f64> {
            let v: Vec<f64> = (0..cohort.len()).map(f).collect();
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            v.iter().map(|x| if hi > lo { (x - lo) / (hi - lo) } else { 1.0 }).collect()
        };
        let cols = [
            column(&|i| cohort[i].swarm.drones[0].battery_capacity),
            column(&|i| cohort[i].swarm.drones[0].speed),
            column(&|i| cohort[i].swarm.drones[0].payload_capacity),
            column(&|i| cohort[i].swarm.drones.len() as f64),
        ];
        for (i, g) in got.iter().enumerate() {
            let expected = (cols[0][i] + cols[1][i] + cols[2][i] + cols[3][i]) / 4.0;
            prop_assert!((g - expected).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(g));
        }
    }
}

#[test]
fn strategies_shrink_the_cohort_as_configured() {
    let (net, sc) = world(42);
    let grid = RegionGrid::build(&net, 8).unwrap();
    let heatmaps = build_all_heatmaps(&net, &grid);
    let ctx = DensityContext { network: &net, grid: &grid, heatmaps: &heatmaps };
    let cfg = PruningConfig::default();
    let mut checked = 0;
    for req in &sc.requests {
        let Ok(cohort) = filter_providers(&sc.providers, req) else { continue };
        for k in [30.0, 50.0, 70.0] {
            for s in PruningStrategy::ALL {
                let out = apply_strategy(s, &cohort, req, k, &ctx, &cfg).unwrap();
                let expected = if s == PruningStrategy::Brute { cohort.len() } else { cohort.len() - pruned_count(cohort.len(), k) };
                assert_eq!(out.survivors.len(), expected);
                assert!(out.survivors.iter().all(|id| cohort.iter().any(|p| p.id == *id)));
                if s == PruningStrategy::Density {
                    for score in &out.scores {
                        assert!(score.score.is_finite() && score.score >= 0.0);
                        let path = &score.best_region_path;
                        assert_eq!(path.first(), Some(&grid.cell_of_node(net.require_index(req.source).unwrap())));
                        assert_eq!(path.last(), Some(&grid.cell_of_node(net.require_index(req.destination).unwrap())));
                    }
                }
            }
        }
        checked += 1;
    }
    assert!(checked > 0);
}
