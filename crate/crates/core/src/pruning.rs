//! Provider filtering and pruning.
//!
//! Filtering drops providers that cannot physically carry the request.
//! Pruning then removes the bottom `k` percent of the survivors by either a
//! capabilities score or a density score that rewards swarms whose charging
//! partner has many pads along the shortest region paths of the request.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::domain::{ChargingProviderId, DeliveryRequest, PartnershipTier, Provider, ProviderId};
use crate::error::{Error, Result};
use crate::network::{
    t_shortest_region_paths, CellId, DensityHeatmap, RegionGrid, RegionPathSearch, SkywayNetwork,
    DEFAULT_GRID_RESOLUTION, DEFAULT_REGION_PATHS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PruningStrategy {
    /// No pruning: every filtered provider is composed.
    Brute,
    Capabilities,
    Density,
}

impl PruningStrategy {
    pub const ALL: [PruningStrategy; 3] =
        [PruningStrategy::Brute, PruningStrategy::Capabilities, PruningStrategy::Density];

    pub fn name(self) -> &'static str {
        match self {
            PruningStrategy::Brute => "brute",
            PruningStrategy::Capabilities => "capabilities",
            PruningStrategy::Density => "density",
        }
    }
}

impl fmt::Display for PruningStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PruningStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "brute" | "brute-force" | "brute_force" => Ok(PruningStrategy::Brute),
            "capabilities" | "capability" => Ok(PruningStrategy::Capabilities),
            "density" => Ok(PruningStrategy::Density),
            other => Err(Error::Config(format!("unknown pruning strategy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TierMultipliers {
    pub platinum: f64,
    pub gold: f64,
    pub silver: f64,
}

impl Default for TierMultipliers {
    fn default() -> Self {
        Self { platinum: 1.2, gold: 1.1, silver: 1.0 }
    }
}

impl TierMultipliers {
    pub fn get(&self, tier: PartnershipTier) -> f64 {
        match tier {
            PartnershipTier::Platinum => self.platinum,
            PartnershipTier::Gold => self.gold,
            PartnershipTier::Silver => self.silver,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PruningConfig {
    /// Number of shortest region paths scored per request.
    pub region_paths: usize,
    pub grid_resolution: usize,
    pub tier_multipliers: TierMultipliers,
}

impl Default for PruningConfig {
    fn default() -> Self {
        Self {
            region_paths: DEFAULT_REGION_PATHS,
            grid_resolution: DEFAULT_GRID_RESOLUTION,
            tier_multipliers: TierMultipliers::default(),
        }
    }
}

impl PruningConfig {
    pub fn validate(&self) -> Result<()> {
        if self.region_paths == 0 {
            return Err(Error::Config("t must be at least 1".into()));
        }
        if self.grid_resolution < 2 {
            return Err(Error::Config("grid resolution must be at least 2".into()));
        }
        let m = self.tier_multipliers;
        if [m.platinum, m.gold, m.silver].iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Config("tier multipliers must be non-negative".into()));
        }
        Ok(())
    }
}

/// Providers able to carry the request: every package fits a drone and there
/// is a drone per package. Input order is preserved.
pub fn filter_providers<'a>(providers: &'a [Provider], request: &DeliveryRequest) -> Result<Vec<&'a Provider>> {
    request.validate()?;
    let heaviest = request.heaviest_package();
    let survivors: Vec<&Provider> = providers
        .iter()
        .filter(|p| p.swarm.payload_capacity() >= heaviest && p.swarm.size() >= request.packages.len())
        .collect();
    if survivors.is_empty() {
        return Err(Error::NoFeasibleProvider);
    }
    Ok(survivors)
}

/// Mean of min-max normalized battery, speed, payload and swarm size for every
/// member of `cohort`, in cohort order. A capability with no spread counts as 1.
pub fn capabilities_scores(cohort: &[&Provider]) -> Vec<f64> {
    let features: Vec<[f64; 4]> = cohort
        .iter()
        .map(|p| {
            let s = &p.swarm;
            [s.battery_capacity(), s.speed(), s.payload_capacity(), s.size() as f64]
        })
        .collect();
    let mut lo = [f64::INFINITY; 4];
    let mut hi = [f64::NEG_INFINITY; 4];
    for f in &features {
        for j in 0..4 {
            lo[j] = lo[j].min(f[j]);
            hi[j] = hi[j].max(f[j]);
        }
    }
    features
        .iter()
        .map(|f| {
            let sum: f64 = (0..4)
                .map(|j| if hi[j] > lo[j] { (f[j] - lo[j]) / (hi[j] - lo[j]) } else { 1.0 })
                .sum();
            sum / 4.0
        })
        .collect()
}

/// Capabilities score of `provider` relative to `cohort` (which must contain it).
pub fn capabilities_score(provider: &Provider, cohort: &[&Provider]) -> Result<f64> {
    let pos = cohort
        .iter()
        .position(|p| p.id == provider.id)
        .ok_or_else(|| Error::InvalidInput(format!("provider {} not in cohort", provider.id)))?;
    Ok(capabilities_scores(cohort)[pos])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderScore {
    pub provider_id: ProviderId,
    pub score: f64,
    /// Highest-scoring region path; empty for scores that use no path.
    pub best_region_path: Vec<CellId>,
}

/// Density scoring for one request. The `t` shortest region paths depend only
/// on the request, so they are computed once and shared by all providers.
#[derive(Debug, Clone)]
pub struct DensityScorer<'a> {
    heatmaps: &'a BTreeMap<ChargingProviderId, DensityHeatmap>,
    multipliers: TierMultipliers,
    search: RegionPathSearch,
}

impl<'a> DensityScorer<'a> {
    pub fn new(
        network: &SkywayNetwork,
        grid: &RegionGrid,
        heatmaps: &'a BTreeMap<ChargingProviderId, DensityHeatmap>,
        request: &DeliveryRequest,
        config: &PruningConfig,
    ) -> Result<Self> {
        let source = grid.cell_of_node(network.require_index(request.source)?);
        let dest = grid.cell_of_node(network.require_index(request.destination)?);
        let search = t_shortest_region_paths(grid, source, dest, config.region_paths)?;
        Ok(Self { heatmaps, multipliers: config.tier_multipliers, search })
    }

    pub fn region_paths(&self) -> &[Vec<CellId>] {
        &self.search.paths
    }

    /// Evaluations spent finding the region paths.
    pub fn search_overhead(&self) -> u64 {
        self.search.expansions
    }

    /// Path-score evaluations needed to score one provider: one per region path.
    pub fn per_provider_overhead(&self) -> u64 {
        self.search.paths.len() as u64
    }

    /// Best path score over the region paths, where a path scores
    /// `Σ partner density × tier multiplier × capabilities`. A partner without
    /// stations in the network scores 0.
    pub fn score(&self, provider: &Provider, capabilities: f64) -> ProviderScore {
        let factor = self.multipliers.get(provider.partnership.tier) * capabilities;
        let mut best = ProviderScore { provider_id: provider.id, score: 0.0, best_region_path: Vec::new() };
        let Some(heatmap) = self.heatmaps.get(&provider.partnership.charging_provider) else {
            if let Some(first) = self.search.paths.first() {
                best.best_region_path = first.clone();
            }
            return best;
        };
        for path in &self.search.paths {
            let score = heatmap.path_sum(path) * factor;
            if best.best_region_path.is_empty() || score > best.score {
                best.score = score;
                best.best_region_path = path.clone();
            }
        }
        best
    }
}

/// Providers left after removing the `⌊m·k/100⌋` lowest scores, never fewer
/// than one. Ties favour the lower provider id. Survivors keep input order.
pub fn prune(scores: &[ProviderScore], k_percent: f64) -> Result<Vec<ProviderId>> {
    if !(0.0..100.0).contains(&k_percent) {
        return Err(Error::Config(format!("k must lie in [0, 100), got {k_percent}")));
    }
    let m = scores.len();
    let removed = pruned_count(m, k_percent);
    let mut order: Vec<usize> = (0..m).collect();
    // Weakest first: lower score, then higher id.
    order.sort_by(|&a, &b| {
        scores[a].score.total_cmp(&scores[b].score).then(scores[b].provider_id.cmp(&scores[a].provider_id))
    });
    let mut keep = vec![true; m];
    for &i in &order[..removed] {
        keep[i] = false;
    }
    Ok(scores.iter().zip(keep).filter(|(_, k)| *k).map(|(s, _)| s.provider_id).collect())
}

/// How many of `m` providers a `k` percent prune removes.
pub fn pruned_count(m: usize, k_percent: f64) -> usize {
    if m == 0 {
        return 0;
    }
    let removed = (m as f64 * k_percent / 100.0 + 1e-9).floor() as usize;
    removed.min(m - 1)
}

/// Survivors of one strategy plus the evaluations spent scoring.
#[derive(Debug, Clone, PartialEq)]
pub struct PruningOutcome {
    pub survivors: Vec<ProviderId>,
    pub scores: Vec<ProviderScore>,
    pub overhead: u64,
}

/// Shared read-only inputs for density scoring.
#[derive(Debug, Clone, Copy)]
pub struct DensityContext<'a> {
    pub network: &'a SkywayNetwork,
    pub grid: &'a RegionGrid,
    pub heatmaps: &'a BTreeMap<ChargingProviderId, DensityHeatmap>,
}

/// Applies `strategy` to an already filtered cohort. Brute force keeps
/// everyone regardless of `k_percent`.
pub fn apply_strategy(
    strategy: PruningStrategy,
    cohort: &[&Provider],
    request: &DeliveryRequest,
    k_percent: f64,
    context: &DensityContext<'_>,
    config: &PruningConfig,
) -> Result<PruningOutcome> {
    match strategy {
        PruningStrategy::Brute => Ok(PruningOutcome {
            survivors: cohort.iter().map(|p| p.id).collect(),
            scores: Vec::new(),
            overhead: 0,
        }),
        PruningStrategy::Capabilities => {
            let scores: Vec<ProviderScore> = cohort
                .iter()
                .zip(capabilities_scores(cohort))
                .map(|(p, score)| ProviderScore { provider_id: p.id, score, best_region_path: Vec::new() })
                .collect();
            Ok(PruningOutcome { survivors: prune(&scores, k_percent)?, scores, overhead: cohort.len() as u64 })
        }
        PruningStrategy::Density => {
            let scorer = DensityScorer::new(context.network, context.grid, context.heatmaps, request, config)?;
            let caps = capabilities_scores(cohort);
            let scores: Vec<ProviderScore> =
                cohort.iter().zip(&caps).map(|(p, &c)| scorer.score(p, c)).collect();
            let m = cohort.len() as u64;
            let overhead = scorer.search_overhead() + m * scorer.per_provider_overhead();
            Ok(PruningOutcome { survivors: prune(&scores, k_percent)?, scores, overhead })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Formation, Partnership, QosWeights, Swarm, Techniques};
    use crate::network::{build_all_heatmaps, Point, SkywayNode};

    fn provider(id: u32, size: usize, battery: f64, payload: f64, speed: f64, cp: u32, tier: PartnershipTier) -> Provider {
        Provider {
            id,
            swarm: Swarm::homogeneous(size, battery, payload, speed, Techniques::BASIC, Formation::Vee).unwrap(),
            partnership: Partnership { charging_provider: cp, tier },
        }
    }

    fn request(packages: Vec<f64>) -> DeliveryRequest {
        DeliveryRequest::new(0, 0, 1, packages, QosWeights::new([1.0; 4]).unwrap()).unwrap()
    }

    fn score(id: u32, score: f64) -> ProviderScore {
        ProviderScore { provider_id: id, score, best_region_path: Vec::new() }
    }

    #[test]
    fn filtering_examples() {
        let weak = provider(0, 6, 80.0, 1.0, 15.0, 0, PartnershipTier::Gold);
        let small = provider(1, 4, 80.0, 3.0, 15.0, 0, PartnershipTier::Gold);
        let good = provider(2, 6, 80.0, 3.0, 15.0, 0, PartnershipTier::Gold);
        let all = vec![weak, small, good];
        let heavy = request(vec![2.5]);
        let ids: Vec<_> = filter_providers(&all, &heavy).unwrap().iter().map(|p| p.id).collect();
        assert_eq!(ids, vec![1, 2]);
        let five = request(vec![0.5; 5]);
        let ids: Vec<_> = filter_providers(&all, &five).unwrap().iter().map(|p| p.id).collect();
        assert_eq!(ids, vec![0, 2]);
        let light = request(vec![0.5]);
        assert_eq!(filter_providers(&all, &light).unwrap().len(), 3);
        assert!(matches!(filter_providers(&all[..1], &heavy), Err(Error::NoFeasibleProvider)));
    }

    #[test]
    fn capabilities_extremes() {
        let lo = provider(0, 3, 50.0, 1.0, 10.0, 0, PartnershipTier::Gold);
        let mid = provider(1, 5, 70.0, 2.0, 12.0, 0, PartnershipTier::Gold);
        let hi = provider(2, 12, 100.0, 3.0, 20.0, 0, PartnershipTier::Gold);
        let cohort = vec![&lo, &mid, &hi];
        let s = capabilities_scores(&cohort);
        assert_eq!(s[0], 0.0);
        assert_eq!(s[2], 1.0);
        assert!(s[1] > 0.0 && s[1] < 1.0);
        assert_eq!(capabilities_score(&mid, &cohort).unwrap(), s[1]);
        assert_eq!(capabilities_scores(&[&mid]), vec![1.0]);
    }

    #[test]
    fn prune_examples() {
        let forty: Vec<_> = (0..40).map(|i| score(i, f64::from(i))).collect();
        assert_eq!(prune(&forty, 50.0).unwrap(), (20..40).collect::<Vec<_>>());
        assert_eq!(prune(&forty, 0.0).unwrap().len(), 40);
        let three = vec![score(0, 1.0), score(1, 3.0), score(2, 2.0)];
        assert_eq!(prune(&three, 90.0).unwrap(), vec![1]);
        assert_eq!(pruned_count(1, 99.0), 0);
        assert!(prune(&three, 100.0).is_err());
    }

    #[test]
    fn prune_ties_keep_lower_id() {
        let tied = vec![score(4, 1.0), score(2, 1.0), score(9, 1.0), score(1, 1.0)];
        assert_eq!(prune(&tied, 50.0).unwrap(), vec![2, 1]);
    }

    /// Four nodes on a line; company 7 owns 10 pads, company 8 owns 5.
    fn line() -> SkywayNetwork {
        let nodes = vec![
            SkywayNode { id: 0, position: Point::new(0.0, 0.0), station_owner: 7, pad_count: 4 },
            SkywayNode { id: 1, position: Point::new(3000.0, 0.0), station_owner: 8, pad_count: 2 },
            SkywayNode { id: 2, position: Point::new(1000.0, 0.0), station_owner: 7, pad_count: 6 },
            SkywayNode { id: 3, position: Point::new(2000.0, 0.0), station_owner: 8, pad_count: 3 },
        ];
        SkywayNetwork::new(nodes, &[(0, 2), (2, 3), (3, 1)], [7, 8].into()).unwrap()
    }

    #[test]
    fn density_ratio_and_zero() {
        let net = line();
        let grid = RegionGrid::build(&net, 2).unwrap();
        let heatmaps = build_all_heatmaps(&net, &grid);
        let cfg = PruningConfig { region_paths: 1, grid_resolution: 2, ..PruningConfig::default() };
        let req = request(vec![0.5]);
        let scorer = DensityScorer::new(&net, &grid, &heatmaps, &req, &cfg).unwrap();
        let a = provider(0, 4, 80.0, 3.0, 15.0, 7, PartnershipTier::Silver);
        let b = provider(1, 4, 80.0, 3.0, 15.0, 8, PartnershipTier::Silver);
        let sa = scorer.score(&a, 0.5);
        let sb = scorer.score(&b, 0.5);
        assert_eq!(sa.score, 2.0 * sb.score);
        assert_eq!(sa.score, 10.0 * 0.5);
        let path = &sa.best_region_path;
        assert_eq!(path.first(), Some(&grid.cell_of_node(net.require_index(0).unwrap())));
        assert_eq!(path.last(), Some(&grid.cell_of_node(net.require_index(1).unwrap())));

        let stranger = provider(2, 4, 80.0, 3.0, 15.0, 99, PartnershipTier::Platinum);
        assert_eq!(scorer.score(&stranger, 1.0).score, 0.0);
        // Scaling capabilities scales the score.
        assert_eq!(scorer.score(&a, 1.0).score, 2.0 * sa.score);
        // Tier multiplier applies.
        let plat = provider(3, 4, 80.0, 3.0, 15.0, 7, PartnershipTier::Platinum);
        assert!((scorer.score(&plat, 0.5).score - 1.2 * sa.score).abs() < 1e-12);
    }

    #[test]
    fn more_region_paths_never_lower_the_score() {
        let net = crate::network::synthetic_network(5, &Default::default()).unwrap();
        let grid = RegionGrid::build(&net, 8).unwrap();
        let heatmaps = build_all_heatmaps(&net, &grid);
        let src = net.nodes()[0].id;
        let dst = net.nodes()[net.node_count() - 1].id;
        let req = DeliveryRequest::new(0, src, dst, vec![0.5], QosWeights::new([1.0; 4]).unwrap()).unwrap();
        let p = provider(0, 4, 80.0, 3.0, 15.0, *net.charging_providers().iter().next().unwrap(), PartnershipTier::Gold);
        let mut last = 0.0;
        for t in 1..=5 {
            let cfg = PruningConfig { region_paths: t, ..PruningConfig::default() };
            let s = DensityScorer::new(&net, &grid, &heatmaps, &req, &cfg).unwrap().score(&p, 0.7).score;
            assert!(s >= last);
            last = s;
        }
    }

    #[test]
    fn strategies_report_overhead() {
        let net = line();
        let grid = RegionGrid::build(&net, 2).unwrap();
        let heatmaps = build_all_heatmaps(&net, &grid);
        let ctx = DensityContext { network: &net, grid: &grid, heatmaps: &heatmaps };
        let cfg = PruningConfig::default();
        let ps: Vec<Provider> = (0..4).map(|i| provider(i, 4 + i as usize, 80.0, 3.0, 15.0, 7, PartnershipTier::Gold)).collect();
        let cohort: Vec<&Provider> = ps.iter().collect();
        let req = request(vec![0.5]);
        let brute = apply_strategy(PruningStrategy::Brute, &cohort, &req, 50.0, &ctx, &cfg).unwrap();
        assert_eq!((brute.survivors.len(), brute.overhead), (4, 0));
        let caps = apply_strategy(PruningStrategy::Capabilities, &cohort, &req, 50.0, &ctx, &cfg).unwrap();
        assert_eq!((caps.survivors.clone(), caps.overhead), (vec![2, 3], 4));
        let dens = apply_strategy(PruningStrategy::Density, &cohort, &req, 50.0, &ctx, &cfg).unwrap();
        assert_eq!(dens.survivors.len(), 2);
        assert!(dens.overhead > caps.overhead);
    }

    #[test]
    fn strategy_names_parse() {
        for s in PruningStrategy::ALL {
            assert_eq!(s.name().parse::<PruningStrategy>().unwrap(), s);
        }
        assert!("random".parse::<PruningStrategy>().is_err());
    }
}
