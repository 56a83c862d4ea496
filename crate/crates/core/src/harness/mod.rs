//! Experiment runner: filter, prune, compose and recommend for every request
//! under every configured strategy, `k` and voting method, then aggregate.

mod output;
pub mod stats;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::composition::{compose, CompositionConfig, CompositionOutcome, Environment};
use crate::domain::{
    generate_scenario, read_scenario, ChargingProviderId, DeliveryRequest, Provider, ProviderId, QosVector,
    Scenario, ScenarioConfig,
};
use crate::energy::{EnergyModelConfig, WindField};
use crate::error::{Error, Result};
use crate::network::{build_all_heatmaps, synthetic_network, DensityHeatmap, RegionGrid, SkywayNetwork, SyntheticNetworkConfig};
use crate::pruning::{apply_strategy, filter_providers, DensityContext, PruningConfig, PruningStrategy};
use crate::recommend::{floor_satisfaction, recommend, satisfaction_in_range, CohortRange, VotingMethod};
use crate::seed::derive;

pub use output::{config_hash, write_outputs, Manifest};

const NETWORK_STREAM: u64 = 1;
const SCENARIO_STREAM: u64 = 2;
const WIND_STREAM: u64 = 3;
const CONGESTION_STREAM: u64 = 4;
const VOTE_STREAM: u64 = 5;

/// Which execution-time figure the summary reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimingMode {
    /// Deterministic evaluation counts.
    Proxy,
    /// Measured wall-clock time in addition to the proxy.
    WallClock,
}

/// Cohort whose min/max normalize satisfaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceCohort {
    /// Successful compositions of every filtered provider, shared by all
    /// strategies so their scores are comparable.
    Filtered,
    /// Successful compositions of the pruned survivors only.
    Pruned,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// Canonical JSON network; a synthetic network is generated when absent.
    pub network_file: Option<PathBuf>,
    /// JSON-lines scenario; generated from the seed when absent.
    pub scenario_file: Option<PathBuf>,
    pub providers: usize,
    pub requests: usize,
    pub strategies: Vec<PruningStrategy>,
    /// Pruning percentages; brute force always runs at 0.
    pub k_values: Vec<f64>,
    pub methods: Vec<VotingMethod>,
    pub timing: TimingMode,
    pub reference_cohort: ReferenceCohort,
    pub synthetic: SyntheticNetworkConfig,
    pub scenario: ScenarioConfig,
    pub energy: EnergyModelConfig,
    pub composition: CompositionConfig,
    pub pruning: PruningConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            network_file: None,
            scenario_file: None,
            providers: 20,
            requests: 50,
            strategies: PruningStrategy::ALL.to_vec(),
            k_values: vec![50.0],
            methods: vec![VotingMethod::Irv],
            timing: TimingMode::Proxy,
            reference_cohort: ReferenceCohort::Filtered,
            synthetic: SyntheticNetworkConfig::default(),
            scenario: ScenarioConfig::default(),
            energy: EnergyModelConfig::default(),
            composition: CompositionConfig::default(),
            pruning: PruningConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.strategies.is_empty() || self.methods.is_empty() {
            return Err(Error::Config("at least one pruning strategy and voting method required".into()));
        }
        if self.k_values.is_empty() && self.strategies.iter().any(|&s| s != PruningStrategy::Brute) {
            return Err(Error::Config("pruning strategies need at least one k value".into()));
        }
        if let Some(k) = self.k_values.iter().find(|k| !(0.0..100.0).contains(*k)) {
            return Err(Error::Config(format!("k must lie in [0, 100), got {k}")));
        }
        self.energy.validate()?;
        self.composition.validate()?;
        self.pruning.validate()?;
        self.scenario.validate()
    }

    /// `(strategy, k)` pairs in run order.
    pub fn configurations(&self) -> Vec<(PruningStrategy, f64)> {
        let mut out = Vec::new();
        for &s in &self.strategies {
            if s == PruningStrategy::Brute {
                out.push((s, 0.0));
            } else {
                out.extend(self.k_values.iter().map(|&k| (s, k)));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Ok,
    /// No survivor composed successfully although another filtered provider did.
    NoRecommendation,
    NoFeasibleProvider,
    /// No filtered provider reached the destination, so nothing can be scored.
    NoSuccessfulProvider,
}

impl RowStatus {
    pub fn name(self) -> &'static str {
        match self {
            RowStatus::Ok => "ok",
            RowStatus::NoRecommendation => "no_recommendation",
            RowStatus::NoFeasibleProvider => "no_feasible_provider",
            RowStatus::NoSuccessfulProvider => "no_successful_provider",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequestRow {
    pub request_id: u32,
    pub strategy: PruningStrategy,
    pub k: f64,
    pub method: VotingMethod,
    pub status: RowStatus,
    /// Providers left after filtering.
    pub filtered: usize,
    /// Providers left after pruning.
    pub survivors: usize,
    pub successes: usize,
    pub winner: Option<ProviderId>,
    pub pqos: Option<QosVector>,
    pub satisfaction: Option<f64>,
    /// Per-metric satisfaction in metric order dt, ec, c, et.
    pub metric_satisfaction: Option<[f64; 4]>,
    pub paradox: bool,
    pub pruning_overhead: u64,
    pub vote_operations: u64,
    pub proxy_time: f64,
    pub wall_time_us: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub strategy: PruningStrategy,
    pub k: f64,
    pub method: VotingMethod,
    pub requests: usize,
    pub scored: usize,
    pub mean_satisfaction: Option<f64>,
    pub sd_satisfaction: Option<f64>,
    pub mean_proxy_time: Option<f64>,
    pub sd_proxy_time: Option<f64>,
    pub mean_wall_time_us: Option<f64>,
    pub mean_survivors: Option<f64>,
    /// Failed compositions among composed survivors.
    pub failure_rate: Option<f64>,
    pub no_recommendation_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendRow {
    pub strategy: PruningStrategy,
    pub method: VotingMethod,
    pub points: usize,
    pub spearman_k_satisfaction: Option<f64>,
    pub spearman_k_proxy_time: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub rows: Vec<RequestRow>,
    pub summary: Vec<SummaryRow>,
    pub trends: Vec<TrendRow>,
    pub manifest: Manifest,
}

/// Loads or generates the network and scenario, then runs.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let network = match &config.network_file {
        Some(path) => SkywayNetwork::from_json(&std::fs::read_to_string(path)?)?,
        None => synthetic_network(derive(config.seed, &[NETWORK_STREAM]), &config.synthetic)?,
    };
    let scenario = match &config.scenario_file {
        Some(path) => read_scenario(std::io::BufReader::new(std::fs::File::open(path)?))?,
        None => generate_scenario(
            derive(config.seed, &[SCENARIO_STREAM]),
            &network,
            config.providers,
            config.requests,
            &config.scenario,
        )?,
    };
    run_on(&network, &scenario, config)
}

/// Seed used to synthesize the network for `config`.
pub fn network_seed(config: &ExperimentConfig) -> u64 {
    derive(config.seed, &[NETWORK_STREAM])
}

/// Seed used to synthesize the scenario for `config`.
pub fn scenario_seed(config: &ExperimentConfig) -> u64 {
    derive(config.seed, &[SCENARIO_STREAM])
}

struct RunContext<'a> {
    network: &'a SkywayNetwork,
    providers: &'a [Provider],
    grid: RegionGrid,
    heatmaps: BTreeMap<ChargingProviderId, DensityHeatmap>,
    wind: WindField,
    config: &'a ExperimentConfig,
}

/// Runs every configuration over a fixed network and scenario.
pub fn run_on(network: &SkywayNetwork, scenario: &Scenario, config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let grid = RegionGrid::build(network, config.pruning.grid_resolution)?;
    let heatmaps = build_all_heatmaps(network, &grid);
    let ctx = RunContext {
        network,
        providers: &scenario.providers,
        grid,
        heatmaps,
        wind: WindField::new(derive(config.seed, &[WIND_STREAM]), &config.energy),
        config,
    };
    let mut per_request: Vec<(u32, Vec<RequestRow>)> = scenario
        .requests
        .par_iter()
        .map(|r| process_request(&ctx, r).map(|rows| (r.id, rows)))
        .collect::<Result<_>>()?;
    per_request.sort_by_key(|(id, _)| *id);
    let rows: Vec<RequestRow> = per_request.into_iter().flat_map(|(_, rows)| rows).collect();
    let summary = aggregate(&rows, config);
    let trends = trends(&summary);
    let manifest = Manifest::new(config, network, scenario)?;
    Ok(ExperimentResult { rows, summary, trends, manifest })
}

fn process_request(ctx: &RunContext<'_>, request: &DeliveryRequest) -> Result<Vec<RequestRow>> {
    let config = ctx.config;
    let wall = config.timing == TimingMode::WallClock;
    let blank = |strategy, k, method, status| RequestRow {
        request_id: request.id,
        strategy,
        k,
        method,
        status,
        filtered: 0,
        survivors: 0,
        successes: 0,
        winner: None,
        pqos: None,
        satisfaction: None,
        metric_satisfaction: None,
        paradox: false,
        pruning_overhead: 0,
        vote_operations: 0,
        proxy_time: 0.0,
        wall_time_us: None,
    };

    let cohort = match filter_providers(ctx.providers, request) {
        Ok(c) => c,
        Err(Error::NoFeasibleProvider) => {
            let mut rows = Vec::new();
            for (s, k) in config.configurations() {
                for &m in &config.methods {
                    rows.push(blank(s, k, m, RowStatus::NoFeasibleProvider));
                }
            }
            return Ok(rows);
        }
        Err(e) => return Err(e),
    };

    // Every filtered provider is composed once; strategies reuse the results.
    let env = Environment {
        network: ctx.network,
        energy: &config.energy,
        wind: ctx.wind,
        congestion_seed: derive(config.seed, &[CONGESTION_STREAM, u64::from(request.id)]),
    };
    let mut outcomes: BTreeMap<ProviderId, (CompositionOutcome, f64)> = BTreeMap::new();
    for p in &cohort {
        let start = Instant::now();
        let outcome = compose(p, request, env, &config.composition)?;
        outcomes.insert(p.id, (outcome, start.elapsed().as_secs_f64() * 1e6));
    }
    let filtered_successes: Vec<QosVector> =
        outcomes.values().filter(|(o, _)| o.success).map(|(o, _)| o.pqos).collect();
    let filtered_range = CohortRange::new(&filtered_successes).ok();

    let density = DensityContext { network: ctx.network, grid: &ctx.grid, heatmaps: &ctx.heatmaps };
    let vote_seed = derive(config.seed, &[VOTE_STREAM, u64::from(request.id)]);
    let mut rows = Vec::new();
    for (strategy, k) in config.configurations() {
        let start = Instant::now();
        let pruned = apply_strategy(strategy, &cohort, request, k, &density, &config.pruning)?;
        let pruning_us = start.elapsed().as_secs_f64() * 1e6;

        let survivors: Vec<&(CompositionOutcome, f64)> = pruned.survivors.iter().map(|id| &outcomes[id]).collect();
        let candidates: Vec<(ProviderId, QosVector)> =
            survivors.iter().filter(|(o, _)| o.success).map(|(o, _)| (o.provider_id, o.pqos)).collect();
        let composition_proxy: f64 = survivors.iter().map(|(o, _)| o.pqos.execution_time).sum();
        let composition_us: f64 = survivors.iter().map(|(_, us)| us).sum();
        let range = match config.reference_cohort {
            ReferenceCohort::Filtered => filtered_range,
            ReferenceCohort::Pruned => {
                let q: Vec<QosVector> = candidates.iter().map(|c| c.1).collect();
                CohortRange::new(&q).ok()
            }
        };

        for &method in &config.methods {
            let mut row = blank(strategy, k, method, RowStatus::Ok);
            row.filtered = cohort.len();
            row.survivors = survivors.len();
            row.successes = candidates.len();
            row.pruning_overhead = pruned.overhead;
            if filtered_range.is_none() {
                row.status = RowStatus::NoSuccessfulProvider;
            } else if candidates.is_empty() {
                row.status = RowStatus::NoRecommendation;
                let floor = floor_satisfaction(&request.weights);
                row.satisfaction = Some(floor.overall);
                row.metric_satisfaction = Some(floor.per_metric);
            } else {
                let start = Instant::now();
                let rec = recommend(method, &candidates, &request.weights, vote_seed)?;
                let vote_us = start.elapsed().as_secs_f64() * 1e6;
                let pqos = outcomes[&rec.winner].0.pqos;
                let range = range.expect("candidates exist");
                row.winner = Some(rec.winner);
                row.pqos = Some(pqos);
                row.paradox = rec.paradox;
                row.vote_operations = rec.operations;
                let sat = satisfaction_in_range(&pqos, &range, &request.weights);
                row.satisfaction = Some(sat.overall);
                row.metric_satisfaction = Some(sat.per_metric);
                if wall {
                    row.wall_time_us = Some(pruning_us + composition_us + vote_us);
                }
            }
            row.proxy_time = pruned.overhead as f64 + composition_proxy + row.vote_operations as f64;
            if wall && row.wall_time_us.is_none() {
                row.wall_time_us = Some(pruning_us + composition_us);
            }
            rows.push(row);
        }
    }
    Ok(rows)
}

/// Per-configuration means and spreads, in configuration order.
pub fn aggregate(rows: &[RequestRow], config: &ExperimentConfig) -> Vec<SummaryRow> {
    let mut out = Vec::new();
    for (strategy, k) in config.configurations() {
        for &method in &config.methods {
            let group: Vec<&RequestRow> =
                rows.iter().filter(|r| r.strategy == strategy && r.k == k && r.method == method).collect();
            out.push(summarize(strategy, k, method, &group));
        }
    }
    out
}

fn summarize(strategy: PruningStrategy, k: f64, method: VotingMethod, group: &[&RequestRow]) -> SummaryRow {
    let composed: Vec<&&RequestRow> = group
        .iter()
        .filter(|r| matches!(r.status, RowStatus::Ok | RowStatus::NoRecommendation | RowStatus::NoSuccessfulProvider))
        .collect();
    let sat: Vec<f64> = group.iter().filter_map(|r| r.satisfaction).collect();
    let proxy: Vec<f64> = composed.iter().map(|r| r.proxy_time).collect();
    let wall: Vec<f64> = composed.iter().filter_map(|r| r.wall_time_us).collect();
    let survivors: Vec<f64> = composed.iter().map(|r| r.survivors as f64).collect();
    let attempted: usize = composed.iter().map(|r| r.survivors).sum();
    let failed: usize = composed.iter().map(|r| r.survivors - r.successes).sum();
    let scored = sat.len();
    let no_rec = group.iter().filter(|r| r.status == RowStatus::NoRecommendation).count();
    SummaryRow {
        strategy,
        k,
        method,
        requests: group.len(),
        scored,
        mean_satisfaction: stats::mean(&sat),
        sd_satisfaction: stats::std_dev(&sat),
        mean_proxy_time: stats::mean(&proxy),
        sd_proxy_time: stats::std_dev(&proxy),
        mean_wall_time_us: stats::mean(&wall),
        mean_survivors: stats::mean(&survivors),
        failure_rate: (attempted > 0).then(|| failed as f64 / attempted as f64),
        no_recommendation_rate: (scored > 0).then(|| no_rec as f64 / scored as f64),
    }
}

/// Rank correlations against `k` for every pruning strategy and method run
/// at two or more `k` values.
pub fn trends(summary: &[SummaryRow]) -> Vec<TrendRow> {
    let mut groups: BTreeMap<(PruningStrategy, VotingMethod), Vec<&SummaryRow>> = BTreeMap::new();
    for s in summary.iter().filter(|s| s.strategy != PruningStrategy::Brute) {
        groups.entry((s.strategy, s.method)).or_default().push(s);
    }
    groups
        .into_iter()
        .filter(|(_, g)| g.len() >= 2)
        .map(|((strategy, method), g)| {
            let pick = |f: fn(&SummaryRow) -> Option<f64>| -> Option<(Vec<f64>, Vec<f64>)> {
                let mut ks = Vec::new();
                let mut vs = Vec::new();
                for s in &g {
                    ks.push(s.k);
                    vs.push(f(s)?);
                }
                Some((ks, vs))
            };
            let corr = |f| pick(f).and_then(|(k, v)| stats::spearman(&k, &v));
            TrendRow {
                strategy,
                method,
                points: g.len(),
                spearman_k_satisfaction: corr(|s| s.mean_satisfaction),
                spearman_k_proxy_time: corr(|s| s.mean_proxy_time),
            }
        })
        .collect()
}
