use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{network_seed, scenario_seed, ExperimentConfig, ExperimentResult, RequestRow, SummaryRow, TrendRow, WIND_STREAM};
use crate::domain::Scenario;
use crate::error::Result;
use crate::network::SkywayNetwork;
use crate::seed::derive;

/// What is needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub seed: u64,
    pub network_seed: Option<u64>,
    pub scenario_seed: Option<u64>,
    pub wind_seed: u64,
    pub config_sha256: String,
    pub network_sha256: String,
    pub scenario_sha256: String,
    pub nodes: usize,
    pub segments: usize,
    pub providers: usize,
    pub requests: usize,
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// SHA-256 of the configuration's canonical JSON form.
pub fn config_hash(config: &ExperimentConfig) -> Result<String> {
    Ok(sha256_hex(&serde_json::to_vec(config)?))
}

impl Manifest {
    pub fn new(config: &ExperimentConfig, network: &SkywayNetwork, scenario: &Scenario) -> Result<Self> {
        Ok(Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: config.seed,
            network_seed: config.network_file.is_none().then(|| network_seed(config)),
            scenario_seed: config.scenario_file.is_none().then(|| scenario_seed(config)),
            wind_seed: derive(config.seed, &[WIND_STREAM]),
            config_sha256: config_hash(config)?,
            network_sha256: sha256_hex(&serde_json::to_vec(&network.to_canonical())?),
            scenario_sha256: sha256_hex(&serde_json::to_vec(scenario)?),
            nodes: network.node_count(),
            segments: network.segments().len(),
            providers: scenario.providers.len(),
            requests: scenario.requests.len(),
        })
    }
}

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub fn per_request_csv(rows: &[RequestRow]) -> String {
    let mut out = String::from(
        "request_id,strategy,k,method,status,filtered,survivors,successes,winner,dt,ec,c,et,satisfaction,sat_dt,sat_ec,sat_c,sat_et,paradox,pruning_overhead,vote_operations,proxy_time,wall_time_us\n",
    );
    for r in rows {
        let q = r.pqos.map(|q| q.as_array());
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.request_id,
            r.strategy,
            r.k,
            r.method,
            r.status.name(),
            r.filtered,
            r.survivors,
            r.successes,
            opt(r.winner),
            opt(q.map(|q| q[0])),
            opt(q.map(|q| q[1])),
            opt(q.map(|q| q[2])),
            opt(q.map(|q| q[3])),
            opt(r.satisfaction),
            opt(r.metric_satisfaction.map(|s| s[0])),
            opt(r.metric_satisfaction.map(|s| s[1])),
            opt(r.metric_satisfaction.map(|s| s[2])),
            opt(r.metric_satisfaction.map(|s| s[3])),
            r.paradox,
            r.pruning_overhead,
            r.vote_operations,
            r.proxy_time,
            opt(r.wall_time_us),
        );
    }
    out
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from(
        "strategy,k,method,requests,scored,mean_satisfaction,sd_satisfaction,mean_proxy_time,sd_proxy_time,mean_wall_time_us,mean_survivors,failure_rate,no_recommendation_rate\n",
    );
    for s in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            s.strategy,
            s.k,
            s.method,
            s.requests,
            s.scored,
            opt(s.mean_satisfaction),
            opt(s.sd_satisfaction),
            opt(s.mean_proxy_time),
            opt(s.sd_proxy_time),
            opt(s.mean_wall_time_us),
            opt(s.mean_survivors),
            opt(s.failure_rate),
            opt(s.no_recommendation_rate),
        );
    }
    out
}

pub fn trends_csv(rows: &[TrendRow]) -> String {
    let mut out = String::from("strategy,method,points,spearman_k_satisfaction,spearman_k_proxy_time\n");
    for t in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            t.strategy,
            t.method,
            t.points,
            opt(t.spearman_k_satisfaction),
            opt(t.spearman_k_proxy_time)
        );
    }
    out
}

/// Writes `per_request.csv`, `summary.csv`, `trends.csv` and `manifest.json`.
pub fn write_outputs(result: &ExperimentResult, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("per_request.csv"), per_request_csv(&result.rows))?;
    fs::write(dir.join("summary.csv"), summary_csv(&result.summary))?;
    fs::write(dir.join("trends.csv"), trends_csv(&result.trends))?;
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&result.manifest)? + "\n")?;
    Ok(())
}
