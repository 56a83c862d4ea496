//! Provider recommendation by weighted voting, and satisfaction scoring.

mod satisfaction;
mod voting;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::domain::{ProviderId, QosMetric, QosVector, QosWeights};
use crate::error::{Error, Result};

pub use satisfaction::{
    expected_qos_raw, floor_satisfaction, satisfaction, satisfaction_in_range, CohortRange, Satisfaction,
};
pub use voting::{Ballot, Election, ElectionResult, TIE_EPSILON};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VotingMethod {
    Plurality,
    Irv,
    Borda,
    Condorcet,
    TopWeight,
}

impl VotingMethod {
    pub const ALL: [VotingMethod; 5] =
        [VotingMethod::Plurality, VotingMethod::Irv, VotingMethod::Borda, VotingMethod::Condorcet, VotingMethod::TopWeight];

    pub fn name(self) -> &'static str {
        match self {
            VotingMethod::Plurality => "plurality",
            VotingMethod::Irv => "irv",
            VotingMethod::Borda => "borda",
            VotingMethod::Condorcet => "condorcet",
            VotingMethod::TopWeight => "topweight",
        }
    }
}

impl fmt::Display for VotingMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for VotingMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "plurality" => Ok(VotingMethod::Plurality),
            "irv" | "instantrunoff" => Ok(VotingMethod::Irv),
            "borda" => Ok(VotingMethod::Borda),
            "condorcet" => Ok(VotingMethod::Condorcet),
            "topweight" => Ok(VotingMethod::TopWeight),
            _ => Err(Error::Config(format!("unknown voting method `{s}`"))),
        }
    }
}

/// One ballot per QoS metric, ranking providers by ascending raw value of
/// that metric (ties to the lower id).
pub fn build_ballots(candidates: &[(ProviderId, QosVector)], weights: &QosWeights) -> Result<Vec<Ballot>> {
    if candidates.is_empty() {
        return Err(Error::NoRecommendation);
    }
    Ok(QosMetric::ALL
        .iter()
        .map(|&metric| {
            let mut sorted: Vec<&(ProviderId, QosVector)> = candidates.iter().collect();
            sorted.sort_by(|a, b| a.1.get(metric).total_cmp(&b.1.get(metric)).then(a.0.cmp(&b.0)));
            Ballot { voter: metric, weight: weights.get(metric), ranking: sorted.iter().map(|c| c.0).collect() }
        })
        .collect())
}

/// Best provider on the most heavily weighted metric.
pub fn top_weight(candidates: &[(ProviderId, QosVector)], weights: &QosWeights) -> Result<ProviderId> {
    let metric = weights.dominant();
    candidates
        .iter()
        .min_by(|a, b| a.1.get(metric).total_cmp(&b.1.get(metric)).then(a.0.cmp(&b.0)))
        .map(|c| c.0)
        .ok_or(Error::NoRecommendation)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub method: VotingMethod,
    pub winner: ProviderId,
    pub paradox: bool,
    pub operations: u64,
}

/// Picks a provider among successfully composed `candidates`.
pub fn recommend(
    method: VotingMethod,
    candidates: &[(ProviderId, QosVector)],
    weights: &QosWeights,
    seed: u64,
) -> Result<Recommendation> {
    if method == VotingMethod::TopWeight {
        let winner = top_weight(candidates, weights)?;
        return Ok(Recommendation { method, winner, paradox: false, operations: candidates.len() as u64 });
    }
    let election = Election::new(build_ballots(candidates, weights)?)?;
    let result = match method {
        VotingMethod::Plurality => election.plurality(),
        VotingMethod::Irv => election.instant_runoff(seed),
        VotingMethod::Borda => election.borda(),
        VotingMethod::Condorcet => election.condorcet(seed),
        VotingMethod::TopWeight => unreachable!("handled above"),
    };
    Ok(Recommendation { method, winner: result.winner, paradox: result.paradox, operations: result.operations })
}
