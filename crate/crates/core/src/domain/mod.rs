//! Providers, swarms, partnerships, consumer requests and QoS vectors.

mod scenario;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use scenario::{generate_scenario, read_scenario, write_scenario, Scenario, ScenarioConfig};

pub type NodeId = u32;
pub type ProviderId = u32;
pub type ChargingProviderId = u32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Drone {
    pub id: u32,
    /// Wh
    pub battery_capacity: f64,
    /// Wh
    pub current_energy: f64,
    /// kg
    pub payload_capacity: f64,
    /// kg
    pub assigned_payload: f64,
    /// m/s
    pub speed: f64,
}

impl Drone {
    pub fn new(id: u32, battery_capacity: f64, payload_capacity: f64, speed: f64) -> Result<Self> {
        let drone = Self {
            id,
            battery_capacity,
            current_energy: battery_capacity,
            payload_capacity,
            assigned_payload: 0.0,
            speed,
        };
        drone.validate()?;
        Ok(drone)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.battery_capacity,
            self.current_energy,
            self.payload_capacity,
            self.assigned_payload,
            self.speed,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidInput(format!("drone {} has non-finite fields", self.id)));
        }
        if !(0.0..=self.battery_capacity).contains(&self.current_energy) {
            return Err(Error::InvalidInput(format!(
                "drone {} energy {} outside [0, {}]",
                self.id, self.current_energy, self.battery_capacity
            )));
        }
        if !(0.0..=self.payload_capacity).contains(&self.assigned_payload) {
            return Err(Error::InvalidInput(format!(
                "drone {} payload {} outside [0, {}]",
                self.id, self.assigned_payload, self.payload_capacity
            )));
        }
        if self.speed <= 0.0 {
            return Err(Error::InvalidInput(format!("drone {} speed must be positive", self.id)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formation {
    Vee,
    Diamond,
    Front,
    Echelon,
    Column,
}

impl Formation {
    pub const ALL: [Formation; 5] = [
        Formation::Vee,
        Formation::Diamond,
        Formation::Front,
        Formation::Echelon,
        Formation::Column,
    ];

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Behaviour {
    Static,
    Dynamic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormationPolicy {
    Fixed,
    Flexible,
}

/// Technique flags of a swarm. One behaviour and one formation policy are
/// always present; cooperation is optional.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Techniques {
    pub behaviour: Behaviour,
    pub formation_policy: FormationPolicy,
    pub cooperative: bool,
}

impl Techniques {
    pub const BASIC: Techniques = Techniques {
        behaviour: Behaviour::Static,
        formation_policy: FormationPolicy::Fixed,
        cooperative: false,
    };

    pub fn flags(&self) -> Vec<&'static str> {
        let mut flags = vec![
            match self.behaviour {
                Behaviour::Static => "static",
                Behaviour::Dynamic => "dynamic",
            },
            match self.formation_policy {
                FormationPolicy::Fixed => "fixed_formation",
                FormationPolicy::Flexible => "flexible_formation",
            },
        ];
        if self.cooperative {
            flags.push("cooperative");
        }
        flags
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Swarm {
    pub drones: Vec<Drone>,
    pub techniques: Techniques,
    pub formation: Formation,
}

impl Swarm {
    pub fn new(drones: Vec<Drone>, techniques: Techniques, formation: Formation) -> Result<Self> {
        let swarm = Self { drones, techniques, formation };
        swarm.validate()?;
        Ok(swarm)
    }

    /// `count` identical, fully charged drones.
    pub fn homogeneous(
        count: usize,
        battery_capacity: f64,
        payload_capacity: f64,
        speed: f64,
        techniques: Techniques,
        formation: Formation,
    ) -> Result<Self> {
        let drones = (0..count)
            .map(|i| Drone::new(i as u32, battery_capacity, payload_capacity, speed))
            .collect::<Result<Vec<_>>>()?;
        Self::new(drones, techniques, formation)
    }

    pub fn validate(&self) -> Result<()> {
        let first = self
            .drones
            .first()
            .ok_or_else(|| Error::InvalidInput("swarm has no drones".into()))?;
        for d in &self.drones {
            d.validate()?;
            if d.battery_capacity != first.battery_capacity
                || d.payload_capacity != first.payload_capacity
                || d.speed != first.speed
            {
                return Err(Error::InvalidInput("swarm drones are not homogeneous".into()));
            }
        }
        Ok(())
    }

    pub fn size(&self) -> usize {
        self.drones.len()
    }

    pub fn battery_capacity(&self) -> f64 {
        self.drones[0].battery_capacity
    }

    pub fn payload_capacity(&self) -> f64 {
        self.drones[0].payload_capacity
    }

    pub fn speed(&self) -> f64 {
        self.drones[0].speed
    }

    /// Assigns one package per drone, heaviest package first onto the least
    /// loaded drone (lowest index on ties). Existing assignments are cleared.
    pub fn load_packages(&self, packages: &[f64]) -> Result<Swarm> {
        if packages.len() > self.drones.len() {
            return Err(Error::InvalidInput(format!(
                "{} packages exceed swarm of {}",
                packages.len(),
                self.drones.len()
            )));
        }
        let mut order: Vec<usize> = (0..packages.len()).collect();
        order.sort_by(|&a, &b| packages[b].total_cmp(&packages[a]).then(a.cmp(&b)));

        let mut loaded = self.clone();
        let mut carrying = vec![false; loaded.drones.len()];
        for d in &mut loaded.drones {
            d.assigned_payload = 0.0;
        }
        for p in order {
            let weight = packages[p];
            let slot = (0..loaded.drones.len())
                .filter(|&i| !carrying[i])
                .min_by(|&a, &b| {
                    loaded.drones[a]
                        .assigned_payload
                        .total_cmp(&loaded.drones[b].assigned_payload)
                        .then(a.cmp(&b))
                })
                .expect("package count checked above");
            if weight > loaded.drones[slot].payload_capacity {
                return Err(Error::InvalidInput(format!(
                    "package of {weight} kg exceeds drone payload {}",
                    loaded.drones[slot].payload_capacity
                )));
            }
            loaded.drones[slot].assigned_payload = weight;
            carrying[slot] = true;
        }
        Ok(loaded)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartnershipTier {
    Platinum,
    Gold,
    Silver,
}

impl PartnershipTier {
    pub const ALL: [PartnershipTier; 3] =
        [PartnershipTier::Platinum, PartnershipTier::Gold, PartnershipTier::Silver];
}

impl fmt::Display for PartnershipTier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PartnershipTier::Platinum => "platinum",
            PartnershipTier::Gold => "gold",
            PartnershipTier::Silver => "silver",
        })
    }
}

/// Price and queue priority granted by one tier (or by no partnership).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TierTerms {
    pub price_per_kwh: f64,
    /// Most exogenous drones that are still served before the swarm.
    /// `None` means the swarm waits for the whole queue.
    pub queue_ahead_limit: Option<u32>,
}

impl TierTerms {
    /// Number of queued drones served before the swarm when `queued` are waiting.
    pub fn drones_ahead(&self, queued: u32) -> u32 {
        match self.queue_ahead_limit {
            Some(limit) => queued.min(limit),
            None => queued,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PartnershipTerms {
    pub platinum: TierTerms,
    pub gold: TierTerms,
    pub silver: TierTerms,
    pub non_partner: TierTerms,
}

impl Default for PartnershipTerms {
    fn default() -> Self {
        Self {
            platinum: TierTerms { price_per_kwh: 0.15, queue_ahead_limit: Some(0) },
            gold: TierTerms { price_per_kwh: 0.20, queue_ahead_limit: Some(2) },
            silver: TierTerms { price_per_kwh: 0.25, queue_ahead_limit: Some(3) },
            non_partner: TierTerms { price_per_kwh: 0.30, queue_ahead_limit: None },
        }
    }
}

impl PartnershipTerms {
    pub fn tier(&self, tier: PartnershipTier) -> TierTerms {
        match tier {
            PartnershipTier::Platinum => self.platinum,
            PartnershipTier::Gold => self.gold,
            PartnershipTier::Silver => self.silver,
        }
    }

    /// Checks the strict tier ordering: better tiers pay less and wait less.
    pub fn validate(&self) -> Result<()> {
        let chain = [self.platinum, self.gold, self.silver, self.non_partner];
        let ahead = |t: &TierTerms| t.queue_ahead_limit.map_or(u64::MAX, u64::from);
        for pair in chain.windows(2) {
            if !(pair[0].price_per_kwh < pair[1].price_per_kwh) {
                return Err(Error::Config("tier prices must strictly increase platinum < gold < silver < none".into()));
            }
            if ahead(&pair[0]) > ahead(&pair[1]) {
                return Err(Error::Config("tier queue priority must not improve for lower tiers".into()));
            }
        }
        if self.platinum.queue_ahead_limit != Some(0) {
            return Err(Error::Config("platinum must skip the whole queue".into()));
        }
        if chain.iter().any(|t| !(t.price_per_kwh >= 0.0 && t.price_per_kwh.is_finite())) {
            return Err(Error::Config("prices must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Partnership {
    pub charging_provider: ChargingProviderId,
    pub tier: PartnershipTier,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provider {
    pub id: ProviderId,
    pub swarm: Swarm,
    pub partnership: Partnership,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QosMetric {
    DeliveryTime,
    Energy,
    Cost,
    ExecutionTime,
}

impl QosMetric {
    /// Fixed metric order used for ballots, tie-breaks and tables.
    pub const ALL: [QosMetric; 4] =
        [QosMetric::DeliveryTime, QosMetric::Energy, QosMetric::Cost, QosMetric::ExecutionTime];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn short_name(self) -> &'static str {
        match self {
            QosMetric::DeliveryTime => "dt",
            QosMetric::Energy => "ec",
            QosMetric::Cost => "c",
            QosMetric::ExecutionTime => "et",
        }
    }
}

impl fmt::Display for QosMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for QosMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dt" | "delivery_time" => Ok(QosMetric::DeliveryTime),
            "ec" | "energy" => Ok(QosMetric::Energy),
            "c" | "cost" => Ok(QosMetric::Cost),
            "et" | "execution_time" => Ok(QosMetric::ExecutionTime),
            other => Err(Error::InvalidInput(format!("unknown QoS metric {other:?}"))),
        }
    }
}

/// Perceived QoS of a composed delivery. Every component is lower-is-better.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct QosVector {
    /// seconds
    pub delivery_time: f64,
    /// Wh
    pub energy: f64,
    /// currency
    pub cost: f64,
    /// abstract units
    pub execution_time: f64,
}

impl QosVector {
    pub fn get(&self, metric: QosMetric) -> f64 {
        match metric {
            QosMetric::DeliveryTime => self.delivery_time,
            QosMetric::Energy => self.energy,
            QosMetric::Cost => self.cost,
            QosMetric::ExecutionTime => self.execution_time,
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.delivery_time, self.energy, self.cost, self.execution_time]
    }

    pub fn is_valid(&self) -> bool {
        self.as_array().iter().all(|v| v.is_finite() && *v >= 0.0)
    }
}

/// Consumer preference weights, normalized to sum to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<QosMetric, f64>", into = "BTreeMap<QosMetric, f64>")]
pub struct QosWeights([f64; 4]);

impl QosWeights {
    pub fn new(raw: [f64; 4]) -> Result<Self> {
        normalize_weights(raw)
    }

    pub fn get(&self, metric: QosMetric) -> f64 {
        self.0[metric.index()]
    }

    pub fn as_array(&self) -> [f64; 4] {
        self.0
    }

    /// Metric with the largest weight; ties go to the earlier metric in
    /// [`QosMetric::ALL`].
    pub fn dominant(&self) -> QosMetric {
        let mut best = QosMetric::ALL[0];
        for m in QosMetric::ALL {
            if self.get(m) > self.get(best) {
                best = m;
            }
        }
        best
    }
}

impl TryFrom<BTreeMap<QosMetric, f64>> for QosWeights {
    type Error = Error;

    fn try_from(map: BTreeMap<QosMetric, f64>) -> Result<Self> {
        let mut raw = [0.0; 4];
        for (m, w) in map {
            raw[m.index()] = w;
        }
        normalize_weights(raw)
    }
}

impl From<QosWeights> for BTreeMap<QosMetric, f64> {
    fn from(w: QosWeights) -> Self {
        QosMetric::ALL.iter().map(|&m| (m, w.get(m))).collect()
    }
}

/// Scales non-negative raw weights so they sum to one.
pub fn normalize_weights(raw: [f64; 4]) -> Result<QosWeights> {
    if raw.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidInput("weights must be finite and non-negative".into()));
    }
    let total: f64 = raw.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidInput("at least one weight must be positive".into()));
    }
    // Already-normalized input is kept bit-for-bit so serialized weights round trip.
    if (total - 1.0).abs() <= 1e-12 {
        return Ok(QosWeights(raw));
    }
    Ok(QosWeights(raw.map(|w| w / total)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeliveryRequest {
    pub id: u32,
    pub source: NodeId,
    pub destination: NodeId,
    /// Package weights in kg.
    pub packages: Vec<f64>,
    pub weights: QosWeights,
}

impl DeliveryRequest {
    pub fn new(
        id: u32,
        source: NodeId,
        destination: NodeId,
        packages: Vec<f64>,
        weights: QosWeights,
    ) -> Result<Self> {
        let request = Self { id, source, destination, packages, weights };
        request.validate()?;
        Ok(request)
    }

    pub fn validate(&self) -> Result<()> {
        if self.source == self.destination {
            return Err(Error::InvalidInput("source and destination must differ".into()));
        }
        if self.packages.is_empty() {
            return Err(Error::InvalidInput("request carries no packages".into()));
        }
        if self.packages.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidInput("package weights must be positive".into()));
        }
        Ok(())
    }

    pub fn heaviest_package(&self) -> f64 {
        self.packages.iter().copied().fold(0.0, f64::max)
    }
}
