use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    Behaviour, DeliveryRequest, Formation, FormationPolicy, Partnership, PartnershipTier, Provider, QosWeights,
    Swarm, Techniques,
};
use crate::error::{Error, Result};
use crate::network::SkywayNetwork;

/// Ranges for synthesized providers and requests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    /// Wh
    pub battery_range: (f64, f64),
    /// m/s
    pub speed_range: (f64, f64),
    /// kg
    pub payload_range: (f64, f64),
    pub swarm_size_range: (usize, usize),
    pub max_packages: usize,
    /// kg
    pub max_package_weight: f64,
    /// kg
    pub min_package_weight: f64,
    pub dynamic_probability: f64,
    pub flexible_probability: f64,
    pub cooperative_probability: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            battery_range: (50.0, 100.0),
            speed_range: (10.0, 20.0),
            payload_range: (1.0, 3.0),
            swarm_size_range: (3, 12),
            max_packages: 10,
            max_package_weight: 2.5,
            min_package_weight: 0.1,
            dynamic_probability: 0.5,
            flexible_probability: 0.5,
            cooperative_probability: 0.5,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let ordered = |(lo, hi): (f64, f64)| lo > 0.0 && lo <= hi && hi.is_finite();
        if !ordered(self.battery_range) || !ordered(self.speed_range) || !ordered(self.payload_range) {
            return Err(Error::Config("capability ranges must be positive and ordered".into()));
        }
        let (smin, smax) = self.swarm_size_range;
        if smin == 0 || smin > smax {
            return Err(Error::Config("swarm size range must be positive and ordered".into()));
        }
        if self.max_packages == 0 || !(self.min_package_weight > 0.0 && self.min_package_weight <= self.max_package_weight) {
            return Err(Error::Config("package limits must be positive".into()));
        }
        for p in [self.dynamic_probability, self.flexible_probability, self.cooperative_probability] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config("technique probabilities must lie in [0, 1]".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub providers: Vec<Provider>,
    pub requests: Vec<DeliveryRequest>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum ScenarioRecord {
    Provider(Provider),
    Request(DeliveryRequest),
}

fn draw(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..=hi)
    }
}

/// Providers and requests as a pure function of `(seed, network, counts, config)`.
pub fn generate_scenario(
    seed: u64,
    network: &SkywayNetwork,
    n_providers: usize,
    n_requests: usize,
    config: &ScenarioConfig,
) -> Result<Scenario> {
    if n_providers == 0 || n_requests == 0 {
        return Err(Error::Config("scenario needs at least one provider and one request".into()));
    }
    if network.node_count() < 2 {
        return Err(Error::Config("scenario needs a network with at least two nodes".into()));
    }
    config.validate()?;
    let companies: Vec<_> = network.charging_providers().iter().copied().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut providers = Vec::with_capacity(n_providers);
    for id in 0..n_providers {
        let size = rng.gen_range(config.swarm_size_range.0..=config.swarm_size_range.1);
        let battery = draw(&mut rng, config.battery_range);
        let payload = draw(&mut rng, config.payload_range);
        let speed = draw(&mut rng, config.speed_range);
        let techniques = Techniques {
            behaviour: if rng.gen_bool(config.dynamic_probability) { Behaviour::Dynamic } else { Behaviour::Static },
            formation_policy: if rng.gen_bool(config.flexible_probability) {
                FormationPolicy::Flexible
            } else {
                FormationPolicy::Fixed
            },
            cooperative: rng.gen_bool(config.cooperative_probability),
        };
        let formation = *Formation::ALL.choose(&mut rng).expect("non-empty");
        let partnership = Partnership {
            charging_provider: *companies.choose(&mut rng).expect("network has charging providers"),
            tier: *PartnershipTier::ALL.choose(&mut rng).expect("non-empty"),
        };
        let swarm = Swarm::homogeneous(size, battery, payload, speed, techniques, formation)?;
        providers.push(Provider { id: id as u32, swarm, partnership });
    }

    let n_nodes = network.node_count();
    let mut requests = Vec::with_capacity(n_requests);
    for id in 0..n_requests {
        let source = rng.gen_range(0..n_nodes);
        let mut destination = rng.gen_range(0..n_nodes - 1);
        if destination >= source {
            destination += 1;
        }
        let count = rng.gen_range(1..=config.max_packages);
        let packages: Vec<f64> = (0..count)
            .map(|_| draw(&mut rng, (config.min_package_weight, config.max_package_weight)))
            .collect();
        // Flat Dirichlet preference weights.
        let raw = [0; 4].map(|_| -(1.0 - rng.gen::<f64>()).ln());
        requests.push(DeliveryRequest::new(
            id as u32,
            network.node(source).id,
            network.node(destination).id,
            packages,
            QosWeights::new(raw)?,
        )?);
    }
    Ok(Scenario { providers, requests })
}

/// Writes one JSON record per line: providers first, then requests.
pub fn write_scenario<W: Write>(scenario: &Scenario, mut out: W) -> Result<()> {
    for p in &scenario.providers {
        serde_json::to_writer(&mut out, &ScenarioRecord::Provider(p.clone()))?;
        out.write_all(b"\n")?;
    }
    for r in &scenario.requests {
        serde_json::to_writer(&mut out, &ScenarioRecord::Request(r.clone()))?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_scenario<R: BufRead>(input: R) -> Result<Scenario> {
    let mut scenario = Scenario { providers: Vec::new(), requests: Vec::new() };
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: ScenarioRecord = serde_json::from_str(&line)
            .map_err(|e| Error::Parse { line: i + 1, message: e.to_string() })?;
        match record {
            ScenarioRecord::Provider(p) => {
                p.swarm.validate()?;
                scenario.providers.push(p);
            }
            ScenarioRecord::Request(r) => {
                r.validate()?;
                scenario.requests.push(r);
            }
        }
    }
    Ok(scenario)
}
