//! Parametric energy, wind, charging and execution-time models.
//!
//! Flight power is linear in payload and scaled by multiplicative formation,
//! slot-position and headwind factors. Charging happens on a limited number of
//! pads shared with exogenous traffic.

use std::f64::consts::{FRAC_PI_4, TAU};

use serde::{Deserialize, Serialize};

use crate::domain::{Behaviour, Drone, Formation, FormationPolicy, NodeId, Partnership, PartnershipTerms, Techniques};
use crate::error::{Error, Result};
use crate::network::SkywayNode;
use crate::seed::{derive, unit_f64};

pub const WIND_SECTORS: usize = 8;
const JOULES_PER_WH: f64 = 3600.0;

/// Wind direction relative to the flight heading, in eight 45° sectors.
/// Sector 0 is a pure tailwind, sector 4 a pure headwind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct WindSector(u8);

impl WindSector {
    pub fn new(index: usize) -> Self {
        Self((index % WIND_SECTORS) as u8)
    }

    pub fn index(self) -> usize {
        usize::from(self.0)
    }
}

/// Absolute wind: speed and the direction it blows towards (radians).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wind {
    pub speed: f64,
    pub direction: f64,
}

impl Wind {
    pub const CALM: Wind = Wind { speed: 0.0, direction: 0.0 };

    pub fn relative_to(&self, heading: f64) -> RelativeWind {
        if self.speed <= 0.0 {
            return RelativeWind::CALM;
        }
        let rel = (self.direction - heading).rem_euclid(TAU);
        let sector = WindSector::new((rel / FRAC_PI_4).round() as usize);
        RelativeWind { speed: self.speed, sector, headwind: -self.speed * rel.cos() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelativeWind {
    pub speed: f64,
    pub sector: WindSector,
    /// Component against the direction of travel, m/s (negative for tailwind).
    pub headwind: f64,
}

impl RelativeWind {
    pub const CALM: RelativeWind = RelativeWind { speed: 0.0, sector: WindSector(0), headwind: 0.0 };
}

/// Seeded wind that is piecewise constant in time: a prevailing wind per
/// period, perturbed per segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindField {
    seed: u64,
    max_speed: f64,
    period: f64,
}

impl WindField {
    pub fn new(seed: u64, config: &EnergyModelConfig) -> Self {
        Self { seed, max_speed: config.max_wind_speed, period: config.wind_period }
    }

    pub fn calm() -> Self {
        Self { seed: 0, max_speed: 0.0, period: f64::INFINITY }
    }

    /// Wind over the segment between two nodes (order-independent) at `time` seconds.
    pub fn at(&self, a: NodeId, b: NodeId, time: f64) -> Wind {
        if self.max_speed <= 0.0 {
            return Wind::CALM;
        }
        let epoch = if self.period.is_finite() && self.period > 0.0 { (time / self.period).floor().max(0.0) as u64 } else { 0 };
        let prevailing_dir = TAU * unit_f64(derive(self.seed, &[epoch, 0]));
        let prevailing_speed = self.max_speed * unit_f64(derive(self.seed, &[epoch, 1]));
        let key = derive(self.seed, &[epoch, u64::from(a.min(b)), u64::from(a.max(b))]);
        let jitter = (unit_f64(key) - 0.5) * (TAU / 6.0);
        let gust = 0.75 + 0.5 * unit_f64(derive(key, &[1]));
        Wind {
            speed: (prevailing_speed * gust).min(self.max_speed),
            direction: (prevailing_dir + jitter).rem_euclid(TAU),
        }
    }
}

/// Energy multipliers per formation (rows, in [`Formation::ALL`] order) and
/// relative wind sector (columns).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormationFactorTable(pub [[f64; WIND_SECTORS]; 5]);

impl Default for FormationFactorTable {
    fn default() -> Self {
        // Each formation is the cheapest in at least one sector.
        Self([
            [1.05, 1.00, 1.10, 0.95, 0.85, 0.95, 1.10, 1.00], // Vee: headwind
            [1.00, 0.92, 1.05, 1.00, 0.95, 1.00, 1.05, 0.92], // Diamond: quartering tailwind
            [0.90, 1.00, 1.15, 1.20, 1.25, 1.20, 1.15, 1.00], // Front: tailwind
            [1.10, 1.05, 0.88, 1.00, 1.05, 1.00, 0.88, 1.05], // Echelon: crosswind
            [1.00, 1.00, 1.00, 0.90, 0.92, 0.90, 1.00, 1.00], // Column: quartering headwind
        ])
    }
}

impl FormationFactorTable {
    pub fn factor(&self, formation: Formation, sector: WindSector) -> f64 {
        self.0[formation.index()][sector.index()]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnergyModelConfig {
    /// W
    pub base_power: f64,
    /// W per kg of payload
    pub payload_power_coeff: f64,
    pub formation_factors: FormationFactorTable,
    /// Multiplier per slot in the swarm; slots past the end reuse the last entry.
    pub position_factors: Vec<f64>,
    /// Fractional power change per m/s of headwind.
    pub wind_drag_coeff: f64,
    /// m/s
    pub max_wind_speed: f64,
    /// Seconds between prevailing-wind changes.
    pub wind_period: f64,
    /// W per pad
    pub charge_rate: f64,
    pub cooperative_margin: f64,
    /// Largest exogenous queue drawn at a station.
    pub max_exogenous_queue: u32,
    /// Pad time taken by each exogenous drone, seconds.
    pub exogenous_service_time: f64,
    pub flexible_formation_factor: f64,
    pub dynamic_behaviour_factor: f64,
}

impl Default for EnergyModelConfig {
    fn default() -> Self {
        Self {
            base_power: 100.0,
            payload_power_coeff: 50.0,
            formation_factors: FormationFactorTable::default(),
            position_factors: vec![1.0, 0.92, 0.92, 0.96, 0.96, 0.98],
            wind_drag_coeff: 0.02,
            max_wind_speed: 8.0,
            wind_period: 1800.0,
            charge_rate: 100.0,
            cooperative_margin: 0.1,
            max_exogenous_queue: 4,
            exogenous_service_time: 900.0,
            flexible_formation_factor: 1.5,
            dynamic_behaviour_factor: 1.3,
        }
    }
}

impl EnergyModelConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.base_power) || self.payload_power_coeff < 0.0 || !positive(self.charge_rate) {
            return Err(Error::Config("power and charge rate must be positive".into()));
        }
        if self.formation_factors.0.iter().flatten().any(|&f| !positive(f)) {
            return Err(Error::Config("formation factors must be positive".into()));
        }
        if self.position_factors.is_empty() || self.position_factors.iter().any(|&f| !positive(f)) {
            return Err(Error::Config("position factors must be non-empty and positive".into()));
        }
        if !(self.cooperative_margin >= 0.0) || self.wind_drag_coeff < 0.0 || self.max_wind_speed < 0.0 {
            return Err(Error::Config("margins and wind parameters must be non-negative".into()));
        }
        if !positive(self.wind_period) || self.exogenous_service_time < 0.0 {
            return Err(Error::Config("wind period must be positive".into()));
        }
        if !positive(self.flexible_formation_factor) || !positive(self.dynamic_behaviour_factor) {
            return Err(Error::Config("technique factors must be positive".into()));
        }
        Ok(())
    }

    pub fn position_factor(&self, slot: usize) -> f64 {
        let last = self.position_factors.len() - 1;
        self.position_factors[slot.min(last)]
    }

    fn wind_factor(&self, wind: &RelativeWind) -> f64 {
        (1.0 + self.wind_drag_coeff * wind.headwind).max(0.5)
    }
}

/// Energy (Wh) one drone spends flying `length` meters.
pub fn segment_energy(
    drone: &Drone,
    length: f64,
    formation: Formation,
    wind: &RelativeWind,
    slot: usize,
    config: &EnergyModelConfig,
) -> f64 {
    let power = config.base_power + config.payload_power_coeff * drone.assigned_payload;
    let seconds = length / drone.speed;
    power
        * seconds
        * config.formation_factors.factor(formation, wind.sector)
        * config.position_factor(slot)
        * config.wind_factor(wind)
        / JOULES_PER_WH
}

/// Formation with the smallest factor for the wind sector; ties go to the
/// earliest formation in `formations`.
pub fn best_formation(wind: &RelativeWind, formations: &[Formation], config: &EnergyModelConfig) -> Option<Formation> {
    let mut best: Option<Formation> = None;
    for &f in formations {
        let factor = config.formation_factors.factor(f, wind.sector);
        if best.is_none_or(|b| factor < config.formation_factors.factor(b, wind.sector)) {
            best = Some(f);
        }
    }
    best
}

/// Energy to charge to before a leg: just enough (plus margin) for cooperative
/// swarms. Fails when even a full battery cannot cover the leg.
pub fn cooperative_target(drone: &Drone, next_leg_energy: f64, config: &EnergyModelConfig) -> Result<f64> {
    if next_leg_energy > drone.battery_capacity {
        return Err(Error::InfeasibleLeg { needed: next_leg_energy, capacity: drone.battery_capacity });
    }
    Ok((next_leg_energy * (1.0 + config.cooperative_margin)).min(drone.battery_capacity))
}

/// Deterministic stand-in for composition run time.
pub fn execution_time_proxy(evaluations: u64, techniques: &Techniques, config: &EnergyModelConfig) -> f64 {
    let mut factor = 1.0;
    if techniques.formation_policy == FormationPolicy::Flexible {
        factor *= config.flexible_formation_factor;
    }
    if techniques.behaviour == Behaviour::Dynamic {
        factor *= config.dynamic_behaviour_factor;
    }
    evaluations as f64 * factor
}

/// Exogenous drones already queued at a station for one request.
pub fn exogenous_queue(congestion_seed: u64, node: NodeId, config: &EnergyModelConfig) -> u32 {
    let span = u64::from(config.max_exogenous_queue) + 1;
    (derive(congestion_seed, &[u64::from(node)]) % span) as u32
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeService {
    /// Duration of the swarm's final charging batch, seconds.
    pub charge_time: f64,
    /// Time before the final batch starts: exogenous queue plus earlier batches.
    pub wait_time: f64,
    pub exogenous_wait: f64,
    pub queued: u32,
    pub drones_ahead: u32,
    pub batches: usize,
    /// Wh bought per drone, aligned with the input drones.
    pub purchased: Vec<f64>,
    pub energy_purchased: f64,
    pub price_per_kwh: f64,
    pub cost: f64,
}

impl NodeService {
    pub fn idle(drones: usize) -> Self {
        Self {
            charge_time: 0.0,
            wait_time: 0.0,
            exogenous_wait: 0.0,
            queued: 0,
            drones_ahead: 0,
            batches: 0,
            purchased: vec![0.0; drones],
            energy_purchased: 0.0,
            price_per_kwh: 0.0,
            cost: 0.0,
        }
    }

    pub fn node_time(&self) -> f64 {
        self.charge_time + self.wait_time
    }
}

/// Charges `drones` up to `targets` at `node`.
///
/// Drones needing energy queue behind the exogenous drones still served first
/// (all of them unless the swarm's partner owns the station), then charge in
/// batches of `pad_count`, largest deficit first. A batch lasts as long as its
/// largest deficit takes at `charge_rate`.
pub fn node_service_time(
    drones: &[Drone],
    node: &SkywayNode,
    targets: &[f64],
    partnership: Option<&Partnership>,
    terms: &PartnershipTerms,
    congestion_seed: u64,
    config: &EnergyModelConfig,
) -> Result<NodeService> {
    if drones.len() != targets.len() {
        return Err(Error::InvalidInput("one target per drone required".into()));
    }
    let mut purchased = Vec::with_capacity(drones.len());
    for (d, &t) in drones.iter().zip(targets) {
        if t > d.battery_capacity * (1.0 + 1e-12) {
            return Err(Error::InfeasibleLeg { needed: t, capacity: d.battery_capacity });
        }
        purchased.push((t.min(d.battery_capacity) - d.current_energy).max(0.0));
    }

    let tier = match partnership {
        Some(p) if p.charging_provider == node.station_owner => terms.tier(p.tier),
        _ => terms.non_partner,
    };

    let mut order: Vec<usize> = (0..drones.len()).filter(|&i| purchased[i] > 0.0).collect();
    if order.is_empty() {
        return Ok(NodeService::idle(drones.len()));
    }
    order.sort_by(|&a, &b| purchased[b].total_cmp(&purchased[a]).then(a.cmp(&b)));

    let pads = node.pad_count.max(1) as usize;
    let queued = exogenous_queue(congestion_seed, node.id, config);
    let drones_ahead = tier.drones_ahead(queued);
    let exogenous_wait = (drones_ahead as usize).div_ceil(pads) as f64 * config.exogenous_service_time;

    let durations: Vec<f64> = order
        .chunks(pads)
        .map(|batch| batch.iter().map(|&i| purchased[i]).fold(0.0, f64::max) * JOULES_PER_WH / config.charge_rate)
        .collect();
    let charge_time = *durations.last().expect("at least one batch");
    let wait_time = exogenous_wait + durations[..durations.len() - 1].iter().sum::<f64>();

    let energy_purchased: f64 = purchased.iter().sum();
    Ok(NodeService {
        charge_time,
        wait_time,
        exogenous_wait,
        queued,
        drones_ahead,
        batches: durations.len(),
        purchased,
        energy_purchased,
        price_per_kwh: tier.price_per_kwh,
        cost: energy_purchased / 1000.0 * tier.price_per_kwh,
    })
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::domain::PartnershipTier;
    use crate::network::Point;

    fn drone(payload: f64) -> Drone {
        let mut d = Drone::new(0, 80.0, 3.0, 10.0).unwrap();
        d.assigned_payload = payload;
        d
    }

    fn unit_config() -> EnergyModelConfig {
        EnergyModelConfig {
            formation_factors: FormationFactorTable([[1.0; WIND_SECTORS]; 5]),
            position_factors: vec![1.0],
            ..EnergyModelConfig::default()
        }
    }

    fn node(id: NodeId, owner: u32, pads: u32) -> SkywayNode {
        SkywayNode { id, position: Point::new(0.0, 0.0), station_owner: owner, pad_count: pads }
    }

    /// Congestion seed whose exogenous queue at `node` equals `q`.
    fn seed_with_queue(node: NodeId, q: u32, config: &EnergyModelConfig) -> u64 {
        (0..).find(|&s| exogenous_queue(s, node, config) == q).unwrap()
    }

    #[test]
    fn zero_length_costs_nothing() {
        let cfg = EnergyModelConfig::default();
        assert_eq!(segment_energy(&drone(1.0), 0.0, Formation::Vee, &RelativeWind::CALM, 0, &cfg), 0.0);
    }

    #[test]
    fn hand_arithmetic() {
        // (100 W + 50 W/kg * 1 kg) * 100 s = 15000 J
        let e = segment_energy(&drone(1.0), 1000.0, Formation::Vee, &RelativeWind::CALM, 0, &unit_config());
        assert!((e - 15000.0 / 3600.0).abs() < 1e-12);
        assert!((e - 4.167).abs() < 1e-3);
    }

    #[test]
    fn heavier_and_longer_cost_more() {
        let cfg = EnergyModelConfig::default();
        let w = Wind { speed: 5.0, direction: 1.0 }.relative_to(0.3);
        let light = segment_energy(&drone(0.0), 1000.0, Formation::Column, &w, 2, &cfg);
        let heavy = segment_energy(&drone(2.0), 1000.0, Formation::Column, &w, 2, &cfg);
        assert!(heavy > light);
        let longer = segment_energy(&drone(0.0), 1500.0, Formation::Column, &w, 2, &cfg);
        assert!(longer > light);
    }

    #[test]
    fn wind_sectors() {
        assert_eq!(Wind { speed: 3.0, direction: 0.0 }.relative_to(0.0).sector.index(), 0);
        let head = Wind { speed: 3.0, direction: std::f64::consts::PI }.relative_to(0.0);
        assert_eq!(head.sector.index(), 4);
        assert!((head.headwind - 3.0).abs() < 1e-12);
        assert_eq!(Wind { speed: 3.0, direction: -FRAC_PI_4 }.relative_to(0.0).sector.index(), 7);
    }

    #[test]
    fn wind_field_is_deterministic_and_symmetric() {
        let cfg = EnergyModelConfig::default();
        let f = WindField::new(4, &cfg);
        assert_eq!(f.at(1, 2, 10.0), f.at(2, 1, 10.0));
        assert_eq!(f.at(1, 2, 10.0), f.at(1, 2, 1700.0));
        for t in [0.0, 5000.0, 99999.0] {
            let w = f.at(3, 8, t);
            assert!(w.speed >= 0.0 && w.speed <= cfg.max_wind_speed);
        }
        assert_eq!(WindField::calm().at(1, 2, 0.0), Wind::CALM);
    }

    #[test]
    fn best_formation_cases() {
        let cfg = EnergyModelConfig::default();
        let head = RelativeWind { speed: 5.0, sector: WindSector::new(4), headwind: 5.0 };
        assert_eq!(best_formation(&head, &Formation::ALL, &cfg), Some(Formation::Vee));
        let mut column_cfg = cfg.clone();
        column_cfg.formation_factors.0[Formation::Column.index()][4] = 0.8;
        assert_eq!(best_formation(&head, &Formation::ALL, &column_cfg), Some(Formation::Column));
        assert_eq!(best_formation(&head, &Formation::ALL, &unit_config()), Some(Formation::Vee));
        assert_eq!(best_formation(&head, &[], &cfg), None);
    }

    #[test]
    fn best_formation_is_argmin_on_random_tables() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let mut cfg = EnergyModelConfig::default();
            for row in cfg.formation_factors.0.iter_mut() {
                for f in row.iter_mut() {
                    *f = (rng.gen_range(0.85..1.25_f64) * 20.0).round() / 20.0;
                }
            }
            let sector = WindSector::new(rng.gen_range(0..8));
            let w = RelativeWind { speed: 1.0, sector, headwind: 0.0 };
            let chosen = best_formation(&w, &Formation::ALL, &cfg).unwrap();
            for f in Formation::ALL {
                assert!(cfg.formation_factors.factor(chosen, sector) <= cfg.formation_factors.factor(f, sector));
            }
        }
    }

    #[test]
    fn default_table_gives_every_formation_a_sector() {
        let cfg = EnergyModelConfig::default();
        cfg.validate().unwrap();
        let winners: std::collections::BTreeSet<_> = (0..WIND_SECTORS)
            .map(|s| best_formation(&RelativeWind { speed: 1.0, sector: WindSector::new(s), headwind: 0.0 }, &Formation::ALL, &cfg).unwrap())
            .collect();
        assert_eq!(winners.len(), 5);
        assert!(cfg.formation_factors.0.iter().flatten().all(|&f| (0.85..=1.25).contains(&f)));
    }

    #[test]
    fn cooperative_targets() {
        let cfg = EnergyModelConfig::default();
        let mut d = drone(0.0);
        d.battery_capacity = 50.0;
        d.current_energy = 0.0;
        assert!((cooperative_target(&d, 10.0, &cfg).unwrap() - 11.0).abs() < 1e-12);
        assert_eq!(cooperative_target(&d, 50.0, &cfg).unwrap(), 50.0);
        let zero = EnergyModelConfig { cooperative_margin: 0.0, ..cfg.clone() };
        assert_eq!(cooperative_target(&d, 10.0, &zero).unwrap(), 10.0);
        assert!(matches!(cooperative_target(&d, 50.5, &cfg), Err(Error::InfeasibleLeg { .. })));
    }

    #[test]
    fn execution_proxy() {
        let cfg = EnergyModelConfig::default();
        assert_eq!(execution_time_proxy(0, &Techniques::BASIC, &cfg), 0.0);
        assert_eq!(execution_time_proxy(100, &Techniques::BASIC, &cfg), 100.0);
        let both = Techniques { behaviour: Behaviour::Dynamic, formation_policy: FormationPolicy::Flexible, cooperative: true };
        assert!((execution_time_proxy(100, &both, &cfg) - 195.0).abs() < 1e-9);
    }

    fn drained(n: usize, deficit: f64) -> (Vec<Drone>, Vec<f64>) {
        let drones: Vec<Drone> = (0..n)
            .map(|i| {
                let mut d = Drone::new(i as u32, 80.0, 2.0, 10.0).unwrap();
                d.current_energy = 80.0 - deficit;
                d
            })
            .collect();
        (drones, vec![80.0; n])
    }

    #[test]
    fn parallel_charging_has_no_wait() {
        let cfg = EnergyModelConfig::default();
        let terms = PartnershipTerms::default();
        let (drones, targets) = drained(4, 20.0);
        let n = node(1, 0, 4);
        let seed = seed_with_queue(1, 0, &cfg);
        let s = node_service_time(&drones, &n, &targets, None, &terms, seed, &cfg).unwrap();
        assert_eq!(s.wait_time, 0.0);
        assert!((s.charge_time - 20.0 * 3600.0 / cfg.charge_rate).abs() < 1e-9);
    }

    #[test]
    fn sequential_batches() {
        let cfg = EnergyModelConfig::default();
        let terms = PartnershipTerms::default();
        let delta = 20.0;
        let (drones, targets) = drained(4, delta);
        let n = node(1, 0, 2);
        let seed = seed_with_queue(1, 0, &cfg);
        let s = node_service_time(&drones, &n, &targets, None, &terms, seed, &cfg).unwrap();
        let one = delta * 3600.0 / cfg.charge_rate;
        assert_eq!(s.batches, 2);
        assert!((s.node_time() - 2.0 * one).abs() < 1e-9);
        assert!((s.wait_time - one).abs() < 1e-9);
    }

    #[test]
    fn partner_priority_and_prices() {
        let cfg = EnergyModelConfig { max_exogenous_queue: 9, ..EnergyModelConfig::default() };
        let terms = PartnershipTerms::default();
        let (drones, targets) = drained(2, 10.0);
        let n = node(5, 3, 1);
        let seed = seed_with_queue(5, 7, &cfg);
        let platinum = Partnership { charging_provider: 3, tier: PartnershipTier::Platinum };
        let gold = Partnership { charging_provider: 3, tier: PartnershipTier::Gold };
        let elsewhere = Partnership { charging_provider: 4, tier: PartnershipTier::Platinum };

        let p = node_service_time(&drones, &n, &targets, Some(&platinum), &terms, seed, &cfg).unwrap();
        assert_eq!((p.queued, p.drones_ahead, p.exogenous_wait), (7, 0, 0.0));
        let g = node_service_time(&drones, &n, &targets, Some(&gold), &terms, seed, &cfg).unwrap();
        assert_eq!(g.drones_ahead, 2);
        assert_eq!(g.exogenous_wait, 2.0 * cfg.exogenous_service_time);
        let o = node_service_time(&drones, &n, &targets, Some(&elsewhere), &terms, seed, &cfg).unwrap();
        assert_eq!(o.drones_ahead, 7);
        assert_eq!(o.price_per_kwh, terms.non_partner.price_per_kwh);
        assert!((p.cost - 0.020 * 0.15).abs() < 1e-12);
        assert!((o.cost - 0.020 * 0.30).abs() < 1e-12);
    }

    #[test]
    fn nothing_bought_costs_nothing() {
        let cfg = EnergyModelConfig::default();
        let (drones, _) = drained(3, 0.0);
        let s = node_service_time(&drones, &node(1, 0, 1), &[80.0; 3], None, &PartnershipTerms::default(), 3, &cfg).unwrap();
        assert_eq!((s.cost, s.node_time(), s.energy_purchased), (0.0, 0.0, 0.0));
    }

    #[test]
    fn targets_above_capacity_rejected() {
        let cfg = EnergyModelConfig::default();
        let (drones, _) = drained(1, 5.0);
        let r = node_service_time(&drones, &node(1, 0, 1), &[81.0], None, &PartnershipTerms::default(), 3, &cfg);
        assert!(matches!(r, Err(Error::InfeasibleLeg { .. })));
    }

    #[test]
    fn pads_change_wall_clock_not_energy() {
        let cfg = EnergyModelConfig::default();
        let terms = PartnershipTerms::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let n: u32 = rng.gen_range(1..10);
            let drones: Vec<Drone> = (0..n)
                .map(|i| {
                    let mut d = Drone::new(i, 80.0, 2.0, 10.0).unwrap();
                    d.current_energy = rng.gen_range(0.0..80.0);
                    d
                })
                .collect();
            let targets = vec![80.0; n as usize];
            let deficits: f64 = drones.iter().map(|d| 80.0 - d.current_energy).sum();
            let mut times = Vec::new();
            for pads in 1..=n {
                let s = node_service_time(&drones, &node(2, 0, pads), &targets, None, &terms, 0, &cfg).unwrap();
                assert!((s.energy_purchased - deficits).abs() < 1e-9);
                times.push(s.node_time() - s.exogenous_wait);
            }
            // More pads never slow the swarm down; with pads >= swarm size and no queue, no wait.
            assert!(times.windows(2).all(|w| w[1] <= w[0] + 1e-9));
            let all = node_service_time(&drones, &node(2, 0, n), &targets, None, &terms, seed_with_queue(2, 0, &cfg), &cfg).unwrap();
            assert_eq!(all.wait_time, 0.0);
        }
    }
}
