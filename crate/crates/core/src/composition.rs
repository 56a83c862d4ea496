//! Per-provider greedy composition of skyway services.
//!
//! A swarm starts at the source node. Whenever it can finish along the
//! distance-shortest path it does so; otherwise it moves to the unvisited
//! neighbour with the highest weighted, normalized QoS value and charges there.
//! Dynamic swarms may split once into two sub-swarms that route independently.

use serde::{Deserialize, Serialize};

use crate::domain::{
    Behaviour, DeliveryRequest, Drone, Formation, FormationPolicy, NodeId, PartnershipTerms, Provider, ProviderId,
    QosVector, QosWeights,
};
use crate::energy::{
    best_formation, cooperative_target, execution_time_proxy, node_service_time, segment_energy, EnergyModelConfig,
    NodeService, WindField,
};
use crate::error::{Error, Result};
use crate::network::{ShortestPathTree, SkywayNetwork};

/// Tolerance for energy comparisons, Wh.
const ENERGY_EPS: f64 = 1e-9;

/// When a swarm may leave the greedy search and fly the shortest path to the
/// destination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectReachRule {
    /// Every drone can fly the whole remaining shortest path on its current
    /// charge.
    Cumulative,
    /// Every segment fits a full battery and the first fits the current
    /// charge; drones recharge at intermediate nodes as needed.
    SegmentWise,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CompositionConfig {
    pub direct_reach: DirectReachRule,
    /// Share of the node value given to progress towards the destination;
    /// the QoS terms share the rest. 0 disables the progress term.
    pub progress_weight: f64,
    /// Largest allowed gap between sub-swarm arrivals, seconds.
    pub arrival_window: f64,
    /// Currency per drone per km flown.
    pub operating_cost_per_km: f64,
    pub partnership_terms: PartnershipTerms,
}

impl Default for CompositionConfig {
    fn default() -> Self {
        Self {
            direct_reach: DirectReachRule::Cumulative,
            progress_weight: 0.2,
            arrival_window: 300.0,
            operating_cost_per_km: 0.0005,
            partnership_terms: PartnershipTerms::default(),
        }
    }
}

impl CompositionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.progress_weight) {
            return Err(Error::Config("progress weight must lie in [0, 1]".into()));
        }
        if !(self.arrival_window >= 0.0) || !(self.operating_cost_per_km >= 0.0) {
            return Err(Error::Config("arrival window and operating cost must be non-negative".into()));
        }
        self.partnership_terms.validate()
    }
}

/// Read-only world shared by all compositions of one request.
#[derive(Debug, Clone, Copy)]
pub struct Environment<'a> {
    pub network: &'a SkywayNetwork,
    pub energy: &'a EnergyModelConfig,
    pub wind: WindField,
    pub congestion_seed: u64,
}

/// One flown segment plus the service received on arrival.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HopRecord {
    pub from: NodeId,
    pub to: NodeId,
    pub formation: Formation,
    pub departure: f64,
    pub travel_time: f64,
    pub wait_time: f64,
    pub charge_time: f64,
    /// Wh per drone, aligned with the sub-swarm's drones.
    pub flight_energy: Vec<f64>,
    pub purchased_energy: Vec<f64>,
    pub charging_cost: f64,
    pub operating_cost: f64,
}

/// Route and final state of one (sub-)swarm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubSwarmRoute {
    pub path: Vec<NodeId>,
    pub hops: Vec<HopRecord>,
    pub initial_drones: Vec<Drone>,
    pub final_drones: Vec<Drone>,
    pub arrival_time: f64,
    pub arrived: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionOutcome {
    pub provider_id: ProviderId,
    pub success: bool,
    pub routes: Vec<SubSwarmRoute>,
    pub pqos: QosVector,
    pub evaluations: u64,
    /// Gap between sub-swarm arrivals; 0 without a split.
    pub arrival_spread: f64,
    pub failure: Option<String>,
}

impl CompositionOutcome {
    pub fn paths(&self) -> Vec<Vec<NodeId>> {
        self.routes.iter().map(|r| r.path.clone()).collect()
    }
}

/// Where a swarm is and what it carries.
#[derive(Debug, Clone, PartialEq)]
pub struct SwarmState {
    pub drones: Vec<Drone>,
    pub node: NodeId,
    pub time: f64,
}

/// A candidate move evaluated by the greedy step.
#[derive(Debug, Clone, PartialEq)]
pub struct HopPlan {
    pub to: usize,
    pub formation: Formation,
    pub travel_time: f64,
    pub flight_energy: Vec<f64>,
    pub service: NodeService,
    pub operating_cost: f64,
    /// Unvisited neighbours of the candidate, i.e. the next step's search width.
    pub branching: usize,
    pub remaining_distance: f64,
}

impl HopPlan {
    /// Incremental delivery time, energy, cost and execution effort; all
    /// lower-is-better.
    pub fn deltas(&self) -> [f64; 4] {
        [
            self.travel_time + self.service.node_time(),
            self.flight_energy.iter().sum(),
            self.service.cost + self.operating_cost,
            self.branching as f64,
        ]
    }
}

/// Min-max normalizes lower-is-better values so the best maps to 1 and the
/// worst to 0. Without spread every value maps to 1.
fn normalize_lower_better(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    values.iter().map(|&v| if hi > lo { (hi - v) / (hi - lo) } else { 1.0 }).collect()
}

/// Weighted value of each candidate: `(1 - pw) Σ w_i p̂_i + pw p̂_progress`
/// where every `p̂` is normalized across the candidate set.
pub fn node_values(deltas: &[[f64; 4]], remaining: &[f64], weights: &QosWeights, progress_weight: f64) -> Vec<f64> {
    let n = deltas.len();
    let mut values = vec![0.0; n];
    for (m, w) in weights.as_array().into_iter().enumerate() {
        let column: Vec<f64> = deltas.iter().map(|d| d[m]).collect();
        for (v, p) in values.iter_mut().zip(normalize_lower_better(&column)) {
            *v += (1.0 - progress_weight) * w * p;
        }
    }
    for (v, p) in values.iter_mut().zip(normalize_lower_better(remaining)) {
        *v += progress_weight * p;
    }
    values
}

/// Index of the best value; ties go to the earlier candidate.
fn ranked(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    order
}

struct Context<'a> {
    env: Environment<'a>,
    config: &'a CompositionConfig,
    provider: &'a Provider,
    weights: QosWeights,
    dest: usize,
    tree: ShortestPathTree,
}

struct Flight {
    formation: Formation,
    travel_time: f64,
    energy: Vec<f64>,
    operating_cost: f64,
}

impl Context<'_> {
    fn network(&self) -> &SkywayNetwork {
        self.env.network
    }

    fn flight(&self, drones: &[Drone], from: usize, to: usize, time: f64) -> Flight {
        let net = self.network();
        let seg = net.segment_between(from, to).expect("flight between adjacent nodes");
        let length = net.segment(seg).length;
        let (a, b) = (net.node(from), net.node(to));
        let wind = self.env.wind.at(a.id, b.id, time).relative_to(a.position.heading_to(&b.position));
        let formation = match self.provider.swarm.techniques.formation_policy {
            FormationPolicy::Fixed => self.provider.swarm.formation,
            FormationPolicy::Flexible => {
                best_formation(&wind, &Formation::ALL, self.env.energy).expect("formation list is non-empty")
            }
        };
        let energy = drones
            .iter()
            .enumerate()
            .map(|(slot, d)| segment_energy(d, length, formation, &wind, slot, self.env.energy))
            .collect();
        Flight {
            formation,
            travel_time: length / drones[0].speed,
            energy,
            operating_cost: self.config.operating_cost_per_km * length / 1000.0 * drones.len() as f64,
        }
    }

    fn service(&self, drones: &[Drone], node: usize, targets: &[f64]) -> Result<NodeService> {
        node_service_time(
            drones,
            self.network().node(node),
            targets,
            Some(&self.provider.partnership),
            &self.config.partnership_terms,
            self.env.congestion_seed,
            self.env.energy,
        )
    }

    fn cooperative(&self) -> bool {
        self.provider.swarm.techniques.cooperative
    }
}

#[derive(Debug, Clone)]
struct Leg {
    initial: Vec<Drone>,
    drones: Vec<Drone>,
    node: usize,
    time: f64,
    visited: Vec<bool>,
    path: Vec<usize>,
    hops: Vec<HopRecord>,
    energy: f64,
    cost: f64,
    evaluations: u64,
}

impl Leg {
    fn route(&self, ctx: &Context<'_>, arrived: bool) -> SubSwarmRoute {
        SubSwarmRoute {
            path: self.path.iter().map(|&i| ctx.network().node(i).id).collect(),
            hops: self.hops.clone(),
            initial_drones: self.initial.clone(),
            final_drones: self.drones.clone(),
            arrival_time: self.time,
            arrived,
        }
    }

    fn fly(&mut self, ctx: &Context<'_>, to: usize, flight: &Flight, service: &NodeService) {
        for (d, (&e, &p)) in self.drones.iter_mut().zip(flight.energy.iter().zip(&service.purchased)) {
            d.current_energy = d.current_energy - e + p;
        }
        let net = ctx.network();
        self.hops.push(HopRecord {
            from: net.node(self.node).id,
            to: net.node(to).id,
            formation: flight.formation,
            departure: self.time,
            travel_time: flight.travel_time,
            wait_time: service.wait_time,
            charge_time: service.charge_time,
            flight_energy: flight.energy.clone(),
            purchased_energy: service.purchased.clone(),
            charging_cost: service.cost,
            operating_cost: flight.operating_cost,
        });
        self.time += flight.travel_time + service.node_time();
        self.energy += flight.energy.iter().sum::<f64>();
        self.cost += service.cost + flight.operating_cost;
        self.node = to;
        self.visited[to] = true;
        self.path.push(to);
    }

    fn apply(&mut self, ctx: &Context<'_>, plan: &HopPlan) {
        let flight = Flight {
            formation: plan.formation,
            travel_time: plan.travel_time,
            energy: plan.flight_energy.clone(),
            operating_cost: plan.operating_cost,
        };
        self.fly(ctx, plan.to, &flight, &plan.service);
    }
}

fn affordable(drones: &[Drone], energy: &[f64]) -> bool {
    drones.iter().zip(energy).all(|(d, &e)| e <= d.current_energy + ENERGY_EPS)
}

/// Flies the shortest path from the leg's node to the destination, or
/// returns `None` when the direct-reach rule rejects it.
fn direct_phase(ctx: &Context<'_>, leg: &Leg) -> Option<Leg> {
    let path = ctx.tree.path_from(leg.node)?;
    let mut trial = leg.clone();
    for (i, pair) in path.windows(2).enumerate() {
        let (from, to) = (pair[0], pair[1]);
        let mut flight = ctx.flight(&trial.drones, from, to, trial.time);
        if i > 0 && ctx.config.direct_reach == DirectReachRule::SegmentWise && !affordable(&trial.drones, &flight.energy)
        {
            // Charge at the node just reached, then re-plan the departure.
            let targets: Option<Vec<f64>> = trial
                .drones
                .iter()
                .zip(&flight.energy)
                .map(|(d, &e)| {
                    if ctx.cooperative() {
                        cooperative_target(d, e, ctx.env.energy).ok()
                    } else {
                        (e <= d.battery_capacity).then_some(d.battery_capacity)
                    }
                })
                .collect();
            let service = ctx.service(&trial.drones, from, &targets?).ok()?;
            let last = trial.hops.last_mut().expect("charging after a hop");
            last.wait_time += service.wait_time;
            last.charge_time += service.charge_time;
            last.charging_cost += service.cost;
            for (p, q) in last.purchased_energy.iter_mut().zip(&service.purchased) {
                *p += q;
            }
            for (d, p) in trial.drones.iter_mut().zip(&service.purchased) {
                d.current_energy += p;
            }
            trial.time += service.node_time();
            trial.cost += service.cost;
            flight = ctx.flight(&trial.drones, from, to, trial.time);
        }
        if !affordable(&trial.drones, &flight.energy) {
            return None;
        }
        trial.evaluations += 1;
        let idle = NodeService::idle(trial.drones.len());
        trial.fly(ctx, to, &flight, &idle);
    }
    Some(trial)
}

/// Charging targets on arrival at `node`: full for non-cooperative swarms,
/// otherwise enough (plus margin) for the most demanding next leg each drone
/// could take from there.
fn arrival_targets(ctx: &Context<'_>, drones: &[Drone], node: usize, time: f64, excluded: &[bool], came_from: usize) -> Vec<f64> {
    if !ctx.cooperative() {
        return drones.iter().map(|d| d.battery_capacity).collect();
    }
    let mut need: Vec<Option<f64>> = vec![None; drones.len()];
    for adj in ctx.network().neighbors(node) {
        if excluded[adj.node] || adj.node == came_from {
            continue;
        }
        let f = ctx.flight(drones, node, adj.node, time);
        if f.energy.iter().zip(drones).all(|(&e, d)| e <= d.battery_capacity) {
            for (n, &e) in need.iter_mut().zip(&f.energy) {
                *n = Some(n.map_or(e, |v: f64| v.max(e)));
            }
        }
    }
    drones
        .iter()
        .zip(need)
        .map(|(d, n)| match n {
            Some(e) => cooperative_target(d, e, ctx.env.energy).unwrap_or(d.battery_capacity),
            None => d.battery_capacity,
        })
        .collect()
}

fn plan_hop(ctx: &Context<'_>, leg: &Leg, to: usize) -> Result<Option<HopPlan>> {
    let flight = ctx.flight(&leg.drones, leg.node, to, leg.time);
    if !affordable(&leg.drones, &flight.energy) {
        return Ok(None);
    }
    let mut landed = leg.drones.clone();
    for (d, &e) in landed.iter_mut().zip(&flight.energy) {
        d.current_energy = (d.current_energy - e).max(0.0);
    }
    let arrival = leg.time + flight.travel_time;
    let service = if to == ctx.dest {
        NodeService::idle(landed.len())
    } else {
        let targets = arrival_targets(ctx, &landed, to, arrival, &leg.visited, leg.node);
        ctx.service(&landed, to, &targets)?
    };
    let branching = ctx
        .network()
        .neighbors(to)
        .iter()
        .filter(|adj| !leg.visited[adj.node] && adj.node != leg.node)
        .count();
    Ok(Some(HopPlan {
        to,
        formation: flight.formation,
        travel_time: flight.travel_time,
        flight_energy: flight.energy,
        service,
        operating_cost: flight.operating_cost,
        branching,
        remaining_distance: ctx.tree.dist[to],
    }))
}

enum LegEnd {
    Arrived(Leg),
    Failed(Leg, String),
}

/// Candidate plans in node order with their values, best first.
fn greedy_candidates(ctx: &Context<'_>, leg: &mut Leg) -> Result<Vec<HopPlan>> {
    let mut plans = Vec::new();
    for adj in ctx.network().neighbors(leg.node) {
        if leg.visited[adj.node] {
            continue;
        }
        leg.evaluations += 1;
        if let Some(p) = plan_hop(ctx, leg, adj.node)? {
            plans.push(p);
        }
    }
    plans.sort_by_key(|p| p.to);
    let deltas: Vec<[f64; 4]> = plans.iter().map(HopPlan::deltas).collect();
    let remaining: Vec<f64> = plans.iter().map(|p| p.remaining_distance).collect();
    let values = node_values(&deltas, &remaining, &ctx.weights, ctx.config.progress_weight);
    let order = ranked(&values);
    let mut slots: Vec<Option<HopPlan>> = plans.into_iter().map(Some).collect();
    Ok(order.into_iter().map(|i| slots[i].take().expect("each index once")).collect())
}

fn run_leg(ctx: &Context<'_>, mut leg: Leg, may_split: bool) -> Result<Vec<LegEnd>> {
    loop {
        if leg.node == ctx.dest {
            return Ok(vec![LegEnd::Arrived(leg)]);
        }
        leg.evaluations += 1;
        if let Some(done) = direct_phase(ctx, &leg) {
            return Ok(vec![LegEnd::Arrived(done)]);
        }
        let plans = greedy_candidates(ctx, &mut leg)?;
        let Some(best) = plans.first() else {
            let at = ctx.network().node(leg.node).id;
            return Ok(vec![LegEnd::Failed(leg, format!("no reachable unvisited neighbour at node {at}"))]);
        };
        let n = leg.drones.len();
        let congested = (ctx.network().node(best.to).pad_count as usize) < n;
        if may_split && ctx.provider.swarm.techniques.behaviour == Behaviour::Dynamic && n >= 2 && plans.len() >= 2 && congested
        {
            let cut = n.div_ceil(2);
            let mut a = leg.clone();
            let mut b = leg.clone();
            a.drones.truncate(cut);
            a.initial.truncate(cut);
            b.drones.drain(..cut);
            b.initial.drain(..cut);
            b.evaluations = 0;
            let mut ends = Vec::new();
            for (mut part, to) in [(a, best.to), (b, plans[1].to)] {
                part.evaluations += 1;
                match plan_hop(ctx, &part, to)? {
                    Some(plan) => {
                        part.apply(ctx, &plan);
                        ends.extend(run_leg(ctx, part, false)?);
                    }
                    None => ends.push(LegEnd::Failed(part, "sub-swarm cannot reach its first node".into())),
                }
            }
            return Ok(ends);
        }
        let best = best.clone();
        leg.apply(ctx, &best);
    }
}

fn build_context<'a>(
    provider: &'a Provider,
    request: &DeliveryRequest,
    env: Environment<'a>,
    config: &'a CompositionConfig,
) -> Result<(Context<'a>, usize)> {
    let source = env.network.require_index(request.source)?;
    let dest = env.network.require_index(request.destination)?;
    let tree = env.network.shortest_path_tree(dest);
    Ok((Context { env, config, provider, weights: request.weights, dest, tree }, source))
}

fn start_leg(ctx: &Context<'_>, drones: Vec<Drone>, node: usize, time: f64) -> Leg {
    let mut visited = vec![false; ctx.network().node_count()];
    visited[node] = true;
    Leg {
        initial: drones.clone(),
        drones,
        node,
        time,
        visited,
        path: vec![node],
        hops: Vec::new(),
        energy: 0.0,
        cost: 0.0,
        evaluations: 0,
    }
}

/// Whether `state` can finish along the shortest path under the configured
/// direct-reach rule. Unreachable destinations give `false`.
pub fn can_reach_directly(
    provider: &Provider,
    state: &SwarmState,
    request: &DeliveryRequest,
    env: Environment<'_>,
    config: &CompositionConfig,
) -> Result<bool> {
    let (ctx, _) = build_context(provider, request, env, config)?;
    let node = env.network.require_index(state.node)?;
    if state.drones.is_empty() {
        return Err(Error::InvalidInput("swarm has no drones".into()));
    }
    Ok(direct_phase(&ctx, &start_leg(&ctx, state.drones.clone(), node, state.time)).is_some())
}

/// Composes a delivery for `provider`. Failing to reach the destination is a
/// normal outcome (`success == false`); invalid inputs are errors.
pub fn compose(
    provider: &Provider,
    request: &DeliveryRequest,
    env: Environment<'_>,
    config: &CompositionConfig,
) -> Result<CompositionOutcome> {
    request.validate()?;
    let loaded = provider.swarm.load_packages(&request.packages)?;
    let (ctx, source) = build_context(provider, request, env, config)?;
    let ends = run_leg(&ctx, start_leg(&ctx, loaded.drones, source, 0.0), true)?;

    let mut routes = Vec::new();
    let mut failure = None;
    let (mut energy, mut cost, mut evaluations) = (0.0, 0.0, 0u64);
    let mut arrivals = Vec::new();
    for end in &ends {
        let (leg, arrived) = match end {
            LegEnd::Arrived(leg) => (leg, true),
            LegEnd::Failed(leg, why) => {
                failure.get_or_insert_with(|| why.clone());
                (leg, false)
            }
        };
        energy += leg.energy;
        cost += leg.cost;
        evaluations += leg.evaluations;
        arrivals.push(leg.time);
        routes.push(leg.route(&ctx, arrived));
    }
    let latest = arrivals.iter().copied().fold(0.0, f64::max);
    let earliest = arrivals.iter().copied().fold(f64::INFINITY, f64::min);
    let arrival_spread = latest - earliest;
    if failure.is_none() && arrival_spread > config.arrival_window {
        failure = Some(format!("sub-swarm arrivals {arrival_spread:.0} s apart"));
    }
    let pqos = QosVector {
        delivery_time: latest,
        energy,
        cost,
        execution_time: execution_time_proxy(evaluations, &provider.swarm.techniques, env.energy),
    };
    Ok(CompositionOutcome {
        provider_id: provider.id,
        success: failure.is_none(),
        routes,
        pqos,
        evaluations,
        arrival_spread,
        failure,
    })
}
