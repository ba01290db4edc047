//! Fixed-step simulation loop: field → sensors → delivery over the chosen
//! topology → front detection → motion fit → forecasts → control → energy
//! accounting.
//!
//! A run owns all of its state and draws every random number from one
//! seeded ChaCha stream in a fixed order (placement jitter by node id, then
//! per-sample noise by tick and node id), so a scenario reproduces exactly.

use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cloud_field::{CloudField, Point2};
use crate::control::{
    apply_actions, evaluate, plan_actions, ControlAction, ControlError, ControlPolicy, PlanContext, PlantOutlook,
    RampReport,
};
use crate::energy_balance::{
    delta_energy, power_components, pv_power, EnergyError, Load, PowerSeries, PvPlant, TemperatureProfile,
};
use crate::invariant::{ensure, InvariantViolation};
use crate::nowcast::{
    detect_front, estimate_motion, predict_arrival, spread_aspect, FrontEvent, MotionEstimate, NowcastError,
    RampForecast,
};
use crate::sensor_mesh::{
    accumulate_traffic, build_direct_topology, build_hierarchical_topology, central_node_traffic, HierarchySpec, Hop,
    Measurement, Readout, SensorNode, Topology, TopologyError, TopologyKind, TrafficMatrix,
};

const SECONDS_PER_DAY: f64 = 86_400.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingConfig {
    #[serde(default)]
    pub readout: Readout,
    /// Standard deviation of additive irradiance noise, W/m².
    #[serde(default)]
    pub noise_std: f64,
    /// Half-width of the uniform jitter applied to sensor coordinates, m.
    #[serde(default)]
    pub position_jitter: f64,
    /// Data volume of one measurement message, abstract units.
    #[serde(default = "one")]
    pub message_volume: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            readout: Readout::default(),
            noise_std: 0.0,
            position_jitter: 0.0,
            message_volume: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyConfig {
    #[serde(default)]
    pub kind: TopologyKind,
    /// Sensor that runs the nowcast and controls the loads. Defaults to the
    /// sensor nearest the first plant.
    #[serde(default)]
    pub controller: Option<u32>,
    /// Access-point/router layout for the hierarchical variant. Defaults to
    /// a single unlimited access point at the sensor centroid.
    #[serde(default)]
    pub hierarchy: Option<HierarchySpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NowcastConfig {
    /// Detection threshold θ on normalized irradiance, in (0, 1).
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    /// Front events required before a motion fit is attempted (≥ 3).
    #[serde(default = "default_min_events")]
    pub min_events: usize,
    /// Smallest acceptable spread of the detecting sensors across the
    /// front, see [`spread_aspect`]; fits on thinner layouts are postponed.
    #[serde(default = "default_min_aspect")]
    pub min_aspect: f64,
}

fn default_threshold() -> f64 {
    0.2
}

fn default_min_events() -> usize {
    3
}

fn default_min_aspect() -> f64 {
    0.1
}

impl Default for NowcastConfig {
    fn default() -> Self {
        Self {
            threshold: default_threshold(),
            min_events: default_min_events(),
            min_aspect: default_min_aspect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlConfig {
    #[serde(default = "yes")]
    pub enabled: bool,
    #[serde(default = "default_lead")]
    pub lead_time: f64,
    #[serde(default = "default_spread")]
    pub spread: f64,
    #[serde(default = "default_gate")]
    pub confidence_gate: f64,
}

fn yes() -> bool {
    true
}
fn default_lead() -> f64 {
    ControlPolicy::default().lead_time
}
fn default_spread() -> f64 {
    ControlPolicy::default().spread
}
fn default_gate() -> f64 {
    ControlPolicy::default().confidence_gate
}

impl Default for ControlConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            lead_time: default_lead(),
            spread: default_spread(),
            confidence_gate: default_gate(),
        }
    }
}

impl ControlConfig {
    pub fn policy(&self) -> ControlPolicy {
        ControlPolicy {
            lead_time: self.lead_time,
            spread: self.spread,
            confidence_gate: self.confidence_gate,
        }
    }
}

/// Everything a run needs. Disc centers in `field` are positions at
/// `start_time`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    /// Seconds of day at the first tick.
    pub start_time: f64,
    /// Seconds.
    pub duration: f64,
    /// Seconds; must divide every sensor's sample_period.
    pub dt: f64,
    #[serde(default)]
    pub seed: u64,
    pub field: CloudField,
    pub sensors: Vec<SensorNode>,
    #[serde(default)]
    pub sampling: SamplingConfig,
    #[serde(default)]
    pub topology: TopologyConfig,
    #[serde(default)]
    pub plants: Vec<PvPlant>,
    #[serde(default)]
    pub loads: Vec<Load>,
    #[serde(default)]
    pub nowcast: NowcastConfig,
    #[serde(default)]
    pub control: ControlConfig,
    #[serde(default)]
    pub temperature_profile: TemperatureProfile,
}

fn unique_ids(ids: impl Iterator<Item = u32>, field: &str) -> Result<(), InvariantViolation> {
    let mut seen = BTreeSet::new();
    for (i, id) in ids.enumerate() {
        ensure(
            seen.insert(id),
            &format!("{field}[{i}].id"),
            format!("duplicate id {id}"),
        )?;
    }
    Ok(())
}

impl Scenario {
    pub fn validate(&self) -> Result<(), InvariantViolation> {
        ensure(
            self.duration.is_finite() && self.duration > 0.0,
            "duration",
            "must be > 0",
        )?;
        ensure(self.dt.is_finite() && self.dt > 0.0, "dt", "must be > 0")?;
        ensure(self.dt <= self.duration, "dt", "must not exceed duration")?;
        ensure(
            self.start_time.is_finite() && self.start_time >= 0.0,
            "start_time",
            "must be ≥ 0",
        )?;
        ensure(
            self.start_time + self.duration <= SECONDS_PER_DAY,
            "duration",
            "simulation must end within the day",
        )?;
        self.field.validate().map_err(|e| e.within("field"))?;

        unique_ids(self.sensors.iter().map(|s| s.id), "sensors")?;
        for (i, s) in self.sensors.iter().enumerate() {
            s.validate().map_err(|e| e.within(format!("sensors[{i}]")))?;
            let ratio = s.sample_period / self.dt;
            ensure(
                (ratio - ratio.round()).abs() <= 1e-9 * ratio.max(1.0) && ratio.round() >= 1.0,
                "dt",
                format!("must divide sensors[{i}].sample_period ({})", s.sample_period),
            )?;
        }
        unique_ids(self.plants.iter().map(|p| p.id), "plants")?;
        for (i, p) in self.plants.iter().enumerate() {
            p.validate().map_err(|e| e.within(format!("plants[{i}]")))?;
        }
        unique_ids(self.loads.iter().map(|l| l.id), "loads")?;
        for (i, l) in self.loads.iter().enumerate() {
            l.validate().map_err(|e| e.within(format!("loads[{i}]")))?;
        }

        let s = &self.sampling;
        ensure(
            s.noise_std.is_finite() && s.noise_std >= 0.0,
            "sampling.noise_std",
            "must be ≥ 0",
        )?;
        ensure(
            s.position_jitter.is_finite() && s.position_jitter >= 0.0,
            "sampling.position_jitter",
            "must be ≥ 0",
        )?;
        ensure(
            s.message_volume.is_finite() && s.message_volume > 0.0,
            "sampling.message_volume",
            "must be > 0",
        )?;

        if let Some(c) = self.topology.controller {
            ensure(
                self.sensors.iter().any(|s| s.id == c),
                "topology.controller",
                format!("no sensor with id {c}"),
            )?;
        }
        if let Some(h) = &self.topology.hierarchy {
            h.validate().map_err(|e| e.within("topology.hierarchy"))?;
        }

        let n = &self.nowcast;
        ensure(
            n.threshold > 0.0 && n.threshold < 1.0,
            "nowcast.threshold",
            "must lie in (0, 1)",
        )?;
        ensure(n.min_events >= 3, "nowcast.min_events", "must be ≥ 3")?;
        ensure(
            (0.0..=1.0).contains(&n.min_aspect),
            "nowcast.min_aspect",
            "must lie in [0, 1]",
        )?;
        self.control.policy().validate().map_err(|e| e.within("control"))?;
        self.temperature_profile
            .validate()
            .map_err(|e| e.within("temperature_profile"))
    }

    /// Number of ticks after the first; series hold `steps() + 1` samples.
    pub fn steps(&self) -> usize {
        (self.duration / self.dt + 1e-9).floor() as usize
    }

    pub fn with_topology(&self, kind: TopologyKind) -> Scenario {
        let mut s = self.clone();
        s.topology.kind = kind;
        s
    }

    pub fn with_control(&self, enabled: bool) -> Scenario {
        let mut s = self.clone();
        s.control.enabled = enabled;
        s
    }

    /// The configured hierarchy, or a star around the sensor centroid.
    pub fn hierarchy_or_default(&self) -> HierarchySpec {
        if let Some(h) = &self.topology.hierarchy {
            return h.clone();
        }
        let n = self.sensors.len().max(1) as f64;
        let c = self
            .sensors
            .iter()
            .fold(Point2::ORIGIN, |acc, s| acc + s.position * (1.0 / n));
        HierarchySpec::star(c)
    }

    fn controller_id(&self, sensors: &[SensorNode]) -> Option<u32> {
        if let Some(c) = self.topology.controller {
            return Some(c);
        }
        let anchor = self.plants.first().map(|p| p.position);
        let mut ordered: Vec<&SensorNode> = sensors.iter().collect();
        ordered.sort_by_key(|s| s.id);
        match anchor {
            Some(a) => ordered
                .into_iter()
                .min_by(|x, y| x.position.distance(a).total_cmp(&y.position.distance(a)))
                .map(|s| s.id),
            None => ordered.first().map(|s| s.id),
        }
    }
}

/// Error raised inside the loop, with the step time attached.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    Invalid(#[from] InvariantViolation),
    #[error("t={t}: {source}")]
    Topology { t: f64, source: TopologyError },
    #[error("t={t}: {source}")]
    Control { t: f64, source: ControlError },
    #[error("t={t}: {source}")]
    Energy { t: f64, source: EnergyError },
}

/// A forecast together with what the controller knew when issuing it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IssuedForecast {
    pub forecast: RampForecast,
    pub t_issue: f64,
    /// Latest sampling instant among the contributing measurements.
    pub latest_measurement: f64,
    /// Latest delivery instant among the contributing measurements.
    pub latest_delivery: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlantSummary {
    pub plant_id: u32,
    /// k·S·∫I dt over the run, J.
    pub delta_energy: f64,
    /// Same integral for a cloudless sky, J.
    pub clear_sky_delta_energy: f64,
    /// Largest `1 − P/P_clear` over the run.
    pub max_production_drop: f64,
    /// Largest `P_clear − P`, W.
    pub max_production_drop_watts: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrafficSummary {
    pub controller: Option<u32>,
    pub matrix: TrafficMatrix,
    /// Volume relayed by each vertex on behalf of others.
    pub relayed: BTreeMap<Hop, f64>,
    pub central_node_traffic: f64,
    pub total_relayed: f64,
    /// Hops from each sensor to the controller.
    pub delivery_hops: BTreeMap<u32, usize>,
    pub deliveries: usize,
    pub mean_delay_hops: f64,
    pub max_delay_hops: usize,
}

impl TrafficSummary {
    /// The most loaded relay and its volume.
    pub fn busiest_relay(&self) -> Option<(Hop, f64)> {
        self.relayed
            .iter()
            .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(a.0)))
            .map(|(h, v)| (*h, *v))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub topology: TopologyKind,
    pub control_enabled: bool,
    pub pv: PowerSeries,
    pub load: PowerSeries,
    /// Net demand without control actions.
    pub net: PowerSeries,
    /// Net demand with the actions applied (equal to `net` when control is off).
    pub net_controlled: PowerSeries,
    pub events: Vec<FrontEvent>,
    pub motion: Option<MotionEstimate>,
    pub forecasts: Vec<IssuedForecast>,
    pub actions: Vec<ControlAction>,
    pub traffic: TrafficSummary,
    pub plants: Vec<PlantSummary>,
    pub ramp: RampReport,
    pub warnings: Vec<String>,
}

pub struct RunPair {
    pub uncontrolled: RunResult,
    pub controlled: RunResult,
}

struct Delivered {
    event: FrontEvent,
    latest_measurement: f64,
    latest_delivery: f64,
}

fn jittered_sensors(scenario: &Scenario, rng: &mut ChaCha8Rng) -> Vec<SensorNode> {
    let mut sensors = scenario.sensors.clone();
    sensors.sort_by_key(|s| s.id);
    let j = scenario.sampling.position_jitter;
    if j > 0.0 {
        let dist = Uniform::new_inclusive(-j, j).expect("finite jitter");
        for s in &mut sensors {
            s.position.x += dist.sample(rng);
            s.position.y += dist.sample(rng);
        }
    }
    sensors
}

/// Runs one scenario to completion.
pub fn run(scenario: &Scenario) -> Result<RunResult, SimError> {
    scenario.validate()?;
    let start = scenario.start_time;
    let dt = scenario.dt;
    let steps = scenario.steps();
    let samples = steps + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let noise = (scenario.sampling.noise_std > 0.0)
        .then(|| Normal::new(0.0, scenario.sampling.noise_std).expect("finite noise"));

    let sensors = jittered_sensors(scenario, &mut rng);
    let topo_err = |source| SimError::Topology { t: start, source };
    let topology: Topology = match scenario.topology.kind {
        TopologyKind::DirectMesh => build_direct_topology(&sensors),
        TopologyKind::Hierarchical => build_hierarchical_topology(&sensors, &scenario.hierarchy_or_default()),
    }
    .map_err(topo_err)?;
    let controller = scenario.controller_id(&sensors);

    let mut delivery_hops = BTreeMap::new();
    if let Some(c) = controller {
        for s in &sensors {
            let hops = if s.id == c {
                0
            } else {
                topology.hop_count(s.id, c).map_err(topo_err)?
            };
            delivery_hops.insert(s.id, hops);
        }
    }
    let strides: BTreeMap<u32, usize> = sensors
        .iter()
        .map(|s| (s.id, (s.sample_period / dt).round() as usize))
        .collect();
    let positions: BTreeMap<u32, Point2> = sensors.iter().map(|s| (s.id, s.position)).collect();
    let sample_period = sensors.iter().map(|s| s.sample_period).fold(0.0, f64::max);

    let site_clear = scenario.field.site_clear_sky();
    let temp = &scenario.temperature_profile;
    let threshold = scenario.nowcast.threshold;
    let policy = scenario.control.policy();

    let mut traffic = TrafficMatrix::zeros(sensors.iter().map(|s| s.id)).expect("unique ids validated");
    let mut in_flight: BTreeMap<usize, Vec<Measurement>> = BTreeMap::new();
    let mut history: BTreeMap<u32, Vec<(Measurement, f64)>> = BTreeMap::new();
    let mut detected: BTreeMap<u32, Delivered> = BTreeMap::new();
    let mut event_log = Vec::new();
    let mut motion = None;
    let mut forecasts = Vec::new();
    let mut actions = Vec::new();
    let mut warnings = Vec::new();
    let mut pending_plants: BTreeSet<u32> = scenario.plants.iter().map(|p| p.id).collect();
    let mut shifted: BTreeMap<u32, f64> = BTreeMap::new();
    let mut deliveries = 0usize;
    let mut delay_sum = 0usize;

    let mut pv = Vec::with_capacity(samples);
    let mut load = Vec::with_capacity(samples);
    let mut plant_irradiance: Vec<Vec<f64>> = vec![Vec::with_capacity(samples); scenario.plants.len()];
    let mut plant_clear: Vec<Vec<f64>> = vec![Vec::with_capacity(samples); scenario.plants.len()];

    for k in 0..samples {
        let t = start + k as f64 * dt;
        let field: CloudField = scenario.field.advect(k as f64 * dt);

        let (l, p) = power_components(&scenario.loads, &scenario.plants, &field, temp, t);
        load.push(l);
        pv.push(p);
        for (i, plant) in scenario.plants.iter().enumerate() {
            plant_irradiance[i].push(field.irradiance_at(plant.position, t));
            plant_clear[i].push(site_clear.irradiance(t));
        }

        let Some(controller) = controller else { continue };

        for s in &sensors {
            if k % strides[&s.id] != 0 {
                continue;
            }
            let mut m = s.sample(&field, t, scenario.sampling.readout, temp);
            if let Some(n) = &noise {
                m.irradiance = (m.irradiance + n.sample(&mut rng)).max(0.0);
            }
            if s.id != controller {
                traffic
                    .add(s.id, controller, scenario.sampling.message_volume)
                    .expect("sensor ids are in the matrix");
            }
            let hops = delivery_hops[&s.id];
            deliveries += 1;
            delay_sum += hops;
            in_flight.entry(k + hops).or_default().push(m);
        }

        let mut fresh = false;
        for m in in_flight.remove(&k).unwrap_or_default() {
            history.entry(m.node_id).or_default().push((m, t));
            if detected.contains_key(&m.node_id) {
                continue;
            }
            let readings: Vec<Measurement> = history[&m.node_id].iter().map(|(m, _)| *m).collect();
            if let Some(event) = detect_front(&readings, positions[&m.node_id], &site_clear, threshold) {
                detected.insert(
                    m.node_id,
                    Delivered {
                        event,
                        latest_measurement: m.t,
                        latest_delivery: t,
                    },
                );
                event_log.push(event);
                fresh = true;
            }
        }

        if !fresh || pending_plants.is_empty() || detected.len() < scenario.nowcast.min_events {
            continue;
        }
        let events: Vec<FrontEvent> = detected.values().map(|d| d.event).collect();
        if spread_aspect(&events) < scenario.nowcast.min_aspect {
            continue;
        }
        let estimate = match estimate_motion(&events) {
            Ok(e) => e,
            Err(NowcastError::DegenerateGeometry(_)) | Err(NowcastError::TooFewEvents(_)) => continue,
            Err(e) => unreachable!("estimate_motion does not return {e}"),
        };
        motion = Some(estimate);
        let reference = detected
            .values()
            .map(|d| d.event)
            .max_by(|a, b| a.t_cross.total_cmp(&b.t_cross).then(b.node_id.cmp(&a.node_id)))
            .expect("at least min_events detections");
        let latest_measurement = detected.values().map(|d| d.latest_measurement).fold(f64::MIN, f64::max);
        let latest_delivery = detected.values().map(|d| d.latest_delivery).fold(f64::MIN, f64::max);

        let mut issued = Vec::new();
        for plant in &scenario.plants {
            if !pending_plants.remove(&plant.id) {
                continue;
            }
            match predict_arrival(&estimate, &reference, plant.id, plant.position, sample_period) {
                Ok(f) if f.t_arrival >= t => {
                    issued.push(f);
                    forecasts.push(IssuedForecast {
                        forecast: f,
                        t_issue: t,
                        latest_measurement,
                        latest_delivery,
                    });
                }
                Ok(f) => warnings.push(format!(
                    "t={t}: front reached plant {} at t={} before the forecast could be issued",
                    plant.id, f.t_arrival
                )),
                Err(e) => warnings.push(format!("t={t}: {e}")),
            }
        }

        if scenario.control.enabled && !issued.is_empty() {
            let available: Vec<Load> = scenario
                .loads
                .iter()
                .map(|l| {
                    let mut l = l.clone();
                    l.deferrable_power = (l.deferrable_power - shifted.get(&l.id).copied().unwrap_or(0.0)).max(0.0);
                    l
                })
                .collect();
            let outlooks: Vec<PlantOutlook> = scenario
                .plants
                .iter()
                .map(|p| PlantOutlook {
                    plant_id: p.id,
                    pre_cloud_power: pv_power(p, site_clear.irradiance(t)),
                })
                .collect();
            let ctx = PlanContext {
                t0: start,
                step: dt,
                samples,
                issued_at: t,
            };
            match plan_actions(&issued, &available, &outlooks, &policy, &ctx) {
                Ok(plan) => {
                    for a in &plan {
                        if a.power_delta > 0.0 {
                            let peak = shifted.entry(a.load_id).or_default();
                            *peak = peak.max(a.power_delta);
                        }
                    }
                    if plan.is_empty() {
                        warnings.push(format!("t={t}: forecasts issued too late or without room to act"));
                    }
                    actions.extend(plan);
                }
                Err(ControlError::NoCapacity) => {
                    warnings.push(format!("t={t}: {}", ControlError::NoCapacity));
                }
                Err(source) => return Err(SimError::Control { t, source }),
            }
        }
    }

    let end = start + steps as f64 * dt;
    let pv = PowerSeries::new(start, dt, pv);
    let load = PowerSeries::new(start, dt, load);
    let net = PowerSeries::new(
        start,
        dt,
        load.values().iter().zip(pv.values()).map(|(l, p)| l - p).collect(),
    );
    let net_controlled = apply_actions(&net, &actions).map_err(|source| SimError::Control { t: end, source })?;
    let ramp = evaluate(&net_controlled, &net).map_err(|source| SimError::Control { t: end, source })?;

    let relayed = accumulate_traffic(&topology, &traffic).map_err(|source| SimError::Topology { t: end, source })?;
    let total_relayed = relayed.values().sum();
    let traffic = TrafficSummary {
        controller,
        central_node_traffic: central_node_traffic(&traffic),
        matrix: traffic,
        relayed,
        total_relayed,
        max_delay_hops: delivery_hops.values().copied().max().unwrap_or(0),
        delivery_hops,
        deliveries,
        mean_delay_hops: if deliveries > 0 {
            delay_sum as f64 / deliveries as f64
        } else {
            0.0
        },
    };

    let mut plants = Vec::with_capacity(scenario.plants.len());
    for (i, plant) in scenario.plants.iter().enumerate() {
        let energy_err = |source| SimError::Energy { t: end, source };
        let actual = PowerSeries::new(start, dt, std::mem::take(&mut plant_irradiance[i]));
        let clear = PowerSeries::new(start, dt, std::mem::take(&mut plant_clear[i]));
        let (mut drop, mut drop_w) = (0.0f64, 0.0f64);
        for (&ia, &ic) in actual.values().iter().zip(clear.values()) {
            let pc = pv_power(plant, ic);
            if pc > 0.0 {
                let d = pc - pv_power(plant, ia);
                drop = drop.max(d / pc);
                drop_w = drop_w.max(d);
            }
        }
        plants.push(PlantSummary {
            plant_id: plant.id,
            delta_energy: delta_energy(plant, &actual, start, end).map_err(energy_err)?,
            clear_sky_delta_energy: delta_energy(plant, &clear, start, end).map_err(energy_err)?,
            max_production_drop: drop,
            max_production_drop_watts: drop_w,
        });
    }

    Ok(RunResult {
        topology: scenario.topology.kind,
        control_enabled: scenario.control.enabled,
        pv,
        load,
        net,
        net_controlled,
        events: event_log,
        motion,
        forecasts,
        actions,
        traffic,
        plants,
        ramp,
        warnings,
    })
}

/// Two runs of the same weather and sampling, without and with control.
pub fn run_pair(scenario: &Scenario) -> Result<RunPair, SimError> {
    Ok(RunPair {
        uncontrolled: run(&scenario.with_control(false))?,
        controlled: run(&scenario.with_control(true))?,
    })
}

impl RunPair {
    /// Ramp comparison of the controlled net series against the uncontrolled one.
    pub fn report(&self) -> Result<RampReport, ControlError> {
        evaluate(&self.controlled.net_controlled, &self.uncontrolled.net_controlled)
    }
}
