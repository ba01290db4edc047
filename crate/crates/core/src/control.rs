//! Local smart-appliance policy: shift deferrable consumption around a
//! forecast PV dropout so the net-power step becomes a ramp.
//!
//! For a forecast drop of `D` watts arriving at grid tick `T`, every
//! participating load is driven through the same shape (scaled by its share
//! of `D`):
//!
//! ```text
//!   +D ┤        ╱‾‾╲
//!      │      ╱     ╲_           pre-shift ramp over lead_time, hold,
//!    0 ┼────╱         ‾╲____╱‾   two half-steps down at T, T+1,
//!      │                 ╲╱      then a triangular payback over 2·spread
//! ```
//!
//! Consumption is brought forward before the front, so the net rises
//! gradually; when PV falls the pre-shifted demand is released in two half
//! steps, which keeps the largest step at or below the unshaped one even if
//! the front lands one tick off. The advanced energy is paid back afterwards,
//! so each load's actions sum to zero energy.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::energy_balance::{ramp_metric, Load, PowerSeries};
use crate::invariant::{ensure, InvariantViolation};
use crate::nowcast::RampForecast;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControlError {
    #[error("no deferrable load available for the forecast ramps")]
    NoCapacity,
    #[error("action for load {load_id} at t={t_start} (duration {duration}) lies outside the series")]
    OutOfRange { load_id: u32, t_start: f64, duration: f64 },
    #[error("series grids differ")]
    GridMismatch,
    #[error("series too short to evaluate ramps")]
    TooShort,
}

/// A constant power adjustment of one load over `[t_start, t_start + duration)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlAction {
    pub load_id: u32,
    pub t_start: f64,
    pub duration: f64,
    /// W; positive brings consumption forward, negative holds it back.
    pub power_delta: f64,
}

impl ControlAction {
    pub fn energy(&self) -> f64 {
        self.power_delta * self.duration
    }
}

fn default_gate() -> f64 {
    0.5
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlPolicy {
    /// How long before the predicted arrival the pre-shift starts, s.
    pub lead_time: f64,
    /// Half-width of the payback window after the front, s.
    pub spread: f64,
    /// Forecasts below this confidence are ignored.
    #[serde(default = "default_gate")]
    pub confidence_gate: f64,
}

impl Default for ControlPolicy {
    fn default() -> Self {
        Self {
            lead_time: 120.0,
            spread: 300.0,
            confidence_gate: default_gate(),
        }
    }
}

impl ControlPolicy {
    pub fn validate(&self) -> Result<(), InvariantViolation> {
        ensure(
            self.lead_time.is_finite() && self.lead_time >= 0.0,
            "lead_time",
            "must be ≥ 0",
        )?;
        ensure(self.spread.is_finite() && self.spread > 0.0, "spread", "must be > 0")?;
        ensure(
            (0.0..=1.0).contains(&self.confidence_gate),
            "confidence_gate",
            "must lie in [0, 1]",
        )
    }
}

/// Output a plant would deliver without the forecast cloud.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantOutlook {
    pub plant_id: u32,
    pub pre_cloud_power: f64,
}

/// Simulation grid and the instant the plan is made.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanContext {
    pub t0: f64,
    pub step: f64,
    /// Number of grid samples; the horizon ends at `t0 + samples·step`.
    pub samples: usize,
    /// Actions never start before this instant.
    pub issued_at: f64,
}

impl PlanContext {
    fn tick_at_or_after(&self, t: f64) -> i64 {
        ((t - self.t0) / self.step - 1e-9).ceil() as i64
    }

    fn time(&self, k: i64) -> f64 {
        self.t0 + k as f64 * self.step
    }
}

/// Per-tick pre-shift values (before any load split) and payback weights.
struct Shape {
    start: i64,
    advance: Vec<f64>,
    payback_start: i64,
    payback_weights: Vec<f64>,
}

impl Shape {
    fn span(&self) -> i64 {
        self.payback_start + self.payback_weights.len() as i64 - self.start
    }
}

fn shape_for(arrival: f64, policy: &ControlPolicy, ctx: &PlanContext) -> Option<Shape> {
    let step = ctx.step;
    // Round to the nearer tick so a front landing within half a step either
    // side still meets the half-step release.
    let drop = ((arrival - ctx.t0) / step - 0.5).ceil() as i64;
    let hold = drop - 1;
    let issue = ctx.tick_at_or_after(ctx.issued_at).max(0);
    if hold < issue {
        return None;
    }
    let wanted = ((policy.lead_time / step).round() as i64).max(0);
    let ramp = wanted.min(hold - issue);
    let start = hold - ramp;

    let mut advance: Vec<f64> = (1..=ramp).map(|j| j as f64 / ramp as f64).collect();
    advance.push(1.0);
    advance.push(0.5);

    let payback_start = drop + 1;
    let last = ctx.samples as i64 - 1;
    let full = ((2.0 * policy.spread / step).round() as i64).max(2);
    let width = full.min(last - payback_start + 2);
    if width < 2 {
        return None;
    }
    let payback_weights = (1..width).map(|i| i.min(width - i) as f64).collect();
    Some(Shape {
        start,
        advance,
        payback_start,
        payback_weights,
    })
}

/// Greedy ramp shaper. Forecasts are handled in arrival order; each takes
/// `min(remaining shiftable power, depth · pre-cloud power)` from the loads
/// whose deferrable window covers the whole shift, split pro rata.
pub fn plan_actions(
    forecasts: &[RampForecast],
    loads: &[Load],
    plants: &[PlantOutlook],
    policy: &ControlPolicy,
    ctx: &PlanContext,
) -> Result<Vec<ControlAction>, ControlError> {
    let mut ordered: Vec<&RampForecast> = forecasts
        .iter()
        .filter(|f| f.confidence >= policy.confidence_gate)
        .collect();
    ordered.sort_by(|a, b| a.t_arrival.total_cmp(&b.t_arrival).then(a.target_id.cmp(&b.target_id)));

    let mut remaining: BTreeMap<u32, f64> = loads.iter().map(|l| (l.id, l.deferrable_power)).collect();
    let mut actions = Vec::new();
    let mut starved = false;

    for forecast in ordered {
        let Some(outlook) = plants.iter().find(|p| p.plant_id == forecast.target_id) else {
            continue;
        };
        let wanted = forecast.depth * outlook.pre_cloud_power;
        if wanted <= 0.0 {
            continue;
        }
        let Some(shape) = shape_for(forecast.t_arrival, policy, ctx) else {
            continue;
        };
        let span = shape.span() as f64 * ctx.step;
        let eligible: Vec<&Load> = loads
            .iter()
            .filter(|l| remaining[&l.id] > 0.0 && l.deferrable_window >= span)
            .collect();
        let capacity: f64 = eligible.iter().map(|l| remaining[&l.id]).sum();
        if capacity <= 0.0 {
            starved = true;
            continue;
        }
        let shifted = capacity.min(wanted);
        let weight_sum: f64 = shape.payback_weights.iter().sum();
        for load in eligible {
            let share = shifted * remaining[&load.id] / capacity;
            *remaining.get_mut(&load.id).expect("known load") -= share;
            let mut advanced = 0.0;
            for (k, frac) in shape.advance.iter().enumerate() {
                let delta = share * frac;
                advanced += delta * ctx.step;
                actions.push(ControlAction {
                    load_id: load.id,
                    t_start: ctx.time(shape.start + k as i64),
                    duration: ctx.step,
                    power_delta: delta,
                });
            }
            let peak = advanced / (ctx.step * weight_sum);
            for (k, w) in shape.payback_weights.iter().enumerate() {
                actions.push(ControlAction {
                    load_id: load.id,
                    t_start: ctx.time(shape.payback_start + k as i64),
                    duration: ctx.step,
                    power_delta: -peak * w,
                });
            }
        }
    }

    if actions.is_empty() && starved {
        return Err(ControlError::NoCapacity);
    }
    Ok(actions)
}

/// `(Σ power_delta·duration, Σ |power_delta·duration|)` per load.
pub fn energy_by_load(actions: &[ControlAction]) -> BTreeMap<u32, (f64, f64)> {
    let mut out: BTreeMap<u32, (f64, f64)> = BTreeMap::new();
    for a in actions {
        let e = out.entry(a.load_id).or_default();
        e.0 += a.energy();
        e.1 += a.energy().abs();
    }
    out
}

/// Adds each action's delta to the samples inside its interval.
pub fn apply_actions(series: &PowerSeries, actions: &[ControlAction]) -> Result<PowerSeries, ControlError> {
    let mut out = series.clone();
    let n = series.len() as i64;
    let dt = series.dt();
    for a in actions {
        let first = ((a.t_start - series.t0()) / dt - 1e-9).ceil() as i64;
        let end = ((a.t_start + a.duration - series.t0()) / dt - 1e-9).ceil() as i64;
        if a.t_start < series.t0() - 1e-9 * dt || end > n || first < 0 {
            return Err(ControlError::OutOfRange {
                load_id: a.load_id,
                t_start: a.t_start,
                duration: a.duration,
            });
        }
        for v in &mut out.values_mut()[first as usize..end as usize] {
            *v += a.power_delta;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RampReport {
    /// W/s.
    pub ramp_controlled: f64,
    /// W/s.
    pub ramp_uncontrolled: f64,
    pub reduction_fraction: f64,
}

pub fn evaluate(controlled: &PowerSeries, uncontrolled: &PowerSeries) -> Result<RampReport, ControlError> {
    if !controlled.same_grid(uncontrolled) {
        return Err(ControlError::GridMismatch);
    }
    let ramp_controlled = ramp_metric(controlled).map_err(|_| ControlError::TooShort)?;
    let ramp_uncontrolled = ramp_metric(uncontrolled).map_err(|_| ControlError::TooShort)?;
    let reduction_fraction = if ramp_uncontrolled > 0.0 {
        1.0 - ramp_controlled / ramp_uncontrolled
    } else {
        0.0
    };
    Ok(RampReport {
        ramp_controlled,
        ramp_uncontrolled,
        reduction_fraction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud_field::Point2;

    fn shiftable(id: u32, power: f64) -> Load {
        Load {
            id,
            position: Point2::ORIGIN,
            base_power: power * 2.0,
            lighting_coeff: 0.0,
            hvac_coeff: 0.0,
            t_setpoint: 21.0,
            deferrable_power: power,
            deferrable_window: 7200.0,
        }
    }

    fn ctx() -> PlanContext {
        PlanContext {
            t0: 0.0,
            step: 1.0,
            samples: 3601,
            issued_at: 0.0,
        }
    }

    fn forecast(depth: f64, confidence: f64) -> RampForecast {
        RampForecast {
            target_id: 1,
            t_arrival: 600.0,
            depth,
            confidence,
        }
    }

    fn one_mw() -> [PlantOutlook; 1] {
        [PlantOutlook {
            plant_id: 1,
            pre_cloud_power: 1e6,
        }]
    }

    #[test]
    fn no_forecasts_no_plan() {
        let plan = plan_actions(&[], &[shiftable(1, 1e5)], &one_mw(), &ControlPolicy::default(), &ctx()).unwrap();
        assert!(plan.is_empty());
    }

    #[test]
    fn low_confidence_is_gated() {
        let plan = plan_actions(
            &[forecast(0.3, 0.4)],
            &[shiftable(1, 1e5)],
            &one_mw(),
            &ControlPolicy::default(),
            &ctx(),
        )
        .unwrap();
        assert!(plan.is_empty());
    }

    #[test]
    fn depth_limits_shift_and_energy_nets_to_zero() {
        let loads = [shiftable(1, 150e3), shiftable(2, 250e3)];
        let plan = plan_actions(
            &[forecast(0.3, 0.9)],
            &loads,
            &one_mw(),
            &ControlPolicy::default(),
            &ctx(),
        )
        .unwrap();
        // min(400 kW, 0.3 · 1 MW) at the hold tick, summed over loads.
        let mut per_tick: BTreeMap<i64, f64> = BTreeMap::new();
        for a in &plan {
            *per_tick.entry(a.t_start as i64).or_default() += a.power_delta;
        }
        let peak = per_tick.values().cloned().fold(f64::MIN, f64::max);
        assert!((peak - 300e3).abs() < 1e-6);
        for (_, (net, gross)) in energy_by_load(&plan) {
            assert!(net.abs() <= 1e-9 * gross, "{net} of {gross}");
        }
    }

    #[test]
    fn no_shiftable_load_reports_no_capacity() {
        let mut load = shiftable(1, 0.0);
        load.deferrable_power = 0.0;
        let err = plan_actions(
            &[forecast(0.3, 0.9)],
            &[load],
            &one_mw(),
            &ControlPolicy::default(),
            &ctx(),
        );
        assert_eq!(err, Err(ControlError::NoCapacity));
    }

    #[test]
    fn actions_never_precede_issue() {
        let mut c = ctx();
        c.issued_at = 550.0;
        let plan = plan_actions(
            &[forecast(0.5, 0.9)],
            &[shiftable(1, 1e6)],
            &one_mw(),
            &ControlPolicy::default(),
            &c,
        )
        .unwrap();
        assert!(!plan.is_empty());
        assert!(plan.iter().all(|a| a.t_start >= 550.0));
    }

    #[test]
    fn too_late_forecast_is_skipped() {
        let mut c = ctx();
        c.issued_at = 600.0;
        let plan = plan_actions(
            &[forecast(0.5, 0.9)],
            &[shiftable(1, 1e6)],
            &one_mw(),
            &ControlPolicy::default(),
            &c,
        )
        .unwrap();
        assert!(plan.is_empty());
    }

    #[test]
    fn short_window_load_is_not_used() {
        let mut load = shiftable(1, 1e6);
        load.deferrable_window = 60.0;
        let err = plan_actions(
            &[forecast(0.5, 0.9)],
            &[load],
            &one_mw(),
            &ControlPolicy::default(),
            &ctx(),
        );
        assert_eq!(err, Err(ControlError::NoCapacity));
    }

    #[test]
    fn apply_empty_is_identity() {
        let s = PowerSeries::new(0.0, 1.0, vec![1.0, 2.0, 3.0]);
        assert_eq!(apply_actions(&s, &[]).unwrap(), s);
    }

    #[test]
    fn apply_deferral_and_restore_keeps_energy() {
        let s = PowerSeries::new(0.0, 1.0, vec![10.0; 10]);
        let actions = [
            ControlAction {
                load_id: 1,
                t_start: 2.0,
                duration: 2.0,
                power_delta: -3.0,
            },
            ControlAction {
                load_id: 1,
                t_start: 6.0,
                duration: 3.0,
                power_delta: 2.0,
            },
        ];
        let out = apply_actions(&s, &actions).unwrap();
        assert_ne!(out, s);
        assert_eq!(
            out.values(),
            &[10.0, 10.0, 7.0, 7.0, 10.0, 10.0, 12.0, 12.0, 12.0, 10.0]
        );
        assert!((out.energy() - s.energy()).abs() < 1e-12);
    }

    #[test]
    fn apply_out_of_range() {
        let s = PowerSeries::new(0.0, 1.0, vec![10.0; 4]);
        let late = ControlAction {
            load_id: 1,
            t_start: 3.0,
            duration: 2.0,
            power_delta: 1.0,
        };
        assert!(matches!(
            apply_actions(&s, &[late]),
            Err(ControlError::OutOfRange { .. })
        ));
        let early = ControlAction {
            load_id: 1,
            t_start: -1.0,
            duration: 1.0,
            power_delta: 1.0,
        };
        assert!(matches!(
            apply_actions(&s, &[early]),
            Err(ControlError::OutOfRange { .. })
        ));
    }

    #[test]
    fn evaluate_examples() {
        let flat = PowerSeries::new(0.0, 1.0, vec![5.0; 5]);
        let step = PowerSeries::new(0.0, 1.0, vec![0.0, 0.0, 10.0, 10.0, 10.0]);
        assert_eq!(evaluate(&step, &step).unwrap().reduction_fraction, 0.0);
        assert_eq!(evaluate(&flat, &step).unwrap().reduction_fraction, 1.0);
        assert_eq!(evaluate(&flat, &flat).unwrap().reduction_fraction, 0.0);
        let other = PowerSeries::new(1.0, 1.0, vec![5.0; 5]);
        assert_eq!(evaluate(&flat, &other), Err(ControlError::GridMismatch));
    }

    #[test]
    fn shaped_step_is_smaller_for_on_time_and_late_fronts() {
        let loads = [shiftable(1, 1e6)];
        let plan = plan_actions(
            &[forecast(0.4, 0.9)],
            &loads,
            &one_mw(),
            &ControlPolicy::default(),
            &ctx(),
        )
        .unwrap();
        // Net stepping up by 400 kW at the forecast tick, one tick early, one late.
        for actual in [599usize, 600, 601] {
            let base: Vec<f64> = (0..3601).map(|k| if k >= actual { 4e5 } else { 0.0 }).collect();
            let uncontrolled = PowerSeries::new(0.0, 1.0, base);
            let controlled = apply_actions(&uncontrolled, &plan).unwrap();
            let r = evaluate(&controlled, &uncontrolled).unwrap();
            assert!(r.ramp_controlled <= r.ramp_uncontrolled + 1e-6, "{actual}: {r:?}");
            if actual != 599 {
                assert!(r.reduction_fraction > 0.4, "{actual}: {r:?}");
            }
        }
    }
}
