//! PV production, weather-sensitive consumption and the energy integral
//! ΔE = k·S·∫ I dt.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cloud_field::{CloudField, Point2};
use crate::invariant::{ensure, ensure_finite, InvariantViolation};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnergyError {
    #[error("interval [{t0}, {t1}] is outside the series span [{start}, {end}]")]
    OutOfRange { t0: f64, t1: f64, start: f64, end: f64 },
    #[error("integration bounds must satisfy t0 < t1 (got {t0}, {t1})")]
    InvalidBounds { t0: f64, t1: f64 },
    #[error("series needs at least 2 samples, got {0}")]
    TooShort(usize),
    #[error("time stamps must be strictly increasing with a constant step")]
    IrregularGrid,
    #[error("{times} time stamps but {values} values")]
    LengthMismatch { times: usize, values: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PvPlant {
    pub id: u32,
    pub position: Point2,
    /// Collector area S, m².
    pub area: f64,
    /// Conversion coefficient k in (0, 1].
    pub coeff_k: f64,
    /// Output ceiling, W.
    pub rated_power: f64,
}

impl PvPlant {
    pub fn validate(&self) -> Result<(), InvariantViolation> {
        ensure(self.position.is_finite(), "position", "must be finite")?;
        ensure(self.area.is_finite() && self.area > 0.0, "area", "must be > 0")?;
        ensure(
            self.coeff_k > 0.0 && self.coeff_k <= 1.0,
            "coeff_k",
            "must lie in (0, 1]",
        )?;
        ensure(
            self.rated_power.is_finite() && self.rated_power > 0.0,
            "rated_power",
            "must be > 0",
        )
    }

    /// Unclipped conversion k·S·I, W.
    fn conversion(&self, irradiance: f64) -> f64 {
        self.coeff_k * self.area * irradiance
    }
}

/// Instantaneous output `min(k·S·I, rated)`, W.
pub fn pv_power(plant: &PvPlant, irradiance: f64) -> f64 {
    plant.conversion(irradiance.max(0.0)).min(plant.rated_power)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Load {
    pub id: u32,
    pub position: Point2,
    /// W.
    pub base_power: f64,
    /// Extra lighting demand at full occlusion, W.
    #[serde(default)]
    pub lighting_coeff: f64,
    /// Heating/cooling demand per °C away from the setpoint, W/°C.
    #[serde(default)]
    pub hvac_coeff: f64,
    /// °C.
    #[serde(default = "default_setpoint")]
    pub t_setpoint: f64,
    /// Shiftable part of the demand, W.
    #[serde(default)]
    pub deferrable_power: f64,
    /// Longest interval over which the shiftable part may be moved, s.
    #[serde(default)]
    pub deferrable_window: f64,
}

fn default_setpoint() -> f64 {
    21.0
}

impl Load {
    pub fn validate(&self) -> Result<(), InvariantViolation> {
        ensure(self.position.is_finite(), "position", "must be finite")?;
        for (name, v) in [
            ("base_power", self.base_power),
            ("lighting_coeff", self.lighting_coeff),
            ("hvac_coeff", self.hvac_coeff),
            ("deferrable_power", self.deferrable_power),
            ("deferrable_window", self.deferrable_window),
        ] {
            ensure(v.is_finite() && v >= 0.0, name, "must be finite and ≥ 0")?;
        }
        ensure_finite(self.t_setpoint, "t_setpoint")?;
        ensure(
            self.deferrable_power <= self.base_power + self.lighting_coeff + self.hvac_coeff * 50.0,
            "deferrable_power",
            "exceeds base_power + lighting_coeff + 50·hvac_coeff",
        )
    }
}

/// `base + α·occlusion + β·|T − T_set|`, with occlusion `1 − I/I_clear`
/// (zero at night).
pub fn load_power(load: &Load, irradiance: f64, clear_sky_now: f64, temperature: f64) -> f64 {
    let occlusion = if clear_sky_now > 0.0 {
        (1.0 - irradiance / clear_sky_now).clamp(0.0, 1.0)
    } else {
        0.0
    };
    load.base_power + load.lighting_coeff * occlusion + load.hvac_coeff * (temperature - load.t_setpoint).abs()
}

/// Piecewise-linear ambient temperature over the day, optionally stepped
/// down where cloud cover exceeds one half.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemperatureProfile {
    /// `(seconds of day, °C)` knots, ascending in time.
    pub points: Vec<(f64, f64)>,
    /// °C subtracted where occlusion > 0.5.
    #[serde(default)]
    pub cloud_delta: f64,
}

impl Default for TemperatureProfile {
    fn default() -> Self {
        Self::constant(21.0)
    }
}

impl TemperatureProfile {
    pub fn constant(celsius: f64) -> Self {
        Self {
            points: vec![(0.0, celsius)],
            cloud_delta: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), InvariantViolation> {
        ensure(!self.points.is_empty(), "points", "at least one knot is required")?;
        for (i, (t, c)) in self.points.iter().enumerate() {
            ensure(
                t.is_finite() && c.is_finite(),
                &format!("points[{i}]"),
                "must be finite",
            )?;
        }
        ensure(
            self.points.windows(2).all(|w| w[0].0 < w[1].0),
            "points",
            "knot times must be strictly increasing",
        )?;
        ensure_finite(self.cloud_delta, "cloud_delta")
    }

    /// Clear-sky temperature at `t`, held constant beyond the end knots.
    pub fn base_at(&self, t: f64) -> f64 {
        let pts = &self.points;
        match pts.iter().position(|&(tk, _)| tk > t) {
            None => pts.last().map_or(0.0, |p| p.1),
            Some(0) => pts[0].1,
            Some(k) => {
                let (ta, ca) = pts[k - 1];
                let (tb, cb) = pts[k];
                ca + (cb - ca) * (t - ta) / (tb - ta)
            }
        }
    }

    pub fn temperature_at(&self, t: f64, occlusion: f64) -> f64 {
        let base = self.base_at(t);
        if occlusion > 0.5 {
            base - self.cloud_delta
        } else {
            base
        }
    }
}

/// Uniformly sampled series: value `i` belongs to `t0 + i·dt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSeries {
    t0: f64,
    dt: f64,
    values: Vec<f64>,
}

impl PowerSeries {
    pub fn new(t0: f64, dt: f64, values: Vec<f64>) -> Self {
        assert!(dt > 0.0 && dt.is_finite(), "series step must be positive");
        Self { t0, dt, values }
    }

    /// Builds from explicit time stamps, which must be equally spaced.
    pub fn from_samples(t: &[f64], values: Vec<f64>) -> Result<Self, EnergyError> {
        if t.len() != values.len() {
            return Err(EnergyError::LengthMismatch {
                times: t.len(),
                values: values.len(),
            });
        }
        if t.len() < 2 {
            return Err(EnergyError::TooShort(t.len()));
        }
        let dt = t[1] - t[0];
        let tol = 1e-9 * dt.abs().max(t[0].abs());
        if dt.is_nan() || dt <= 0.0 || t.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > tol) {
            return Err(EnergyError::IrregularGrid);
        }
        Ok(Self::new(t[0], dt, values))
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn end(&self) -> f64 {
        self.time(self.len().saturating_sub(1))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().enumerate().map(|(i, &p)| (self.time(i), p))
    }

    /// Rectangle-rule energy Σ p·Δt, J.
    pub fn energy(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.dt
    }

    /// Whether `other` has the same start, step and length.
    pub fn same_grid(&self, other: &PowerSeries) -> bool {
        self.len() == other.len()
            && (self.t0 - other.t0).abs() <= 1e-9 * self.dt
            && (self.dt - other.dt).abs() <= 1e-12 * self.dt
    }

    /// Linear interpolation; `t` must lie within the span.
    fn interpolate(&self, t: f64) -> f64 {
        let x = ((t - self.t0) / self.dt).clamp(0.0, (self.len() - 1) as f64);
        let i = (x.floor() as usize).min(self.len() - 2);
        let frac = x - i as f64;
        self.values[i] + (self.values[i + 1] - self.values[i]) * frac
    }

    /// Trapezoidal ∫ value dt over `[a, b]`; exact for the piecewise-linear
    /// interpolant, including partial first and last cells.
    pub fn trapezoid(&self, a: f64, b: f64) -> Result<f64, EnergyError> {
        if self.len() < 2 {
            return Err(EnergyError::TooShort(self.len()));
        }
        if a.is_nan() || b.is_nan() || a >= b {
            return Err(EnergyError::InvalidBounds { t0: a, t1: b });
        }
        let tol = 1e-9 * self.dt;
        if a < self.t0 - tol || b > self.end() + tol {
            return Err(EnergyError::OutOfRange {
                t0: a,
                t1: b,
                start: self.t0,
                end: self.end(),
            });
        }
        let a = a.max(self.t0);
        let b = b.min(self.end());
        let first = ((a - self.t0) / self.dt).floor() as usize;
        let mut total = 0.0;
        for i in first..self.len() - 1 {
            let (lo, hi) = (self.time(i).max(a), self.time(i + 1).min(b));
            if lo >= b {
                break;
            }
            if hi > lo {
                total += 0.5 * (hi - lo) * (self.interpolate(lo) + self.interpolate(hi));
            }
        }
        Ok(total)
    }
}

/// ΔE = k·S·∫_{t0}^{t1} I dt over an irradiance series, J.
pub fn delta_energy(plant: &PvPlant, irradiance: &PowerSeries, t0: f64, t1: f64) -> Result<f64, EnergyError> {
    Ok(plant.coeff_k * plant.area * irradiance.trapezoid(t0, t1)?)
}

/// Net demand at `t` (positive = consumption exceeds PV), W. `field` is the
/// cloud snapshot at `t`.
pub fn net_power(
    loads: &[Load],
    plants: &[PvPlant],
    field: &CloudField,
    temperature: &TemperatureProfile,
    t: f64,
) -> f64 {
    let (load, pv) = power_components(loads, plants, field, temperature, t);
    load - pv
}

/// `(Σ load_power, Σ pv_power)` at `t`.
pub fn power_components(
    loads: &[Load],
    plants: &[PvPlant],
    field: &CloudField,
    temperature: &TemperatureProfile,
    t: f64,
) -> (f64, f64) {
    let clear = field.site_clear_sky().irradiance(t);
    let load: f64 = loads
        .iter()
        .map(|l| {
            let i = field.irradiance_at(l.position, t);
            let temp = temperature.temperature_at(t, field.occlusion_at(l.position));
            load_power(l, i, clear, temp)
        })
        .sum();
    let pv: f64 = plants
        .iter()
        .map(|p| pv_power(p, field.irradiance_at(p.position, t)))
        .sum();
    (load, pv)
}

/// Largest absolute step gradient `|p[i+1] − p[i]| / Δt`, W/s.
pub fn ramp_metric(series: &PowerSeries) -> Result<f64, EnergyError> {
    if series.len() < 2 {
        return Err(EnergyError::TooShort(series.len()));
    }
    Ok(series
        .values()
        .windows(2)
        .map(|w| (w[1] - w[0]).abs() / series.dt())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud_field::{ClearSkyModel, CloudDisc, WindVector};

    fn plant(k: f64, area: f64, rated: f64) -> PvPlant {
        PvPlant {
            id: 1,
            position: Point2::ORIGIN,
            area,
            coeff_k: k,
            rated_power: rated,
        }
    }

    fn load(base: f64, alpha: f64, beta: f64) -> Load {
        Load {
            id: 1,
            position: Point2::ORIGIN,
            base_power: base,
            lighting_coeff: alpha,
            hvac_coeff: beta,
            t_setpoint: 21.0,
            deferrable_power: 0.0,
            deferrable_window: 0.0,
        }
    }

    #[test]
    fn pv_examples() {
        assert_eq!(pv_power(&plant(0.15, 10.0, 10_000.0), 0.0), 0.0);
        assert!((pv_power(&plant(0.15, 10.0, 10_000.0), 1000.0) - 1500.0).abs() < 1e-9);
        // 0.2 · 10000 · 800 = 1.6 MW, clipped to the 1 MW rating.
        assert_eq!(pv_power(&plant(0.2, 10_000.0, 1e6), 800.0), 1e6);
    }

    #[test]
    fn delta_energy_constant_hour() {
        let series = PowerSeries::new(0.0, 60.0, vec![1000.0; 61]);
        let e = delta_energy(&plant(0.15, 10.0, 1e4), &series, 0.0, 3600.0).unwrap();
        assert!((e - 5.4e6).abs() <= 5.4e6 * 1e-12);
    }

    #[test]
    fn delta_energy_zero_and_triangle() {
        let zero = PowerSeries::new(0.0, 10.0, vec![0.0; 11]);
        assert_eq!(delta_energy(&plant(1.0, 1.0, 1e9), &zero, 0.0, 100.0).unwrap(), 0.0);
        let ramp: Vec<f64> = (0..=60).map(|i| f64::from(i) * 1000.0 / 60.0).collect();
        let series = PowerSeries::new(0.0, 10.0, ramp);
        let e = delta_energy(&plant(1.0, 1.0, 1e9), &series, 0.0, 600.0).unwrap();
        assert!((e - 3.0e5).abs() < 1e-6);
    }

    #[test]
    fn delta_energy_partial_cells_are_exact_for_linear() {
        let ramp: Vec<f64> = (0..=10).map(|i| 2.0 * f64::from(i) * 10.0).collect(); // I = 2t
        let series = PowerSeries::new(0.0, 10.0, ramp);
        let e = delta_energy(&plant(1.0, 1.0, 1e9), &series, 5.0, 37.0).unwrap();
        assert!((e - (37.0f64.powi(2) - 25.0)).abs() < 1e-9);
    }

    #[test]
    fn delta_energy_bounds() {
        let series = PowerSeries::new(0.0, 10.0, vec![1.0; 11]);
        let p = plant(1.0, 1.0, 1.0);
        assert!(matches!(
            delta_energy(&p, &series, -5.0, 50.0),
            Err(EnergyError::OutOfRange { .. })
        ));
        assert!(matches!(
            delta_energy(&p, &series, 0.0, 150.0),
            Err(EnergyError::OutOfRange { .. })
        ));
        assert!(matches!(
            delta_energy(&p, &series, 50.0, 50.0),
            Err(EnergyError::InvalidBounds { .. })
        ));
    }

    #[test]
    fn load_examples() {
        assert_eq!(load_power(&load(1000.0, 200.0, 50.0), 800.0, 800.0, 21.0), 1000.0);
        assert_eq!(load_power(&load(1000.0, 200.0, 0.0), 0.0, 800.0, 21.0), 1200.0);
        assert!((load_power(&load(1000.0, 200.0, 50.0), 400.0, 800.0, 23.0) - 1200.0).abs() < 1e-9);
        // Night: no occlusion term.
        assert_eq!(load_power(&load(1000.0, 200.0, 0.0), 0.0, 0.0, 21.0), 1000.0);
    }

    fn noon_field(discs: Vec<CloudDisc>) -> CloudField {
        CloudField::new(ClearSkyModel::new(1000.0, 21_600.0, 64_800.0).unwrap(), discs)
    }

    #[test]
    fn net_power_examples() {
        let f = noon_field(vec![]);
        let temp = TemperatureProfile::constant(21.0);
        let p = plant(0.15, 10.0, 1e4);
        assert!((net_power(&[], std::slice::from_ref(&p), &f, &temp, 43_200.0) + 1500.0).abs() < 1e-9);
        let loads = [load(1000.0, 0.0, 0.0), load(2000.0, 0.0, 0.0)];
        assert!((net_power(&loads, &[p], &f, &temp, 43_200.0) - 1500.0).abs() < 1e-9);
    }

    #[test]
    fn cloud_over_plant_and_load_raises_net_by_both_terms() {
        let temp = TemperatureProfile::constant(21.0);
        let p = plant(0.15, 10.0, 1e4);
        let l = load(1000.0, 200.0, 0.0);
        let clear = net_power(
            std::slice::from_ref(&l),
            std::slice::from_ref(&p),
            &noon_field(vec![]),
            &temp,
            43_200.0,
        );
        let covered_field = noon_field(vec![CloudDisc {
            center: Point2::ORIGIN,
            radius: 50.0,
            opacity: 0.6,
            velocity: WindVector::CALM,
        }]);
        let covered = net_power(&[l], &[p], &covered_field, &temp, 43_200.0);
        // plant drop 0.6 · 1500 W, lighting 200 W · 0.6
        assert!((covered - clear - (900.0 + 120.0)).abs() < 1e-9);
    }

    #[test]
    fn ramp_examples() {
        assert_eq!(ramp_metric(&PowerSeries::new(0.0, 10.0, vec![5.0; 4])).unwrap(), 0.0);
        assert_eq!(
            ramp_metric(&PowerSeries::new(0.0, 10.0, vec![0.0, 0.0, 1000.0, 1000.0])).unwrap(),
            100.0
        );
        assert_eq!(
            ramp_metric(&PowerSeries::new(0.0, 1.0, vec![0.0, 1.0, 4.0, 5.0])).unwrap(),
            3.0
        );
        assert_eq!(
            ramp_metric(&PowerSeries::new(0.0, 1.0, vec![1.0])),
            Err(EnergyError::TooShort(1))
        );
    }

    #[test]
    fn temperature_profile_interpolates_and_steps() {
        let profile = TemperatureProfile {
            points: vec![(0.0, 10.0), (100.0, 20.0)],
            cloud_delta: 3.0,
        };
        assert_eq!(profile.base_at(-5.0), 10.0);
        assert_eq!(profile.base_at(50.0), 15.0);
        assert_eq!(profile.base_at(500.0), 20.0);
        assert_eq!(profile.temperature_at(50.0, 0.4), 15.0);
        assert_eq!(profile.temperature_at(50.0, 0.6), 12.0);
    }

    #[test]
    fn irregular_samples_rejected() {
        assert_eq!(
            PowerSeries::from_samples(&[0.0, 1.0, 3.0], vec![0.0; 3]),
            Err(EnergyError::IrregularGrid)
        );
        assert!(PowerSeries::from_samples(&[0.0, 2.0, 4.0], vec![0.0; 3]).is_ok());
    }

    #[test]
    fn load_validation_names_field() {
        let mut l = load(100.0, 0.0, 0.0);
        l.deferrable_power = 500.0;
        assert_eq!(l.validate().unwrap_err().field, "deferrable_power");
        let mut p = plant(1.5, 1.0, 1.0);
        assert_eq!(p.validate().unwrap_err().field, "coeff_k");
        p.coeff_k = 0.5;
        p.area = 0.0;
        assert_eq!(p.validate().unwrap_err().field, "area");
    }
}
