//! Ground-truth weather: a half-sine clear-sky envelope attenuated by
//! hard-edged cloud discs that drift with their own wind vectors.
//!
//! A [`CloudField`] is a snapshot: disc centers are the positions at the
//! instant the field describes. [`CloudField::advect`] moves the snapshot
//! forward; the time argument of [`CloudField::irradiance_at`] only drives
//! the diurnal envelope.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::invariant::{ensure, ensure_finite, InvariantViolation};

/// Planar position in meters (x east, y north).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Rotates counter-clockwise about the origin.
    pub fn rotated(self, angle: f64) -> Point2 {
        let (s, c) = angle.sin_cos();
        Point2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    fn validate(&self) -> Result<(), InvariantViolation> {
        ensure_finite(self.x, "x")?;
        ensure_finite(self.y, "y")
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, k: f64) -> Point2 {
        Point2::new(self.x * k, self.y * k)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

/// Horizontal wind in m/s.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindVector {
    pub vx: f64,
    pub vy: f64,
}

impl WindVector {
    pub const CALM: WindVector = WindVector { vx: 0.0, vy: 0.0 };

    pub const fn new(vx: f64, vy: f64) -> Self {
        Self { vx, vy }
    }

    /// Builds a vector from a speed and a heading measured counter-clockwise from east.
    pub fn from_polar(speed: f64, heading: f64) -> Self {
        let (s, c) = heading.sin_cos();
        Self::new(speed * c, speed * s)
    }

    pub fn speed(self) -> f64 {
        self.vx.hypot(self.vy)
    }

    /// Heading in radians, counter-clockwise from east.
    pub fn heading(self) -> f64 {
        self.vy.atan2(self.vx)
    }

    /// Distance travelled in `dt` seconds.
    pub fn displacement(self, dt: f64) -> Point2 {
        Point2::new(self.vx * dt, self.vy * dt)
    }

    pub fn as_point(self) -> Point2 {
        Point2::new(self.vx, self.vy)
    }

    pub fn rotated(self, angle: f64) -> WindVector {
        let p = self.as_point().rotated(angle);
        WindVector::new(p.x, p.y)
    }

    fn validate(&self) -> Result<(), InvariantViolation> {
        ensure_finite(self.vx, "vx")?;
        ensure_finite(self.vy, "vy")
    }
}

/// Diurnal irradiance envelope for a cloudless day.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClearSkyModel {
    /// Peak irradiance at solar noon, W/m².
    pub i_max: f64,
    /// Seconds of day.
    pub t_sunrise: f64,
    /// Seconds of day.
    pub t_sunset: f64,
}

impl ClearSkyModel {
    pub fn new(i_max: f64, t_sunrise: f64, t_sunset: f64) -> Result<Self, InvariantViolation> {
        let model = Self {
            i_max,
            t_sunrise,
            t_sunset,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<(), InvariantViolation> {
        ensure_finite(self.i_max, "i_max")?;
        ensure_finite(self.t_sunrise, "t_sunrise")?;
        ensure_finite(self.t_sunset, "t_sunset")?;
        ensure(self.i_max > 0.0, "i_max", "must be > 0")?;
        ensure(
            self.t_sunrise < self.t_sunset,
            "t_sunset",
            "must be later than t_sunrise",
        )
    }

    fn day_length(&self) -> f64 {
        self.t_sunset - self.t_sunrise
    }

    /// Clear-sky irradiance at `t` seconds of day, W/m².
    pub fn irradiance(&self, t: f64) -> f64 {
        if t < self.t_sunrise || t > self.t_sunset {
            return 0.0;
        }
        let phase = PI * (t - self.t_sunrise) / self.day_length();
        (self.i_max * phase.sin()).clamp(0.0, self.i_max)
    }

    /// Closed-form ∫ irradiance dt over `[t0, t1]`, J/m².
    pub fn integral(&self, t0: f64, t1: f64) -> f64 {
        if t1 <= t0 {
            return 0.0;
        }
        let a = t0.max(self.t_sunrise);
        let b = t1.min(self.t_sunset);
        if b <= a {
            return 0.0;
        }
        let len = self.day_length();
        let phase = |t: f64| PI * (t - self.t_sunrise) / len;
        self.i_max * len / PI * (phase(a).cos() - phase(b).cos())
    }

    /// Same envelope scaled by a constant transmissivity.
    pub fn scaled(&self, factor: f64) -> ClearSkyModel {
        ClearSkyModel {
            i_max: self.i_max * factor,
            ..*self
        }
    }
}

/// Free function form of [`ClearSkyModel::irradiance`].
pub fn clear_sky_irradiance(model: &ClearSkyModel, t: f64) -> f64 {
    model.irradiance(t)
}

/// Hard-edged cloud disc drifting with a constant velocity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CloudDisc {
    pub center: Point2,
    /// Meters.
    pub radius: f64,
    /// Fraction of irradiance removed inside the disc, in [0, 1].
    pub opacity: f64,
    pub velocity: WindVector,
}

impl CloudDisc {
    pub fn validate(&self) -> Result<(), InvariantViolation> {
        self.center.validate().map_err(|e| e.within("center"))?;
        self.velocity.validate().map_err(|e| e.within("velocity"))?;
        ensure_finite(self.radius, "radius")?;
        ensure(self.radius > 0.0, "radius", "must be > 0")?;
        ensure((0.0..=1.0).contains(&self.opacity), "opacity", "must lie in [0, 1]")
    }

    pub fn covers(&self, p: Point2) -> bool {
        p.distance(self.center) <= self.radius
    }

    pub fn transmission(&self) -> f64 {
        1.0 - self.opacity
    }

    /// Look-back offsets `s ∈ [0, window]` at which `p` lay inside the disc,
    /// i.e. when the center was at `center − velocity·s`.
    fn covered_lookback(&self, p: Point2, window: f64) -> Option<(f64, f64)> {
        let d = p - self.center;
        let v = self.velocity.as_point();
        let a = v.dot(v);
        let c = d.dot(d) - self.radius * self.radius;
        if a == 0.0 {
            return (c <= 0.0).then_some((0.0, window));
        }
        let b = 2.0 * d.dot(v);
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            return None;
        }
        let sq = disc.sqrt();
        let lo = ((-b - sq) / (2.0 * a)).max(0.0);
        let hi = ((-b + sq) / (2.0 * a)).min(window);
        (lo < hi).then_some((lo, hi))
    }
}

fn default_ambient() -> f64 {
    1.0
}

/// Clear-sky model plus a set of drifting discs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CloudField {
    pub clear_sky: ClearSkyModel,
    #[serde(default)]
    pub discs: Vec<CloudDisc>,
    /// Background transmissivity in (0, 1].
    #[serde(default = "default_ambient")]
    pub ambient: f64,
}

impl CloudField {
    pub fn new(clear_sky: ClearSkyModel, discs: Vec<CloudDisc>) -> Self {
        Self {
            clear_sky,
            discs,
            ambient: 1.0,
        }
    }

    pub fn with_ambient(mut self, ambient: f64) -> Self {
        self.ambient = ambient;
        self
    }

    pub fn validate(&self) -> Result<(), InvariantViolation> {
        self.clear_sky.validate().map_err(|e| e.within("clear_sky"))?;
        ensure(
            self.ambient > 0.0 && self.ambient <= 1.0,
            "ambient",
            "must lie in (0, 1]",
        )?;
        for (i, disc) in self.discs.iter().enumerate() {
            disc.validate().map_err(|e| e.within(format!("discs[{i}]")))?;
        }
        Ok(())
    }

    /// Clear-sky irradiance times the background transmissivity.
    pub fn site_clear_sky(&self) -> ClearSkyModel {
        self.clear_sky.scaled(self.ambient)
    }

    /// Product of `(1 − opacity)` over the discs covering `p`.
    pub fn transmission_at(&self, p: Point2) -> f64 {
        self.discs
            .iter()
            .filter(|d| d.covers(p))
            .map(CloudDisc::transmission)
            .product()
    }

    /// Irradiance at `p`, W/m².
    pub fn irradiance_at(&self, p: Point2, t: f64) -> f64 {
        self.clear_sky.irradiance(t) * self.ambient * self.transmission_at(p)
    }

    /// Fractional deficit `1 − I/I_site_clear` at `p`, in [0, 1].
    pub fn occlusion_at(&self, p: Point2) -> f64 {
        (1.0 - self.transmission_at(p)).clamp(0.0, 1.0)
    }

    /// Moves every disc by its own velocity times `dt`.
    pub fn advect(&self, dt: f64) -> CloudField {
        let mut next = self.clone();
        for disc in &mut next.discs {
            disc.center = disc.center + disc.velocity.displacement(dt);
        }
        next
    }

    /// Mean irradiance at `p` over `(t − window, t]`, with this snapshot
    /// describing the disc positions at `t`. Exact: disc entry and exit
    /// instants are solved in closed form and the envelope is integrated
    /// analytically between them.
    pub fn mean_irradiance(&self, p: Point2, t: f64, window: f64) -> f64 {
        if window <= 0.0 {
            return self.irradiance_at(p, t);
        }
        let spans: Vec<Option<(f64, f64)>> = self.discs.iter().map(|d| d.covered_lookback(p, window)).collect();
        let mut cuts = vec![0.0, window];
        for (lo, hi) in spans.iter().flatten() {
            cuts.push(*lo);
            cuts.push(*hi);
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();

        let mut energy = 0.0;
        for pair in cuts.windows(2) {
            let (s0, s1) = (pair[0], pair[1]);
            if s1 <= s0 {
                continue;
            }
            let mid = 0.5 * (s0 + s1);
            let transmission: f64 = self
                .discs
                .iter()
                .zip(&spans)
                .filter(|(_, span)| matches!(span, Some((lo, hi)) if *lo <= mid && mid <= *hi))
                .map(|(d, _)| d.transmission())
                .product();
            energy += transmission * self.clear_sky.integral(t - s1, t - s0);
        }
        self.ambient * energy / window
    }

    /// Mean velocity of all discs; `None` for a cloudless sky.
    pub fn steering_wind(&self) -> Option<WindVector> {
        if self.discs.is_empty() {
            return None;
        }
        let n = self.discs.len() as f64;
        let (sx, sy) = self
            .discs
            .iter()
            .fold((0.0, 0.0), |(x, y), d| (x + d.velocity.vx, y + d.velocity.vy));
        Some(WindVector::new(sx / n, sy / n))
    }
}

/// Free function form of [`CloudField::irradiance_at`].
pub fn irradiance_at(field: &CloudField, p: Point2, t: f64) -> f64 {
    field.irradiance_at(p, t)
}

/// Free function form of [`CloudField::advect`].
pub fn advect(field: &CloudField, dt: f64) -> CloudField {
    field.advect(dt)
}
