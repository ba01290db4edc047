//! Cloud-motion recovery from front-crossing times at neighbouring sensors
//! and ramp-arrival prediction at downwind targets.
//!
//! A straight front moving with velocity `v` crosses position `p` at
//! `t0 + p·s`, where `s = v/|v|²` is the slowness vector. Crossing times
//! are therefore affine in position, and `(t0, s)` follows from an ordinary
//! least-squares plane fit over three or more non-collinear sensors.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cloud_field::{ClearSkyModel, Point2, WindVector};
use crate::sensor_mesh::Measurement;

/// Minimum slowness magnitude, s/m; below it the front is treated as
/// arriving everywhere at once.
pub const MIN_SLOWNESS: f64 = 1e-12;

/// Occlusion below which an interval-mean reading counts as clear.
const PARTIAL_EPS: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NowcastError {
    #[error("need at least 3 front events, got {0}")]
    TooFewEvents(usize),
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(&'static str),
    #[error("front has already passed target {target_id}")]
    AlreadyPassed { target_id: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontEvent {
    pub node_id: u32,
    /// First instant the normalized irradiance fell below the threshold.
    pub t_cross: f64,
    /// `1 − I/I_clear` after the crossing, in [0, 1].
    pub depth: f64,
    pub position: Point2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionEstimate {
    pub velocity: WindVector,
    /// Fitted slowness vector, s/m.
    pub slowness: Point2,
    /// Fitted crossing time at the coordinate origin, s.
    pub t0: f64,
    /// RMS of the timing residuals, s.
    pub residual: f64,
    pub n_events: usize,
}

impl MotionEstimate {
    /// Crossing time the fitted plane assigns to `p`.
    pub fn crossing_time(&self, p: Point2) -> f64 {
        self.t0 + p.dot(self.slowness)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RampForecast {
    pub target_id: u32,
    pub t_arrival: f64,
    pub depth: f64,
    pub confidence: f64,
}

fn normalized(m: &Measurement, clear_sky: &ClearSkyModel) -> Option<f64> {
    let clear = if m.window > 0.0 {
        clear_sky.integral(m.t - m.window, m.t) / m.window
    } else {
        clear_sky.irradiance(m.t)
    };
    (clear > 0.0).then(|| m.irradiance / clear)
}

/// First threshold crossing in one node's time-ordered history.
///
/// Instantaneous readings report the first sample with
/// `I/I_clear < 1 − threshold`. Interval-mean readings additionally place
/// the crossing inside its averaging window from the partially occluded
/// fraction; that needs the following sample to fix the settled depth, so
/// the event stays pending (`None`) until it has arrived.
pub fn detect_front(
    history: &[Measurement],
    position: Point2,
    clear_sky: &ClearSkyModel,
    threshold: f64,
) -> Option<FrontEvent> {
    let ratios: Vec<(usize, f64)> = history
        .iter()
        .enumerate()
        .filter_map(|(i, m)| normalized(m, clear_sky).map(|r| (i, r)))
        .collect();
    let k = ratios.iter().position(|&(_, r)| r < 1.0 - threshold)?;
    let (first, r_first) = ratios[k];
    let hit = &history[first];
    let event = |t_cross: f64, depth: f64| FrontEvent {
        node_id: hit.node_id,
        t_cross,
        depth: depth.clamp(0.0, 1.0),
        position,
    };
    if hit.window <= 0.0 {
        return Some(event(hit.t, 1.0 - r_first));
    }

    let &(_, r_next) = ratios.get(k + 1)?;
    let depth = (1.0 - r_first).max(1.0 - r_next);
    let (partial, r_partial) = match k.checked_sub(1).map(|p| ratios[p]) {
        Some((p, r))
            if 1.0 - r > PARTIAL_EPS && (hit.t - history[p].t - hit.window).abs() <= 1e-9 * hit.window.max(1.0) =>
        {
            (p, r)
        }
        _ => (first, r_first),
    };
    let m = &history[partial];
    let covered = ((1.0 - r_partial) / depth).clamp(0.0, 1.0);
    Some(event(m.t - covered * m.window, depth))
}

/// Least-squares planar-front fit over crossing events.
pub fn estimate_motion(events: &[FrontEvent]) -> Result<MotionEstimate, NowcastError> {
    let n = events.len();
    if n < 3 {
        return Err(NowcastError::TooFewEvents(n));
    }
    let nf = n as f64;
    let (mx, my, mt) = events.iter().fold((0.0, 0.0, 0.0), |(x, y, t), e| {
        (x + e.position.x / nf, y + e.position.y / nf, t + e.t_cross / nf)
    });
    let (mut sxx, mut sxy, mut syy, mut sxt, mut syt) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for e in events {
        let (dx, dy, dt) = (e.position.x - mx, e.position.y - my, e.t_cross - mt);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
        sxt += dx * dt;
        syt += dy * dt;
    }
    let det = sxx * syy - sxy * sxy;
    let scale = sxx + syy;
    if scale <= 0.0 || det <= 1e-12 * scale * scale {
        return Err(NowcastError::DegenerateGeometry("sensor positions are collinear"));
    }
    let slowness = Point2::new((syy * sxt - sxy * syt) / det, (sxx * syt - sxy * sxt) / det);
    let s2 = slowness.dot(slowness);
    if slowness.norm() < MIN_SLOWNESS {
        return Err(NowcastError::DegenerateGeometry("front crossed all sensors at once"));
    }
    let t0 = mt - slowness.dot(Point2::new(mx, my));
    let sse: f64 = events
        .iter()
        .map(|e| (e.t_cross - t0 - e.position.dot(slowness)).powi(2))
        .sum();
    Ok(MotionEstimate {
        velocity: WindVector::new(slowness.x / s2, slowness.y / s2),
        slowness,
        t0,
        residual: (sse / nf).sqrt(),
        n_events: n,
    })
}

/// How evenly the event positions spread in two dimensions:
/// `sqrt(λ_min / λ_max)` of their scatter matrix. Zero for collinear
/// positions, one for an isotropic spread.
pub fn spread_aspect(events: &[FrontEvent]) -> f64 {
    let n = events.len() as f64;
    if events.len() < 2 {
        return 0.0;
    }
    let (mx, my) = events
        .iter()
        .fold((0.0, 0.0), |(x, y), e| (x + e.position.x / n, y + e.position.y / n));
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for e in events {
        let (dx, dy) = (e.position.x - mx, e.position.y - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let half_trace = 0.5 * (sxx + syy);
    let gap = (0.25 * (sxx - syy).powi(2) + sxy * sxy).sqrt();
    let (hi, lo) = (half_trace + gap, (half_trace - gap).max(0.0));
    if hi <= 0.0 {
        0.0
    } else {
        (lo / hi).sqrt()
    }
}

/// `exp(−residual / sample_period)`, clamped to [0, 1].
pub fn confidence(residual: f64, sample_period: f64) -> f64 {
    (-residual / sample_period).exp().clamp(0.0, 1.0)
}

/// Extrapolates the front from `reference` to `target` along the fitted
/// slowness.
pub fn predict_arrival(
    estimate: &MotionEstimate,
    reference: &FrontEvent,
    target_id: u32,
    target: Point2,
    sample_period: f64,
) -> Result<RampForecast, NowcastError> {
    let lag = (target - reference.position).dot(estimate.slowness);
    if lag < 0.0 {
        return Err(NowcastError::AlreadyPassed { target_id });
    }
    Ok(RampForecast {
        target_id,
        t_arrival: reference.t_cross + lag,
        depth: reference.depth,
        confidence: confidence(estimate.residual, sample_period),
    })
}
