//! Smart sensor nodes, their communication topologies and traffic accounting.

mod topology;
mod traffic;

pub use topology::{
    build_direct_topology, build_hierarchical_topology, route, AccessPointSpec, HierarchySpec, Hop, RouterSpec,
    Topology, TopologyError, TopologyKind,
};
pub use traffic::{accumulate_traffic, central_node_traffic, router_traffic, TrafficError, TrafficMatrix};

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::cloud_field::{CloudField, Point2, WindVector};
use crate::energy_balance::TemperatureProfile;
use crate::invariant::{ensure, ensure_finite, InvariantViolation};

/// Standard sea-level pressure reported on the pressure channel, Pa.
pub const STANDARD_PRESSURE_PA: f64 = 101_325.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Irradiance,
    Temperature,
    Pressure,
    Wind,
    /// Accepted for completeness; nothing downstream consumes it.
    Humidity,
}

fn default_channels() -> BTreeSet<Channel> {
    BTreeSet::from([Channel::Irradiance])
}

fn default_sample_period() -> f64 {
    10.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorNode {
    pub id: u32,
    pub position: Point2,
    /// Meters.
    pub radio_range: f64,
    /// Seconds.
    #[serde(default = "default_sample_period")]
    pub sample_period: f64,
    #[serde(default = "default_channels")]
    pub channels: BTreeSet<Channel>,
}

impl SensorNode {
    pub fn new(id: u32, position: Point2, radio_range: f64, sample_period: f64) -> Self {
        Self {
            id,
            position,
            radio_range,
            sample_period,
            channels: default_channels(),
        }
    }

    pub fn with_channels(mut self, channels: impl IntoIterator<Item = Channel>) -> Self {
        self.channels = channels.into_iter().collect();
        self
    }

    pub fn validate(&self) -> Result<(), InvariantViolation> {
        ensure_finite(self.position.x, "position.x")?;
        ensure_finite(self.position.y, "position.y")?;
        ensure(
            self.radio_range.is_finite() && self.radio_range > 0.0,
            "radio_range",
            "must be > 0",
        )?;
        ensure(
            self.sample_period.is_finite() && self.sample_period > 0.0,
            "sample_period",
            "must be > 0",
        )
    }

    /// Reads the node's channels at `t`.
    pub fn sample(&self, field: &CloudField, t: f64, readout: Readout, profile: &TemperatureProfile) -> Measurement {
        let window = match readout {
            Readout::Instant => 0.0,
            Readout::IntervalMean => self.sample_period,
        };
        let irradiance = field.mean_irradiance(self.position, t, window);
        let has = |c| self.channels.contains(&c);
        Measurement {
            node_id: self.id,
            t,
            irradiance,
            window,
            temperature: has(Channel::Temperature)
                .then(|| profile.temperature_at(t, field.occlusion_at(self.position))),
            pressure: has(Channel::Pressure).then_some(STANDARD_PRESSURE_PA),
            wind: if has(Channel::Wind) {
                field.steering_wind()
            } else {
                None
            },
        }
    }
}

/// How a node turns the irradiance signal into a reading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Readout {
    /// Value at the sampling instant.
    #[default]
    Instant,
    /// Mean over the preceding sampling period.
    IntervalMean,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub node_id: u32,
    pub t: f64,
    /// W/m², ≥ 0.
    pub irradiance: f64,
    /// Averaging window ending at `t`, seconds; 0 for an instantaneous reading.
    pub window: f64,
    pub temperature: Option<f64>,
    pub pressure: Option<f64>,
    pub wind: Option<WindVector>,
}

/// Free function form of [`SensorNode::sample`] with an instantaneous readout.
pub fn sample(node: &SensorNode, field: &CloudField, t: f64, profile: &TemperatureProfile) -> Measurement {
    node.sample(field, t, Readout::Instant, profile)
}
