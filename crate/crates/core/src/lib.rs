//! Distributed sensing, cloud nowcasting and ramp mitigation for PV-heavy
//! microgrids.

pub mod cloud_field;
pub mod control;
pub mod energy_balance;
pub mod invariant;
pub mod nowcast;
pub mod sensor_mesh;
pub mod sim_engine;

pub use cloud_field::{ClearSkyModel, CloudDisc, CloudField, Point2, WindVector};
pub use control::{ControlAction, ControlError, ControlPolicy, RampReport};
pub use energy_balance::{Load, PowerSeries, PvPlant, TemperatureProfile};
pub use invariant::InvariantViolation;
pub use nowcast::{FrontEvent, MotionEstimate, NowcastError, RampForecast};
pub use sensor_mesh::{Measurement, Readout, SensorNode, Topology, TopologyKind};
pub use sim_engine::{run, run_pair, RunResult, Scenario, SimError};
