//! Deterministic headless simulator for a 1:14-scale autonomous vehicle.
//!
//! The physics loop ([`sim::Sim`]) is single-threaded and steps at a fixed
//! timestep. Network transports in [`bridge`] run on a tokio runtime and
//! talk to the loop only through the queues in [`bridge::queue`].

pub mod bridge;
pub mod dynamics;
pub mod geometry;
pub mod params;
pub mod runtime;
pub mod sensors;
pub mod sim;
pub mod world;

pub use dynamics::{ActuatorCommand, Gear, VehicleState};
pub use geometry::Vec2;
pub use params::{load_params, ConfigError, FrictionCurve, SensorConfig, SimParams, VehicleParams};
pub use sensors::SensorFrame;
pub use sim::{DrivingMode, Sim, SimCommand, SimSnapshot};
pub use world::{load_map, validate_map, MapError, MapReport, ObstructionBox, TileKind, TileMap};
