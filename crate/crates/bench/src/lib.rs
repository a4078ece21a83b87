//! Shared fixtures for the benchmarks.

use std::sync::Arc;

use scaledrive::bridge::BridgeEndpoint;
use scaledrive::sim::DEFAULT_DT;
use scaledrive::{ObstructionBox, Sim, SimParams, TileMap, Vec2};

/// Boxes on a ring of `radius` around `center`.
pub fn box_ring(center: Vec2, radius: f64, n: usize) -> Vec<ObstructionBox> {
    (0..n)
        .map(|k| {
            let a = k as f64 * std::f64::consts::TAU / n as f64;
            ObstructionBox::new(Vec2::new(
                center.x + radius * a.cos(),
                center.y + radius * a.sin(),
            ))
        })
        .collect()
}

/// Bundled map with `n` boxes around the spawn point, full throttle held.
pub fn busy_sim(n: usize) -> Sim {
    let mut map = TileMap::bundled_minimap();
    map.boxes = box_ring(map.spawn.position, 0.5, n);
    let inputs = Arc::new(scaledrive::bridge::Inputs::default());
    inputs
        .teleop
        .put(scaledrive::ActuatorCommand::new(1.0, 0.3));
    Sim::new(
        SimParams::default(),
        map,
        DEFAULT_DT,
        0,
        inputs,
        BridgeEndpoint::default(),
    )
}
