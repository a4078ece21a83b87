//! Tile environment, obstruction boxes and all collision geometry.

mod map;
mod physics;
mod validate;

pub use map::{
    load_map, MapError, ObstructionBox, Rotation, Sides, Spawn, Tile, TileKind, TileMap,
    DEFAULT_TILE_SIZE, MINIMAP, MINIMAP_NAME, MIN_ROAD_RADIUS,
};
pub use physics::{
    box_step, collide_vehicle, max_penetration, raycast, separate_all, vehicle_footprint,
    CollisionOutcome, Impulse, PENETRATION_SLACK,
};
pub use validate::{validate_map, MapReport};
