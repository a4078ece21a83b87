use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::geometry::{Obb, Vec2};

/// The bundled demonstration map: every module kind and one closed loop.
pub const MINIMAP: &str = include_str!("../../assets/minimap.toml");

/// Name under which [`MINIMAP`] can be requested instead of a file path.
pub const MINIMAP_NAME: &str = "minimap";

/// Default tile side, m.
pub const DEFAULT_TILE_SIZE: f64 = 0.6;

/// Smallest allowed road curvature radius, m.
pub const MIN_ROAD_RADIUS: f64 = 0.6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TileKind {
    Straight,
    Curved,
    DeadEnd,
    TIntersection,
    XIntersection,
    RoadsideParking,
    ParkingLot,
    Lawn,
}

impl TileKind {
    pub const ALL: [TileKind; 8] = [
        TileKind::Straight,
        TileKind::Curved,
        TileKind::DeadEnd,
        TileKind::TIntersection,
        TileKind::XIntersection,
        TileKind::RoadsideParking,
        TileKind::ParkingLot,
        TileKind::Lawn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TileKind::Straight => "straight",
            TileKind::Curved => "curved",
            TileKind::DeadEnd => "dead_end",
            TileKind::TIntersection => "t_intersection",
            TileKind::XIntersection => "x_intersection",
            TileKind::RoadsideParking => "roadside_parking",
            TileKind::ParkingLot => "parking_lot",
            TileKind::Lawn => "lawn",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn drivable(self) -> bool {
        !matches!(self, TileKind::Lawn)
    }

    /// Road openings before rotation.
    fn base_openings(self) -> Sides {
        match self {
            TileKind::Straight | TileKind::RoadsideParking => Sides::NORTH | Sides::SOUTH,
            TileKind::Curved => Sides::EAST | Sides::NORTH,
            TileKind::DeadEnd | TileKind::ParkingLot => Sides::SOUTH,
            TileKind::TIntersection => Sides::EAST | Sides::SOUTH | Sides::WEST,
            TileKind::XIntersection => Sides::ALL,
            TileKind::Lawn => Sides::NONE,
        }
    }
}

impl fmt::Display for TileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Set of tile edges. East is +x, north is +y.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sides(u8);

impl Sides {
    pub const NONE: Sides = Sides(0);
    pub const EAST: Sides = Sides(1);
    pub const NORTH: Sides = Sides(2);
    pub const WEST: Sides = Sides(4);
    pub const SOUTH: Sides = Sides(8);
    pub const ALL: Sides = Sides(15);

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn contains(self, other: Sides) -> bool {
        self.0 & other.0 == other.0
    }

    /// Quarter turns counter-clockwise.
    fn rotate(self, quarters: u8) -> Sides {
        let q = quarters % 4;
        Sides(((self.0 << q) | (self.0 >> (4 - q))) & 15)
    }

    /// The four single sides with their grid offsets.
    pub fn each() -> [(Sides, (i32, i32)); 4] {
        [
            (Sides::EAST, (1, 0)),
            (Sides::NORTH, (0, 1)),
            (Sides::WEST, (-1, 0)),
            (Sides::SOUTH, (0, -1)),
        ]
    }

    pub fn opposite(self) -> Sides {
        self.rotate(2)
    }
}

impl std::ops::BitOr for Sides {
    type Output = Sides;
    fn bitor(self, o: Sides) -> Sides {
        Sides(self.0 | o.0)
    }
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(try_from = "u16", into = "u16")]
pub enum Rotation {
    #[default]
    R0,
    R90,
    R180,
    R270,
}

impl Rotation {
    pub fn degrees(self) -> u16 {
        self.quarters() as u16 * 90
    }

    pub fn quarters(self) -> u8 {
        match self {
            Rotation::R0 => 0,
            Rotation::R90 => 1,
            Rotation::R180 => 2,
            Rotation::R270 => 3,
        }
    }
}

impl TryFrom<u16> for Rotation {
    type Error = String;
    fn try_from(deg: u16) -> Result<Self, String> {
        match deg {
            0 => Ok(Rotation::R0),
            90 => Ok(Rotation::R90),
            180 => Ok(Rotation::R180),
            270 => Ok(Rotation::R270),
            other => Err(format!("rotation {other} is not one of 0, 90, 180, 270")),
        }
    }
}

impl From<Rotation> for u16 {
    fn from(r: Rotation) -> u16 {
        r.degrees()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tile {
    pub kind: TileKind,
    pub grid: (i32, i32),
    pub rotation: Rotation,
}

impl Tile {
    pub fn openings(&self) -> Sides {
        self.kind.base_openings().rotate(self.rotation.quarters())
    }
}

/// A movable construction box. Only its footprint takes part in collisions
/// and ranging; the height is carried for rendering.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObstructionBox {
    pub center: Vec2,
    /// [length, width, height], m
    pub size: [f64; 3],
    pub yaw: f64,
    pub mass: f64,
    pub velocity: Vec2,
}

impl ObstructionBox {
    pub const DEFAULT_SIZE: [f64; 3] = [0.1, 0.1, 0.1];
    pub const DEFAULT_MASS: f64 = 0.1;

    pub fn new(center: Vec2) -> Self {
        Self {
            center,
            size: Self::DEFAULT_SIZE,
            yaw: 0.0,
            mass: Self::DEFAULT_MASS,
            velocity: Vec2::ZERO,
        }
    }

    pub fn footprint(&self) -> Obb {
        Obb::new(self.center, self.size[0], self.size[1], self.yaw)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Spawn {
    pub position: Vec2,
    pub yaw: f64,
}

/// The environment: a square grid of tiles plus dynamic boxes. Tile `(i, j)`
/// is centred on `(i * tile_size, j * tile_size)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TileMap {
    pub tile_size: f64,
    pub tiles: BTreeMap<(i32, i32), Tile>,
    pub boxes: Vec<ObstructionBox>,
    pub spawn: Spawn,
}

#[derive(Debug, thiserror::Error)]
pub enum MapError {
    #[error("cannot read map {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("map parse error: {0}")]
    Parse(String),
    #[error("line {line}: unknown tile kind \"{kind}\"")]
    UnknownKind { line: usize, kind: String },
    #[error("line {line}: grid cell [{}, {}] already used by the tile on line {first_line}", .grid.0, .grid.1)]
    DuplicateCell {
        line: usize,
        first_line: usize,
        grid: (i32, i32),
    },
    #[error("spawn position [{x}, {y}] is not on a drivable tile")]
    SpawnOffRoad { x: f64, y: f64 },
    #[error("box {index}: {reason}")]
    InvalidBox { index: usize, reason: String },
    #[error("tile_size must be positive and finite, got {0}")]
    InvalidTileSize(f64),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMap {
    #[serde(default = "default_tile_size")]
    tile_size: f64,
    #[serde(default)]
    tiles: Vec<RawTile>,
    #[serde(default)]
    boxes: Vec<RawBox>,
    #[serde(default)]
    spawn: RawSpawn,
}

fn default_tile_size() -> f64 {
    DEFAULT_TILE_SIZE
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTile {
    kind: Spanned<String>,
    grid: Spanned<[i32; 2]>,
    #[serde(default)]
    rotation: Rotation,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBox {
    center: [f64; 2],
    #[serde(default = "default_box_size")]
    size: [f64; 3],
    #[serde(default)]
    yaw: f64,
    #[serde(default = "default_box_mass")]
    mass: f64,
}

fn default_box_size() -> [f64; 3] {
    ObstructionBox::DEFAULT_SIZE
}

fn default_box_mass() -> f64 {
    ObstructionBox::DEFAULT_MASS
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawSpawn {
    #[serde(default)]
    position: [f64; 2],
    #[serde(default)]
    yaw: f64,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

impl TileMap {
    pub fn parse(text: &str) -> Result<Self, MapError> {
        let raw: RawMap = toml::from_str(text).map_err(|e| MapError::Parse(e.to_string()))?;
        if !(raw.tile_size > 0.0 && raw.tile_size.is_finite()) {
            return Err(MapError::InvalidTileSize(raw.tile_size));
        }

        let mut tiles = BTreeMap::new();
        let mut lines = BTreeMap::new();
        for t in raw.tiles {
            let line = line_of(text, t.kind.span().start);
            let kind =
                TileKind::from_name(t.kind.get_ref()).ok_or_else(|| MapError::UnknownKind {
                    line,
                    kind: t.kind.get_ref().clone(),
                })?;
            let [i, j] = *t.grid.get_ref();
            let grid_line = line_of(text, t.grid.span().start);
            if let Some(&first_line) = lines.get(&(i, j)) {
                return Err(MapError::DuplicateCell {
                    line: grid_line,
                    first_line,
                    grid: (i, j),
                });
            }
            lines.insert((i, j), grid_line);
            tiles.insert(
                (i, j),
                Tile {
                    kind,
                    grid: (i, j),
                    rotation: t.rotation,
                },
            );
        }

        let mut boxes = Vec::with_capacity(raw.boxes.len());
        for (index, b) in raw.boxes.into_iter().enumerate() {
            let finite = b
                .center
                .iter()
                .chain(&b.size)
                .chain([&b.yaw, &b.mass])
                .all(|v| v.is_finite());
            if !finite {
                return Err(MapError::InvalidBox {
                    index,
                    reason: "non-finite value".into(),
                });
            }
            if b.size.iter().any(|&s| s <= 0.0) {
                return Err(MapError::InvalidBox {
                    index,
                    reason: "size components must be positive".into(),
                });
            }
            if b.mass <= 0.0 {
                return Err(MapError::InvalidBox {
                    index,
                    reason: "mass must be positive".into(),
                });
            }
            boxes.push(ObstructionBox {
                center: Vec2::new(b.center[0], b.center[1]),
                size: b.size,
                yaw: b.yaw,
                mass: b.mass,
                velocity: Vec2::ZERO,
            });
        }

        let map = TileMap {
            tile_size: raw.tile_size,
            tiles,
            boxes,
            spawn: Spawn {
                position: Vec2::new(raw.spawn.position[0], raw.spawn.position[1]),
                yaw: raw.spawn.yaw,
            },
        };
        let p = map.spawn.position;
        if !map.tile_at(p).is_some_and(|t| t.kind.drivable()) {
            return Err(MapError::SpawnOffRoad { x: p.x, y: p.y });
        }
        Ok(map)
    }

    pub fn bundled_minimap() -> Self {
        Self::parse(MINIMAP).expect("bundled minimap is valid")
    }

    /// Grid cell containing a world point.
    pub fn cell_of(&self, p: Vec2) -> (i32, i32) {
        (
            (p.x / self.tile_size).round() as i32,
            (p.y / self.tile_size).round() as i32,
        )
    }

    pub fn tile_at(&self, p: Vec2) -> Option<&Tile> {
        let cell = self.cell_of(p);
        let tile = self.tiles.get(&cell)?;
        let half = self.tile_size / 2.0;
        let c = self.cell_center(cell);
        ((p.x - c.x).abs() <= half && (p.y - c.y).abs() <= half).then_some(tile)
    }

    pub fn cell_center(&self, (i, j): (i32, i32)) -> Vec2 {
        Vec2::new(i as f64 * self.tile_size, j as f64 * self.tile_size)
    }

    /// Closest point of the tiled region to `p` (itself if inside).
    pub fn clamp_to_tiles(&self, p: Vec2) -> Vec2 {
        if self.tile_at(p).is_some() {
            return p;
        }
        let half = self.tile_size / 2.0;
        let mut best = p;
        let mut best_d = f64::INFINITY;
        for &cell in self.tiles.keys() {
            let c = self.cell_center(cell);
            let q = Vec2::new(
                p.x.clamp(c.x - half, c.x + half),
                p.y.clamp(c.y - half, c.y + half),
            );
            let d = (q - p).norm();
            if d < best_d {
                best_d = d;
                best = q;
            }
        }
        best
    }

    /// Turn radius of the inner lane centreline on a curved tile.
    pub fn curve_radius(&self) -> f64 {
        self.tile_size
    }

    /// Serializes back to the map file format.
    pub fn to_toml_string(&self) -> String {
        #[derive(Serialize)]
        struct OutTile {
            kind: &'static str,
            grid: [i32; 2],
            rotation: u16,
        }
        #[derive(Serialize)]
        struct OutBox {
            center: [f64; 2],
            size: [f64; 3],
            yaw: f64,
            mass: f64,
        }
        #[derive(Serialize)]
        struct OutSpawn {
            position: [f64; 2],
            yaw: f64,
        }
        #[derive(Serialize)]
        struct Out {
            tile_size: f64,
            spawn: OutSpawn,
            tiles: Vec<OutTile>,
            boxes: Vec<OutBox>,
        }
        let out = Out {
            tile_size: self.tile_size,
            spawn: OutSpawn {
                position: [self.spawn.position.x, self.spawn.position.y],
                yaw: self.spawn.yaw,
            },
            tiles: self
                .tiles
                .values()
                .map(|t| OutTile {
                    kind: t.kind.name(),
                    grid: [t.grid.0, t.grid.1],
                    rotation: t.rotation.degrees(),
                })
                .collect(),
            boxes: self
                .boxes
                .iter()
                .map(|b| OutBox {
                    center: [b.center.x, b.center.y],
                    size: b.size,
                    yaw: b.yaw,
                    mass: b.mass,
                })
                .collect(),
        };
        toml::to_string(&out).expect("map always serializes")
    }
}

/// Loads a map file. The name `minimap` resolves to the bundled map when no
/// such file exists.
pub fn load_map(path: impl AsRef<Path>) -> Result<TileMap, MapError> {
    let path = path.as_ref();
    if !path.exists() && path.as_os_str() == MINIMAP_NAME {
        return TileMap::parse(MINIMAP);
    }
    let text = std::fs::read_to_string(path).map_err(|source| MapError::Io {
        path: path.display().to_string(),
        source,
    })?;
    TileMap::parse(&text)
}
