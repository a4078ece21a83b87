use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use super::map::{Sides, TileKind, TileMap, MIN_ROAD_RADIUS};

/// Lint results for a loaded map. Nothing here prevents simulation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MapReport {
    pub drivable_tiles: usize,
    /// Connected groups of drivable tiles, joined through matching openings.
    pub components: usize,
    /// Drivable tiles with at most one connected neighbour.
    pub dead_ends: usize,
    /// Road openings that do not meet a matching opening.
    pub open_edges: usize,
    pub closed_loop: bool,
    pub curvature_violations: Vec<(i32, i32)>,
    pub kinds_present: Vec<TileKind>,
    pub warnings: Vec<String>,
}

impl MapReport {
    pub fn is_clean(&self) -> bool {
        self.warnings.is_empty()
    }
}

impl fmt::Display for MapReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "drivable tiles:        {}", self.drivable_tiles)?;
        writeln!(f, "components:            {}", self.components)?;
        writeln!(f, "dead ends:             {}", self.dead_ends)?;
        writeln!(f, "unmatched openings:    {}", self.open_edges)?;
        writeln!(
            f,
            "closed loop:           {}",
            if self.closed_loop { "yes" } else { "no" }
        )?;
        writeln!(
            f,
            "curvature violations:  {}",
            self.curvature_violations.len()
        )?;
        let kinds: Vec<_> = self.kinds_present.iter().map(|k| k.name()).collect();
        writeln!(f, "kinds:                 {}", kinds.join(", "))?;
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}

pub fn validate_map(map: &TileMap) -> MapReport {
    let drivable: Vec<_> = map.tiles.values().filter(|t| t.kind.drivable()).collect();
    let index: BTreeMap<(i32, i32), usize> = drivable
        .iter()
        .enumerate()
        .map(|(n, t)| (t.grid, n))
        .collect();

    let mut sets = DisjointSet::new(drivable.len());
    let mut degree = vec![0usize; drivable.len()];
    let mut edges = 0usize;
    let mut open_edges = 0usize;
    for (n, tile) in drivable.iter().enumerate() {
        let openings = tile.openings();
        for (side, (di, dj)) in Sides::each() {
            if !openings.contains(side) {
                continue;
            }
            let neighbour = (tile.grid.0 + di, tile.grid.1 + dj);
            let linked = index
                .get(&neighbour)
                .filter(|&&m| drivable[m].openings().contains(side.opposite()));
            match linked {
                Some(&m) => {
                    degree[n] += 1;
                    // Count each link once, from its lower-indexed end.
                    if n < m {
                        edges += 1;
                        sets.union(n, m);
                    }
                }
                None => open_edges += 1,
            }
        }
    }

    let mut roots: Vec<usize> = (0..drivable.len()).map(|n| sets.find(n)).collect();
    roots.sort_unstable();
    roots.dedup();
    let components = roots.len();
    // A graph is a forest exactly when |E| = |V| - components.
    let closed_loop = edges + components > drivable.len();

    let curvature_violations: Vec<_> = if map.curve_radius() + 1e-9 < MIN_ROAD_RADIUS {
        drivable
            .iter()
            .filter(|t| t.kind == TileKind::Curved)
            .map(|t| t.grid)
            .collect()
    } else {
        Vec::new()
    };

    let mut kinds_present: Vec<_> = map.tiles.values().map(|t| t.kind).collect();
    kinds_present.sort();
    kinds_present.dedup();

    let mut warnings = Vec::new();
    if drivable.is_empty() {
        warnings.push("no drivable tiles".to_string());
    }
    if components > 1 {
        warnings.push(format!("{components} disconnected drivable components"));
    }
    if !closed_loop {
        warnings.push("no closed loop".to_string());
    }
    for (i, j) in &curvature_violations {
        warnings.push(format!(
            "curved tile [{i}, {j}] turns at {:.3} m, below the {MIN_ROAD_RADIUS} m minimum",
            map.curve_radius()
        ));
    }

    MapReport {
        drivable_tiles: drivable.len(),
        components,
        dead_ends: degree.iter().filter(|&&d| d <= 1).count(),
        open_edges,
        closed_loop,
        curvature_violations,
        kinds_present,
        warnings,
    }
}
