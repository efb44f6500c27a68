//! The 6x4 tile grid shared by screen indexing and sketch scoring.
//!
//! Tiles are numbered row-major, rows top to bottom and columns left to
//! right, so tile `t` sits at row `t / 4`, column `t % 4`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stroke::NormBBox;

pub const TILE_ROWS: usize = 6;
pub const TILE_COLS: usize = 4;
pub const TILE_COUNT: usize = TILE_ROWS * TILE_COLS;

const TILE_W: f64 = 1.0 / TILE_COLS as f64;
const TILE_H: f64 = 1.0 / TILE_ROWS as f64;
/// Area of one tile in normalized units.
pub const TILE_AREA: f64 = 1.0 / TILE_COUNT as f64;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("tile index {0} is outside 0..{TILE_COUNT}")]
pub struct InvalidTile(pub usize);

/// A set of tiles as a bitmask.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct TileSet(u32);

impl TileSet {
    pub const EMPTY: TileSet = TileSet(0);

    pub fn from_tiles<I: IntoIterator<Item = usize>>(tiles: I) -> Result<Self, InvalidTile> {
        let mut set = TileSet::EMPTY;
        for t in tiles {
            if t >= TILE_COUNT {
                return Err(InvalidTile(t));
            }
            set.0 |= 1 << t;
        }
        Ok(set)
    }

    pub fn insert(&mut self, tile: usize) {
        debug_assert!(tile < TILE_COUNT);
        self.0 |= 1 << tile;
    }

    pub fn contains(self, tile: usize) -> bool {
        tile < TILE_COUNT && self.0 & (1 << tile) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..TILE_COUNT).filter(move |&t| self.0 & (1 << t) != 0)
    }

    /// All 8-adjacent tiles of the members, excluding the members themselves.
    pub fn neighbors(self) -> TileSet {
        let mut out = 0u32;
        for t in self.iter() {
            out |= NEIGHBOR_MASKS[t];
        }
        TileSet(out & !self.0)
    }
}

const NEIGHBOR_MASKS: [u32; TILE_COUNT] = neighbor_masks();

const fn neighbor_masks() -> [u32; TILE_COUNT] {
    let mut masks = [0u32; TILE_COUNT];
    let mut t = 0;
    while t < TILE_COUNT {
        let (r, c) = ((t / TILE_COLS) as isize, (t % TILE_COLS) as isize);
        let mut dr = -1;
        while dr <= 1 {
            let mut dc = -1;
            while dc <= 1 {
                let (nr, nc) = (r + dr, c + dc);
                if (dr != 0 || dc != 0) && nr >= 0 && nr < TILE_ROWS as isize && nc >= 0 && nc < TILE_COLS as isize {
                    masks[t] |= 1 << (nr as usize * TILE_COLS + nc as usize);
                }
                dc += 1;
            }
            dr += 1;
        }
        t += 1;
    }
    masks
}

/// Tiles 8-adjacent to any input tile, minus the inputs.
pub fn neighbor_tiles(tiles: &[usize]) -> Result<Vec<usize>, InvalidTile> {
    Ok(TileSet::from_tiles(tiles.iter().copied())?.neighbors().iter().collect())
}

/// Coverage of one tile by one element class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TileCell {
    pub tile: u8,
    /// Covered fraction of the tile's area, in (0, 1].
    pub area: f64,
    /// Number of elements overlapping the tile.
    pub count: u32,
}

/// Per-tile coverage of one class on one screen (or sketch), sorted by tile.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TileCoverage {
    pub cells: Vec<TileCell>,
}

impl TileCoverage {
    pub fn tiles(&self) -> TileSet {
        let mut set = TileSet::EMPTY;
        for c in &self.cells {
            set.insert(c.tile as usize);
        }
        set
    }

    pub fn get(&self, tile: usize) -> Option<&TileCell> {
        self.cells.iter().find(|c| c.tile as usize == tile)
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn total_count(&self) -> u32 {
        self.cells.iter().map(|c| c.count).sum()
    }
}

/// Overlap of `rect` with tile `t`, as a fraction of the tile's area.
pub fn tile_overlap_fraction(rect: &NormBBox, t: usize) -> f64 {
    let (r, c) = (t / TILE_COLS, t % TILE_COLS);
    let (tx0, ty0) = (c as f64 * TILE_W, r as f64 * TILE_H);
    let (tx1, ty1) = ((c + 1) as f64 * TILE_W, (r + 1) as f64 * TILE_H);
    let ox = (rect.right().min(tx1) - rect.x.max(tx0)).max(0.0);
    let oy = (rect.bottom().min(ty1) - rect.y.max(ty0)).max(0.0);
    ox * oy / TILE_AREA
}

/// Sums area and counts per tile; feed it every element of one class.
#[derive(Debug, Clone)]
pub struct CoverageAccumulator {
    area: [f64; TILE_COUNT],
    count: [u32; TILE_COUNT],
}

impl Default for CoverageAccumulator {
    fn default() -> Self {
        Self {
            area: [0.0; TILE_COUNT],
            count: [0; TILE_COUNT],
        }
    }
}

impl CoverageAccumulator {
    pub fn add(&mut self, rect: &NormBBox) {
        if rect.w <= 0.0 || rect.h <= 0.0 {
            return;
        }
        let col_range = tile_span(rect.x, rect.right(), TILE_COLS);
        let row_range = tile_span(rect.y, rect.bottom(), TILE_ROWS);
        for r in row_range {
            for c in col_range.clone() {
                let t = r * TILE_COLS + c;
                let frac = tile_overlap_fraction(rect, t);
                if frac > 0.0 {
                    self.area[t] += frac;
                    self.count[t] += 1;
                }
            }
        }
    }

    pub fn finish(&self) -> TileCoverage {
        let cells = (0..TILE_COUNT)
            .filter(|&t| self.count[t] > 0)
            .map(|t| TileCell {
                tile: t as u8,
                area: self.area[t].min(1.0),
                count: self.count[t],
            })
            .collect();
        TileCoverage { cells }
    }
}

fn tile_span(lo: f64, hi: f64, n: usize) -> std::ops::Range<usize> {
    let first = ((lo * n as f64).floor().max(0.0) as usize).min(n - 1);
    let last = ((hi * n as f64).ceil().max(0.0) as usize).clamp(first + 1, n);
    first..last
}

/// Tile coverage of a set of boxes, all of one class.
pub fn coverage_of<'a, I: IntoIterator<Item = &'a NormBBox>>(rects: I) -> TileCoverage {
    let mut acc = CoverageAccumulator::default();
    for r in rects {
        acc.add(r);
    }
    acc.finish()
}
