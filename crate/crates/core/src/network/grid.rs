use serde::{Deserialize, Serialize};

use super::{Point, SkywayNetwork};
use crate::error::{Error, Result};

pub const DEFAULT_GRID_RESOLUTION: usize = 8;

/// Row-major cell index: `row * resolution + col`, rows growing with y.
pub type CellId = usize;

/// G×G tiling of the bounding box of all node positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionGrid {
    pub min: Point,
    pub max: Point,
    pub resolution: usize,
    /// Cell of every node, by node index.
    membership: Vec<CellId>,
}

impl RegionGrid {
    pub fn build(network: &SkywayNetwork, resolution: usize) -> Result<Self> {
        if resolution < 2 {
            return Err(Error::Config(format!("grid resolution must be at least 2, got {resolution}")));
        }
        let nodes = network.nodes();
        if nodes.is_empty() {
            return Err(Error::EmptyNetwork);
        }
        let mut min = nodes[0].position;
        let mut max = nodes[0].position;
        for n in nodes {
            min.x = min.x.min(n.position.x);
            min.y = min.y.min(n.position.y);
            max.x = max.x.max(n.position.x);
            max.y = max.y.max(n.position.y);
        }
        let mut grid = Self { min, max, resolution, membership: Vec::new() };
        grid.membership = nodes.iter().map(|n| grid.cell_of_point(n.position)).collect();
        Ok(grid)
    }

    pub fn cell_count(&self) -> usize {
        self.resolution * self.resolution
    }

    pub fn cell_of_node(&self, node_index: usize) -> CellId {
        self.membership[node_index]
    }

    pub fn membership(&self) -> &[CellId] {
        &self.membership
    }

    pub fn row_col(&self, cell: CellId) -> (usize, usize) {
        (cell / self.resolution, cell % self.resolution)
    }

    pub fn cell_at(&self, row: usize, col: usize) -> CellId {
        row * self.resolution + col
    }

    /// Points on a shared boundary go to the lower-indexed cell.
    pub fn cell_of_point(&self, p: Point) -> CellId {
        let axis = |v: f64, lo: f64, hi: f64| -> usize {
            let span = hi - lo;
            if span <= 0.0 {
                return 0;
            }
            let t = (v - lo) / span * self.resolution as f64;
            (t.ceil() as i64 - 1).clamp(0, self.resolution as i64 - 1) as usize
        };
        let col = axis(p.x, self.min.x, self.max.x);
        let row = axis(p.y, self.min.y, self.max.y);
        self.cell_at(row, col)
    }

    /// Closed rectangle `(lower-left, upper-right)` of a cell.
    pub fn cell_bounds(&self, cell: CellId) -> (Point, Point) {
        let (row, col) = self.row_col(cell);
        let w = (self.max.x - self.min.x) / self.resolution as f64;
        let h = (self.max.y - self.min.y) / self.resolution as f64;
        (
            Point::new(self.min.x + col as f64 * w, self.min.y + row as f64 * h),
            Point::new(self.min.x + (col + 1) as f64 * w, self.min.y + (row + 1) as f64 * h),
        )
    }

    /// The up to eight cells touching `cell`, in ascending index order.
    pub fn neighbors(&self, cell: CellId) -> impl Iterator<Item = CellId> + '_ {
        let (row, col) = self.row_col(cell);
        let g = self.resolution as i64;
        (-1i64..=1).flat_map(move |dr| {
            (-1i64..=1).filter_map(move |dc| {
                let (r, c) = (row as i64 + dr, col as i64 + dc);
                if (dr, dc) == (0, 0) || r < 0 || c < 0 || r >= g || c >= g {
                    None
                } else {
                    Some(self.cell_at(r as usize, c as usize))
                }
            })
        })
    }

    /// Hop distance between cells under 8-connected moves.
    pub fn chebyshev(&self, a: CellId, b: CellId) -> usize {
        let (ra, ca) = self.row_col(a);
        let (rb, cb) = self.row_col(b);
        ra.abs_diff(rb).max(ca.abs_diff(cb))
    }
}
