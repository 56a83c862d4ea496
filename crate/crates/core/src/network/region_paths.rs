use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::{CellId, RegionGrid};
use crate::error::{Error, Result};

pub const DEFAULT_REGION_PATHS: usize = 3;

/// Result of a region path search along with the number of partial paths
/// expanded, which feeds the pruning-overhead counter.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionPathSearch {
    pub paths: Vec<Vec<CellId>>,
    pub expansions: u64,
}

/// Up to `t` loop-free cell paths from `source` to `dest`, shortest hop count
/// first, ties in lexicographic order of the cell sequence.
///
/// Best-first enumeration over partial paths keyed by
/// `(hops + chebyshev-to-dest, cell sequence)`. The Chebyshev distance is an
/// exact lower bound for 8-connected moves and is consistent, so complete
/// paths leave the queue in exactly that key order.
pub fn t_shortest_region_paths(grid: &RegionGrid, source: CellId, dest: CellId, t: usize) -> Result<RegionPathSearch> {
    if t == 0 {
        return Err(Error::Config("t must be at least 1".into()));
    }
    let cells = grid.cell_count();
    if source >= cells || dest >= cells {
        return Err(Error::InvalidInput(format!("cell outside {}x{} grid", grid.resolution, grid.resolution)));
    }
    if source == dest {
        return Ok(RegionPathSearch { paths: vec![vec![source]], expansions: 1 });
    }

    let mut heap = BinaryHeap::new();
    heap.push(Reverse((grid.chebyshev(source, dest), vec![source])));
    let mut paths = Vec::new();
    let mut expansions = 0u64;
    while let Some(Reverse((_, path))) = heap.pop() {
        expansions += 1;
        let last = *path.last().expect("paths are never empty");
        if last == dest {
            paths.push(path);
            if paths.len() == t {
                break;
            }
            continue;
        }
        for next in grid.neighbors(last) {
            if path.contains(&next) {
                continue;
            }
            let mut extended = Vec::with_capacity(path.len() + 1);
            extended.extend_from_slice(&path);
            extended.push(next);
            let f = extended.len() - 1 + grid.chebyshev(next, dest);
            heap.push(Reverse((f, extended)));
        }
    }
    Ok(RegionPathSearch { paths, expansions })
}
