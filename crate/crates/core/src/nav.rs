//! Collision-free point-to-point planning on the belief grid.
//!
//! Paths run between voxel centers over 26-connected moves. A voxel is flyable when it is
//! known Free and no occupied voxel lies within `clearance` voxels (Chebyshev). A move is
//! allowed only if every voxel in the box spanned by its endpoints is known Free, so the
//! straight segment between two waypoint centers never touches an unknown or occupied
//! cube.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::NavError;
use crate::mapping::{CellState, SemanticOccupancyGrid};
use crate::voxel::{Bounds, Position, VoxelIdx};

#[derive(Clone, Debug, PartialEq)]
pub struct GridPath {
    pub voxels: Vec<VoxelIdx>,
    pub waypoints: Vec<Position>,
    /// meters
    pub length: f64,
}

impl GridPath {
    fn from_voxels(voxels: Vec<VoxelIdx>, voxel_size: f64) -> Self {
        let waypoints: Vec<Position> = voxels.iter().map(|v| v.center(voxel_size)).collect();
        let length = waypoints.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
        Self {
            voxels,
            waypoints,
            length,
        }
    }

    pub fn start(&self) -> VoxelIdx {
        self.voxels[0]
    }

    pub fn end(&self) -> VoxelIdx {
        *self.voxels.last().expect("paths are never empty")
    }
}

/// Flyability test with a per-query cache.
struct Flyable<'a> {
    grid: &'a SemanticOccupancyGrid,
    clearance: i32,
    cache: Vec<u8>,
}

impl<'a> Flyable<'a> {
    fn new(grid: &'a SemanticOccupancyGrid, clearance: u32) -> Self {
        Self {
            grid,
            clearance: clearance as i32,
            cache: if clearance > 0 {
                vec![0; grid.bounds().len()]
            } else {
                Vec::new()
            },
        }
    }

    fn check(&mut self, v: VoxelIdx) -> bool {
        if self.grid.state(v) != CellState::Free {
            return false;
        }
        if self.clearance == 0 {
            return true;
        }
        let i = self.grid.bounds().linear(v).expect("free voxels are in bounds");
        if self.cache[i] == 0 {
            let c = self.clearance;
            let block = Bounds::new(v.offset(-c, -c, -c), v.offset(c, c, c));
            let clear = block.iter().all(|n| !self.grid.state(n).is_occupied());
            self.cache[i] = if clear { 1 } else { 2 };
        }
        self.cache[i] == 1
    }
}

/// Every voxel of the box spanned by `a` and its neighbor `b` is Free.
fn move_allowed(grid: &SemanticOccupancyGrid, a: VoxelIdx, b: VoxelIdx) -> bool {
    let (dx, dy, dz) = (b.x - a.x, b.y - a.y, b.z - a.z);
    for sx in [0, dx] {
        for sy in [0, dy] {
            for sz in [0, dz] {
                if (sx, sy, sz) == (0, 0, 0) || (sx, sy, sz) == (dx, dy, dz) {
                    continue;
                }
                if grid.state(a.offset(sx, sy, sz)) != CellState::Free {
                    return false;
                }
            }
        }
    }
    true
}

fn step_cost(a: VoxelIdx, b: VoxelIdx, voxel_size: f64) -> f64 {
    let n = (a.x != b.x) as u8 + (a.y != b.y) as u8 + (a.z != b.z) as u8;
    voxel_size
        * match n {
            1 => 1.0,
            2 => std::f64::consts::SQRT_2,
            _ => 3f64.sqrt(),
        }
}

/// Octile distance in three dimensions; exact on an obstacle-free grid.
fn octile(a: VoxelIdx, b: VoxelIdx, voxel_size: f64) -> f64 {
    let mut d = [
        (a.x - b.x).abs() as f64,
        (a.y - b.y).abs() as f64,
        (a.z - b.z).abs() as f64,
    ];
    d.sort_by(|p, q| q.total_cmp(p));
    let [hi, mid, lo] = d;
    voxel_size * (3f64.sqrt() * lo + std::f64::consts::SQRT_2 * (mid - lo) + (hi - mid))
}

#[derive(Clone, Copy, PartialEq)]
struct OpenEntry {
    key: f64,
    index: usize,
}

impl Eq for OpenEntry {}

impl Ord for OpenEntry {
    // min-heap on key, then on voxel index
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .key
            .total_cmp(&self.key)
            .then_with(|| other.index.cmp(&self.index))
    }
}

impl PartialOrd for OpenEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn endpoint(grid: &SemanticOccupancyGrid, fly: &mut Flyable, p: &Position) -> Result<VoxelIdx, NavError> {
    let v = VoxelIdx::containing(p, grid.voxel_size());
    if fly.check(v) {
        Ok(v)
    } else {
        Err(NavError::EndpointBlocked(v))
    }
}

/// Optimal 26-connected path between the voxels containing `from` and `to`.
pub fn plan_path(
    grid: &SemanticOccupancyGrid,
    from: &Position,
    to: &Position,
    clearance: u32,
) -> Result<GridPath, NavError> {
    let mut fly = Flyable::new(grid, clearance);
    let start = endpoint(grid, &mut fly, from)?;
    let goal = endpoint(grid, &mut fly, to)?;
    let vs = grid.voxel_size();
    if start == goal {
        return Ok(GridPath::from_voxels(vec![start], vs));
    }
    let bounds = grid.bounds();
    let n = bounds.len();
    let mut g = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let si = bounds.linear(start).expect("in bounds");
    let gi = bounds.linear(goal).expect("in bounds");
    g[si] = 0.0;
    let mut open = BinaryHeap::new();
    open.push(OpenEntry {
        key: octile(start, goal, vs),
        index: si,
    });
    while let Some(OpenEntry { index, .. }) = open.pop() {
        if closed[index] {
            continue;
        }
        closed[index] = true;
        if index == gi {
            let mut voxels = vec![goal];
            let mut cur = gi;
            while cur != si {
                cur = parent[cur];
                voxels.push(bounds.voxel_at(cur));
            }
            voxels.reverse();
            return Ok(GridPath::from_voxels(voxels, vs));
        }
        let v = bounds.voxel_at(index);
        for nb in v.neighbors26() {
            let Some(ni) = bounds.linear(nb) else { continue };
            if closed[ni] || !fly.check(nb) || !move_allowed(grid, v, nb) {
                continue;
            }
            let cand = g[index] + step_cost(v, nb, vs);
            if cand < g[ni] {
                g[ni] = cand;
                parent[ni] = index;
                open.push(OpenEntry {
                    key: cand + octile(nb, goal, vs),
                    index: ni,
                });
            }
        }
    }
    Err(NavError::Unreachable {
        from: start,
        to: goal,
    })
}

pub fn path_distance(
    grid: &SemanticOccupancyGrid,
    from: &Position,
    to: &Position,
    clearance: u32,
) -> Result<f64, NavError> {
    plan_path(grid, from, to, clearance).map(|p| p.length)
}

/// Single-source shortest path lengths over flyable voxels.
#[derive(Clone, Debug)]
pub struct DistanceField {
    bounds: Bounds,
    dist: Vec<f64>,
}

impl DistanceField {
    /// `None` if `v` is unreachable or out of bounds.
    pub fn distance(&self, v: VoxelIdx) -> Option<f64> {
        self.bounds
            .linear(v)
            .map(|i| self.dist[i])
            .filter(|d| d.is_finite())
    }

    pub fn is_reachable(&self, v: VoxelIdx) -> bool {
        self.distance(v).is_some()
    }
}

pub fn distance_field(
    grid: &SemanticOccupancyGrid,
    from: &Position,
    clearance: u32,
) -> Result<DistanceField, NavError> {
    let mut fly = Flyable::new(grid, clearance);
    let start = endpoint(grid, &mut fly, from)?;
    let bounds = grid.bounds();
    let vs = grid.voxel_size();
    let mut dist = vec![f64::INFINITY; bounds.len()];
    let mut done = vec![false; bounds.len()];
    let si = bounds.linear(start).expect("in bounds");
    dist[si] = 0.0;
    let mut open = BinaryHeap::new();
    open.push(OpenEntry { key: 0.0, index: si });
    while let Some(OpenEntry { index, .. }) = open.pop() {
        if done[index] {
            continue;
        }
        done[index] = true;
        let v = bounds.voxel_at(index);
        for nb in v.neighbors26() {
            let Some(ni) = bounds.linear(nb) else { continue };
            if done[ni] || !fly.check(nb) || !move_allowed(grid, v, nb) {
                continue;
            }
            let cand = dist[index] + step_cost(v, nb, vs);
            if cand < dist[ni] {
                dist[ni] = cand;
                open.push(OpenEntry { key: cand, index: ni });
            }
        }
    }
    Ok(DistanceField { bounds, dist })
}
