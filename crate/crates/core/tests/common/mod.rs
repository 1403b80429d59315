//! Independent reference implementations used as oracles by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use bridge_inspect::mapping::{CellState, SemanticOccupancyGrid};
use bridge_inspect::view::ViewSpec;
use bridge_inspect::voxel::{Bounds, Face, Position, VoxelIdx};
use bridge_inspect::world::{world_from_primitives, BoxShape, GroundTruthLabel, WorldModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Parameter interval `[t0, t1]` over which `a + t (b - a)`, `t` in `[0, 1]`, lies in the
/// closed cube of `v`, or `None`.
pub fn segment_box_interval(a: &Position, b: &Position, v: VoxelIdx, vs: f64) -> Option<(f64, f64)> {
    let lo = [v.x as f64 * vs, v.y as f64 * vs, v.z as f64 * vs];
    let mut t0: f64 = 0.0;
    let mut t1: f64 = 1.0;
    for i in 0..3 {
        let d = b[i] - a[i];
        let hi = lo[i] + vs;
        if d.abs() < 1e-15 {
            if a[i] < lo[i] - 1e-9 || a[i] > hi + 1e-9 {
                return None;
            }
            continue;
        }
        let (mut s0, mut s1) = ((lo[i] - a[i]) / d, (hi - a[i]) / d);
        if s0 > s1 {
            std::mem::swap(&mut s0, &mut s1);
        }
        t0 = t0.max(s0);
        t1 = t1.min(s1);
    }
    (t0 <= t1 + 1e-9).then_some((t0, t1))
}

/// Every voxel whose closed cube the segment touches, by exhaustive box tests.
pub fn touched_voxels(a: &Position, b: &Position, vs: f64) -> Vec<VoxelIdx> {
    let lo = VoxelIdx::containing(&Position::new(a.x.min(b.x), a.y.min(b.y), a.z.min(b.z)), vs).offset(-1, -1, -1);
    let hi = VoxelIdx::containing(&Position::new(a.x.max(b.x), a.y.max(b.y), a.z.max(b.z)), vs).offset(1, 1, 1);
    Bounds::new(lo, hi)
        .iter()
        .filter(|&v| segment_box_interval(a, b, v, vs).is_some())
        .collect()
}

/// The viewing predicate written from its definition: distance band, incidence angle by
/// `acos`, all touched voxels free except the endpoints, and a non-occupied voxel in front
/// of the face.
pub fn brute_viewable(
    grid: &SemanticOccupancyGrid,
    free: VoxelIdx,
    bridge: VoxelIdx,
    face: Face,
    spec: &ViewSpec,
) -> bool {
    if grid.state(free) != CellState::Free || !grid.state(bridge).is_bridge() {
        return false;
    }
    let vs = grid.voxel_size();
    let p = free.center(vs);
    let mut fc = bridge.center(vs);
    let axis = face.axis();
    fc[axis] += 0.5 * vs * face.sign() as f64;
    let d = p - fc;
    let dist = d.norm();
    if dist < spec.d_min - 1e-9 || dist > spec.d_max + 1e-9 {
        return false;
    }
    let mut normal = nalgebra::Vector3::zeros();
    normal[axis] = face.sign() as f64;
    let cos = (d.dot(&normal) / dist).clamp(-1.0, 1.0);
    if cos <= 0.0 {
        return false;
    }
    let angle = cos.acos().to_degrees();
    if angle > spec.apex_angle / 2.0 + spec.angle_tol + 1e-7 {
        return false;
    }
    let front = bridge.with_axis(axis, bridge.axis(axis) + face.sign());
    if grid.state(front).is_occupied() {
        return false;
    }
    touched_voxels(&p, &fc, vs)
        .into_iter()
        .all(|v| v == bridge || v == free || grid.state(v) == CellState::Free)
}

/// All viewable (bridge, face, free) triples over bridge voxels awaiting inspection.
pub fn brute_triples(grid: &SemanticOccupancyGrid, spec: &ViewSpec) -> BTreeSet<(VoxelIdx, Face, VoxelIdx)> {
    let b = grid.bounds();
    let mut out = BTreeSet::new();
    for bridge in b.iter() {
        if grid.state(bridge) != CellState::BridgeNotInspected {
            continue;
        }
        for face in Face::ALL {
            for free in b.iter() {
                if brute_viewable(grid, free, bridge, face, spec) {
                    out.insert((bridge, face, free));
                }
            }
        }
    }
    out
}

/// Random belief grid with all five states.
pub fn random_grid(rng: &mut ChaCha8Rng, dims: [i32; 3]) -> SemanticOccupancyGrid {
    let b = Bounds::new(VoxelIdx::new(0, 0, 0), VoxelIdx::new(dims[0] - 1, dims[1] - 1, dims[2] - 1));
    let mut g = SemanticOccupancyGrid::new(1.0, b);
    for v in b.iter() {
        let r: f64 = rng.gen();
        let s = if r < 0.80 {
            CellState::Free
        } else if r < 0.86 {
            CellState::Obstacle
        } else if r < 0.94 {
            CellState::BridgeNotInspected
        } else if r < 0.97 {
            CellState::BridgeInspected
        } else {
            CellState::Unknown
        };
        g.set_state(v, s);
    }
    g
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shortest path lengths from `src` by Bellman-Ford relaxation over free voxels, where a
/// move between 26-neighbors is allowed only if every voxel of their bounding box is free.
pub fn brute_shortest(grid: &SemanticOccupancyGrid, src: VoxelIdx) -> Vec<(VoxelIdx, f64)> {
    let b = grid.bounds();
    let cells: Vec<VoxelIdx> = b.iter().collect();
    let free = |v: VoxelIdx| grid.state(v) == CellState::Free;
    let mut dist: std::collections::BTreeMap<VoxelIdx, f64> =
        cells.iter().filter(|v| free(**v)).map(|v| (*v, f64::INFINITY)).collect();
    if !free(src) {
        return Vec::new();
    }
    dist.insert(src, 0.0);
    loop {
        let mut changed = false;
        for &u in &cells {
            let du = match dist.get(&u) {
                Some(d) if d.is_finite() => *d,
                _ => continue,
            };
            for dx in -1..=1 {
                for dy in -1..=1 {
                    for dz in -1..=1 {
                        if (dx, dy, dz) == (0, 0, 0) {
                            continue;
                        }
                        let v = u.offset(dx, dy, dz);
                        if !free(v) {
                            continue;
                        }
                        let mut ok = true;
                        for x in u.x.min(v.x)..=u.x.max(v.x) {
                            for y in u.y.min(v.y)..=u.y.max(v.y) {
                                for z in u.z.min(v.z)..=u.z.max(v.z) {
                                    ok &= free(VoxelIdx::new(x, y, z));
                                }
                            }
                        }
                        if !ok {
                            continue;
                        }
                        let w = ((dx * dx + dy * dy + dz * dz) as f64).sqrt() * grid.voxel_size();
                        if du + w < dist[&v] - 1e-12 {
                            dist.insert(v, du + w);
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    dist.into_iter().collect()
}

/// A deck on two piers over an obstacle ground slab, padded for viewpoints.
pub fn deck_world() -> WorldModel {
    let shapes = [
        (BoxShape::new([-4.0, -6.0, 0.0], [24.0, 10.0, 1.0]), GroundTruthLabel::Obstacle),
        (BoxShape::new([0.0, 0.0, 6.0], [20.0, 4.0, 7.0]), GroundTruthLabel::Bridge),
        (BoxShape::new([2.0, 1.0, 1.0], [3.0, 2.0, 6.0]), GroundTruthLabel::Bridge),
        (BoxShape::new([17.0, 1.0, 1.0], [18.0, 2.0, 6.0]), GroundTruthLabel::Bridge),
    ];
    let w = world_from_primitives(&shapes, 1.0).unwrap();
    let b = w.bounds();
    w.with_bounds(Bounds::new(b.min.offset(-11, -11, 0), b.max.offset(11, 11, 11)))
        .unwrap()
}

pub const DECK_SCENARIO: &str = r#"
name = "deck"
voxel_size = 1.0
flight_speed = 2.0
scan_period = 1.0
rng_seed = 5

[start_pose]
position = [10.5, -7.5, 4.5]

[view]
apex_deg = 0.0
d_min = 2.0
d_max = 10.0

[bounding_box]
min = [-4.0, -8.0, 1.0]
max = [24.0, 12.0, 12.0]

[[shapes]]
label = "obstacle"
min = [-4.0, -6.0, 0.0]
max = [24.0, 10.0, 1.0]

[[shapes]]
label = "bridge"
min = [0.0, 0.0, 6.0]
max = [20.0, 4.0, 7.0]

[[shapes]]
label = "bridge"
min = [2.0, 1.0, 1.0]
max = [3.0, 2.0, 6.0]

[[shapes]]
label = "bridge"
min = [17.0, 1.0, 1.0]
max = [18.0, 2.0, 6.0]
"#;
