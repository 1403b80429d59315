//! Uniform-grid ray traversal (Amanatides & Woo) and a conservative segment supercover.

use nalgebra::Vector3;

use crate::voxel::{Bounds, Position, VoxelIdx};

/// One voxel pierced by a ray, with the ray parameters (meters along the unit direction)
/// at which the ray enters and leaves it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RayStep {
    pub voxel: VoxelIdx,
    pub t_enter: f64,
    pub t_exit: f64,
}

/// Front-to-back walk over every voxel a ray passes through, clipped to `bounds` and to
/// `limit` meters. Ties between axes step the lowest axis first, so the walk is
/// deterministic for identical inputs.
#[derive(Clone, Debug)]
pub struct RayTraversal {
    voxel: VoxelIdx,
    step: [i32; 3],
    t_max: [f64; 3],
    t_delta: [f64; 3],
    t_enter: f64,
    limit: f64,
    bounds: Bounds,
    done: bool,
}

impl RayTraversal {
    pub fn new(
        origin: &Position,
        dir: &Vector3<f64>,
        limit: f64,
        voxel_size: f64,
        bounds: Bounds,
    ) -> Self {
        let voxel = VoxelIdx::containing(origin, voxel_size);
        let mut step = [0; 3];
        let mut t_max = [f64::INFINITY; 3];
        let mut t_delta = [f64::INFINITY; 3];
        for axis in 0..3 {
            let d = dir[axis];
            let cell = f64::from(voxel.axis(axis));
            if d > 0.0 {
                step[axis] = 1;
                t_max[axis] = ((cell + 1.0) * voxel_size - origin[axis]) / d;
                t_delta[axis] = voxel_size / d;
            } else if d < 0.0 {
                step[axis] = -1;
                t_max[axis] = (cell * voxel_size - origin[axis]) / d;
                t_delta[axis] = -voxel_size / d;
            }
        }
        Self {
            voxel,
            step,
            t_max,
            t_delta,
            t_enter: 0.0,
            limit,
            bounds,
            done: false,
        }
    }
}

impl Iterator for RayTraversal {
    type Item = RayStep;

    fn next(&mut self) -> Option<RayStep> {
        if self.done || self.t_enter > self.limit || !self.bounds.contains(self.voxel) {
            self.done = true;
            return None;
        }
        let mut axis = 0;
        for a in 1..3 {
            if self.t_max[a] < self.t_max[axis] {
                axis = a;
            }
        }
        let t_exit = self.t_max[axis];
        let item = RayStep {
            voxel: self.voxel,
            t_enter: self.t_enter,
            t_exit,
        };
        if !t_exit.is_finite() {
            // zero direction: only the origin voxel
            self.done = true;
            return Some(item);
        }
        self.voxel = self
            .voxel
            .with_axis(axis, self.voxel.axis(axis) + self.step[axis]);
        self.t_enter = t_exit;
        self.t_max[axis] += self.t_delta[axis];
        Some(item)
    }
}

/// Relative slack (in segment parameter units) under which two boundary crossings count as
/// simultaneous, i.e. the segment passes through a voxel edge or corner.
const TIE_EPS: f64 = 1e-9;

/// Visits every voxel whose closed cube the segment `a -> b` touches, including voxels only
/// grazed at an edge or corner. `visit` returns `false` to stop early; the function returns
/// `false` iff it was stopped.
pub fn segment_supercover(
    a: &Position,
    b: &Position,
    voxel_size: f64,
    mut visit: impl FnMut(VoxelIdx) -> bool,
) -> bool {
    let d = b - a;
    let mut cur = VoxelIdx::containing(a, voxel_size);
    if !visit(cur) {
        return false;
    }
    let mut step = [0; 3];
    let mut t_max = [f64::INFINITY; 3];
    let mut t_delta = [f64::INFINITY; 3];
    for axis in 0..3 {
        let da = d[axis];
        let cell = f64::from(cur.axis(axis));
        if da > 0.0 {
            step[axis] = 1;
            t_max[axis] = ((cell + 1.0) * voxel_size - a[axis]) / da;
            t_delta[axis] = voxel_size / da;
        } else if da < 0.0 {
            step[axis] = -1;
            t_max[axis] = (cell * voxel_size - a[axis]) / da;
            t_delta[axis] = -voxel_size / da;
        }
    }
    loop {
        let t_min = t_max[0].min(t_max[1]).min(t_max[2]);
        if t_min > 1.0 + TIE_EPS {
            return true;
        }
        let tied: Vec<usize> = (0..3).filter(|&i| t_max[i] <= t_min + TIE_EPS).collect();
        let combos = 1usize << tied.len();
        for mask in 1..combos {
            let mut v = cur;
            for (bit, &axis) in tied.iter().enumerate() {
                if mask & (1 << bit) != 0 {
                    v = v.with_axis(axis, v.axis(axis) + step[axis]);
                }
            }
            if !visit(v) {
                return false;
            }
        }
        for &axis in &tied {
            cur = cur.with_axis(axis, cur.axis(axis) + step[axis]);
            t_max[axis] += t_delta[axis];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big() -> Bounds {
        Bounds::new(VoxelIdx::new(-50, -50, -50), VoxelIdx::new(50, 50, 50))
    }

    #[test]
    fn axis_ray_visits_consecutive_voxels() {
        let o = Position::new(0.5, 0.5, 0.5);
        let steps: Vec<_> =
            RayTraversal::new(&o, &Vector3::new(1.0, 0.0, 0.0), 4.0, 1.0, big()).collect();
        let xs: Vec<i32> = steps.iter().map(|s| s.voxel.x).collect();
        assert_eq!(xs, vec![0, 1, 2, 3, 4]);
        assert_eq!(steps[1].t_enter, 0.5);
        assert_eq!(steps[4].t_enter, 3.5);
    }

    #[test]
    fn traversal_stops_at_bounds() {
        let b = Bounds::new(VoxelIdx::new(0, 0, 0), VoxelIdx::new(2, 0, 0));
        let o = Position::new(0.5, 0.5, 0.5);
        let n = RayTraversal::new(&o, &Vector3::new(1.0, 0.0, 0.0), 100.0, 1.0, b).count();
        assert_eq!(n, 3);
    }

    #[test]
    fn traversal_is_face_connected_and_monotone() {
        let o = Position::new(0.3, 0.7, 0.1);
        let dir = Vector3::new(0.6, -0.3, 0.74).normalize();
        let steps: Vec<_> = RayTraversal::new(&o, &dir, 20.0, 1.0, big()).collect();
        for w in steps.windows(2) {
            let (a, b) = (w[0].voxel, w[1].voxel);
            let manhattan = (a.x - b.x).abs() + (a.y - b.y).abs() + (a.z - b.z).abs();
            assert_eq!(manhattan, 1);
            assert!(w[1].t_enter >= w[0].t_enter);
            assert_eq!(w[0].t_exit, w[1].t_enter);
        }
    }

    #[test]
    fn supercover_includes_both_voxels_at_an_edge_crossing() {
        let a = Position::new(0.5, 0.5, 0.5);
        let b = Position::new(2.5, 2.5, 0.5);
        let mut seen = Vec::new();
        segment_supercover(&a, &b, 1.0, |v| {
            seen.push(v);
            true
        });
        for v in [
            VoxelIdx::new(0, 0, 0),
            VoxelIdx::new(1, 0, 0),
            VoxelIdx::new(0, 1, 0),
            VoxelIdx::new(1, 1, 0),
            VoxelIdx::new(2, 2, 0),
        ] {
            assert!(seen.contains(&v), "missing {v}");
        }
    }

    #[test]
    fn supercover_stops_early() {
        let a = Position::new(0.5, 0.5, 0.5);
        let b = Position::new(5.5, 0.5, 0.5);
        let mut n = 0;
        let finished = segment_supercover(&a, &b, 1.0, |_| {
            n += 1;
            n < 3
        });
        assert!(!finished);
        assert_eq!(n, 3);
    }
}
