//! Integer voxel lattice shared by the world model, the belief grid and the planners.
//!
//! Voxel `(i, j, k)` covers the half-open cube `[i, i+1) x [j, j+1) x [k, k+1)` scaled by
//! the voxel size, so its center sits at `(i + 0.5) * voxel_size` on each axis.

use std::fmt;

use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};

/// Position in meters.
pub type Position = Point3<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VoxelIdx {
    pub x: i32,
    pub y: i32,
    pub z: i32,
}

impl VoxelIdx {
    pub const fn new(x: i32, y: i32, z: i32) -> Self {
        Self { x, y, z }
    }

    pub fn offset(self, dx: i32, dy: i32, dz: i32) -> Self {
        Self::new(self.x + dx, self.y + dy, self.z + dz)
    }

    pub fn axis(self, axis: usize) -> i32 {
        match axis {
            0 => self.x,
            1 => self.y,
            _ => self.z,
        }
    }

    pub fn with_axis(mut self, axis: usize, value: i32) -> Self {
        match axis {
            0 => self.x = value,
            1 => self.y = value,
            _ => self.z = value,
        }
        self
    }

    /// Voxel containing `p`.
    pub fn containing(p: &Position, voxel_size: f64) -> Self {
        Self::new(
            (p.x / voxel_size).floor() as i32,
            (p.y / voxel_size).floor() as i32,
            (p.z / voxel_size).floor() as i32,
        )
    }

    pub fn center(self, voxel_size: f64) -> Position {
        Position::new(
            (f64::from(self.x) + 0.5) * voxel_size,
            (f64::from(self.y) + 0.5) * voxel_size,
            (f64::from(self.z) + 0.5) * voxel_size,
        )
    }

    pub fn face_neighbors(self) -> impl Iterator<Item = VoxelIdx> {
        Face::ALL.into_iter().map(move |f| f.neighbor(self))
    }

    /// The 26 voxels sharing a face, edge or corner with `self`.
    pub fn neighbors26(self) -> impl Iterator<Item = VoxelIdx> {
        (-1..=1).flat_map(move |dx| {
            (-1..=1).flat_map(move |dy| {
                (-1..=1)
                    .filter(move |&dz| dx != 0 || dy != 0 || dz != 0)
                    .map(move |dz| self.offset(dx, dy, dz))
            })
        })
    }

    /// Chebyshev distance in voxels.
    pub fn chebyshev(self, other: VoxelIdx) -> i32 {
        (self.x - other.x)
            .abs()
            .max((self.y - other.y).abs())
            .max((self.z - other.z).abs())
    }
}

impl fmt::Display for VoxelIdx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// One of the six axis-aligned faces of a voxel, named by its outward normal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Face {
    PosX,
    NegX,
    PosY,
    NegY,
    PosZ,
    NegZ,
}

impl Face {
    pub const ALL: [Face; 6] = [
        Face::PosX,
        Face::NegX,
        Face::PosY,
        Face::NegY,
        Face::PosZ,
        Face::NegZ,
    ];

    pub fn axis(self) -> usize {
        match self {
            Face::PosX | Face::NegX => 0,
            Face::PosY | Face::NegY => 1,
            Face::PosZ | Face::NegZ => 2,
        }
    }

    pub fn sign(self) -> i32 {
        match self {
            Face::PosX | Face::PosY | Face::PosZ => 1,
            _ => -1,
        }
    }

    pub fn normal(self) -> Vector3<f64> {
        let mut n = Vector3::zeros();
        n[self.axis()] = f64::from(self.sign());
        n
    }

    /// The voxel across this face.
    pub fn neighbor(self, v: VoxelIdx) -> VoxelIdx {
        let axis = self.axis();
        v.with_axis(axis, v.axis(axis) + self.sign())
    }

    pub fn center(self, v: VoxelIdx, voxel_size: f64) -> Position {
        let mut c = v.center(voxel_size);
        c[self.axis()] += 0.5 * voxel_size * f64::from(self.sign());
        c
    }

    pub fn name(self) -> &'static str {
        match self {
            Face::PosX => "+x",
            Face::NegX => "-x",
            Face::PosY => "+y",
            Face::NegY => "-y",
            Face::PosZ => "+z",
            Face::NegZ => "-z",
        }
    }
}

/// Position plus heading (radians about +z).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose {
    pub position: Position,
    pub yaw: f64,
}

impl Pose {
    pub fn new(position: Position, yaw: f64) -> Self {
        Self { position, yaw }
    }
}

/// Inclusive integer extents of a voxel block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    pub min: VoxelIdx,
    pub max: VoxelIdx,
}

impl Bounds {
    pub fn new(min: VoxelIdx, max: VoxelIdx) -> Self {
        Self { min, max }
    }

    pub fn single(v: VoxelIdx) -> Self {
        Self { min: v, max: v }
    }

    pub fn contains(&self, v: VoxelIdx) -> bool {
        v.x >= self.min.x
            && v.y >= self.min.y
            && v.z >= self.min.z
            && v.x <= self.max.x
            && v.y <= self.max.y
            && v.z <= self.max.z
    }

    pub fn dims(&self) -> [usize; 3] {
        [
            (self.max.x - self.min.x + 1).max(0) as usize,
            (self.max.y - self.min.y + 1).max(0) as usize,
            (self.max.z - self.min.z + 1).max(0) as usize,
        ]
    }

    pub fn len(&self) -> usize {
        let [a, b, c] = self.dims();
        a * b * c
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major index with z fastest; ascending linear order equals `VoxelIdx` order.
    pub fn linear(&self, v: VoxelIdx) -> Option<usize> {
        if !self.contains(v) {
            return None;
        }
        let [_, ny, nz] = self.dims();
        let (x, y, z) = (
            (v.x - self.min.x) as usize,
            (v.y - self.min.y) as usize,
            (v.z - self.min.z) as usize,
        );
        Some((x * ny + y) * nz + z)
    }

    pub fn voxel_at(&self, linear: usize) -> VoxelIdx {
        let [_, ny, nz] = self.dims();
        let z = linear % nz;
        let y = (linear / nz) % ny;
        let x = linear / (nz * ny);
        VoxelIdx::new(
            self.min.x + x as i32,
            self.min.y + y as i32,
            self.min.z + z as i32,
        )
    }

    pub fn iter(&self) -> impl Iterator<Item = VoxelIdx> + '_ {
        (0..self.len()).map(move |i| self.voxel_at(i))
    }

    pub fn union(&self, other: &Bounds) -> Bounds {
        Bounds {
            min: VoxelIdx::new(
                self.min.x.min(other.min.x),
                self.min.y.min(other.min.y),
                self.min.z.min(other.min.z),
            ),
            max: VoxelIdx::new(
                self.max.x.max(other.max.x),
                self.max.y.max(other.max.y),
                self.max.z.max(other.max.z),
            ),
        }
    }

    pub fn include(&self, v: VoxelIdx) -> Bounds {
        self.union(&Bounds::single(v))
    }

    pub fn intersect(&self, other: &Bounds) -> Bounds {
        Bounds {
            min: VoxelIdx::new(
                self.min.x.max(other.min.x),
                self.min.y.max(other.min.y),
                self.min.z.max(other.min.z),
            ),
            max: VoxelIdx::new(
                self.max.x.min(other.max.x),
                self.max.y.min(other.max.y),
                self.max.z.min(other.max.z),
            ),
        }
    }

    /// Grows the block; `below` applies to -z, `margin` to every other side.
    pub fn grown(&self, margin: i32, below: i32) -> Bounds {
        Bounds {
            min: self.min.offset(-margin, -margin, -below),
            max: self.max.offset(margin, margin, margin),
        }
    }

    /// Voxels whose centers lie in the closed metric box `[lo, hi]`.
    pub fn centers_within(lo: &Position, hi: &Position, voxel_size: f64) -> Option<Bounds> {
        let first = |l: f64| (l / voxel_size - 0.5 - 1e-9).ceil() as i32;
        let last = |h: f64| (h / voxel_size - 0.5 + 1e-9).floor() as i32;
        let b = Bounds {
            min: VoxelIdx::new(first(lo.x), first(lo.y), first(lo.z)),
            max: VoxelIdx::new(last(hi.x), last(hi.y), last(hi.z)),
        };
        (b.min.x <= b.max.x && b.min.y <= b.max.y && b.min.z <= b.max.z).then_some(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_order_matches_voxel_order() {
        let b = Bounds::new(VoxelIdx::new(-2, 0, 1), VoxelIdx::new(1, 2, 3));
        let voxels: Vec<_> = b.iter().collect();
        let mut sorted = voxels.clone();
        sorted.sort();
        assert_eq!(voxels, sorted);
        for (i, v) in voxels.iter().enumerate() {
            assert_eq!(b.linear(*v), Some(i));
        }
        assert_eq!(voxels.len(), 4 * 3 * 3);
    }

    #[test]
    fn face_center_sits_on_the_shared_face() {
        let v = VoxelIdx::new(0, 0, 0);
        let c = Face::PosX.center(v, 1.0);
        assert_eq!(c, Position::new(1.0, 0.5, 0.5));
        assert_eq!(Face::NegZ.center(v, 2.0), Position::new(1.0, 1.0, 0.0));
        assert_eq!(Face::PosX.neighbor(v), VoxelIdx::new(1, 0, 0));
    }

    #[test]
    fn containing_floors_negative_coordinates() {
        assert_eq!(
            VoxelIdx::containing(&Position::new(-0.1, 0.0, 2.9), 1.0),
            VoxelIdx::new(-1, 0, 2)
        );
    }

    #[test]
    fn centers_within_box() {
        let b = Bounds::centers_within(
            &Position::new(0.0, 0.0, 0.0),
            &Position::new(4.0, 1.0, 1.0),
            1.0,
        )
        .unwrap();
        assert_eq!(b.len(), 4);
        assert!(Bounds::centers_within(
            &Position::new(0.1, 0.1, 0.1),
            &Position::new(0.4, 0.4, 0.4),
            1.0
        )
        .is_none());
    }

    #[test]
    fn neighbors26_count() {
        assert_eq!(VoxelIdx::new(0, 0, 0).neighbors26().count(), 26);
    }
}
