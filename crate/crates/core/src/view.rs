//! The viewing predicate and candidate viewpoint enumeration.
//!
//! A bridge-voxel face is viewable from a free voxel when the face center lies within the
//! viewing-distance band of the free voxel center, the incidence angle about the face
//! normal is within half the apex angle (plus `angle_tol`), the line of sight crosses only
//! known-free voxels, and the voxel just outside the face is not occupied.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::mapping::{CellState, SemanticOccupancyGrid};
use crate::raycast::segment_supercover;
use crate::voxel::{Bounds, Face, Position, VoxelIdx};

const DIST_EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViewSpec {
    /// Full apex angle of the viewing cone, degrees.
    #[serde(rename = "apex_deg")]
    pub apex_angle: f64,
    pub d_min: f64,
    pub d_max: f64,
    /// Extra angular slack, degrees.
    #[serde(rename = "angle_tol_deg", default)]
    pub angle_tol: f64,
}

impl Default for ViewSpec {
    fn default() -> Self {
        Self {
            apex_angle: 0.0,
            d_min: 2.0,
            d_max: 10.0,
            angle_tol: 0.0,
        }
    }
}

impl ViewSpec {
    pub fn new(apex_angle: f64, d_min: f64, d_max: f64, angle_tol: f64) -> Result<Self, String> {
        let s = Self {
            apex_angle,
            d_min,
            d_max,
            angle_tol,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..180.0).contains(&self.apex_angle) {
            return Err(format!("apex angle must lie in [0, 180), got {}", self.apex_angle));
        }
        if !(self.d_min > 0.0 && self.d_min < self.d_max) {
            return Err(format!(
                "need 0 < d_min < d_max, got d_min={} d_max={}",
                self.d_min, self.d_max
            ));
        }
        if !(self.angle_tol >= 0.0) {
            return Err(format!("angle_tol must be non-negative, got {}", self.angle_tol));
        }
        Ok(())
    }

    /// Largest admissible incidence angle about the face normal, degrees.
    pub fn half_angle(&self) -> f64 {
        self.apex_angle / 2.0 + self.angle_tol
    }
}

/// Pure geometric part of the predicate: distance band and incidence cone.
pub fn view_geometry(viewpoint: &Position, face_center: &Position, face: Face, spec: &ViewSpec) -> bool {
    let w = viewpoint - face_center;
    let dist = w.norm();
    if dist < spec.d_min - DIST_EPS || dist > spec.d_max + DIST_EPS {
        return false;
    }
    let axis = face.axis();
    let axial = w[axis] * f64::from(face.sign());
    let lateral_sq: f64 = (0..3).filter(|&i| i != axis).map(|i| w[i] * w[i]).sum();
    let theta = spec.half_angle();
    if theta < 90.0 {
        let reach = axial * theta.to_radians().tan();
        // lateral_sq is exactly zero on-axis, so a zero cone admits exact alignments only
        axial > 0.0 && lateral_sq <= reach * reach * (1.0 + 1e-12)
    } else {
        lateral_sq.sqrt().atan2(axial).to_degrees() <= theta + 1e-9
    }
}

/// The viewing predicate on the belief grid.
pub fn is_viewable(
    grid: &SemanticOccupancyGrid,
    free_voxel: VoxelIdx,
    bridge_voxel: VoxelIdx,
    face: Face,
    spec: &ViewSpec,
) -> bool {
    if grid.state(free_voxel) != CellState::Free || !grid.state(bridge_voxel).is_bridge() {
        return false;
    }
    if grid.state(face.neighbor(bridge_voxel)).is_occupied() {
        return false;
    }
    let vs = grid.voxel_size();
    let from = free_voxel.center(vs);
    let to = face.center(bridge_voxel, vs);
    if !view_geometry(&from, &to, face, spec) {
        return false;
    }
    line_of_sight(grid, &from, &to, free_voxel, bridge_voxel)
}

fn line_of_sight(
    grid: &SemanticOccupancyGrid,
    from: &Position,
    to: &Position,
    free_voxel: VoxelIdx,
    target: VoxelIdx,
) -> bool {
    segment_supercover(from, to, grid.voxel_size(), |v| {
        v == target || v == free_voxel || grid.state(v) == CellState::Free
    })
}

/// Block of voxels whose centers may satisfy `view_geometry` for this face.
fn search_region(grid: &SemanticOccupancyGrid, bridge_voxel: VoxelIdx, face: Face, spec: &ViewSpec) -> Option<Bounds> {
    let vs = grid.voxel_size();
    let c = face.center(bridge_voxel, vs);
    let theta = spec.half_angle();
    let (lateral, axial_back) = if theta < 90.0 {
        (spec.d_max * theta.to_radians().sin(), 0.0)
    } else {
        (spec.d_max, spec.d_max)
    };
    let axis = face.axis();
    let mut lo = Position::new(c.x - lateral, c.y - lateral, c.z - lateral);
    let mut hi = Position::new(c.x + lateral, c.y + lateral, c.z + lateral);
    if face.sign() > 0 {
        lo[axis] = c[axis] - axial_back;
        hi[axis] = c[axis] + spec.d_max;
    } else {
        lo[axis] = c[axis] - spec.d_max;
        hi[axis] = c[axis] + axial_back;
    }
    let region = Bounds::centers_within(&lo, &hi, vs)?.intersect(&grid.bounds());
    (!region.is_empty()
        && region.min.x <= region.max.x
        && region.min.y <= region.max.y
        && region.min.z <= region.max.z)
        .then_some(region)
}

/// Free voxels, ascending, from which `face` of `bridge_voxel` is viewable.
pub fn face_viewpoints(
    grid: &SemanticOccupancyGrid,
    bridge_voxel: VoxelIdx,
    face: Face,
    spec: &ViewSpec,
) -> Vec<VoxelIdx> {
    let Some(region) = search_region(grid, bridge_voxel, face, spec) else {
        return Vec::new();
    };
    if grid.state(face.neighbor(bridge_voxel)).is_occupied() {
        return Vec::new();
    }
    region
        .iter()
        .filter(|&f| is_viewable(grid, f, bridge_voxel, face, spec))
        .collect()
}

pub fn has_any_viewpoint(grid: &SemanticOccupancyGrid, bridge_voxel: VoxelIdx, spec: &ViewSpec) -> bool {
    Face::ALL.into_iter().any(|face| {
        search_region(grid, bridge_voxel, face, spec).is_some_and(|region| {
            !grid.state(face.neighbor(bridge_voxel)).is_occupied()
                && region
                    .iter()
                    .any(|f| is_viewable(grid, f, bridge_voxel, face, spec))
        })
    })
}

/// A (free voxel, bridge voxel, face) triple satisfying the viewing predicate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Candidate {
    pub free_voxel: VoxelIdx,
    pub bridge_voxel: VoxelIdx,
    pub face: Face,
    /// Center of the free voxel.
    pub position: Position,
    /// Unit vector from the viewpoint towards the face center.
    pub aim: Vector3<f64>,
}

impl Candidate {
    pub fn new(grid: &SemanticOccupancyGrid, free_voxel: VoxelIdx, bridge_voxel: VoxelIdx, face: Face) -> Self {
        let vs = grid.voxel_size();
        let position = free_voxel.center(vs);
        let aim = (face.center(bridge_voxel, vs) - position).normalize();
        Self {
            free_voxel,
            bridge_voxel,
            face,
            position,
            aim,
        }
    }

    pub fn yaw(&self) -> f64 {
        self.aim.y.atan2(self.aim.x)
    }
}

/// All candidates for bridge voxels awaiting inspection, ordered by bridge voxel, face,
/// then free voxel.
pub fn generate_viewpoints(grid: &SemanticOccupancyGrid, spec: &ViewSpec) -> Vec<Candidate> {
    let mut out = Vec::new();
    for b in grid.voxels_in(CellState::BridgeNotInspected) {
        for face in Face::ALL {
            for f in face_viewpoints(grid, b, face, spec) {
                out.push(Candidate::new(grid, f, b, face));
            }
        }
    }
    out
}

/// Bridge voxels awaiting inspection, with the face, that are viewable from `free_voxel`.
pub fn viewable_from(
    grid: &SemanticOccupancyGrid,
    free_voxel: VoxelIdx,
    spec: &ViewSpec,
) -> Vec<(VoxelIdx, Face)> {
    if grid.state(free_voxel) != CellState::Free {
        return Vec::new();
    }
    let vs = grid.voxel_size();
    let r = (spec.d_max / vs).ceil() as i32 + 1;
    let block = Bounds::new(free_voxel.offset(-r, -r, -r), free_voxel.offset(r, r, r))
        .intersect(&grid.bounds());
    let mut out = Vec::new();
    for b in block.iter() {
        if grid.state(b) != CellState::BridgeNotInspected {
            continue;
        }
        for face in Face::ALL {
            if is_viewable(grid, free_voxel, b, face, spec) {
                out.push((b, face));
            }
        }
    }
    out
}
