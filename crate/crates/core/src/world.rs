//! Ground-truth environments: voxelized bridges and distractor obstacles.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::WorldError;
use crate::mapping::SemanticOccupancyGrid;
use crate::view::{self, ViewSpec};
use crate::voxel::{Bounds, Position, VoxelIdx};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroundTruthLabel {
    Bridge,
    Obstacle,
}

impl GroundTruthLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            GroundTruthLabel::Bridge => "bridge",
            GroundTruthLabel::Obstacle => "obstacle",
        }
    }
}

/// Axis-aligned box in meters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxShape {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl BoxShape {
    pub fn new(min: [f64; 3], max: [f64; 3]) -> Self {
        Self { min, max }
    }

    pub fn has_positive_extent(&self) -> bool {
        (0..3).all(|i| self.max[i] > self.min[i] && self.min[i].is_finite() && self.max[i].is_finite())
    }

    pub fn contains(&self, p: &Position) -> bool {
        (0..3).all(|i| p[i] >= self.min[i] && p[i] <= self.max[i])
    }

    /// Voxels whose centers fall inside the box.
    pub fn covered_voxels(&self, voxel_size: f64) -> Option<Bounds> {
        Bounds::centers_within(
            &Position::new(self.min[0], self.min[1], self.min[2]),
            &Position::new(self.max[0], self.max[1], self.max[2]),
            voxel_size,
        )
    }
}

/// Immutable voxelized ground truth. Cells are stored densely over `bounds`; empty space
/// is simply the absence of a label.
#[derive(Clone, Debug, PartialEq)]
pub struct WorldModel {
    voxel_size: f64,
    bounds: Bounds,
    cells: Vec<Option<GroundTruthLabel>>,
}

/// Voxelizes labeled boxes. A voxel is labeled when its center lies inside a box; Bridge
/// wins where Bridge and Obstacle boxes overlap. Bounds are the tight extent of the
/// labeled voxels.
pub fn world_from_primitives(
    shapes: &[(BoxShape, GroundTruthLabel)],
    voxel_size: f64,
) -> Result<WorldModel, WorldError> {
    if shapes.is_empty() {
        return Err(WorldError::EmptyWorld);
    }
    if !(voxel_size > 0.0 && voxel_size.is_finite()) {
        return Err(WorldError::InvalidVoxelSize(voxel_size));
    }
    let mut covered = Vec::with_capacity(shapes.len());
    for (i, (shape, label)) in shapes.iter().enumerate() {
        if !shape.has_positive_extent() {
            return Err(WorldError::DegenerateShape(i));
        }
        if let Some(b) = shape.covered_voxels(voxel_size) {
            covered.push((b, *label));
        }
    }
    let bounds = covered
        .iter()
        .map(|(b, _)| *b)
        .reduce(|a, b| a.union(&b))
        .ok_or(WorldError::NoVoxels)?;
    let mut cells = vec![None; bounds.len()];
    for (b, label) in &covered {
        for v in b.iter() {
            let slot = &mut cells[bounds.linear(v).expect("inside union")];
            *slot = match (*slot, label) {
                (Some(GroundTruthLabel::Bridge), _) | (_, GroundTruthLabel::Bridge) => {
                    Some(GroundTruthLabel::Bridge)
                }
                _ => Some(GroundTruthLabel::Obstacle),
            };
        }
    }
    Ok(WorldModel {
        voxel_size,
        bounds,
        cells,
    })
}

impl WorldModel {
    pub fn voxel_size(&self) -> f64 {
        self.voxel_size
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    pub fn label(&self, v: VoxelIdx) -> Option<GroundTruthLabel> {
        self.bounds.linear(v).and_then(|i| self.cells[i])
    }

    pub fn is_occupied(&self, v: VoxelIdx) -> bool {
        self.label(v).is_some()
    }

    /// Labeled cells in ascending voxel order.
    pub fn cells(&self) -> impl Iterator<Item = (VoxelIdx, GroundTruthLabel)> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.map(|l| (self.bounds.voxel_at(i), l)))
    }

    pub fn count(&self, label: GroundTruthLabel) -> usize {
        self.cells.iter().filter(|c| **c == Some(label)).count()
    }

    pub fn bridge_voxels(&self) -> impl Iterator<Item = VoxelIdx> + '_ {
        self.cells()
            .filter(|(_, l)| *l == GroundTruthLabel::Bridge)
            .map(|(v, _)| v)
    }

    /// Tight extent of the labeled cells.
    pub fn occupied_extent(&self) -> Option<Bounds> {
        self.cells().map(|(v, _)| Bounds::single(v)).reduce(|a, b| a.union(&b))
    }

    /// Same cells over a different block; `bounds` must contain every labeled cell.
    pub fn with_bounds(&self, bounds: Bounds) -> Result<WorldModel, WorldError> {
        let mut cells = vec![None; bounds.len()];
        for (v, label) in self.cells() {
            let i = bounds.linear(v).ok_or(WorldError::CellOutOfBounds(v))?;
            cells[i] = Some(label);
        }
        Ok(WorldModel {
            voxel_size: self.voxel_size,
            bounds,
            cells,
        })
    }

    /// Cells as maximal runs along z, each one voxel wide in x and y; enough to rebuild
    /// the exact cell map with `world_from_primitives`.
    pub fn to_primitives(&self) -> Vec<(BoxShape, GroundTruthLabel)> {
        let vs = self.voxel_size;
        let mut out = Vec::new();
        let mut run: Option<(VoxelIdx, VoxelIdx, GroundTruthLabel)> = None;
        let flush = |run: (VoxelIdx, VoxelIdx, GroundTruthLabel), out: &mut Vec<_>| {
            let (a, b, l) = run;
            out.push((
                BoxShape::new(
                    [f64::from(a.x) * vs, f64::from(a.y) * vs, f64::from(a.z) * vs],
                    [
                        f64::from(b.x + 1) * vs,
                        f64::from(b.y + 1) * vs,
                        f64::from(b.z + 1) * vs,
                    ],
                ),
                l,
            ));
        };
        for (v, l) in self.cells() {
            run = match run {
                Some((a, b, rl)) if rl == l && b.x == v.x && b.y == v.y && b.z + 1 == v.z => {
                    Some((a, v, rl))
                }
                Some(r) => {
                    flush(r, &mut out);
                    Some((v, v, l))
                }
                None => Some((v, v, l)),
            };
        }
        if let Some(r) = run {
            flush(r, &mut out);
        }
        out
    }
}

/// Every Bridge voxel with at least one face viewable, under full ground-truth knowledge,
/// from some empty voxel inside the world bounds. This is the denominator of the
/// inspection percentage.
pub fn inspectable_set(world: &WorldModel, spec: &ViewSpec) -> BTreeSet<VoxelIdx> {
    let grid = SemanticOccupancyGrid::from_ground_truth(world);
    world
        .bridge_voxels()
        .filter(|&b| view::has_any_viewpoint(&grid, b, spec))
        .collect()
}
