//! Nearest-frontier exploration with inspection counted along the way.
//!
//! The baseline never aims at bridge faces. It flies to the closest frontier by path
//! length, scanning like the inspection planner, and at every waypoint it credits every
//! face the viewing predicate admits from there. Frontiers that remain after a visit
//! (for instance cells directly above or below the sensor's vertical field of view) are
//! not revisited, and unreachable frontiers are ignored.

use crate::error::MissionError;
use crate::executor::{Mission, MissionOptions};
use crate::log::{MissionLog, Phase};
use crate::mapping::{CellState, SemanticOccupancyGrid};
use crate::scenario::ScenarioConfig;
use crate::voxel::{Bounds, VoxelIdx};
use crate::world::WorldModel;

/// Free voxels inside `region` with at least one Unknown face neighbor, ascending.
pub fn detect_frontiers(grid: &SemanticOccupancyGrid, region: &Bounds) -> Vec<VoxelIdx> {
    let region = region.intersect(&grid.bounds());
    if region.min.x > region.max.x || region.min.y > region.max.y || region.min.z > region.max.z {
        return Vec::new();
    }
    region
        .iter()
        .filter(|&v| {
            grid.state(v) == CellState::Free
                && v.face_neighbors()
                    .any(|n| grid.bounds().contains(n) && grid.state(n) == CellState::Unknown)
        })
        .collect()
}

pub fn run_frontier_mission(
    world: &WorldModel,
    config: &ScenarioConfig,
    options: MissionOptions,
) -> Result<MissionLog, MissionError> {
    let mut m = Mission::new(world, config, options);
    let start = m.pose_voxel();
    if !m.explore_box().contains(start) {
        return Err(MissionError::StartOutsideBox(start));
    }
    m.set_phase(Phase::Explore);
    m.scan()?;
    m.credit_here();
    m.record();
    for _ in 0..options.max_iterations.saturating_mul(100) {
        if !m.explore_step(true)? {
            break;
        }
    }
    m.finish();
    Ok(m.log)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_grid_has_no_frontiers() {
        let b = Bounds::new(VoxelIdx::new(0, 0, 0), VoxelIdx::new(3, 3, 3));
        let g = SemanticOccupancyGrid::new(1.0, b);
        assert!(detect_frontiers(&g, &b).is_empty());
    }

    #[test]
    fn fully_known_box_has_no_frontiers() {
        let b = Bounds::new(VoxelIdx::new(0, 0, 0), VoxelIdx::new(3, 3, 3));
        let mut g = SemanticOccupancyGrid::new(1.0, b);
        for v in b.iter() {
            g.set_state(v, CellState::Free);
        }
        assert!(detect_frontiers(&g, &b).is_empty());
        g.set_state(VoxelIdx::new(0, 0, 0), CellState::Unknown);
        assert_eq!(
            detect_frontiers(&g, &b),
            vec![VoxelIdx::new(0, 0, 1), VoxelIdx::new(0, 1, 0), VoxelIdx::new(1, 0, 0)]
        );
    }
}
