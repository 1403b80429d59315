//! Online semantic occupancy grid.
//!
//! Every voxel is in exactly one of five states. Observed space is partitioned into free,
//! obstacle, bridge-not-inspected and bridge-inspected voxels; everything else is unknown.
//! Occupied evidence beats free evidence, the first occupied label a voxel receives is
//! kept, and bridge-inspected is absorbing.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::MappingError;
use crate::raycast::RayTraversal;
use crate::sensing::LabeledScan;
use crate::voxel::{Bounds, VoxelIdx};
use crate::world::{GroundTruthLabel, WorldModel};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CellState {
    #[default]
    Unknown,
    Free,
    Obstacle,
    BridgeNotInspected,
    BridgeInspected,
}

impl CellState {
    pub fn is_occupied(self) -> bool {
        matches!(
            self,
            CellState::Obstacle | CellState::BridgeNotInspected | CellState::BridgeInspected
        )
    }

    pub fn is_bridge(self) -> bool {
        matches!(
            self,
            CellState::BridgeNotInspected | CellState::BridgeInspected
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CellState::Unknown => "unknown",
            CellState::Free => "free",
            CellState::Obstacle => "obstacle",
            CellState::BridgeNotInspected => "bridge_not_inspected",
            CellState::BridgeInspected => "bridge_inspected",
        }
    }

    fn slot(self) -> usize {
        self as usize
    }
}

/// Cells that changed state during one scan integration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IntegrationReport {
    pub newly_free: usize,
    pub newly_obstacle: usize,
    pub newly_bridge: usize,
}

impl IntegrationReport {
    pub fn is_empty(&self) -> bool {
        self.newly_free == 0 && self.newly_obstacle == 0 && self.newly_bridge == 0
    }

    pub fn total(&self) -> usize {
        self.newly_free + self.newly_obstacle + self.newly_bridge
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VoxelSets {
    pub free: BTreeSet<VoxelIdx>,
    pub bridge_inspected: BTreeSet<VoxelIdx>,
    pub bridge_not_inspected: BTreeSet<VoxelIdx>,
    pub obstacle: BTreeSet<VoxelIdx>,
}

/// Cardinalities of the four observed sets.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SetCounts {
    pub free: usize,
    pub obstacle: usize,
    pub bridge_not_inspected: usize,
    pub bridge_inspected: usize,
}

impl SetCounts {
    pub fn occupied(&self) -> usize {
        self.obstacle + self.bridge_not_inspected + self.bridge_inspected
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SemanticOccupancyGrid {
    voxel_size: f64,
    bounds: Bounds,
    state: Vec<CellState>,
    counts: [usize; 5],
}

impl SemanticOccupancyGrid {
    pub fn new(voxel_size: f64, bounds: Bounds) -> Self {
        let n = bounds.len();
        let mut counts = [0; 5];
        counts[CellState::Unknown.slot()] = n;
        Self {
            voxel_size,
            bounds,
            state: vec![CellState::Unknown; n],
            counts,
        }
    }

    /// Fully known grid: empty cells Free, Bridge cells not yet inspected.
    pub fn from_ground_truth(world: &WorldModel) -> Self {
        let mut grid = Self::new(world.voxel_size(), world.bounds());
        for i in 0..grid.state.len() {
            let v = grid.bounds.voxel_at(i);
            let s = match world.label(v) {
                None => CellState::Free,
                Some(GroundTruthLabel::Obstacle) => CellState::Obstacle,
                Some(GroundTruthLabel::Bridge) => CellState::BridgeNotInspected,
            };
            grid.put(i, s);
        }
        grid
    }

    pub fn voxel_size(&self) -> f64 {
        self.voxel_size
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    /// Out-of-bounds voxels read as Unknown.
    pub fn state(&self, v: VoxelIdx) -> CellState {
        self.bounds
            .linear(v)
            .map_or(CellState::Unknown, |i| self.state[i])
    }

    pub fn is_free(&self, v: VoxelIdx) -> bool {
        self.state(v) == CellState::Free
    }

    pub fn counts(&self) -> SetCounts {
        SetCounts {
            free: self.counts[CellState::Free.slot()],
            obstacle: self.counts[CellState::Obstacle.slot()],
            bridge_not_inspected: self.counts[CellState::BridgeNotInspected.slot()],
            bridge_inspected: self.counts[CellState::BridgeInspected.slot()],
        }
    }

    pub fn unknown_count(&self) -> usize {
        self.counts[CellState::Unknown.slot()]
    }

    fn put(&mut self, i: usize, s: CellState) {
        let old = self.state[i];
        self.counts[old.slot()] -= 1;
        self.counts[s.slot()] += 1;
        self.state[i] = s;
    }

    /// Overwrites a cell without precedence rules. Intended for constructing test fixtures
    /// and scripted scenarios; mission code goes through `integrate_scan`/`mark_inspected`.
    pub fn set_state(&mut self, v: VoxelIdx, s: CellState) {
        if let Some(i) = self.bounds.linear(v) {
            self.put(i, s);
        }
    }

    fn observe_free(&mut self, i: usize, report: &mut IntegrationReport) {
        if self.state[i] == CellState::Unknown {
            self.put(i, CellState::Free);
            report.newly_free += 1;
        }
    }

    fn observe_occupied(&mut self, i: usize, label: GroundTruthLabel, report: &mut IntegrationReport) {
        if self.state[i].is_occupied() {
            return;
        }
        match label {
            GroundTruthLabel::Bridge => {
                self.put(i, CellState::BridgeNotInspected);
                report.newly_bridge += 1;
            }
            GroundTruthLabel::Obstacle => {
                self.put(i, CellState::Obstacle);
                report.newly_obstacle += 1;
            }
        }
    }

    /// Clears voxels along every beam and marks hit voxels occupied. Beams are re-walked
    /// with the same traversal the sensor used, so the cleared voxels are exactly the ones
    /// the beam crossed before its hit.
    pub fn integrate_scan(&mut self, scan: &LabeledScan) -> IntegrationReport {
        let mut report = IntegrationReport::default();
        let (vs, bounds) = (self.voxel_size, self.bounds);
        for r in &scan.returns {
            let hit_t = (r.point - scan.origin).norm();
            for step in RayTraversal::new(&scan.origin, &r.direction, scan.range_max, vs, bounds) {
                let i = bounds.linear(step.voxel).expect("traversal stays in bounds");
                if step.voxel == r.voxel {
                    self.observe_occupied(i, r.label, &mut report);
                    break;
                }
                if step.t_enter > hit_t {
                    break;
                }
                self.observe_free(i, &mut report);
            }
        }
        for m in &scan.misses {
            for step in RayTraversal::new(&scan.origin, &m.direction, scan.range_max, vs, bounds) {
                let i = bounds.linear(step.voxel).expect("traversal stays in bounds");
                self.observe_free(i, &mut report);
            }
        }
        report
    }

    pub fn mark_inspected(&mut self, v: VoxelIdx) -> Result<(), MappingError> {
        match self.bounds.linear(v) {
            Some(i) if self.state[i] == CellState::BridgeNotInspected => {
                self.put(i, CellState::BridgeInspected);
                Ok(())
            }
            _ => Err(MappingError::NotAwaitingInspection(v)),
        }
    }

    /// Voxels in a given state, ascending.
    pub fn voxels_in(&self, s: CellState) -> impl Iterator<Item = VoxelIdx> + '_ {
        self.state
            .iter()
            .enumerate()
            .filter(move |(_, c)| **c == s)
            .map(|(i, _)| self.bounds.voxel_at(i))
    }

    pub fn voxel_sets(&self) -> VoxelSets {
        let mut sets = VoxelSets::default();
        for (i, s) in self.state.iter().enumerate() {
            let v = self.bounds.voxel_at(i);
            match s {
                CellState::Unknown => {}
                CellState::Free => {
                    sets.free.insert(v);
                }
                CellState::Obstacle => {
                    sets.obstacle.insert(v);
                }
                CellState::BridgeNotInspected => {
                    sets.bridge_not_inspected.insert(v);
                }
                CellState::BridgeInspected => {
                    sets.bridge_inspected.insert(v);
                }
            }
        }
        sets
    }

    /// Snapshot of every known cell as `ix,iy,iz,state` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("ix,iy,iz,state\n");
        for (i, s) in self.state.iter().enumerate() {
            if *s != CellState::Unknown {
                let v = self.bounds.voxel_at(i);
                let _ = writeln!(out, "{},{},{},{}", v.x, v.y, v.z, s.as_str());
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensing::{simulate_scan, LidarReturn, LidarSpec};
    use crate::voxel::{Pose, Position};
    use crate::world::{world_from_primitives, BoxShape};
    use nalgebra::Vector3;

    fn bounds() -> Bounds {
        Bounds::new(VoxelIdx::new(-10, -10, -10), VoxelIdx::new(10, 10, 10))
    }

    fn one_return(hit: VoxelIdx, label: GroundTruthLabel) -> LabeledScan {
        let origin = Position::new(0.5, 0.5, 0.5);
        let direction = Vector3::new(1.0, 0.0, 0.0);
        LabeledScan {
            origin,
            range_max: 100.0,
            returns: vec![LidarReturn {
                azimuth: 0.0,
                elevation: 0.0,
                direction,
                voxel: hit,
                point: Position::new(f64::from(hit.x), 0.5, 0.5),
                label,
            }],
            misses: vec![],
        }
    }

    #[test]
    fn bridge_return_clears_the_gap() {
        let mut g = SemanticOccupancyGrid::new(1.0, bounds());
        let report = g.integrate_scan(&one_return(VoxelIdx::new(5, 0, 0), GroundTruthLabel::Bridge));
        // origin voxel plus four between
        assert_eq!(report.newly_free, 5);
        assert_eq!(report.newly_bridge, 1);
        for x in 1..5 {
            assert_eq!(g.state(VoxelIdx::new(x, 0, 0)), CellState::Free);
        }
        assert_eq!(g.state(VoxelIdx::new(5, 0, 0)), CellState::BridgeNotInspected);
        assert_eq!(g.state(VoxelIdx::new(6, 0, 0)), CellState::Unknown);
    }

    #[test]
    fn inspected_is_absorbing() {
        let mut g = SemanticOccupancyGrid::new(1.0, bounds());
        let scan = one_return(VoxelIdx::new(5, 0, 0), GroundTruthLabel::Bridge);
        g.integrate_scan(&scan);
        g.mark_inspected(VoxelIdx::new(5, 0, 0)).unwrap();
        let report = g.integrate_scan(&scan);
        assert!(report.is_empty());
        assert_eq!(g.state(VoxelIdx::new(5, 0, 0)), CellState::BridgeInspected);
        // conflicting label does not override either
        g.integrate_scan(&one_return(VoxelIdx::new(5, 0, 0), GroundTruthLabel::Obstacle));
        assert_eq!(g.state(VoxelIdx::new(5, 0, 0)), CellState::BridgeInspected);
    }

    #[test]
    fn occupied_evidence_beats_free() {
        let mut g = SemanticOccupancyGrid::new(1.0, bounds());
        g.integrate_scan(&one_return(VoxelIdx::new(3, 0, 0), GroundTruthLabel::Obstacle));
        // a later beam passing "through" 3 towards 6 never clears it
        let mut scan = one_return(VoxelIdx::new(6, 0, 0), GroundTruthLabel::Bridge);
        scan.returns[0].point = Position::new(6.0, 0.5, 0.5);
        g.integrate_scan(&scan);
        assert_eq!(g.state(VoxelIdx::new(3, 0, 0)), CellState::Obstacle);
    }

    #[test]
    fn mark_inspected_twice_errors() {
        let mut g = SemanticOccupancyGrid::new(1.0, bounds());
        g.integrate_scan(&one_return(VoxelIdx::new(5, 0, 0), GroundTruthLabel::Bridge));
        let v = VoxelIdx::new(5, 0, 0);
        let before = g.counts();
        g.mark_inspected(v).unwrap();
        let after = g.counts();
        assert_eq!(after.bridge_not_inspected + 1, before.bridge_not_inspected);
        assert_eq!(after.bridge_inspected, before.bridge_inspected + 1);
        assert_eq!(after.bridge_not_inspected, 0);
        assert_eq!(g.mark_inspected(v), Err(MappingError::NotAwaitingInspection(v)));
    }

    #[test]
    fn fresh_grid_has_empty_sets() {
        let g = SemanticOccupancyGrid::new(1.0, bounds());
        assert_eq!(g.voxel_sets(), VoxelSets::default());
    }

    #[test]
    fn sets_match_report_after_one_scan() {
        let w = world_from_primitives(
            &[
                (BoxShape::new([3.0, -2.0, -1.0], [4.0, 3.0, 2.0]), GroundTruthLabel::Bridge),
                (BoxShape::new([-10.0, -10.0, -3.0], [10.0, 10.0, -2.0]), GroundTruthLabel::Obstacle),
            ],
            1.0,
        )
        .unwrap()
        .with_bounds(bounds())
        .unwrap();
        let scan = simulate_scan(&w, &Pose::new(Position::new(0.5, 0.5, 0.5), 0.0), &LidarSpec::default())
            .unwrap();
        let mut g = SemanticOccupancyGrid::new(1.0, bounds());
        let report = g.integrate_scan(&scan);
        let sets = g.voxel_sets();
        assert_eq!(sets.free.len(), report.newly_free);
        assert_eq!(sets.obstacle.len(), report.newly_obstacle);
        assert_eq!(sets.bridge_not_inspected.len(), report.newly_bridge);
        assert!(sets.bridge_inspected.is_empty());
        assert!(report.newly_bridge > 0 && report.newly_obstacle > 0);
        // integrating again changes nothing
        assert!(g.integrate_scan(&scan).is_empty());
    }

    #[test]
    fn csv_lists_known_cells() {
        let mut g = SemanticOccupancyGrid::new(1.0, bounds());
        g.integrate_scan(&one_return(VoxelIdx::new(2, 0, 0), GroundTruthLabel::Bridge));
        let csv = g.to_csv();
        assert!(csv.starts_with("ix,iy,iz,state\n"));
        assert!(csv.contains("2,0,0,bridge_not_inspected"));
        assert_eq!(csv.lines().count(), 1 + 3);
    }
}
