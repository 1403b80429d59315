//! Clustered viewpoint graph and its open-path tour.
//!
//! Vertex 0 is always the start position and sits alone in cluster 0. Every other cluster
//! gathers the viewpoints that can inspect one bridge voxel; a tour visits exactly one
//! vertex per cluster, starting at vertex 0, without returning.

mod brute;
mod gtsplib;
mod solver;

use std::collections::HashMap;

pub use brute::{brute_force, combination_count, BRUTE_FORCE_LIMIT};
pub use gtsplib::{from_gtsplib, to_gtsplib};
pub use solver::{solve, solve_warm, SolverBudget};

use crate::error::GtspError;
use crate::view::Candidate;
use crate::voxel::{Position, VoxelIdx};

pub const START_VERTEX: usize = 0;
pub const START_CLUSTER: usize = 0;

#[derive(Clone, Debug, PartialEq)]
pub struct Vertex {
    pub position: Position,
    pub cluster: usize,
    /// Index into the candidate list the instance was built from; `None` for the start.
    pub candidate: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct GtspInstance {
    voxel_size: f64,
    vertices: Vec<Vertex>,
    clusters: Vec<Vec<usize>>,
    targets: Vec<Option<VoxelIdx>>,
    voxel_of: Vec<VoxelIdx>,
    overrides: HashMap<(VoxelIdx, VoxelIdx), f64>,
}

fn ordered(a: VoxelIdx, b: VoxelIdx) -> (VoxelIdx, VoxelIdx) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// One vertex per candidate, clustered by bridge voxel in ascending voxel order.
pub fn build_instance(candidates: &[Candidate], start: &Position, voxel_size: f64) -> GtspInstance {
    let mut by_target: std::collections::BTreeMap<VoxelIdx, Vec<usize>> = Default::default();
    for (i, c) in candidates.iter().enumerate() {
        by_target.entry(c.bridge_voxel).or_default().push(i);
    }
    let mut inst = GtspInstance::with_start(*start, voxel_size);
    for (target, members) in by_target {
        let c = inst.clusters.len();
        inst.clusters.push(Vec::with_capacity(members.len()));
        inst.targets.push(Some(target));
        for i in members {
            let cand = &candidates[i];
            inst.push_vertex(
                Vertex {
                    position: cand.position,
                    cluster: c,
                    candidate: Some(i),
                },
                cand.free_voxel,
            );
        }
    }
    inst
}

impl GtspInstance {
    fn with_start(start: Position, voxel_size: f64) -> Self {
        Self {
            voxel_size,
            vertices: vec![Vertex {
                position: start,
                cluster: START_CLUSTER,
                candidate: None,
            }],
            clusters: vec![vec![START_VERTEX]],
            targets: vec![None],
            voxel_of: vec![VoxelIdx::containing(&start, voxel_size)],
            overrides: HashMap::new(),
        }
    }

    fn push_vertex(&mut self, v: Vertex, voxel: VoxelIdx) {
        let idx = self.vertices.len();
        self.clusters[v.cluster].push(idx);
        self.vertices.push(v);
        self.voxel_of.push(voxel);
    }

    /// Instance from raw positions; cluster 0 must be the single start vertex.
    pub fn from_points(
        points: &[Position],
        clusters: &[Vec<usize>],
        voxel_size: f64,
    ) -> Result<Self, GtspError> {
        if clusters.is_empty() || clusters[0] != [START_VERTEX] || points.is_empty() {
            return Err(GtspError::Format {
                line: 0,
                reason: "first cluster must hold only the start vertex".into(),
            });
        }
        let mut cluster_of = vec![usize::MAX; points.len()];
        for (c, members) in clusters.iter().enumerate() {
            if members.is_empty() {
                return Err(GtspError::EmptyCluster(c));
            }
            for &v in members {
                if v >= points.len() || cluster_of[v] != usize::MAX {
                    return Err(GtspError::Format {
                        line: 0,
                        reason: format!("vertex {v} is out of range or listed twice"),
                    });
                }
                cluster_of[v] = c;
            }
        }
        if let Some(v) = cluster_of.iter().position(|&c| c == usize::MAX) {
            return Err(GtspError::Format {
                line: 0,
                reason: format!("vertex {v} belongs to no cluster"),
            });
        }
        Ok(Self {
            voxel_size,
            vertices: points
                .iter()
                .zip(&cluster_of)
                .map(|(p, &c)| Vertex {
                    position: *p,
                    cluster: c,
                    candidate: None,
                })
                .collect(),
            clusters: clusters.to_vec(),
            targets: vec![None; clusters.len()],
            voxel_of: points
                .iter()
                .map(|p| VoxelIdx::containing(p, voxel_size))
                .collect(),
            overrides: HashMap::new(),
        })
    }

    pub fn voxel_size(&self) -> f64 {
        self.voxel_size
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.clusters
    }

    pub fn cluster_count(&self) -> usize {
        self.clusters.len()
    }

    /// Bridge voxel served by cluster `c` (`None` for the start cluster).
    pub fn target(&self, c: usize) -> Option<VoxelIdx> {
        self.targets[c]
    }

    pub fn voxel_of(&self, v: usize) -> VoxelIdx {
        self.voxel_of[v]
    }

    pub fn euclidean(&self, u: usize, v: usize) -> f64 {
        (self.vertices[u].position - self.vertices[v].position).norm()
    }

    pub fn cost(&self, u: usize, v: usize) -> f64 {
        if u == v {
            return 0.0;
        }
        if !self.overrides.is_empty() {
            let (a, b) = (self.voxel_of[u], self.voxel_of[v]);
            if a == b {
                return 0.0;
            }
            if let Some(&c) = self.overrides.get(&ordered(a, b)) {
                return c;
            }
        }
        self.euclidean(u, v)
    }

    /// Replaces the cost between two voxel positions, in both directions.
    pub fn set_override(&mut self, a: VoxelIdx, b: VoxelIdx, cost: f64) {
        if a != b {
            self.overrides.insert(ordered(a, b), cost);
        }
    }

    pub fn override_cost(&self, a: VoxelIdx, b: VoxelIdx) -> Option<f64> {
        self.overrides.get(&ordered(a, b)).copied()
    }

    pub fn overrides(&self) -> impl Iterator<Item = ((VoxelIdx, VoxelIdx), f64)> + '_ {
        self.overrides.iter().map(|(k, v)| (*k, *v))
    }

    pub fn copy_overrides_from(&mut self, other: &GtspInstance) {
        self.overrides
            .extend(other.overrides.iter().map(|(k, v)| (*k, *v)));
    }

    pub fn validate(&self) -> Result<(), GtspError> {
        match self.clusters.iter().position(|c| c.is_empty()) {
            Some(c) => Err(GtspError::EmptyCluster(c)),
            None => Ok(()),
        }
    }

    /// Sum of consecutive edge costs along `sequence`.
    pub fn path_cost(&self, sequence: &[usize]) -> f64 {
        sequence.windows(2).map(|w| self.cost(w[0], w[1])).sum()
    }

    /// Exactly one vertex per cluster, starting at the start vertex.
    pub fn is_feasible(&self, sequence: &[usize]) -> bool {
        if sequence.len() != self.clusters.len() || sequence.first() != Some(&START_VERTEX) {
            return false;
        }
        let mut seen = vec![false; self.clusters.len()];
        for &v in sequence {
            let Some(vx) = self.vertices.get(v) else {
                return false;
            };
            if std::mem::replace(&mut seen[vx.cluster], true) {
                return false;
            }
        }
        true
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tour {
    /// Visiting order; the first entry is the start vertex.
    pub vertices: Vec<usize>,
    pub total_cost: f64,
}

impl Tour {
    pub fn new(instance: &GtspInstance, vertices: Vec<usize>) -> Self {
        let total_cost = instance.path_cost(&vertices);
        Self {
            vertices,
            total_cost,
        }
    }

    pub fn cluster_order(&self, instance: &GtspInstance) -> Vec<usize> {
        self.vertices
            .iter()
            .map(|&v| instance.vertices()[v].cluster)
            .collect()
    }
}
