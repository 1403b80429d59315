use thiserror::Error;

use crate::voxel::VoxelIdx;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorldError {
    #[error("empty world")]
    EmptyWorld,
    #[error("voxel_size must be positive, got {0}")]
    InvalidVoxelSize(f64),
    #[error("shape {0} has non-positive extent")]
    DegenerateShape(usize),
    #[error("shapes cover no voxel centers")]
    NoVoxels,
    #[error("labeled cell {0} lies outside the requested bounds")]
    CellOutOfBounds(VoxelIdx),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("start pose {0} lies inside an occupied voxel")]
    StartOccupied(VoxelIdx),
    #[error("unknown bundled scenario `{0}`")]
    UnknownBundled(String),
    #[error(transparent)]
    World(#[from] WorldError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SensingError {
    #[error("sensor embedded in geometry at {0}")]
    SensorEmbedded(VoxelIdx),
    #[error("sensor at {0} is outside the world bounds")]
    OutOfBounds(VoxelIdx),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MappingError {
    #[error("voxel {0} is not awaiting inspection")]
    NotAwaitingInspection(VoxelIdx),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NavError {
    #[error("endpoint blocked at {0}")]
    EndpointBlocked(VoxelIdx),
    #[error("unreachable: no collision-free path from {from} to {to}")]
    Unreachable { from: VoxelIdx, to: VoxelIdx },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GtspError {
    #[error("infeasible instance: cluster {0} is empty")]
    EmptyCluster(usize),
    #[error("instance too large for exhaustive search ({combinations:.3e} combinations)")]
    TooLarge { combinations: f64 },
    #[error("malformed instance text at line {line}: {reason}")]
    Format { line: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MissionError {
    #[error("bridge not observable: exploration exhausted without mapping any bridge voxel")]
    BridgeNotObservable,
    #[error("start pose {0} lies outside the exploration bounding box")]
    StartOutsideBox(VoxelIdx),
    #[error(transparent)]
    Sensing(#[from] SensingError),
    #[error(transparent)]
    Gtsp(#[from] GtspError),
}
