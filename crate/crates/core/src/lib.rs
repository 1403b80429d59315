//! Online semantic mapping, viewpoint generation and clustered tour planning for
//! autonomous bridge inspection, with a deterministic voxel-world simulator and a
//! frontier-exploration baseline.

// `!(x > 0.0)` style checks are kept on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baseline;
pub mod cli;
pub mod error;
pub mod executor;
pub mod gtsp;
pub mod log;
pub mod mapping;
pub mod nav;
pub mod raycast;
pub mod scenario;
pub mod sensing;
pub mod summary;
pub mod view;
pub mod voxel;
pub mod world;

pub use error::{GtspError, MappingError, MissionError, NavError, ScenarioError, SensingError, WorldError};
pub use executor::{run_mission, MissionOptions};
pub use baseline::run_frontier_mission;
pub use log::MissionLog;
pub use mapping::{CellState, SemanticOccupancyGrid};
pub use scenario::{load_world, ScenarioConfig};
pub use view::{Candidate, ViewSpec};
pub use voxel::{Bounds, Face, Pose, Position, VoxelIdx};
pub use world::{GroundTruthLabel, WorldModel};
