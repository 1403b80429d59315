//! Scenario documents (TOML) and the bundled bridge worlds.
//!
//! ```toml
//! voxel_size = 1.0
//! flight_speed = 2.0
//! scan_period = 1.0
//! rng_seed = 7
//! dd = 2.0          # optional, default 2 * voxel_size
//! rpt = 120.0       # optional
//!
//! [start_pose]
//! position = [0.5, -8.5, 3.5]
//! yaw = 0.0
//!
//! [view]
//! apex_deg = 0.0
//! d_min = 2.0
//! d_max = 10.0
//!
//! [[shapes]]
//! label = "bridge"
//! min = [0.0, 0.0, 4.0]
//! max = [20.0, 4.0, 5.0]
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::ScenarioError;
use crate::sensing::LidarSpec;
use crate::view::ViewSpec;
use crate::voxel::{Bounds, Pose, Position, VoxelIdx};
use crate::world::{world_from_primitives, BoxShape, GroundTruthLabel, WorldModel};

pub const DEFAULT_RPT: f64 = 120.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeDoc {
    pub label: GroundTruthLabel,
    pub min: [f64; 3],
    pub max: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StartPoseDoc {
    pub position: [f64; 3],
    #[serde(default)]
    pub yaw: f64,
}

/// The on-disk schema. Unknown fields are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub voxel_size: f64,
    pub flight_speed: f64,
    pub scan_period: f64,
    pub rng_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dd: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rpt: Option<f64>,
    pub start_pose: StartPoseDoc,
    pub view: ViewSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lidar: Option<LidarSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounding_box: Option<BoxShape>,
    pub shapes: Vec<ShapeDoc>,
}

/// Validated mission parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    /// Snapped to the center of its voxel.
    pub start_pose: Pose,
    pub view: ViewSpec,
    pub lidar: LidarSpec,
    /// Discrepancy distance, meters.
    pub dd: f64,
    /// Replan time limit, simulated seconds.
    pub rpt: f64,
    pub flight_speed: f64,
    pub scan_period: f64,
    pub rng_seed: u64,
    pub bounding_box: Option<BoxShape>,
}

impl ScenarioConfig {
    /// Voxels the exploration may consider: the bounding box if given, else everything.
    pub fn exploration_bounds(&self, world: &WorldModel) -> Bounds {
        match &self.bounding_box {
            Some(b) => b
                .covered_voxels(world.voxel_size())
                .map_or(Bounds::new(VoxelIdx::new(0, 0, 0), VoxelIdx::new(-1, -1, -1)), |c| {
                    c.intersect(&world.bounds())
                }),
            None => world.bounds(),
        }
    }
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid {
        field,
        reason: reason.into(),
    }
}

fn positive(field: &'static str, v: f64) -> Result<f64, ScenarioError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(field, format!("must be positive, got {v}")))
    }
}

/// Voxels of margin around the scene: enough for every viewpoint in the distance band.
pub fn world_margin(view: &ViewSpec, voxel_size: f64) -> i32 {
    (view.d_max / voxel_size).ceil() as i32 + 1
}

pub fn parse_doc(text: &str) -> Result<ScenarioDoc, ScenarioError> {
    toml::from_str(text).map_err(|e| ScenarioError::Parse(e.message().to_string()))
}

pub fn load_world(text: &str) -> Result<(WorldModel, ScenarioConfig), ScenarioError> {
    build(&parse_doc(text)?)
}

pub fn build(doc: &ScenarioDoc) -> Result<(WorldModel, ScenarioConfig), ScenarioError> {
    let vs = positive("voxel_size", doc.voxel_size)?;
    let flight_speed = positive("flight_speed", doc.flight_speed)?;
    let scan_period = positive("scan_period", doc.scan_period)?;
    let dd = positive("dd", doc.dd.unwrap_or(2.0 * vs))?;
    let rpt = positive("rpt", doc.rpt.unwrap_or(DEFAULT_RPT))?;
    doc.view.validate().map_err(|r| invalid("view", r))?;
    let lidar = doc.lidar.unwrap_or_default();
    lidar.validate().map_err(|r| invalid("lidar", r))?;
    if let Some(b) = &doc.bounding_box {
        if !b.has_positive_extent() {
            return Err(invalid("bounding_box", "needs positive extent"));
        }
    }
    let p = doc.start_pose.position;
    if !p.iter().all(|c| c.is_finite()) || !doc.start_pose.yaw.is_finite() {
        return Err(invalid("start_pose", "coordinates must be finite"));
    }

    let shapes: Vec<(BoxShape, GroundTruthLabel)> = doc
        .shapes
        .iter()
        .map(|s| (BoxShape::new(s.min, s.max), s.label))
        .collect();
    let world = world_from_primitives(&shapes, vs)?;
    let start = VoxelIdx::containing(&Position::new(p[0], p[1], p[2]), vs);
    let mut extent = world.bounds().include(start);
    if let Some(b) = doc.bounding_box.as_ref().and_then(|b| b.covered_voxels(vs)) {
        extent = extent.union(&b);
    }
    let world = world.with_bounds(extent.grown(world_margin(&doc.view, vs), 0))?;
    if world.is_occupied(start) {
        return Err(ScenarioError::StartOccupied(start));
    }
    let config = ScenarioConfig {
        name: doc.name.clone().unwrap_or_else(|| "scenario".into()),
        start_pose: Pose::new(start.center(vs), doc.start_pose.yaw),
        view: doc.view,
        lidar,
        dd,
        rpt,
        flight_speed,
        scan_period,
        rng_seed: doc.rng_seed,
        bounding_box: doc.bounding_box,
    };
    Ok((world, config))
}

pub fn to_toml(doc: &ScenarioDoc) -> String {
    toml::to_string(doc).expect("scenario documents always serialize")
}

/// Document describing `world` (as merged boxes) with the parameters of `config`.
pub fn doc_from_world(world: &WorldModel, config: &ScenarioConfig) -> ScenarioDoc {
    let p = config.start_pose.position;
    ScenarioDoc {
        name: Some(config.name.clone()),
        voxel_size: world.voxel_size(),
        flight_speed: config.flight_speed,
        scan_period: config.scan_period,
        rng_seed: config.rng_seed,
        dd: Some(config.dd),
        rpt: Some(config.rpt),
        start_pose: StartPoseDoc {
            position: [p.x, p.y, p.z],
            yaw: config.start_pose.yaw,
        },
        view: config.view,
        lidar: Some(config.lidar),
        bounding_box: config.bounding_box,
        shapes: world
            .to_primitives()
            .into_iter()
            .map(|(b, label)| ShapeDoc {
                label,
                min: b.min,
                max: b.max,
            })
            .collect(),
    }
}

pub const BUNDLED: [(&str, &str); 5] = [
    ("arch", include_str!("../scenarios/arch.toml")),
    ("covered", include_str!("../scenarios/covered.toml")),
    ("box_girder", include_str!("../scenarios/box_girder.toml")),
    ("iron_truss", include_str!("../scenarios/iron_truss.toml")),
    ("steel", include_str!("../scenarios/steel.toml")),
];

pub fn bundled_text(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn load_bundled(name: &str) -> Result<(WorldModel, ScenarioConfig), ScenarioError> {
    load_world(bundled_text(name).ok_or_else(|| ScenarioError::UnknownBundled(name.into()))?)
}

/// Reads `spec` as a file path if one exists, else as a bundled scenario name.
pub fn resolve(spec: &str) -> Result<(WorldModel, ScenarioConfig), ScenarioError> {
    let path = Path::new(spec);
    if path.is_file() {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ScenarioError::Parse(format!("{}: {e}", path.display())))?;
        let (world, mut config) = load_world(&text)?;
        if config.name == "scenario" {
            if let Some(stem) = path.file_stem() {
                config.name = stem.to_string_lossy().into_owned();
            }
        }
        return Ok((world, config));
    }
    load_bundled(spec)
}
