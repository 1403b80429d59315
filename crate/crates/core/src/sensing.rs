//! Spinning-LiDAR simulation by voxel raycasting against the ground truth.
//!
//! Returns carry the ground-truth label of the voxel they hit, standing in for a
//! camera-plus-segmentation pipeline with perfect labels.

use std::fmt::Write as _;

use nalgebra::Vector3;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::SensingError;
use crate::raycast::RayTraversal;
use crate::voxel::{Pose, Position, VoxelIdx};
use crate::world::{GroundTruthLabel, WorldModel};

/// Omitted fields take their defaults.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LidarSpec {
    /// meters
    pub range_max: f64,
    /// degrees
    pub horizontal_fov: f64,
    pub vertical_fov_min: f64,
    pub vertical_fov_max: f64,
    pub azimuth_steps: u32,
    pub elevation_steps: u32,
    /// Probability of flipping the Bridge/Obstacle label of a return.
    pub label_noise: f64,
}

impl Default for LidarSpec {
    /// VLP-16-like geometry: 360 x 16 rays over +-15 degrees, 100 m range.
    fn default() -> Self {
        Self {
            range_max: 100.0,
            horizontal_fov: 360.0,
            vertical_fov_min: -15.0,
            vertical_fov_max: 15.0,
            azimuth_steps: 360,
            elevation_steps: 16,
            label_noise: 0.0,
        }
    }
}

impl LidarSpec {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.range_max > 0.0) {
            return Err(format!("range_max must be positive, got {}", self.range_max));
        }
        if self.azimuth_steps == 0 || self.elevation_steps == 0 {
            return Err("azimuth_steps and elevation_steps must be at least 1".into());
        }
        if !(self.vertical_fov_min <= self.vertical_fov_max) {
            return Err("vertical_fov_min must not exceed vertical_fov_max".into());
        }
        if !(self.horizontal_fov > 0.0 && self.horizontal_fov <= 360.0) {
            return Err(format!(
                "horizontal_fov must lie in (0, 360], got {}",
                self.horizontal_fov
            ));
        }
        if !(0.0..=1.0).contains(&self.label_noise) {
            return Err(format!("label_noise must lie in [0, 1], got {}", self.label_noise));
        }
        Ok(())
    }

    pub fn rays_per_scan(&self) -> usize {
        self.azimuth_steps as usize * self.elevation_steps as usize
    }

    /// Beam azimuths in degrees relative to the sensor heading.
    pub fn azimuths(&self) -> Vec<f64> {
        let n = self.azimuth_steps;
        if self.horizontal_fov >= 360.0 {
            (0..n).map(|i| 360.0 * f64::from(i) / f64::from(n)).collect()
        } else {
            linspace(-self.horizontal_fov / 2.0, self.horizontal_fov / 2.0, n)
        }
    }

    pub fn elevations(&self) -> Vec<f64> {
        linspace(self.vertical_fov_min, self.vertical_fov_max, self.elevation_steps)
    }
}

fn linspace(lo: f64, hi: f64, n: u32) -> Vec<f64> {
    if n == 1 {
        return vec![(lo + hi) / 2.0];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * f64::from(i) / f64::from(n - 1))
        .collect()
}

/// Unit direction for a beam given absolute azimuth and elevation in degrees.
pub fn beam_direction(azimuth_deg: f64, elevation_deg: f64) -> Vector3<f64> {
    let (a, e) = (azimuth_deg.to_radians(), elevation_deg.to_radians());
    Vector3::new(e.cos() * a.cos(), e.cos() * a.sin(), e.sin())
}

#[derive(Clone, Debug, PartialEq)]
pub struct LidarReturn {
    /// Absolute azimuth and elevation of the beam, degrees.
    pub azimuth: f64,
    pub elevation: f64,
    pub direction: Vector3<f64>,
    pub voxel: VoxelIdx,
    /// Entry point of the beam into the hit voxel.
    pub point: Position,
    pub label: GroundTruthLabel,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LidarMiss {
    pub azimuth: f64,
    pub elevation: f64,
    pub direction: Vector3<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledScan {
    pub origin: Position,
    pub range_max: f64,
    pub returns: Vec<LidarReturn>,
    pub misses: Vec<LidarMiss>,
}

impl LabeledScan {
    pub fn ray_count(&self) -> usize {
        self.returns.len() + self.misses.len()
    }

    /// One row per return: azimuth, elevation, x, y, z, label.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("azimuth,elevation,x,y,z,label\n");
        for r in &self.returns {
            let _ = writeln!(
                out,
                "{:.4},{:.4},{:.4},{:.4},{:.4},{}",
                r.azimuth,
                r.elevation,
                r.point.x,
                r.point.y,
                r.point.z,
                r.label.as_str()
            );
        }
        out
    }
}

/// Casts `azimuth_steps x elevation_steps` beams from `pose`. The first occupied voxel
/// along a beam produces a return; beams leaving the world bounds or exceeding
/// `range_max` are misses.
pub fn simulate_scan(
    world: &WorldModel,
    pose: &Pose,
    spec: &LidarSpec,
) -> Result<LabeledScan, SensingError> {
    let origin_voxel = VoxelIdx::containing(&pose.position, world.voxel_size());
    if !world.bounds().contains(origin_voxel) {
        return Err(SensingError::OutOfBounds(origin_voxel));
    }
    if world.is_occupied(origin_voxel) {
        return Err(SensingError::SensorEmbedded(origin_voxel));
    }
    let yaw_deg = pose.yaw.to_degrees();
    let azimuths = spec.azimuths();
    let elevations = spec.elevations();
    let mut returns = Vec::new();
    let mut misses = Vec::new();
    for &az in &azimuths {
        let azimuth = yaw_deg + az;
        for &elevation in &elevations {
            let direction = beam_direction(azimuth, elevation);
            match cast(world, &pose.position, &direction, spec.range_max) {
                Some((voxel, t, label)) => returns.push(LidarReturn {
                    azimuth,
                    elevation,
                    direction,
                    voxel,
                    point: pose.position + direction * t,
                    label,
                }),
                None => misses.push(LidarMiss {
                    azimuth,
                    elevation,
                    direction,
                }),
            }
        }
    }
    Ok(LabeledScan {
        origin: pose.position,
        range_max: spec.range_max,
        returns,
        misses,
    })
}

fn cast(
    world: &WorldModel,
    origin: &Position,
    dir: &Vector3<f64>,
    range: f64,
) -> Option<(VoxelIdx, f64, GroundTruthLabel)> {
    RayTraversal::new(origin, dir, range, world.voxel_size(), world.bounds())
        .find_map(|s| world.label(s.voxel).map(|l| (s.voxel, s.t_enter, l)))
}

/// Flips each return's label with probability `p`.
pub fn apply_label_noise(scan: &mut LabeledScan, p: f64, rng: &mut impl Rng) {
    if p <= 0.0 {
        return;
    }
    for r in &mut scan.returns {
        if rng.gen::<f64>() < p {
            r.label = match r.label {
                GroundTruthLabel::Bridge => GroundTruthLabel::Obstacle,
                GroundTruthLabel::Obstacle => GroundTruthLabel::Bridge,
            };
        }
    }
}
