//! Analytic antipodal grasp synthesis on depth views.
//!
//! Candidates are sampled on the occupied bins of a view, lifted to a 6-DoF
//! pose in the object frame, refined by simulated annealing over rotation
//! and opening width, and rasterized into quality/rotation/width maps.

mod anneal;
mod candidate;
mod collision;
mod fitness;
mod iou;
mod map;
mod synth;

pub use anneal::anneal;
pub use candidate::{back_project, grasp_depth, sample_candidates};
pub use collision::collision_free;
pub use fitness::{fitness, Fitness};
pub use iou::{
    angle_difference, iou_valid, is_valid_match, rect_iou, GraspRect, ANGLE_THRESHOLD_DEG,
    IOU_THRESHOLD,
};
pub use map::{
    best_grasp, parse_gmap, ranked_grasps, read_gmap, write_gmap, write_grasp_csv, GraspMap,
};
pub use synth::{synthesize_grasp_map, GraspSynthesis};

use nalgebra::{Matrix3, Point3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Radius of the neighborhood searched for the grasp depth, in meters.
pub const DEFAULT_GRASP_DELTA: f64 = 0.025;

/// Two-finger parallel gripper. The stroke matches a 140 mm Robotiq-style
/// gripper; finger dimensions are nominal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GripperGeometry {
    pub max_width: f64,
    pub finger_thickness: f64,
    pub finger_depth: f64,
}

impl Default for GripperGeometry {
    fn default() -> Self {
        GripperGeometry {
            max_width: 0.140,
            finger_thickness: 0.02,
            finger_depth: 0.04,
        }
    }
}

impl GripperGeometry {
    pub fn validate(&self) -> Result<()> {
        if [self.max_width, self.finger_thickness, self.finger_depth]
            .iter()
            .all(|&v| v > 0.0 && v.is_finite())
        {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "gripper dimensions must be positive: {self:?}"
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitnessWeights {
    pub coverage: f64,
    pub stability: f64,
    pub centering: f64,
}

impl Default for FitnessWeights {
    fn default() -> Self {
        FitnessWeights {
            coverage: 1.0 / 3.0,
            stability: 1.0 / 3.0,
            centering: 1.0 / 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnnealSchedule {
    pub t0: f64,
    /// Geometric factor: `t = t0 · cooling^step`.
    pub cooling: f64,
    pub iters: usize,
    pub sigma_rotation: f64,
    pub sigma_width: f64,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        AnnealSchedule {
            t0: 0.1,
            cooling: 0.95,
            iters: 300,
            sigma_rotation: 0.2,
            sigma_width: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GraspConfig {
    pub gripper: GripperGeometry,
    pub weights: FitnessWeights,
    pub schedule: AnnealSchedule,
    /// Neighborhood radius for the grasp depth, meters.
    pub delta: f64,
}

impl Default for GraspConfig {
    fn default() -> Self {
        GraspConfig {
            gripper: GripperGeometry::default(),
            weights: FitnessWeights::default(),
            schedule: AnnealSchedule::default(),
            delta: DEFAULT_GRASP_DELTA,
        }
    }
}

impl GraspConfig {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        self.gripper.validate()?;
        let w = self.weights;
        if [w.coverage, w.stability, w.centering]
            .iter()
            .any(|&x| !(x >= 0.0))
            || w.coverage + w.stability + w.centering <= 0.0
        {
            return Err(Error::invalid(
                "fitness weights must be non-negative and not all zero",
            ));
        }
        let s = self.schedule;
        if !(s.cooling > 0.0 && s.cooling < 1.0) {
            return Err(Error::invalid(format!(
                "cooling {} must lie in (0, 1)",
                s.cooling
            )));
        }
        if !(s.t0 > 0.0) || !(s.sigma_rotation >= 0.0) || !(s.sigma_width >= 0.0) {
            return Err(Error::invalid(
                "annealing temperature and step sizes must be positive",
            ));
        }
        if !(self.delta >= 0.0) {
            return Err(Error::invalid("grasp delta must be non-negative"));
        }
        Ok(())
    }
}

/// Grasp in image terms: pixel center `(u, v)` (column, row), rotation of
/// the closing axis about the view axis (0 = along `u`, counterclockwise
/// positive), opening width and quality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraspCandidate {
    pub u: usize,
    pub v: usize,
    pub rotation_rad: f64,
    pub width_m: f64,
    pub quality: f64,
}

/// 6-DoF grasp. `rotation` columns are the closing axis, the finger
/// breadth axis and the approach axis; `position` is the grasp point at
/// the surface depth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraspPose {
    pub position: Point3<f64>,
    pub rotation: Matrix3<f64>,
    pub width: f64,
    /// Pixel `(u, v)` the grasp was lifted from.
    pub pixel: (usize, usize),
}

impl GraspPose {
    pub fn new(
        position: Point3<f64>,
        approach: Vector3<f64>,
        closing: Vector3<f64>,
        width: f64,
        pixel: (usize, usize),
    ) -> Self {
        let approach = approach.normalize();
        let closing = (closing - approach * closing.dot(&approach)).normalize();
        let breadth = approach.cross(&closing);
        GraspPose {
            position,
            rotation: Matrix3::from_columns(&[closing, breadth, approach]),
            width,
            pixel,
        }
    }

    pub fn closing_axis(&self) -> Vector3<f64> {
        self.rotation.column(0).into_owned()
    }

    pub fn approach_axis(&self) -> Vector3<f64> {
        self.rotation.column(2).into_owned()
    }

    /// Point in grasp coordinates `(closing, breadth, approach)`.
    pub fn to_local(&self, p: &Point3<f64>) -> Vector3<f64> {
        self.rotation.tr_mul(&(p - self.position))
    }

    pub fn to_world(&self, q: &Vector3<f64>) -> Point3<f64> {
        self.position + self.rotation * q
    }

    /// Applies the rigid motion `p ↦ R·p + t`.
    pub fn transformed(&self, rotation: &Matrix3<f64>, translation: &Vector3<f64>) -> GraspPose {
        GraspPose {
            position: Point3::from(rotation * self.position.coords + translation),
            rotation: rotation * self.rotation,
            ..*self
        }
    }
}
