use serde::{Deserialize, Serialize};

use super::{FitnessWeights, GraspPose, GripperGeometry};
use crate::error::{Error, Result};
use crate::geometry::PointCloud;

/// Fitness terms of one grasp, each in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fitness {
    pub coverage: f64,
    pub stability: f64,
    pub centering: f64,
    pub captured: usize,
    pub total: f64,
}

/// Pixel used as the view center: `(⌊k/2⌋, ⌊k/2⌋)`.
pub(crate) fn view_center(bins: usize) -> (usize, usize) {
    (bins / 2, bins / 2)
}

/// Linear falloff from the view center to the farthest corner.
pub(crate) fn centering(pixel: (usize, usize), bins: usize) -> f64 {
    let (cu, cv) = view_center(bins);
    let dist = |u: f64, v: f64| ((u - cu as f64).powi(2) + (v - cv as f64).powi(2)).sqrt();
    let last = bins.saturating_sub(1) as f64;
    let max = [(0.0, 0.0), (last, 0.0), (0.0, last), (last, last)]
        .iter()
        .map(|&(u, v)| dist(u, v))
        .fold(0.0, f64::max);
    if max == 0.0 {
        return 1.0;
    }
    (1.0 - dist(pixel.0 as f64, pixel.1 as f64) / max).clamp(0.0, 1.0)
}

/// Scores a grasp on a cloud with normals.
///
/// The closing volume is the box between the finger pads: `|c| ≤ w/2`,
/// `|b| ≤ thickness/2` and `0 ≤ a ≤ finger_depth` in grasp coordinates.
pub fn fitness(
    cloud: &PointCloud,
    pose: &GraspPose,
    grip: &GripperGeometry,
    bins: usize,
    weights: &FitnessWeights,
) -> Result<Fitness> {
    let normals = cloud
        .normals()
        .ok_or_else(|| Error::invalid("fitness needs a cloud with normals"))?;
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let closing = pose.closing_axis();
    let half_w = pose.width / 2.0;
    let half_t = grip.finger_thickness / 2.0;
    let mut captured = 0usize;
    let mut cos_sum = 0.0;
    for (p, n) in cloud.points().iter().zip(normals) {
        let q = pose.to_local(p);
        if q.x.abs() <= half_w && q.y.abs() <= half_t && q.z >= 0.0 && q.z <= grip.finger_depth {
            captured += 1;
            cos_sum += n.dot(&closing).abs().min(1.0);
        }
    }
    let coverage = captured as f64 / cloud.len() as f64;
    let stability = if captured == 0 {
        0.0
    } else {
        cos_sum / captured as f64
    };
    let centering = centering(pose.pixel, bins);
    let wsum = weights.coverage + weights.stability + weights.centering;
    let total = (weights.coverage * coverage
        + weights.stability * stability
        + weights.centering * centering)
        / wsum;
    Ok(Fitness {
        coverage,
        stability,
        centering,
        captured,
        total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Point3, Rotation3, Vector3};
    use proptest::prelude::*;

    fn pose_at_origin(width: f64, pixel: (usize, usize)) -> GraspPose {
        GraspPose::new(Point3::origin(), Vector3::z(), Vector3::x(), width, pixel)
    }

    #[test]
    fn centering_is_linear_in_distance() {
        assert_eq!(centering((16, 16), 32), 1.0);
        assert_eq!(centering((0, 0), 32), 0.0);
        let half = centering((8, 8), 32);
        assert!((half - 0.5).abs() < 1e-12);
    }

    #[test]
    fn empty_closing_volume_scores_zero_coverage() {
        let cloud =
            PointCloud::with_normals(vec![Point3::new(1.0, 1.0, 1.0)], vec![Vector3::x()]).unwrap();
        let f = fitness(
            &cloud,
            &pose_at_origin(0.05, (16, 16)),
            &GripperGeometry::default(),
            32,
            &FitnessWeights::default(),
        )
        .unwrap();
        assert_eq!(f.coverage, 0.0);
        assert_eq!(f.stability, 0.0);
        assert_eq!(f.captured, 0);
        assert!((f.total - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn thin_plate_inside_fingers_is_perfect() {
        let mut points = Vec::new();
        for i in 0..5 {
            for j in 0..5 {
                let b = -0.008 + 0.004 * i as f64;
                let a = 0.004 + 0.008 * j as f64;
                points.push(Point3::new(0.001, b, a));
                points.push(Point3::new(-0.001, b, a));
            }
        }
        let normals = points
            .iter()
            .map(|p| {
                if p.x > 0.0 {
                    Vector3::x()
                } else {
                    -Vector3::x()
                }
            })
            .collect();
        let cloud = PointCloud::with_normals(points, normals).unwrap();
        let f = fitness(
            &cloud,
            &pose_at_origin(0.01, (16, 16)),
            &GripperGeometry::default(),
            32,
            &FitnessWeights::default(),
        )
        .unwrap();
        assert!((f.total - 1.0).abs() < 1e-6, "{f:?}");
    }

    #[test]
    fn ten_point_hand_cloud() {
        let s = 0.5f64.sqrt();
        // (point, normal, captured?, |cos| with x)
        let table: [([f64; 3], [f64; 3], bool, f64); 10] = [
            ([0.01, 0.0, 0.01], [1.0, 0.0, 0.0], true, 1.0),
            ([-0.01, 0.0, 0.02], [-1.0, 0.0, 0.0], true, 1.0),
            ([0.02, 0.005, 0.03], [1.0, 0.0, 0.0], true, 1.0),
            ([-0.02, -0.005, 0.0], [-1.0, 0.0, 0.0], true, 1.0),
            ([0.0, 0.0, 0.04], [0.0, 0.0, 1.0], true, 0.0),
            ([0.0, 0.009, 0.01], [s, s, 0.0], true, s),
            ([0.03, 0.0, 0.01], [1.0, 0.0, 0.0], false, 0.0),
            ([0.0, 0.02, 0.01], [1.0, 0.0, 0.0], false, 0.0),
            ([0.0, 0.0, -0.001], [1.0, 0.0, 0.0], false, 0.0),
            ([0.0, 0.0, 0.05], [1.0, 0.0, 0.0], false, 0.0),
        ];
        let points = table.iter().map(|r| Point3::from(r.0)).collect();
        let normals = table.iter().map(|r| Vector3::from(r.1)).collect();
        let cloud = PointCloud::with_normals(points, normals).unwrap();
        let captured: Vec<_> = table.iter().filter(|r| r.2).collect();
        let coverage = captured.len() as f64 / 10.0;
        let stability = captured.iter().map(|r| r.3).sum::<f64>() / captured.len() as f64;
        let expected = (coverage + stability + 0.5) / 3.0;

        let f = fitness(
            &cloud,
            &pose_at_origin(0.05, (8, 8)),
            &GripperGeometry::default(),
            32,
            &FitnessWeights::default(),
        )
        .unwrap();
        assert_eq!(f.captured, 6);
        assert!((f.coverage - 0.6).abs() < 1e-12);
        assert!((f.centering - 0.5).abs() < 1e-12);
        assert!((f.total - expected).abs() < 1e-12);
    }

    #[test]
    fn missing_normals_is_an_error() {
        let cloud = PointCloud::new(vec![Point3::origin()]);
        assert!(fitness(
            &cloud,
            &pose_at_origin(0.05, (0, 0)),
            &GripperGeometry::default(),
            32,
            &FitnessWeights::default()
        )
        .is_err());
    }

    proptest! {
        #[test]
        fn rigid_motion_leaves_fitness_unchanged(
            seed in any::<u64>(),
            axis in prop::array::uniform3(-1.0f64..1.0),
            angle in -3.1f64..3.1,
            t in prop::array::uniform3(-2.0f64..2.0),
            rot in 0.0f64..std::f64::consts::PI,
            width in 0.01f64..0.14,
        ) {
            let cloud = crate::geometry::sample_primitive(
                &crate::geometry::Primitive::Cylinder { radius: 0.03, height: 0.12 },
                150,
                seed,
            ).unwrap();
            let pose = GraspPose::new(
                Point3::new(0.0, 0.0, -0.03),
                Vector3::z(),
                Vector3::new(rot.cos(), rot.sin(), 0.0),
                width,
                (20, 12),
            );
            let axis = Vector3::from(axis);
            prop_assume!(axis.norm() > 1e-3);
            let r = Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(axis), angle).into_inner();
            let t = Vector3::from(t);
            let grip = GripperGeometry::default();
            let w = FitnessWeights::default();
            let a = fitness(&cloud, &pose, &grip, 64, &w).unwrap();
            let b = fitness(&cloud.transformed(&r, &t), &pose.transformed(&r, &t), &grip, 64, &w).unwrap();
            prop_assert!((a.total - b.total).abs() < 1e-9);
        }
    }
}
