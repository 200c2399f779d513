use nalgebra::Vector3;

use super::{GraspPose, GripperGeometry};
use crate::geometry::PointCloud;

/// Checks the finger volumes against the cloud and the table plane.
///
/// Each finger is a box of `thickness` along the closing axis just outside
/// the opening, `thickness` across and `finger_depth` along the approach.
/// Its sweep from the approach side (any negative approach coordinate) must
/// be free of points; no finger corner may lie below `table_height` in `z`.
pub fn collision_free(
    pose: &GraspPose,
    cloud: &PointCloud,
    grip: &GripperGeometry,
    table_height: f64,
) -> bool {
    let half_w = pose.width / 2.0;
    let t = grip.finger_thickness;
    let fingers = [(half_w, half_w + t), (-half_w - t, -half_w)];

    for &(c0, c1) in &fingers {
        for &c in &[c0, c1] {
            for &b in &[-t / 2.0, t / 2.0] {
                for &a in &[0.0, grip.finger_depth] {
                    if pose.to_world(&Vector3::new(c, b, a)).z < table_height {
                        return false;
                    }
                }
            }
        }
    }

    !cloud.points().iter().any(|p| {
        let q = pose.to_local(p);
        q.y.abs() <= t / 2.0
            && q.z <= grip.finger_depth
            && fingers.iter().any(|&(c0, c1)| q.x >= c0 && q.x <= c1)
    })
}
