//! Compares predicted grasp rectangles against a labelled one with the
//! IoU and angle test used to score grasp detection.
//!
//!     cargo run --example grasp_rectangles

use viewgrasp::grasp::{angle_difference, iou_valid, rect_iou, GraspRect};

fn main() {
    let label = GraspRect::new([0.0, 0.0], 0.0, 0.08, 0.02);
    let predictions = [
        ("shifted", GraspRect::new([0.01, 0.0], 0.05, 0.08, 0.02)),
        (
            "turned",
            GraspRect::new([0.0, 0.0], 35f64.to_radians(), 0.08, 0.02),
        ),
        ("offset", GraspRect::new([0.048, 0.0], 0.0, 0.08, 0.02)),
    ];
    for (name, p) in &predictions {
        println!(
            "{name:>8}: iou {:.3}, angle {:5.1} deg, valid {}",
            rect_iou(p, &label),
            angle_difference(p.angle_rad, label.angle_rad).to_degrees(),
            iou_valid(p, &label)
        );
    }
}
