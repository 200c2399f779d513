//! Plans a grasp for an upright can standing on a table: picks the most
//! informative view, fills a grasp map by annealing and keeps the best
//! grasp that clears the object and the table.
//!
//!     cargo run --release --example grasp_cylinder

use nalgebra::{Matrix3, Vector3};
use viewgrasp::geometry::{sample_primitive, Primitive};
use viewgrasp::grasp::ranked_grasps;
use viewgrasp::pipeline::{plan_grasp, GraspPlanConfig};

fn main() -> viewgrasp::Result<()> {
    let can = sample_primitive(
        &Primitive::Cylinder {
            radius: 0.03,
            height: 0.12,
        },
        1500,
        7,
    )?
    .transformed(&Matrix3::identity(), &Vector3::new(0.4, 0.0, 0.06));

    let mut config = GraspPlanConfig::default();
    config.budget = 48;
    config.seed = 2;
    let plan = plan_grasp(&can, &config)?;

    println!(
        "view {} ({:.3} bits)",
        plan.view_index, plan.ranking[0].entropy_bits
    );
    println!("{} scored pixels", ranked_grasps(&plan.synthesis.map).len());
    let best = plan.best()?;
    let c = best.candidate;
    println!(
        "grasp at pixel ({}, {}), rotation {:.1} deg, width {:.3} m, quality {:.3}",
        c.u,
        c.v,
        c.rotation_rad.to_degrees(),
        c.width_m,
        c.quality
    );
    let p = best.pose.position;
    println!(
        "gripper at ({:.3}, {:.3}, {:.3}), approach {:?}",
        p.x,
        p.y,
        p.z,
        best.pose.approach_axis().as_slice()
    );
    Ok(())
}
