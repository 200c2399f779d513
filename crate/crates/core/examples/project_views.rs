//! Renders a box from the three orthographic cameras and a 28-view sphere
//! rig, then prints how much of each image the object covers.
//!
//!     cargo run --example project_views

use viewgrasp::geometry::{sample_primitive, Primitive};
use viewgrasp::pipeline::object_views;
use viewgrasp::projection::{write_dview, ProjectionMode, ViewSetup};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cloud = sample_primitive(
        &Primitive::Box {
            x: 0.2,
            y: 0.1,
            z: 0.05,
        },
        3000,
        1,
    )?;

    for (name, setup) in [
        ("orthographic", ViewSetup::Orthographic),
        ("sphere 7x4", ViewSetup::sphere_counts(7, 4)?),
    ] {
        let rendered = object_views(&cloud, &setup, ProjectionMode::ScaleInvariant, 32)?;
        println!("{name}: {} views", rendered.views.len());
        for (i, v) in rendered.views.iter().enumerate().take(4) {
            println!(
                "  view {i}: {} of {} bins occupied",
                v.occupied(),
                v.bins() * v.bins()
            );
        }
    }

    // The text format round-trips through parse_dview.
    let top = &object_views(
        &cloud,
        &ViewSetup::Orthographic,
        ProjectionMode::FixedSize,
        8,
    )?
    .views[2];
    let mut text = Vec::new();
    write_dview(top, &mut text)?;
    print!("{}", String::from_utf8_lossy(&text));
    Ok(())
}
