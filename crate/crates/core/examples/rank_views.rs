//! Ranks the views of a flat plate by viewpoint entropy. The face-on view
//! (index 2, along the plate's thinnest axis) spreads depth over the most
//! pixels and comes first.
//!
//!     cargo run --example rank_views

use viewgrasp::geometry::{sample_primitive, Primitive};
use viewgrasp::pipeline::object_views;
use viewgrasp::projection::{ProjectionMode, ViewSetup};
use viewgrasp::view_selection::{rank_views_with, EntropyMode};

fn main() -> viewgrasp::Result<()> {
    let plate = sample_primitive(
        &Primitive::Box {
            x: 0.15,
            y: 0.1,
            z: 0.01,
        },
        2000,
        3,
    )?;
    let views = object_views(
        &plate,
        &ViewSetup::Orthographic,
        ProjectionMode::FixedSize,
        64,
    )?
    .views;
    for mode in [EntropyMode::Depth, EntropyMode::Occupancy] {
        let ranking = rank_views_with(&views, mode)?;
        println!("{mode:?}:");
        for s in &ranking {
            println!("  view {:2}  {:.4} bits", s.view_index, s.entropy_bits);
        }
    }
    Ok(())
}
