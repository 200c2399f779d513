//! Describes a few primitive shapes with pooled depth views, teaches one
//! instance set per shape and classifies new poses of each.
//!
//!     cargo run --example classify_objects

use nalgebra::{Rotation3, Vector3};
use viewgrasp::geometry::{sample_primitive, Primitive};
use viewgrasp::learner::KnowledgeBase;
use viewgrasp::pipeline::{describe, DescriptorConfig};

fn main() -> viewgrasp::Result<()> {
    let shapes = [
        (
            "can",
            Primitive::Cylinder {
                radius: 0.03,
                height: 0.2,
            },
        ),
        ("ball", Primitive::Sphere { radius: 0.05 }),
        (
            "bar",
            Primitive::Box {
                x: 0.2,
                y: 0.04,
                z: 0.04,
            },
        ),
    ];
    let config = DescriptorConfig::default();
    let mut kb = KnowledgeBase::default();
    for (label, shape) in &shapes {
        let feats = (0..4)
            .map(|seed| describe(&sample_primitive(shape, 800, seed)?, &config))
            .collect::<viewgrasp::Result<Vec<_>>>()?;
        kb.teach(label, &feats)?;
    }

    let pose = Rotation3::from_euler_angles(0.4, -1.1, 2.0);
    for (label, shape) in &shapes {
        let cloud = sample_primitive(shape, 1200, 99)?
            .transformed(pose.matrix(), &Vector3::new(1.0, 2.0, 0.5));
        let prediction = kb.classify(&describe(&cloud, &config)?)?;
        println!("{label:>4} -> {}", prediction.label);
    }
    println!("digest {}", kb.digest());
    Ok(())
}
