//! Starts the JSON API with a small in-memory dataset and one object.
//!
//!     cargo run --example serve -- 127.0.0.1:8080
//!
//! Then, for example:
//!
//!     curl -X POST localhost:8080/sessions
//!     curl -X POST localhost:8080/sessions/s1/teach \
//!          -d '{"label":"ball","instance_ids":["ball/0","ball/1","ball/2"]}'
//!     curl -X POST localhost:8080/sessions/s1/ask -d '{"instance_id":"ball/5"}'
//!     curl localhost:8080/objects/can/views

use std::collections::BTreeMap;
use std::net::SocketAddr;

use viewgrasp::config::Settings;
use viewgrasp::geometry::{sample_primitive, Primitive};
use viewgrasp::pipeline::describe;
use viewgrasp::protocol::Dataset;
use viewgrasp::service::{serve, AppState};

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let addr: SocketAddr = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "127.0.0.1:8080".into())
        .parse()?;

    let settings = Settings::default();
    let shapes = [
        ("ball", Primitive::Sphere { radius: 0.05 }),
        (
            "box",
            Primitive::Box {
                x: 0.12,
                y: 0.08,
                z: 0.05,
            },
        ),
    ];
    let mut groups = Vec::new();
    for (label, shape) in &shapes {
        let feats = (0..8)
            .map(|seed| describe(&sample_primitive(shape, 600, seed)?, &settings.descriptor))
            .collect::<viewgrasp::Result<Vec<_>>>()?;
        groups.push((label.to_string(), feats));
    }
    let dataset = Dataset::from_features(groups)?;

    let mut objects = BTreeMap::new();
    objects.insert(
        "can".to_string(),
        sample_primitive(
            &Primitive::Cylinder {
                radius: 0.03,
                height: 0.12,
            },
            1000,
            1,
        )?,
    );
    serve(AppState::new(settings, dataset, objects), addr).await?;
    Ok(())
}
