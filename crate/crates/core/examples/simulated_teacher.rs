//! Runs the simulated-teacher protocol over synthetic clusters for several
//! seeds and prints the aggregate metrics.
//!
//!     cargo run --example simulated_teacher

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use viewgrasp::protocol::{aggregate_runs, run_seeds, write_summary_csv, Dataset, ProtocolConfig};
use viewgrasp::representation::FeatureVector;

fn clusters(categories: usize, per: usize, dim: usize, spread: f64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let noise = Normal::new(0.0, spread).unwrap();
    Dataset::from_features((0..categories).map(|c| {
        let feats = (0..per)
            .map(|_| {
                let v = (0..dim)
                    .map(|i| {
                        let base: f64 = if i == c % dim { 1.0 } else { 0.1 };
                        (base + noise.sample(&mut rng)).abs()
                    })
                    .collect();
                FeatureVector::normalized(v).unwrap()
            })
            .collect();
        (format!("category{c:02}"), feats)
    }))
    .unwrap()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Overlapping clusters: more categories than feature dimensions.
    let data = clusters(12, 30, 8, 0.05);
    let reports = run_seeds(
        &ProtocolConfig::default(),
        &data,
        &(1..=5).collect::<Vec<_>>(),
    )?;
    for r in &reports {
        println!(
            "seed {}: learned {} categories in {} questions, stopped by {:?}",
            r.config.seed, r.alc, r.qci, r.stop_reason
        );
    }
    let summary = aggregate_runs(&reports)?;
    write_summary_csv(&summary, std::io::stdout())?;
    Ok(())
}
