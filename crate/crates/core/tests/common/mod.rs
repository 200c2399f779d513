#![allow(dead_code)]

use std::path::Path;

use nalgebra::{Point3, Rotation3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use viewgrasp::geometry::{sample_primitive, write_xyz, PointCloud, Primitive};
use viewgrasp::protocol::Dataset;
use viewgrasp::representation::FeatureVector;

pub fn random_rotation(rng: &mut impl Rng) -> Rotation3<f64> {
    let axis = loop {
        let v = Vector3::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        );
        if v.norm() > 1e-6 {
            break v;
        }
    };
    Rotation3::from_axis_angle(
        &nalgebra::Unit::new_normalize(axis),
        rng.random_range(0.0..std::f64::consts::TAU),
    )
}

/// Five shapes that differ in their extent ratios.
pub fn shape_family(category: usize) -> Primitive {
    match category {
        0 => Primitive::Cylinder {
            radius: 0.03,
            height: 0.20,
        },
        1 => Primitive::Cylinder {
            radius: 0.06,
            height: 0.015,
        },
        2 => Primitive::Sphere { radius: 0.05 },
        3 => Primitive::Box {
            x: 0.20,
            y: 0.04,
            z: 0.04,
        },
        _ => Primitive::Box {
            x: 0.15,
            y: 0.10,
            z: 0.01,
        },
    }
}

fn jitter(shape: Primitive, rng: &mut impl Rng) -> Primitive {
    let mut j = || rng.random_range(0.9..1.1);
    match shape {
        Primitive::Box { x, y, z } => Primitive::Box {
            x: x * j(),
            y: y * j(),
            z: z * j(),
        },
        Primitive::Cylinder { radius, height } => Primitive::Cylinder {
            radius: radius * j(),
            height: height * j(),
        },
        Primitive::Sphere { radius } => Primitive::Sphere {
            radius: radius * j(),
        },
    }
}

/// Jittered, rotated, translated and noisy sample of a category.
pub fn noisy_instance(category: usize, seed: u64) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shape = jitter(shape_family(category), &mut rng);
    let count = rng.random_range(600..1000);
    let clean = sample_primitive(&shape, count, rng.random()).unwrap();
    let noise = Normal::new(0.0, 0.001).unwrap();
    let pts: Vec<Point3<f64>> = clean
        .points()
        .iter()
        .map(|p| {
            p + Vector3::new(
                noise.sample(&mut rng),
                noise.sample(&mut rng),
                noise.sample(&mut rng),
            )
        })
        .collect();
    let r = random_rotation(&mut rng);
    let t = Vector3::new(
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
        rng.random_range(0.0..1.0),
    );
    PointCloud::new(pts).transformed(r.matrix(), &t)
}

/// Gaussian clusters around distinct one-hot-dominant centers.
pub fn separable_dataset(categories: usize, per: usize, dim: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.01).unwrap();
    Dataset::from_features((0..categories).map(|c| {
        let feats = (0..per)
            .map(|_| {
                let v: Vec<f64> = (0..dim)
                    .map(|i| {
                        let base: f64 = if i == c % dim { 1.0 } else { 0.02 };
                        (base + noise.sample(&mut rng)).abs()
                    })
                    .collect();
                FeatureVector::normalized(v).unwrap()
            })
            .collect();
        (format!("cat{c}"), feats)
    }))
    .unwrap()
}

pub fn constant_dataset(categories: usize, per: usize, dim: usize) -> Dataset {
    let v = FeatureVector::normalized((1..=dim).map(|i| i as f64).collect()).unwrap();
    Dataset::from_features((0..categories).map(|c| (format!("k{c:02}"), vec![v.clone(); per])))
        .unwrap()
}

/// Writes a dataset as one feature CSV per category directory.
pub fn write_dataset(data: &Dataset, dir: &Path) {
    for label in data.labels() {
        let sub = dir.join(label);
        std::fs::create_dir_all(&sub).unwrap();
        let mut text = String::new();
        let dim = data.dim().unwrap();
        text.push_str("id");
        for i in 0..dim {
            text.push_str(&format!(",f{i}"));
        }
        text.push('\n');
        for inst in data.instances(label) {
            let id = inst.id.replace('/', "_");
            text.push_str(&id);
            for v in inst.feature.values() {
                text.push_str(&format!(",{v:?}"));
            }
            text.push('\n');
        }
        std::fs::write(sub.join("features.csv"), text).unwrap();
    }
}

pub fn write_cloud(cloud: &PointCloud, path: &Path) {
    let mut f = std::fs::File::create(path).unwrap();
    write_xyz(cloud, &mut f).unwrap();
}

pub fn cylinder_200() -> PointCloud {
    sample_primitive(
        &Primitive::Cylinder {
            radius: 0.03,
            height: 0.12,
        },
        200,
        42,
    )
    .unwrap()
}
