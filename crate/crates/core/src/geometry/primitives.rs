use std::f64::consts::PI;

use nalgebra::{Point3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::PointCloud;
use crate::error::{Error, Result};

/// Analytic solids centered at the origin. Cylinders stand along Z.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum Primitive {
    Box { x: f64, y: f64, z: f64 },
    Cylinder { radius: f64, height: f64 },
    Sphere { radius: f64 },
}

impl Primitive {
    fn dimensions(&self) -> Vec<f64> {
        match *self {
            Primitive::Box { x, y, z } => vec![x, y, z],
            Primitive::Cylinder { radius, height } => vec![radius, height],
            Primitive::Sphere { radius } => vec![radius],
        }
    }
}

/// Deterministic, area-uniform surface samples with analytic outward normals.
pub fn sample_primitive(shape: &Primitive, count: usize, seed: u64) -> Result<PointCloud> {
    if count == 0 {
        return Err(Error::invalid("sample count must be positive"));
    }
    if shape
        .dimensions()
        .iter()
        .any(|&d| !(d > 0.0 && d.is_finite()))
    {
        return Err(Error::invalid(format!(
            "non-positive dimension in {shape:?}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(count);
    let mut normals = Vec::with_capacity(count);
    for _ in 0..count {
        let (p, n) = match *shape {
            Primitive::Box { x, y, z } => sample_box(&mut rng, [x, y, z]),
            Primitive::Cylinder { radius, height } => sample_cylinder(&mut rng, radius, height),
            Primitive::Sphere { radius } => {
                let n = loop {
                    let v = Vector3::new(
                        rng.sample::<f64, _>(StandardNormal),
                        rng.sample::<f64, _>(StandardNormal),
                        rng.sample::<f64, _>(StandardNormal),
                    );
                    let len = v.norm();
                    if len > 1e-9 {
                        break v / len;
                    }
                };
                (Point3::from(n * radius), n)
            }
        };
        points.push(p);
        normals.push(n);
    }
    PointCloud::with_normals(points, normals)
}

fn sample_box(rng: &mut ChaCha8Rng, size: [f64; 3]) -> (Point3<f64>, Vector3<f64>) {
    let half = size.map(|s| s / 2.0);
    // Face pair normal to axis a has area size[b]·size[c].
    let areas = [size[1] * size[2], size[0] * size[2], size[0] * size[1]];
    let total: f64 = areas.iter().sum();
    let mut pick = rng.random::<f64>() * total;
    let mut axis = 2;
    for (a, &area) in areas.iter().enumerate() {
        if pick < area {
            axis = a;
            break;
        }
        pick -= area;
    }
    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
    let mut p = [0.0; 3];
    for (a, coord) in p.iter_mut().enumerate() {
        *coord = if a == axis {
            sign * half[a]
        } else {
            rng.random_range(-half[a]..=half[a])
        };
    }
    let mut n = Vector3::zeros();
    n[axis] = sign;
    (Point3::from(p), n)
}

fn sample_cylinder(rng: &mut ChaCha8Rng, r: f64, h: f64) -> (Point3<f64>, Vector3<f64>) {
    let lateral = 2.0 * PI * r * h;
    let caps = 2.0 * PI * r * r;
    let theta = rng.random_range(0.0..2.0 * PI);
    if rng.random::<f64>() * (lateral + caps) < lateral {
        let z = rng.random_range(-h / 2.0..=h / 2.0);
        let n = Vector3::new(theta.cos(), theta.sin(), 0.0);
        (Point3::new(r * n.x, r * n.y, z), n)
    } else {
        let rho = r * rng.random::<f64>().sqrt();
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        (
            Point3::new(rho * theta.cos(), rho * theta.sin(), sign * h / 2.0),
            Vector3::new(0.0, 0.0, sign),
        )
    }
}
