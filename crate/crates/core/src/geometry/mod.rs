//! Point clouds, object-local reference frames and bounding boxes.
//!
//! Every object is re-expressed in its own principal-axes frame before any
//! view is rendered. The frame's origin is the centroid and its X/Y axes are
//! the two dominant eigenvectors of the population covariance, so the rendered
//! views do not depend on how the object was posed when it was observed.

mod io;
mod primitives;

pub use io::{load_cloud, parse_ply, parse_xyz, write_xyz, CloudFormat};
pub use primitives::{sample_primitive, Primitive};

use nalgebra::{Matrix3, Point3, SymmetricEigen, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `‖n‖ − 1` accepted for supplied normals.
pub const NORMAL_TOLERANCE: f64 = 1e-6;

/// Below this ratio `e₂ / e₁` the in-plane axes are not well defined.
pub const MIN_EIGEN_RATIO: f64 = 1e-6;

/// Below this leading eigenvalue (m²) the cloud is treated as a single point.
pub const MIN_LEADING_EIGENVALUE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<Point3<f64>>,
    normals: Option<Vec<Vector3<f64>>>,
}

impl PointCloud {
    pub fn new(points: Vec<Point3<f64>>) -> Self {
        PointCloud {
            points,
            normals: None,
        }
    }

    /// Creates a cloud with per-point normals, which must be unit length.
    pub fn with_normals(points: Vec<Point3<f64>>, normals: Vec<Vector3<f64>>) -> Result<Self> {
        if normals.len() != points.len() {
            return Err(Error::invalid(format!(
                "{} normals for {} points",
                normals.len(),
                points.len()
            )));
        }
        if let Some(i) = normals
            .iter()
            .position(|n| (n.norm() - 1.0).abs() > NORMAL_TOLERANCE)
        {
            return Err(Error::invalid(format!("normal {i} is not unit length")));
        }
        Ok(PointCloud {
            points,
            normals: Some(normals),
        })
    }

    pub fn from_xyz(coords: &[[f64; 3]]) -> Self {
        PointCloud::new(coords.iter().map(|c| Point3::from(*c)).collect())
    }

    pub fn points(&self) -> &[Point3<f64>] {
        &self.points
    }

    pub fn normals(&self) -> Option<&[Vector3<f64>]> {
        self.normals.as_deref()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn without_normals(&self) -> PointCloud {
        PointCloud::new(self.points.clone())
    }

    /// Applies `p ↦ R·p + t`; normals are rotated by `R`.
    pub fn transformed(&self, rotation: &Matrix3<f64>, translation: &Vector3<f64>) -> PointCloud {
        PointCloud {
            points: self
                .points
                .iter()
                .map(|p| Point3::from(rotation * p.coords + translation))
                .collect(),
            normals: self
                .normals
                .as_ref()
                .map(|ns| ns.iter().map(|n| rotation * n).collect()),
        }
    }

    /// Uniform scaling about the world origin. Normals are unchanged.
    pub fn scaled(&self, factor: f64) -> PointCloud {
        PointCloud {
            points: self.points.iter().map(|p| p * factor).collect(),
            normals: self.normals.clone(),
        }
    }

    /// Concatenates two clouds. Normals survive only if both carry them.
    pub fn merged(&self, other: &PointCloud) -> PointCloud {
        let mut points = self.points.clone();
        points.extend_from_slice(&other.points);
        let normals = match (&self.normals, &other.normals) {
            (Some(a), Some(b)) => Some(a.iter().chain(b).copied().collect()),
            _ => None,
        };
        PointCloud { points, normals }
    }
}

/// Orthonormal right-handed frame; `axes` holds X, Y, Z as columns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceFrame {
    pub origin: Point3<f64>,
    pub axes: Matrix3<f64>,
}

impl ReferenceFrame {
    pub fn identity() -> Self {
        ReferenceFrame {
            origin: Point3::origin(),
            axes: Matrix3::identity(),
        }
    }

    /// Builds a frame from X and Y; Z is completed as `X × Y`.
    pub fn from_xy(origin: Point3<f64>, x: Vector3<f64>, y: Vector3<f64>) -> Self {
        let z = x.cross(&y);
        ReferenceFrame {
            origin,
            axes: Matrix3::from_columns(&[x, y, z]),
        }
    }

    pub fn x_axis(&self) -> Vector3<f64> {
        self.axes.column(0).into_owned()
    }

    pub fn y_axis(&self) -> Vector3<f64> {
        self.axes.column(1).into_owned()
    }

    pub fn z_axis(&self) -> Vector3<f64> {
        self.axes.column(2).into_owned()
    }

    pub fn to_local(&self, p: &Point3<f64>) -> Point3<f64> {
        Point3::from(self.axes.tr_mul(&(p - self.origin)))
    }

    pub fn to_world(&self, q: &Point3<f64>) -> Point3<f64> {
        self.origin + self.axes * q.coords
    }

    pub fn vector_to_local(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.axes.tr_mul(v)
    }

    pub fn vector_to_world(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.axes * v
    }

    /// Largest deviation from orthonormality and right-handedness.
    pub fn orthonormality_error(&self) -> f64 {
        let gram = self.axes.tr_mul(&self.axes) - Matrix3::identity();
        let det = (self.axes.determinant() - 1.0).abs();
        gram.amax().max(det)
    }
}

/// Eigen-decomposition of the population covariance, sorted descending.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrincipalAxes {
    pub centroid: Point3<f64>,
    pub eigenvalues: [f64; 3],
    /// Eigenvectors as columns, in the order of `eigenvalues`.
    pub eigenvectors: Matrix3<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Point3<f64>,
    pub max: Point3<f64>,
}

impl Aabb {
    pub fn extents(&self) -> Vector3<f64> {
        self.max - self.min
    }

    /// Largest side length, the scale-invariant projection plane side.
    pub fn largest_side(&self) -> f64 {
        self.extents().max()
    }

    pub fn center(&self) -> Point3<f64> {
        nalgebra::center(&self.min, &self.max)
    }
}

pub fn centroid(cloud: &PointCloud) -> Result<Point3<f64>> {
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let sum = cloud
        .points
        .iter()
        .fold(Vector3::zeros(), |acc, p| acc + p.coords);
    Ok(Point3::from(sum / cloud.len() as f64))
}

/// `(1/n)·Σ (p − c)(p − c)ᵀ`.
pub fn covariance(points: &[Point3<f64>], center: &Point3<f64>) -> Matrix3<f64> {
    let mut cov = Matrix3::zeros();
    for p in points {
        let d = p - center;
        cov += d * d.transpose();
    }
    cov / points.len() as f64
}

fn sorted_eigen(cov: Matrix3<f64>) -> ([f64; 3], Matrix3<f64>) {
    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.map(|i| eig.eigenvalues[i]);
    let vectors = Matrix3::from_columns(&order.map(|i| eig.eigenvectors.column(i).into_owned()));
    (values, vectors)
}

pub fn principal_axes(cloud: &PointCloud) -> Result<PrincipalAxes> {
    let c = centroid(cloud)?;
    let (eigenvalues, eigenvectors) = sorted_eigen(covariance(&cloud.points, &c));
    Ok(PrincipalAxes {
        centroid: c,
        eigenvalues,
        eigenvectors,
    })
}

/// Sign that orients `axis` toward the heavier tail of the point distribution.
///
/// Uses the third central moment along the axis. When that moment vanishes
/// (symmetric shapes) the largest-magnitude component of the axis is made
/// positive instead.
fn axis_sign(points: &[Point3<f64>], c: &Point3<f64>, axis: &Vector3<f64>) -> f64 {
    let (skew, scale) = points.iter().fold((0.0, 0.0), |(s, m), p| {
        let t = (p - c).dot(axis);
        (s + t * t * t, m + (t * t * t).abs())
    });
    if skew.abs() > 1e-9 * scale {
        return skew.signum();
    }
    let lead = axis.iamax();
    if axis[lead] < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Object-local frame: origin at the centroid, X/Y along the two dominant
/// principal directions, Z = X × Y.
pub fn local_reference_frame(cloud: &PointCloud) -> Result<ReferenceFrame> {
    if cloud.len() < 3 {
        return Err(Error::degenerate(format!(
            "{} points cannot span a plane",
            cloud.len()
        )));
    }
    let pa = principal_axes(cloud)?;
    let [e1, e2, _] = pa.eigenvalues;
    if e1 < MIN_LEADING_EIGENVALUE || e2 / e1 < MIN_EIGEN_RATIO {
        return Err(Error::degenerate(
            "covariance is rank deficient (coincident or collinear points)",
        ));
    }
    let mut x = pa.eigenvectors.column(0).into_owned();
    let mut y = pa.eigenvectors.column(1).into_owned();
    x *= axis_sign(&cloud.points, &pa.centroid, &x);
    y *= axis_sign(&cloud.points, &pa.centroid, &y);
    Ok(ReferenceFrame::from_xy(pa.centroid, x, y))
}

/// Expresses the cloud in `frame`: `p ↦ axesᵀ·(p − origin)`.
pub fn transform_to_frame(cloud: &PointCloud, frame: &ReferenceFrame) -> PointCloud {
    PointCloud {
        points: cloud.points.iter().map(|p| frame.to_local(p)).collect(),
        normals: cloud
            .normals
            .as_ref()
            .map(|ns| ns.iter().map(|n| frame.vector_to_local(n)).collect()),
    }
}

/// Inverse of [`transform_to_frame`].
pub fn transform_from_frame(cloud: &PointCloud, frame: &ReferenceFrame) -> PointCloud {
    PointCloud {
        points: cloud.points.iter().map(|p| frame.to_world(p)).collect(),
        normals: cloud
            .normals
            .as_ref()
            .map(|ns| ns.iter().map(|n| frame.vector_to_world(n)).collect()),
    }
}

pub fn aabb(cloud: &PointCloud) -> Result<Aabb> {
    let first = cloud.points.first().ok_or(Error::EmptyCloud)?;
    let (min, max) = cloud
        .points
        .iter()
        .fold((*first, *first), |(lo, hi), p| (lo.inf(p), hi.sup(p)));
    Ok(Aabb { min, max })
}

/// Per-point normals from the `neighbors` nearest points (the point itself
/// included), oriented away from the cloud centroid.
pub fn estimate_normals(cloud: &PointCloud, neighbors: usize) -> Result<PointCloud> {
    if neighbors < 3 {
        return Err(Error::invalid(
            "normal estimation needs at least 3 neighbors",
        ));
    }
    if cloud.len() <= neighbors {
        return Err(Error::degenerate(format!(
            "{} points is too few for {neighbors} neighbors",
            cloud.len()
        )));
    }
    let c = centroid(cloud)?;
    let pts = &cloud.points;
    let normals = pts
        .par_iter()
        .map(|p| {
            let mut dist: Vec<(f64, usize)> = pts
                .iter()
                .enumerate()
                .map(|(j, q)| ((q - p).norm_squared(), j))
                .collect();
            dist.select_nth_unstable_by(neighbors - 1, |a, b| a.0.total_cmp(&b.0));
            let hood: Vec<Point3<f64>> = dist[..neighbors].iter().map(|&(_, j)| pts[j]).collect();
            let local_c = Point3::from(
                hood.iter().fold(Vector3::zeros(), |a, q| a + q.coords) / neighbors as f64,
            );
            let (_, vecs) = sorted_eigen(covariance(&hood, &local_c));
            let mut n = vecs.column(2).into_owned().normalize();
            let outward = n.dot(&(p - c));
            if outward < -1e-12 || (outward.abs() <= 1e-12 && n[n.iamax()] < 0.0) {
                n = -n;
            }
            n
        })
        .collect();
    PointCloud::with_normals(pts.clone(), normals)
}
