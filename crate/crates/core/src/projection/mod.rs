//! Virtual camera rigs and z-buffered orthogonal depth rendering.

pub(crate) mod dview;

pub use dview::{parse_dview, read_dview, write_dview};

use std::fmt;
use std::str::FromStr;

use nalgebra::{Point3, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Aabb, PointCloud, ReferenceFrame};
use crate::grid::Grid;

/// Side of the fixed projection plane used for grasp views, in meters.
pub const GRASP_PLANE_SIDE: f64 = 0.45;
pub const DEFAULT_GRASP_BINS: usize = 64;
pub const DEFAULT_RECOGNITION_BINS: usize = 32;
/// Orthogonal projection does not depend on it; kept as camera metadata.
pub const DEFAULT_CAMERA_DISTANCE: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProjectionMode {
    /// Plane side equals the largest bounding-box side (recognition views).
    ScaleInvariant,
    /// Plane side fixed at [`GRASP_PLANE_SIDE`] (grasp views).
    FixedSize,
}

impl ProjectionMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ProjectionMode::ScaleInvariant => "scale-invariant",
            ProjectionMode::FixedSize => "fixed-size",
        }
    }
}

impl fmt::Display for ProjectionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProjectionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scale-invariant" => Ok(ProjectionMode::ScaleInvariant),
            "fixed-size" => Ok(ProjectionMode::FixedSize),
            other => Err(Error::invalid(format!("unknown projection mode `{other}`"))),
        }
    }
}

/// Camera placement around an object.
///
/// Angles are in degrees. `alpha_deg` is the azimuth step, `phi_deg` the
/// orbit elevation and `beta_deg` the elevation step of the sphere rig.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ViewSetup {
    Orthographic,
    Orbit { alpha_deg: f64, phi_deg: f64 },
    Sphere { alpha_deg: f64, beta_deg: f64 },
}

/// Number of whole steps of `step` in `span`, if `step` divides it.
fn step_count(span: f64, step: f64, name: &str) -> Result<usize> {
    if !(step > 0.0 && step <= span) {
        return Err(Error::invalid(format!(
            "{name} = {step} must lie in (0, {span}]"
        )));
    }
    let n = span / step;
    let rounded = n.round();
    if (n - rounded).abs() > 1e-9 * n.max(1.0) {
        return Err(Error::invalid(format!(
            "{name} = {step} does not divide {span} evenly"
        )));
    }
    Ok(rounded as usize)
}

impl ViewSetup {
    pub fn orbit(alpha_deg: f64, phi_deg: f64) -> Result<Self> {
        let setup = ViewSetup::Orbit { alpha_deg, phi_deg };
        setup.validate()?;
        Ok(setup)
    }

    pub fn sphere(alpha_deg: f64, beta_deg: f64) -> Result<Self> {
        let setup = ViewSetup::Sphere {
            alpha_deg,
            beta_deg,
        };
        setup.validate()?;
        Ok(setup)
    }

    /// Sphere rig given as azimuth and elevation counts instead of steps,
    /// i.e. `alpha = 360 / azimuths` and `beta = 180 / elevations`.
    pub fn sphere_counts(azimuths: usize, elevations: usize) -> Result<Self> {
        if azimuths == 0 || elevations == 0 {
            return Err(Error::invalid("sphere counts must be positive"));
        }
        ViewSetup::sphere(360.0 / azimuths as f64, 180.0 / elevations as f64)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ViewSetup::Orthographic => Ok(()),
            ViewSetup::Orbit { alpha_deg, phi_deg } => {
                step_count(360.0, alpha_deg, "alpha")?;
                if !(-90.0..=90.0).contains(&phi_deg) {
                    return Err(Error::invalid(format!("phi = {phi_deg} outside [-90, 90]")));
                }
                Ok(())
            }
            ViewSetup::Sphere {
                alpha_deg,
                beta_deg,
            } => {
                step_count(360.0, alpha_deg, "alpha")?;
                step_count(180.0, beta_deg, "beta")?;
                Ok(())
            }
        }
    }

    pub fn view_count(&self) -> Result<usize> {
        match *self {
            ViewSetup::Orthographic => Ok(3),
            ViewSetup::Orbit { alpha_deg, .. } => step_count(360.0, alpha_deg, "alpha"),
            ViewSetup::Sphere {
                alpha_deg,
                beta_deg,
            } => Ok(step_count(360.0, alpha_deg, "alpha")? * step_count(180.0, beta_deg, "beta")?),
        }
    }

    /// Unit directions from the object center to each camera, in frame
    /// coordinates.
    fn directions(&self) -> Result<Vec<Vector3<f64>>> {
        let on_sphere = |azimuth: f64, elevation: f64| {
            let (az, el) = (azimuth.to_radians(), elevation.to_radians());
            Vector3::new(el.cos() * az.cos(), el.cos() * az.sin(), el.sin())
        };
        Ok(match *self {
            ViewSetup::Orthographic => vec![Vector3::x(), Vector3::y(), Vector3::z()],
            ViewSetup::Orbit { alpha_deg, phi_deg } => (0..step_count(360.0, alpha_deg, "alpha")?)
                .map(|i| on_sphere(i as f64 * alpha_deg, phi_deg))
                .collect(),
            ViewSetup::Sphere {
                alpha_deg,
                beta_deg,
            } => {
                let azimuths = step_count(360.0, alpha_deg, "alpha")?;
                let levels = step_count(180.0, beta_deg, "beta")?;
                // Elevation bands of width beta over [-90, 90], sampled at band centers.
                (0..levels)
                    .flat_map(|j| {
                        let elevation = -90.0 + beta_deg * (j as f64 + 0.5);
                        (0..azimuths).map(move |i| on_sphere(i as f64 * alpha_deg, elevation))
                    })
                    .collect()
            }
        })
    }
}

/// Orthogonal camera: `pose.origin` is the camera center and the pose's Z
/// column is the viewing direction. The plane's `u`/`v` axes are the pose's
/// X/Y columns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VirtualCamera {
    pub pose: ReferenceFrame,
    pub plane_side: f64,
    pub bins: usize,
    pub mode: ProjectionMode,
}

impl VirtualCamera {
    pub fn bin_size(&self) -> f64 {
        self.plane_side / self.bins as f64
    }
}

/// Right-handed frame at `eye` whose Z axis points at `target`; its Y axis is
/// the part of `up` orthogonal to the view direction.
pub fn look_at(eye: Point3<f64>, target: Point3<f64>, up: Vector3<f64>) -> ReferenceFrame {
    let z = (target - eye).normalize();
    let up = if up.cross(&z).norm() < 1e-6 {
        // Looking along `up`: fall back to any orthogonal hint.
        if z.x.abs() < 0.9 {
            Vector3::x()
        } else {
            Vector3::y()
        }
    } else {
        up
    };
    let x = up.cross(&z).normalize();
    let y = z.cross(&x);
    ReferenceFrame {
        origin: eye,
        axes: nalgebra::Matrix3::from_columns(&[x, y, z]),
    }
}

/// Places the rig's cameras at `distance` from `frame.origin`, all looking
/// at it.
pub fn generate_cameras(
    setup: &ViewSetup,
    frame: &ReferenceFrame,
    distance: f64,
    plane_side: f64,
    bins: usize,
    mode: ProjectionMode,
) -> Result<Vec<VirtualCamera>> {
    if !(distance > 0.0 && distance.is_finite()) {
        return Err(Error::invalid(format!(
            "camera distance {distance} must be positive"
        )));
    }
    if bins == 0 {
        return Err(Error::invalid("bin count must be positive"));
    }
    let up = frame.z_axis();
    Ok(setup
        .directions()?
        .into_iter()
        .map(|dir| {
            let dir = frame.vector_to_world(&dir);
            let eye = frame.origin + dir * distance;
            // For views along Z, use Y as the up hint so u runs along X.
            let hint = if dir.cross(&up).norm() < 1e-6 {
                -frame.y_axis() * dir.dot(&up).signum()
            } else {
                up
            };
            VirtualCamera {
                pose: look_at(eye, frame.origin, hint),
                plane_side,
                bins,
                mode,
            }
        })
        .collect())
}

/// Side of the square projection plane for `mode`.
pub fn projection_plane_side(mode: ProjectionMode, bounds: &Aabb) -> Result<f64> {
    match mode {
        ProjectionMode::FixedSize => Ok(GRASP_PLANE_SIDE),
        ProjectionMode::ScaleInvariant => {
            let side = bounds.largest_side();
            if side > 0.0 {
                Ok(side)
            } else {
                Err(Error::degenerate("bounding box has zero extent"))
            }
        }
    }
}

/// Rendered `k × k` depth image. Depth is the distance from the camera
/// plane along the view direction; `0` marks an empty bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthView {
    pub grid: Grid,
    pub plane_side: f64,
    pub mode: ProjectionMode,
    /// Camera pose, when the view was rendered rather than read from disk.
    pub pose: Option<ReferenceFrame>,
}

impl DepthView {
    pub fn bins(&self) -> usize {
        self.grid.k()
    }

    pub fn bin_size(&self) -> f64 {
        self.plane_side / self.bins() as f64
    }

    pub fn occupied(&self) -> usize {
        self.grid.occupied()
    }

    /// Plane coordinates `(u, v)` of a bin center.
    pub fn bin_center(&self, col: usize, row: usize) -> (f64, f64) {
        let cell = self.bin_size();
        let half = self.plane_side / 2.0;
        (
            (col as f64 + 0.5) * cell - half,
            (row as f64 + 0.5) * cell - half,
        )
    }
}

/// Bin containing plane coordinate `c`; `None` outside `[-l/2, l/2]`.
pub fn bin_index(c: f64, plane_side: f64, bins: usize) -> Option<usize> {
    let half = plane_side / 2.0;
    if !(-half..=half).contains(&c) {
        return None;
    }
    let idx = ((c + half) / (plane_side / bins as f64)).floor() as usize;
    Some(idx.min(bins - 1))
}

/// Z-buffered orthogonal projection of `cloud` onto the camera plane.
///
/// Points behind the camera or outside the `l × l` window are dropped; each
/// bin keeps the nearest depth.
pub fn project(cloud: &PointCloud, camera: &VirtualCamera) -> Result<DepthView> {
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    if !(camera.plane_side > 0.0) {
        return Err(Error::degenerate("projection plane side is zero"));
    }
    if camera.bins == 0 {
        return Err(Error::invalid("bin count must be positive"));
    }
    let k = camera.bins;
    let mut grid = Grid::zeros(k);
    for p in cloud.points() {
        let q = camera.pose.to_local(p);
        if q.z <= 0.0 {
            continue;
        }
        let (Some(col), Some(row)) = (
            bin_index(q.x, camera.plane_side, k),
            bin_index(q.y, camera.plane_side, k),
        ) else {
            continue;
        };
        let cur = grid.get(row, col);
        if cur == 0.0 || q.z < cur {
            grid.set(row, col, q.z);
        }
    }
    Ok(DepthView {
        grid,
        plane_side: camera.plane_side,
        mode: camera.mode,
        pose: Some(camera.pose),
    })
}

/// Renders every view of `setup` for a cloud already expressed in its
/// object frame (centroid at the origin).
pub fn render_views(
    cloud: &PointCloud,
    setup: &ViewSetup,
    mode: ProjectionMode,
    bins: usize,
    distance: f64,
) -> Result<Vec<DepthView>> {
    let bounds = crate::geometry::aabb(cloud)?;
    let side = projection_plane_side(mode, &bounds)?;
    let cameras = generate_cameras(
        setup,
        &ReferenceFrame::identity(),
        distance,
        side,
        bins,
        mode,
    )?;
    cameras.par_iter().map(|cam| project(cloud, cam)).collect()
}
