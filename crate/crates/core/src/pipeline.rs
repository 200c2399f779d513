//! End-to-end compositions shared by the command line, the service and the
//! examples: object descriptors for recognition and grasp planning on the
//! most informative view.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    aabb, estimate_normals, local_reference_frame, transform_to_frame, PointCloud, ReferenceFrame,
};
use crate::grasp::{
    back_project, collision_free, ranked_grasps, synthesize_grasp_map, GraspCandidate, GraspConfig,
    GraspPose, GraspSynthesis,
};
use crate::projection::{
    generate_cameras, project, projection_plane_side, DepthView, ProjectionMode, ViewSetup,
    DEFAULT_CAMERA_DISTANCE, DEFAULT_GRASP_BINS, DEFAULT_RECOGNITION_BINS, GRASP_PLANE_SIDE,
};
use crate::representation::{pool_features, view_to_feature, FeatureVector, PoolingMode};
use crate::view_selection::{rank_views_with, EntropyMode, ViewScore};

/// Neighbors used when a grasp cloud arrives without normals.
pub const DEFAULT_NORMAL_NEIGHBORS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DescriptorConfig {
    pub setup: ViewSetup,
    pub mode: ProjectionMode,
    pub bins: usize,
    pub pooling: PoolingMode,
}

impl Default for DescriptorConfig {
    fn default() -> Self {
        DescriptorConfig {
            setup: ViewSetup::Orthographic,
            mode: ProjectionMode::ScaleInvariant,
            bins: DEFAULT_RECOGNITION_BINS,
            pooling: PoolingMode::Avg,
        }
    }
}

/// Views of an object rendered in its local reference frame.
#[derive(Debug, Clone)]
pub struct ObjectViews {
    pub frame: ReferenceFrame,
    /// The cloud expressed in `frame`.
    pub local: PointCloud,
    pub views: Vec<DepthView>,
}

/// Renders `setup` around the object's local frame.
///
/// Scale-invariant views place the cameras at twice the largest bounding-box
/// side so depths scale with the object; fixed-size views use the default
/// distance unless the object would reach behind the camera.
pub fn object_views(
    cloud: &PointCloud,
    setup: &ViewSetup,
    mode: ProjectionMode,
    bins: usize,
) -> Result<ObjectViews> {
    setup.validate()?;
    let frame = local_reference_frame(cloud)?;
    let local = transform_to_frame(cloud, &frame);
    let bounds = aabb(&local)?;
    let side = projection_plane_side(mode, &bounds)?;
    let reach = bounds
        .min
        .coords
        .abs()
        .max()
        .max(bounds.max.coords.abs().max());
    let distance = match mode {
        ProjectionMode::ScaleInvariant => 2.0 * bounds.largest_side(),
        ProjectionMode::FixedSize => DEFAULT_CAMERA_DISTANCE.max(2.0 * reach),
    };
    let cameras = generate_cameras(
        setup,
        &ReferenceFrame::identity(),
        distance,
        side,
        bins,
        mode,
    )?;
    let views = {
        use rayon::prelude::*;
        cameras
            .par_iter()
            .map(|c| project(&local, c))
            .collect::<Result<Vec<_>>>()?
    };
    Ok(ObjectViews {
        frame,
        local,
        views,
    })
}

/// Pooled projection descriptor of an object.
pub fn describe(cloud: &PointCloud, config: &DescriptorConfig) -> Result<FeatureVector> {
    let rendered = object_views(cloud, &config.setup, config.mode, config.bins)?;
    let features = rendered
        .views
        .iter()
        .filter(|v| v.occupied() > 0)
        .map(view_to_feature)
        .collect::<Result<Vec<_>>>()?;
    if features.is_empty() {
        return Err(Error::EmptyView);
    }
    pool_features(&features, config.pooling)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GraspPlanConfig {
    pub setup: ViewSetup,
    pub bins: usize,
    pub budget: usize,
    pub seed: u64,
    /// Table plane in the input frame; defaults to the lowest point.
    pub table_height: Option<f64>,
    pub entropy: EntropyMode,
    pub normal_neighbors: usize,
    pub grasp: GraspConfig,
}

impl Default for GraspPlanConfig {
    fn default() -> Self {
        GraspPlanConfig {
            setup: ViewSetup::Orthographic,
            bins: DEFAULT_GRASP_BINS,
            budget: 64,
            seed: 0,
            table_height: None,
            entropy: EntropyMode::Depth,
            normal_neighbors: DEFAULT_NORMAL_NEIGHBORS,
            grasp: GraspConfig::default(),
        }
    }
}

/// A grasp that clears the object and the table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannedGrasp {
    pub candidate: GraspCandidate,
    /// Pose in the input frame.
    pub pose: GraspPose,
}

#[derive(Debug, Clone)]
pub struct GraspPlan {
    pub ranking: Vec<ViewScore>,
    pub view_index: usize,
    pub view: DepthView,
    pub synthesis: GraspSynthesis,
    /// Highest-quality collision-free grasp, if any.
    pub best: Option<PlannedGrasp>,
    pub table_height: f64,
}

impl GraspPlan {
    pub fn best(&self) -> Result<&PlannedGrasp> {
        self.best
            .as_ref()
            .ok_or(Error::NoValidGrasp(self.synthesis.candidates.len()))
    }
}

/// Renders fixed-size views, picks the highest-entropy one, synthesizes a
/// grasp map on it and selects the best grasp that clears the object and
/// the table. A plan without such a grasp is still returned.
pub fn plan_grasp(cloud: &PointCloud, config: &GraspPlanConfig) -> Result<GraspPlan> {
    let cloud = if cloud.normals().is_some() {
        cloud.clone()
    } else {
        estimate_normals(cloud, config.normal_neighbors)?
    };
    let table_height = match config.table_height {
        Some(h) => h,
        None => aabb(&cloud)?.min.z,
    };
    let rendered = object_views(
        &cloud,
        &config.setup,
        ProjectionMode::FixedSize,
        config.bins,
    )?;
    debug_assert!((rendered.views[0].plane_side - GRASP_PLANE_SIDE).abs() < 1e-12);
    let ranking = rank_views_with(&rendered.views, config.entropy)?;
    let view_index = ranking[0].view_index;
    let view = rendered.views[view_index].clone();
    log::info!(
        "grasp view {view_index} of {} ({:.4} bits)",
        rendered.views.len(),
        ranking[0].entropy_bits
    );
    let synthesis = synthesize_grasp_map(
        &rendered.local,
        &view,
        &config.grasp,
        config.budget,
        config.seed,
    )?;
    let frame = rendered.frame;
    let mut best = None;
    for g in ranked_grasps(&synthesis.map) {
        let local = back_project(&g, &view, config.grasp.delta)?;
        let world = local.transformed(&frame.axes, &frame.origin.coords);
        if collision_free(&world, &cloud, &config.grasp.gripper, table_height) {
            best = Some(PlannedGrasp {
                candidate: g,
                pose: world,
            });
            break;
        }
    }
    Ok(GraspPlan {
        ranking,
        view_index,
        view,
        synthesis,
        best,
        table_height,
    })
}
