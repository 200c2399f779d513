use std::f64::consts::PI;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{back_project, fitness, GraspCandidate, GraspConfig, GraspPose};
use crate::error::{Error, Result};
use crate::geometry::PointCloud;
use crate::projection::DepthView;

/// Smallest opening the annealer will propose, meters.
const MIN_WIDTH: f64 = 1e-4;

/// Pose evaluator for a fixed pixel: the grasp point and approach axis are
/// resolved once, rotation and width vary.
pub(crate) struct PixelGrasp<'a> {
    base: GraspPose,
    view: &'a DepthView,
    cloud: &'a PointCloud,
    config: &'a GraspConfig,
}

impl<'a> PixelGrasp<'a> {
    pub(crate) fn new(
        candidate: &GraspCandidate,
        cloud: &'a PointCloud,
        view: &'a DepthView,
        config: &'a GraspConfig,
    ) -> Result<Self> {
        let base = back_project(candidate, view, config.delta)?;
        Ok(PixelGrasp {
            base,
            view,
            cloud,
            config,
        })
    }

    pub(crate) fn pose(&self, rotation: f64, width: f64) -> GraspPose {
        let frame = self.view.pose.expect("checked by back_project");
        let (s, c) = rotation.sin_cos();
        GraspPose::new(
            self.base.position,
            self.base.approach_axis(),
            frame.vector_to_world(&Vector3::new(c, s, 0.0)),
            width,
            self.base.pixel,
        )
    }

    pub(crate) fn score(&self, rotation: f64, width: f64) -> Result<f64> {
        let pose = self.pose(rotation, width);
        Ok(fitness(
            self.cloud,
            &pose,
            &self.config.gripper,
            self.view.bins(),
            &self.config.weights,
        )?
        .total)
    }
}

/// Simulated annealing over rotation and width at a fixed pixel.
///
/// Returns the best state visited, with `quality` set to its fitness.
pub fn anneal(
    candidate: &GraspCandidate,
    cloud: &PointCloud,
    view: &DepthView,
    config: &GraspConfig,
    seed: u64,
) -> Result<GraspCandidate> {
    config.validate()?;
    let max_width = config.gripper.max_width;
    if !(candidate.width_m > 0.0 && candidate.width_m <= max_width) {
        return Err(Error::invalid(format!(
            "width {} outside (0, {max_width}]",
            candidate.width_m
        )));
    }
    let grasp = PixelGrasp::new(candidate, cloud, view, config)?;
    let schedule = &config.schedule;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut current = (candidate.rotation_rad, candidate.width_m);
    let mut current_fit = grasp.score(current.0, current.1)?;
    let mut best = current;
    let mut best_fit = current_fit;
    let mut temperature = schedule.t0;
    for _ in 0..schedule.iters {
        let dr: f64 = rng.sample(StandardNormal);
        let dw: f64 = rng.sample(StandardNormal);
        let proposal = (
            (current.0 + schedule.sigma_rotation * dr).rem_euclid(PI),
            (current.1 + schedule.sigma_width * dw).clamp(MIN_WIDTH.min(max_width), max_width),
        );
        let fit = grasp.score(proposal.0, proposal.1)?;
        let accept =
            fit >= current_fit || rng.random::<f64>() < ((fit - current_fit) / temperature).exp();
        if accept {
            current = proposal;
            current_fit = fit;
            if fit > best_fit {
                best = proposal;
                best_fit = fit;
            }
        }
        temperature *= schedule.cooling;
    }
    Ok(GraspCandidate {
        rotation_rad: best.0,
        width_m: best.1,
        quality: best_fit,
        ..*candidate
    })
}
