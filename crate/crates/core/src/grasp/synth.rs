use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{anneal, sample_candidates, GraspCandidate, GraspConfig, GraspMap};
use crate::error::{Error, Result};
use crate::geometry::PointCloud;
use crate::projection::DepthView;

/// Annealed candidates in sampling order and the map they were merged into.
#[derive(Debug, Clone, PartialEq)]
pub struct GraspSynthesis {
    pub map: GraspMap,
    pub candidates: Vec<GraspCandidate>,
}

/// Samples `budget` candidates on `view`, anneals each independently and
/// rasterizes them, keeping the best writer per pixel.
pub fn synthesize_grasp_map(
    cloud: &PointCloud,
    view: &DepthView,
    config: &GraspConfig,
    budget: usize,
    seed: u64,
) -> Result<GraspSynthesis> {
    config.validate()?;
    if budget == 0 {
        return Err(Error::invalid("candidate budget must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sample_seed = rng.next_u64();
    let anneal_seeds: Vec<u64> = (0..budget).map(|_| rng.next_u64()).collect();
    let initial = sample_candidates(view, budget, sample_seed, config.gripper.max_width)?;
    let candidates = initial
        .par_iter()
        .zip(anneal_seeds.par_iter())
        .map(|(c, &s)| anneal(c, cloud, view, config, s))
        .collect::<Result<Vec<_>>>()?;
    let mut map = GraspMap::zeros(view.bins());
    for c in &candidates {
        map.offer(c);
    }
    Ok(GraspSynthesis { map, candidates })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{sample_primitive, Primitive};
    use crate::grasp::best_grasp;
    use crate::projection::{look_at, project, ProjectionMode, VirtualCamera};
    use nalgebra::{Point3, Vector3};

    fn scene() -> (PointCloud, DepthView) {
        let cloud = sample_primitive(
            &Primitive::Box {
                x: 0.06,
                y: 0.1,
                z: 0.08,
            },
            400,
            3,
        )
        .unwrap();
        let camera = VirtualCamera {
            pose: look_at(Point3::new(0.0, 0.0, 1.0), Point3::origin(), Vector3::y()),
            plane_side: 0.45,
            bins: 64,
            mode: ProjectionMode::FixedSize,
        };
        let view = project(&cloud, &camera).unwrap();
        (cloud, view)
    }

    #[test]
    fn budget_one_writes_one_pixel() {
        let (cloud, view) = scene();
        let mut config = GraspConfig::new();
        config.schedule.iters = 20;
        let out = synthesize_grasp_map(&cloud, &view, &config, 1, 5).unwrap();
        assert_eq!(
            out.map
                .quality
                .as_slice()
                .iter()
                .filter(|&&q| q > 0.0)
                .count(),
            1
        );
    }

    #[test]
    fn best_pixel_is_best_candidate_and_runs_repeat() {
        let (cloud, view) = scene();
        let mut config = GraspConfig::new();
        config.schedule.iters = 40;
        let a = synthesize_grasp_map(&cloud, &view, &config, 24, 8).unwrap();
        let b = synthesize_grasp_map(&cloud, &view, &config, 24, 8).unwrap();
        assert_eq!(a, b);
        let best = best_grasp(&a.map).unwrap();
        let top = a.candidates.iter().fold(f64::MIN, |m, c| m.max(c.quality));
        assert_eq!(best.quality, top);
        assert!(a
            .candidates
            .iter()
            .any(|c| (c.u, c.v) == (best.u, best.v) && c.quality == top));
    }
}
