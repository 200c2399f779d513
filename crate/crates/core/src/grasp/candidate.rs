use std::f64::consts::PI;

use nalgebra::{Point3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{GraspCandidate, GraspPose};
use crate::error::{Error, Result};
use crate::projection::DepthView;

/// Minimum depth over occupied bins whose centers lie within `delta`
/// meters of the center bin.
pub fn grasp_depth(view: &DepthView, center: (usize, usize), delta: f64) -> Result<f64> {
    let k = view.bins();
    let (u, v) = center;
    if u >= k || v >= k {
        return Err(Error::invalid(format!(
            "pixel ({u}, {v}) outside {k}×{k} view"
        )));
    }
    if !(delta >= 0.0) {
        return Err(Error::invalid("delta must be non-negative"));
    }
    let cell = view.bin_size();
    let reach = (delta / cell).floor() as usize;
    let mut best = f64::INFINITY;
    for row in v.saturating_sub(reach)..=(v + reach).min(k - 1) {
        for col in u.saturating_sub(reach)..=(u + reach).min(k - 1) {
            let du = col as f64 - u as f64;
            let dv = row as f64 - v as f64;
            if (du * du + dv * dv).sqrt() * cell > delta + 1e-12 {
                continue;
            }
            let d = view.grid.get(row, col);
            if d > 0.0 && d < best {
                best = d;
            }
        }
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(Error::EmptyNeighborhood)
    }
}

/// Lifts an image grasp to a pose in the view's coordinate frame.
///
/// The approach axis is the view direction and the closing axis is the
/// view's `u` axis rotated by `rotation_rad` about it.
pub fn back_project(candidate: &GraspCandidate, view: &DepthView, delta: f64) -> Result<GraspPose> {
    let pose = view
        .pose
        .ok_or_else(|| Error::invalid("view has no camera pose"))?;
    let depth = grasp_depth(view, (candidate.u, candidate.v), delta)?;
    let (x, y) = view.bin_center(candidate.u, candidate.v);
    let position = pose.to_world(&Point3::new(x, y, depth));
    let (s, c) = candidate.rotation_rad.sin_cos();
    let closing = pose.vector_to_world(&Vector3::new(c, s, 0.0));
    Ok(GraspPose::new(
        position,
        pose.z_axis(),
        closing,
        candidate.width_m,
        (candidate.u, candidate.v),
    ))
}

/// Uniform samples: centers over occupied bins, rotation in `[0, π)`,
/// width in `(0, max_width]`.
pub fn sample_candidates(
    view: &DepthView,
    count: usize,
    seed: u64,
    max_width: f64,
) -> Result<Vec<GraspCandidate>> {
    if count == 0 {
        return Err(Error::invalid("candidate count must be positive"));
    }
    let k = view.bins();
    let occupied: Vec<usize> = (0..k * k)
        .filter(|&i| view.grid.as_slice()[i] > 0.0)
        .collect();
    if occupied.is_empty() {
        return Err(Error::EmptyView);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| {
            let idx = occupied[rng.random_range(0..occupied.len())];
            GraspCandidate {
                u: idx % k,
                v: idx / k,
                rotation_rad: rng.random_range(0.0..PI),
                width_m: (1.0 - rng.random::<f64>()) * max_width,
                quality: 0.0,
            }
        })
        .collect())
}
