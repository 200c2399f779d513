use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::GraspCandidate;

pub const IOU_THRESHOLD: f64 = 0.25;
pub const ANGLE_THRESHOLD_DEG: f64 = 30.0;

/// Oriented grasp rectangle in image coordinates. `width` runs along the
/// closing direction at `angle_rad`, `height` across it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraspRect {
    pub center: [f64; 2],
    pub angle_rad: f64,
    pub width: f64,
    pub height: f64,
}

impl GraspRect {
    pub fn new(center: [f64; 2], angle_rad: f64, width: f64, height: f64) -> Self {
        GraspRect {
            center,
            angle_rad,
            width,
            height,
        }
    }

    /// Rectangle of a candidate in pixel units.
    pub fn from_candidate(c: &GraspCandidate, bin_size: f64, finger_thickness: f64) -> Self {
        GraspRect::new(
            [c.u as f64, c.v as f64],
            c.rotation_rad,
            c.width_m / bin_size,
            finger_thickness / bin_size,
        )
    }

    /// Corners in counterclockwise order.
    pub fn corners(&self) -> [[f64; 2]; 4] {
        let (s, c) = self.angle_rad.sin_cos();
        let (hw, hh) = (self.width / 2.0, self.height / 2.0);
        let at = |x: f64, y: f64| {
            [
                self.center[0] + c * x - s * y,
                self.center[1] + s * x + c * y,
            ]
        };
        [at(-hw, -hh), at(hw, -hh), at(hw, hh), at(-hw, hh)]
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        let (s, c) = self.angle_rad.sin_cos();
        let dx = p[0] - self.center[0];
        let dy = p[1] - self.center[1];
        let x = c * dx + s * dy;
        let y = -s * dx + c * dy;
        x.abs() <= self.width / 2.0 && y.abs() <= self.height / 2.0
    }
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn polygon_area(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            a[0] * b[1] - b[0] * a[1]
        })
        .sum::<f64>()
        .abs()
        / 2.0
}

/// Sutherland–Hodgman clip of `subject` by a counterclockwise convex polygon.
fn clip(subject: &[[f64; 2]], clipper: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut output = subject.to_vec();
    for i in 0..clipper.len() {
        if output.is_empty() {
            break;
        }
        let (a, b) = (clipper[i], clipper[(i + 1) % clipper.len()]);
        let input = std::mem::take(&mut output);
        for j in 0..input.len() {
            let p = input[j];
            let q = input[(j + 1) % input.len()];
            let (dp, dq) = (cross(a, b, p), cross(a, b, q));
            if dp >= 0.0 {
                output.push(p);
            }
            if (dp >= 0.0) != (dq >= 0.0) {
                let t = dp / (dp - dq);
                output.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
            }
        }
    }
    output
}

pub fn rect_iou(a: &GraspRect, b: &GraspRect) -> f64 {
    let inter = polygon_area(&clip(&a.corners(), &b.corners()));
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}

/// Smallest angle between two grasp orientations, modulo π.
pub fn angle_difference(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(PI);
    d.min(PI - d)
}

pub fn is_valid_match(iou: f64, angle_diff_rad: f64) -> bool {
    iou > IOU_THRESHOLD && angle_diff_rad < ANGLE_THRESHOLD_DEG.to_radians()
}

pub fn iou_valid(pred: &GraspRect, gt: &GraspRect) -> bool {
    is_valid_match(
        rect_iou(pred, gt),
        angle_difference(pred.angle_rad, gt.angle_rad),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identical_and_disjoint() {
        let r = GraspRect::new([1.0, 2.0], 0.3, 4.0, 1.0);
        assert!((rect_iou(&r, &r) - 1.0).abs() < 1e-12);
        assert!(iou_valid(&r, &r));
        let far = GraspRect::new([50.0, 2.0], 0.3, 4.0, 1.0);
        assert_eq!(rect_iou(&r, &far), 0.0);
        assert!(!iou_valid(&r, &far));
    }

    #[test]
    fn half_offset_squares() {
        let a = GraspRect::new([0.0, 0.0], 0.0, 1.0, 1.0);
        let b = GraspRect::new([0.5, 0.0], 0.0, 1.0, 1.0);
        assert!((rect_iou(&a, &b) - 1.0 / 3.0).abs() < 1e-12);
        assert!(iou_valid(&a, &b));
    }

    #[test]
    fn rotated_square_in_itself() {
        // Square rotated 45° inside its own circumcircle: intersection is a
        // regular octagon of area 2(√2 − 1) for unit squares.
        let a = GraspRect::new([0.0, 0.0], 0.0, 1.0, 1.0);
        let b = GraspRect::new([0.0, 0.0], PI / 4.0, 1.0, 1.0);
        let oct = 2.0 * (2f64.sqrt() - 1.0);
        assert!((rect_iou(&a, &b) - oct / (2.0 - oct)).abs() < 1e-12);
    }

    #[test]
    fn thresholds_are_strict() {
        let a = GraspRect::new([0.0, 0.0], 0.0, 5.0, 1.0);
        let b = GraspRect::new([3.0, 0.0], 0.0, 5.0, 1.0);
        assert_eq!(rect_iou(&a, &b), 0.25);
        assert!(!iou_valid(&a, &b));
        assert!(is_valid_match(0.2501, 29.9f64.to_radians()));
        assert!(!is_valid_match(0.2501, 30f64.to_radians()));
        assert!(!is_valid_match(0.25, 0.0));
    }

    #[test]
    fn angle_wraps_antipodally() {
        assert!(angle_difference(0.1, PI + 0.1) < 1e-12);
        assert!((angle_difference(0.05, PI - 0.05) - 0.1).abs() < 1e-12);
        let a = GraspRect::new([0.0, 0.0], 0.0, 4.0, 1.0);
        let b = GraspRect::new([0.0, 0.0], PI, 4.0, 1.0);
        assert!(iou_valid(&a, &b));
    }

    fn monte_carlo(a: &GraspRect, b: &GraspRect, samples: usize, seed: u64) -> f64 {
        let ca = a.corners();
        let cb = b.corners();
        let all: Vec<[f64; 2]> = ca.iter().chain(cb.iter()).copied().collect();
        let (x0, x1) = all
            .iter()
            .fold((f64::MAX, f64::MIN), |m, p| (m.0.min(p[0]), m.1.max(p[0])));
        let (y0, y1) = all
            .iter()
            .fold((f64::MAX, f64::MIN), |m, p| (m.0.min(p[1]), m.1.max(p[1])));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut inter, mut union) = (0usize, 0usize);
        for _ in 0..samples {
            let p = [rng.random_range(x0..x1), rng.random_range(y0..y1)];
            let (ia, ib) = (a.contains(p), b.contains(p));
            inter += (ia && ib) as usize;
            union += (ia || ib) as usize;
        }
        inter as f64 / union.max(1) as f64
    }

    #[test]
    fn agrees_with_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for i in 0..10 {
            let mut rect = || {
                GraspRect::new(
                    [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)],
                    rng.random_range(0.0..PI),
                    rng.random_range(0.5..3.0),
                    rng.random_range(0.3..1.5),
                )
            };
            let (a, b) = (rect(), rect());
            let mc = monte_carlo(&a, &b, 40_000, i);
            assert!((rect_iou(&a, &b) - mc).abs() < 0.02, "{a:?} {b:?}");
        }
    }

    fn arb_rect() -> impl Strategy<Value = GraspRect> {
        (
            -2.0f64..2.0,
            -2.0f64..2.0,
            0.0f64..PI,
            0.1f64..3.0,
            0.1f64..3.0,
        )
            .prop_map(|(x, y, a, w, h)| GraspRect::new([x, y], a, w, h))
    }

    proptest! {
        #[test]
        fn symmetric_and_bounded(a in arb_rect(), b in arb_rect()) {
            let ab = rect_iou(&a, &b);
            let ba = rect_iou(&b, &a);
            prop_assert!((0.0..=1.0).contains(&ab));
            prop_assert!((ab - ba).abs() < 1e-9);
        }

        #[test]
        fn one_only_for_coincident(a in arb_rect(), dx in 0.01f64..1.0) {
            prop_assert!((rect_iou(&a, &a) - 1.0).abs() < 1e-9);
            let mut b = a;
            b.center[0] += dx;
            prop_assert!(rect_iou(&a, &b) < 1.0 - 1e-6);
        }
    }
}
