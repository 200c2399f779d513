//! Viewpoint entropy and ranking of candidate views.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::projection::DepthView;

/// What a pixel contributes to the view distribution.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntropyMode {
    /// Pixel mass is its depth value.
    #[default]
    Depth,
    /// Every occupied pixel has unit mass.
    Occupancy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViewScore {
    pub view_index: usize,
    pub entropy_bits: f64,
}

/// Divides the grid by its sum so the pixels form a distribution.
pub fn normalize_view(view: &DepthView) -> Result<Grid> {
    normalize_grid(&view.grid, EntropyMode::Depth)
}

fn normalize_grid(grid: &Grid, mode: EntropyMode) -> Result<Grid> {
    let mass = match mode {
        EntropyMode::Depth => grid.clone(),
        EntropyMode::Occupancy => grid.map(|v| if v > 0.0 { 1.0 } else { 0.0 }),
    };
    let total = mass.sum();
    if !(total > 0.0) {
        return Err(Error::EmptyView);
    }
    Ok(mass.map(|v| v / total))
}

/// Shannon entropy of a distribution in bits, with `0·log 0 = 0`.
pub fn entropy_bits(p: &[f64]) -> f64 {
    -p.iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| x * x.log2())
        .sum::<f64>()
}

pub fn view_entropy(view: &DepthView) -> Result<f64> {
    view_entropy_with(view, EntropyMode::Depth)
}

pub fn view_entropy_with(view: &DepthView, mode: EntropyMode) -> Result<f64> {
    Ok(entropy_bits(normalize_grid(&view.grid, mode)?.as_slice()).max(0.0))
}

/// Views sorted by descending entropy; ties keep the lower index first.
pub fn rank_views(views: &[DepthView]) -> Result<Vec<ViewScore>> {
    rank_views_with(views, EntropyMode::Depth)
}

pub fn rank_views_with(views: &[DepthView], mode: EntropyMode) -> Result<Vec<ViewScore>> {
    if views.is_empty() {
        return Err(Error::invalid("no views to rank"));
    }
    let mut scores = views
        .iter()
        .enumerate()
        .map(|(view_index, v)| {
            Ok(ViewScore {
                view_index,
                entropy_bits: view_entropy_with(v, mode)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    scores.sort_by(|a, b| b.entropy_bits.total_cmp(&a.entropy_bits));
    Ok(scores)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projection::ProjectionMode;
    use proptest::prelude::*;

    fn view(k: usize, values: Vec<f64>) -> DepthView {
        DepthView {
            grid: Grid::from_vec(k, values).unwrap(),
            plane_side: 1.0,
            mode: ProjectionMode::FixedSize,
            pose: None,
        }
    }

    #[test]
    fn normalization_examples() {
        let mut one = vec![0.0; 9];
        one[4] = 0.5;
        assert_eq!(normalize_view(&view(3, one)).unwrap().get(1, 1), 1.0);

        let uniform = normalize_view(&view(2, vec![0.7; 4])).unwrap();
        assert!(uniform.as_slice().iter().all(|&p| (p - 0.25).abs() < 1e-15));

        let p = normalize_view(&view(2, vec![0.2, 0.2, 0.6, 0.0])).unwrap();
        for (got, want) in p.as_slice().iter().zip([0.2, 0.2, 0.6, 0.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!((p.sum() - 1.0).abs() < 1e-12);

        assert!(matches!(
            normalize_view(&view(2, vec![0.0; 4])),
            Err(Error::EmptyView)
        ));
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(
            view_entropy(&view(2, vec![0.3, 0.0, 0.0, 0.0])).unwrap(),
            0.0
        );
        assert_eq!(view_entropy(&view(2, vec![0.4; 4])).unwrap(), 2.0);
        assert_eq!(
            view_entropy(&view(2, vec![0.5, 0.25, 0.25, 0.0])).unwrap(),
            1.5
        );
        assert!(view_entropy(&view(2, vec![0.0; 4])).is_err());
    }

    #[test]
    fn occupancy_mode_ignores_depth_values() {
        let v = view(2, vec![0.1, 0.9, 0.0, 0.0]);
        assert_eq!(view_entropy_with(&v, EntropyMode::Occupancy).unwrap(), 1.0);
        assert!(view_entropy(&v).unwrap() < 1.0);
    }

    #[test]
    fn ranking_order_and_ties() {
        let point = view(2, vec![1.0, 0.0, 0.0, 0.0]);
        let uniform = view(2, vec![1.0; 4]);
        let ranked = rank_views(&[point, uniform.clone()]).unwrap();
        assert_eq!(ranked[0].view_index, 1);
        let tied = rank_views(&[uniform.clone(), uniform]).unwrap();
        assert_eq!((tied[0].view_index, tied[1].view_index), (0, 1));
        assert!(rank_views(&[]).is_err());
    }

    proptest! {
        #[test]
        fn entropy_bounds_and_invariances(
            values in prop::collection::vec(prop_oneof![Just(0.0), 0.01f64..2.0], 16),
            c in 0.01f64..100.0,
            rot in 0usize..16,
        ) {
            prop_assume!(values.iter().any(|&v| v > 0.0));
            let occupied = values.iter().filter(|&&v| v > 0.0).count();
            let h = view_entropy(&view(4, values.clone())).unwrap();
            prop_assert!(h >= 0.0);
            prop_assert!(h <= (occupied as f64).log2() + 1e-12);

            let scaled = view_entropy(&view(4, values.iter().map(|v| v * c).collect())).unwrap();
            prop_assert!((scaled - h).abs() < 1e-9);

            let mut shuffled = values.clone();
            shuffled.rotate_left(rot);
            shuffled.reverse();
            let permuted = view_entropy(&view(4, shuffled)).unwrap();
            prop_assert!((permuted - h).abs() < 1e-9);
        }

        #[test]
        fn ranking_is_a_sorted_permutation(
            grids in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 9), 1..8)
        ) {
            let views: Vec<_> = grids.into_iter().map(|mut g| { g[0] += 0.5; view(3, g) }).collect();
            let ranked = rank_views(&views).unwrap();
            let mut idx: Vec<_> = ranked.iter().map(|s| s.view_index).collect();
            idx.sort();
            prop_assert_eq!(idx, (0..views.len()).collect::<Vec<_>>());
            for w in ranked.windows(2) {
                prop_assert!(w[0].entropy_bits >= w[1].entropy_bits);
            }
        }
    }
}
