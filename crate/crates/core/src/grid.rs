use serde::{Deserialize, Serialize};

/// Square `k × k` grid of reals stored row-major.
///
/// Rows are indexed by the view's `v` coordinate and columns by `u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    k: usize,
    data: Vec<f64>,
}

impl Grid {
    pub fn zeros(k: usize) -> Self {
        Grid {
            k,
            data: vec![0.0; k * k],
        }
    }

    /// Builds a grid from row-major values; `None` if the length is not `k²`.
    pub fn from_vec(k: usize, data: Vec<f64>) -> Option<Self> {
        (data.len() == k * k).then_some(Grid { k, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Option<Self> {
        let k = rows.len();
        if rows.iter().any(|r| r.len() != k) {
            return None;
        }
        Some(Grid {
            k,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.k + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.k + col] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.k.max(1))
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Grid {
        Grid {
            k: self.k,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn occupied(&self) -> usize {
        self.data.iter().filter(|&&v| v > 0.0).count()
    }
}
