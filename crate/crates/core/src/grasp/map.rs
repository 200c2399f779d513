use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::GraspCandidate;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::projection::dview::{parse_rows, write_rows};
use crate::textfmt::format_sig;

/// Per-pixel quality, rotation and width images.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraspMap {
    pub quality: Grid,
    pub rotation: Grid,
    pub width: Grid,
}

impl GraspMap {
    pub fn zeros(k: usize) -> Self {
        GraspMap {
            quality: Grid::zeros(k),
            rotation: Grid::zeros(k),
            width: Grid::zeros(k),
        }
    }

    pub fn new(quality: Grid, rotation: Grid, width: Grid) -> Result<Self> {
        if quality.k() != rotation.k() || quality.k() != width.k() {
            return Err(Error::Format("Q, Φ and W grids differ in size".into()));
        }
        Ok(GraspMap {
            quality,
            rotation,
            width,
        })
    }

    pub fn bins(&self) -> usize {
        self.quality.k()
    }

    pub fn candidate_at(&self, u: usize, v: usize) -> GraspCandidate {
        GraspCandidate {
            u,
            v,
            rotation_rad: self.rotation.get(v, u),
            width_m: self.width.get(v, u),
            quality: self.quality.get(v, u),
        }
    }

    /// Keeps `c` at its pixel if it beats the current quality.
    pub fn offer(&mut self, c: &GraspCandidate) -> bool {
        if c.quality > self.quality.get(c.v, c.u) {
            self.quality.set(c.v, c.u, c.quality);
            self.rotation.set(c.v, c.u, c.rotation_rad);
            self.width.set(c.v, c.u, c.width_m);
            true
        } else {
            false
        }
    }
}

/// Argmax of `Q`; ties go to the smallest row-major index, NaNs are skipped.
pub fn best_grasp(map: &GraspMap) -> Result<GraspCandidate> {
    let k = map.bins();
    let mut best: Option<(usize, f64)> = None;
    for (i, &q) in map.quality.as_slice().iter().enumerate() {
        if q.is_nan() {
            continue;
        }
        if best.is_none_or(|(_, b)| q > b) {
            best = Some((i, q));
        }
    }
    let (i, _) = best.ok_or(Error::EmptyMap)?;
    Ok(map.candidate_at(i % k, i / k))
}

/// Pixels with positive quality, best first; ties keep row-major order.
pub fn ranked_grasps(map: &GraspMap) -> Vec<GraspCandidate> {
    let k = map.bins();
    let mut out: Vec<GraspCandidate> = (0..k * k)
        .filter(|&i| map.quality.as_slice()[i] > 0.0)
        .map(|i| map.candidate_at(i % k, i / k))
        .collect();
    out.sort_by(|a, b| b.quality.total_cmp(&a.quality));
    out
}

pub fn write_gmap(map: &GraspMap, mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "GMAP {}", map.bins())?;
    write_rows(&map.quality, &mut out)?;
    write_rows(&map.rotation, &mut out)?;
    write_rows(&map.width, &mut out)
}

pub fn parse_gmap(text: &str) -> Result<GraspMap> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Format("empty GMAP".into()))?;
    let tok: Vec<&str> = header.split_whitespace().collect();
    let k = match tok.as_slice() {
        ["GMAP", k] => k.parse::<usize>().ok().filter(|&k| k > 0),
        _ => None,
    }
    .ok_or_else(|| Error::Parse {
        line: 1,
        message: format!("bad GMAP header `{header}`"),
    })?;
    let quality = parse_rows(&mut lines, k)?;
    let rotation = parse_rows(&mut lines, k)?;
    let width = parse_rows(&mut lines, k)?;
    if let Some((line, _)) = lines.next() {
        return Err(Error::Parse {
            line,
            message: "trailing data after three grids".into(),
        });
    }
    GraspMap::new(quality, rotation, width)
}

pub fn read_gmap(path: impl AsRef<Path>) -> Result<GraspMap> {
    let path = path.as_ref();
    parse_gmap(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}

/// Grasp list as CSV `u,v,rotation_rad,width_m,quality`.
pub fn write_grasp_csv(grasps: &[GraspCandidate], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "u,v,rotation_rad,width_m,quality")?;
    for g in grasps {
        writeln!(
            out,
            "{},{},{},{},{}",
            g.u,
            g.v,
            format_sig(g.rotation_rad, 9),
            format_sig(g.width_m, 9),
            format_sig(g.quality, 9)
        )?;
    }
    Ok(())
}
