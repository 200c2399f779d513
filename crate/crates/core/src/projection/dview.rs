use std::fs;
use std::io::Write;
use std::path::Path;

use super::{DepthView, ProjectionMode};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::textfmt::format_sig;

/// Writes the `DVIEW` text format: a header `DVIEW <k> <plane_side_m> <mode>`
/// followed by `k` rows of `k` depths with 9 significant digits.
pub fn write_dview(view: &DepthView, mut out: impl Write) -> std::io::Result<()> {
    writeln!(
        out,
        "DVIEW {} {} {}",
        view.bins(),
        format_sig(view.plane_side, 9),
        view.mode
    )?;
    write_rows(&view.grid, &mut out)
}

pub(crate) fn write_rows(grid: &Grid, out: &mut impl Write) -> std::io::Result<()> {
    for row in grid.rows() {
        let line: Vec<String> = row.iter().map(|&v| format_sig(v, 9)).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    Ok(())
}

pub(crate) fn parse_rows<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    k: usize,
) -> Result<Grid> {
    let mut data = Vec::with_capacity(k * k);
    for _ in 0..k {
        let (lineno, line) = lines.next().ok_or_else(|| Error::Parse {
            line: 0,
            message: format!("expected {k} grid rows"),
        })?;
        let before = data.len();
        for tok in line.split_whitespace() {
            let v: f64 = tok.parse().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("`{tok}` is not a number"),
            })?;
            data.push(v);
        }
        if data.len() - before != k {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected {k} values, found {}", data.len() - before),
            });
        }
    }
    Ok(Grid::from_vec(k, data).expect("k rows of k values"))
}

pub fn parse_dview(text: &str) -> Result<DepthView> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Format("empty DVIEW".into()))?;
    let tok: Vec<&str> = header.split_whitespace().collect();
    let bad_header = || Error::Parse {
        line: 1,
        message: format!("bad DVIEW header `{header}`"),
    };
    if tok.len() != 4 || tok[0] != "DVIEW" {
        return Err(bad_header());
    }
    let k: usize = tok[1].parse().map_err(|_| bad_header())?;
    let plane_side: f64 = tok[2].parse().map_err(|_| bad_header())?;
    let mode: ProjectionMode = tok[3].parse().map_err(|_| bad_header())?;
    if k == 0 {
        return Err(bad_header());
    }
    let grid = parse_rows(&mut lines, k)?;
    if grid.as_slice().iter().any(|&v| !(v >= 0.0)) {
        return Err(Error::Format("negative or NaN depth".into()));
    }
    Ok(DepthView {
        grid,
        plane_side,
        mode,
        pose: None,
    })
}

pub fn read_dview(path: impl AsRef<Path>) -> Result<DepthView> {
    let path = path.as_ref();
    parse_dview(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn render(view: &DepthView) -> String {
        let mut buf = Vec::new();
        write_dview(view, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn header_and_rows() {
        let view = DepthView {
            grid: Grid::from_rows(&[vec![0.0, 0.25], vec![1.0 / 3.0, 0.0]]).unwrap(),
            plane_side: 0.45,
            mode: ProjectionMode::FixedSize,
            pose: None,
        };
        assert_eq!(
            render(&view),
            "DVIEW 2 0.45 fixed-size\n0 0.25\n0.333333333 0\n"
        );
    }

    #[test]
    fn malformed_documents() {
        assert!(parse_dview("").is_err());
        assert!(parse_dview("DVIEW 2 0.45 sideways\n0 0\n0 0\n").is_err());
        assert!(parse_dview("DVIEW 2 0.45 fixed-size\n0 0\n").is_err());
        assert!(parse_dview("DVIEW 2 0.45 fixed-size\n0 0\n0\n").is_err());
        assert!(parse_dview("DVIEW 2 0.45 fixed-size\n0 0\n0 -1\n").is_err());
    }

    proptest! {
        #[test]
        fn text_is_stable_after_one_round_trip(
            k in 1usize..6,
            seed in prop::collection::vec(0.0f64..2.0, 36),
            side in 0.01f64..1.0,
        ) {
            let data: Vec<f64> = seed[..k * k].iter().map(|&v| if v < 0.5 { 0.0 } else { v }).collect();
            let view = DepthView {
                grid: Grid::from_vec(k, data).unwrap(),
                plane_side: side,
                mode: ProjectionMode::ScaleInvariant,
                pose: None,
            };
            let text = render(&view);
            let back = parse_dview(&text).unwrap();
            prop_assert_eq!(render(&back), text.clone());
            for (a, b) in view.grid.as_slice().iter().zip(back.grid.as_slice()) {
                prop_assert!((a - b).abs() <= 1e-8 * a.abs());
            }
        }
    }
}
