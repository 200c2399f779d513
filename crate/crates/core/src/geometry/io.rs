use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::{Point3, Vector3};

use super::PointCloud;
use crate::error::{Error, Result};
use crate::textfmt::format_sig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CloudFormat {
    /// One `x y z [nx ny nz]` record per line.
    XyzAscii,
    /// ASCII PLY; only the vertex element is read.
    PlyAscii,
}

impl CloudFormat {
    pub fn from_path(path: &Path) -> Option<CloudFormat> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "xyz" | "txt" | "xyzn" => Some(CloudFormat::XyzAscii),
            "ply" => Some(CloudFormat::PlyAscii),
            _ => None,
        }
    }
}

pub fn load_cloud(path: impl AsRef<Path>, format: CloudFormat) -> Result<PointCloud> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    match format {
        CloudFormat::XyzAscii => parse_xyz(&text),
        CloudFormat::PlyAscii => parse_ply(&text),
    }
}

fn parse_numbers(line: &str, lineno: usize) -> Result<Vec<f64>> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse {
                    line: lineno,
                    message: format!("`{tok}` is not a finite number"),
                })
        })
        .collect()
}

fn unit_normal(n: Vector3<f64>, lineno: usize) -> Result<Vector3<f64>> {
    let norm = n.norm();
    if norm == 0.0 {
        return Err(Error::Parse {
            line: lineno,
            message: "zero-length normal".into(),
        });
    }
    Ok(n / norm)
}

fn build(points: Vec<Point3<f64>>, normals: Vec<Vector3<f64>>) -> Result<PointCloud> {
    if points.is_empty() {
        return Err(Error::EmptyCloud);
    }
    if normals.is_empty() {
        Ok(PointCloud::new(points))
    } else {
        PointCloud::with_normals(points, normals)
    }
}

/// Parses xyz-ascii text. Blank lines and `#` comments are skipped; either
/// every record carries a normal or none does.
pub fn parse_xyz(text: &str) -> Result<PointCloud> {
    let mut points = Vec::new();
    let mut normals = Vec::new();
    let mut with_normals = None;
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v = parse_numbers(line, lineno)?;
        let has_normal = match v.len() {
            3 => false,
            6 => true,
            n => {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("expected 3 or 6 values, found {n}"),
                })
            }
        };
        if *with_normals.get_or_insert(has_normal) != has_normal {
            return Err(Error::Parse {
                line: lineno,
                message: "mixed records with and without normals".into(),
            });
        }
        points.push(Point3::new(v[0], v[1], v[2]));
        if has_normal {
            normals.push(unit_normal(Vector3::new(v[3], v[4], v[5]), lineno)?);
        }
    }
    build(points, normals)
}

/// Parses the vertex element of an ASCII PLY document. Properties `x y z`
/// are required and `nx ny nz` are optional; other properties and elements
/// are ignored.
pub fn parse_ply(text: &str) -> Result<PointCloud> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let parse_err = |line, message: &str| Error::Parse {
        line,
        message: message.to_string(),
    };
    match lines.next() {
        Some((_, "ply")) => {}
        Some((n, _)) => return Err(parse_err(n, "missing `ply` magic")),
        None => return Err(Error::EmptyCloud),
    }

    // (element name, count, property names)
    let mut elements: Vec<(String, usize, Vec<String>)> = Vec::new();
    let mut header_end = None;
    for (n, line) in lines.by_ref() {
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("format") => {
                if tok.next() != Some("ascii") {
                    return Err(parse_err(n, "only `format ascii` is supported"));
                }
            }
            Some("comment") | Some("obj_info") | None => {}
            Some("element") => {
                let name = tok
                    .next()
                    .ok_or_else(|| parse_err(n, "element without name"))?;
                let count = tok
                    .next()
                    .and_then(|c| c.parse().ok())
                    .ok_or_else(|| parse_err(n, "element without count"))?;
                elements.push((name.to_string(), count, Vec::new()));
            }
            Some("property") => {
                let element = elements
                    .last_mut()
                    .ok_or_else(|| parse_err(n, "property before element"))?;
                let name = if tok.next() == Some("list") {
                    "<list>".to_string()
                } else {
                    tok.next()
                        .ok_or_else(|| parse_err(n, "property without name"))?
                        .to_string()
                };
                element.2.push(name);
            }
            Some("end_header") => {
                header_end = Some(n);
                break;
            }
            Some(other) => return Err(parse_err(n, &format!("unknown header keyword `{other}`"))),
        }
    }
    let header_end = header_end.ok_or_else(|| parse_err(0, "missing end_header"))?;

    let mut skip = 0;
    let mut vertex = None;
    for (name, count, props) in &elements {
        if name == "vertex" {
            vertex = Some((*count, props));
            break;
        }
        skip += count;
    }
    let (count, props) = vertex.ok_or_else(|| parse_err(header_end, "no vertex element"))?;
    let index = |p: &str| props.iter().position(|q| q == p);
    let xyz = match (index("x"), index("y"), index("z")) {
        (Some(x), Some(y), Some(z)) => [x, y, z],
        _ => return Err(parse_err(header_end, "vertex element lacks x/y/z")),
    };
    let normal_idx = match (index("nx"), index("ny"), index("nz")) {
        (Some(x), Some(y), Some(z)) => Some([x, y, z]),
        _ => None,
    };

    let mut points = Vec::with_capacity(count);
    let mut normals = Vec::new();
    let mut body = lines.filter(|(_, l)| !l.is_empty()).skip(skip);
    for _ in 0..count {
        let (n, line) = body
            .next()
            .ok_or_else(|| parse_err(header_end, "fewer vertex records than declared"))?;
        let v = parse_numbers(line, n)?;
        if v.len() < props.len() {
            return Err(parse_err(n, "vertex record is too short"));
        }
        points.push(Point3::new(v[xyz[0]], v[xyz[1]], v[xyz[2]]));
        if let Some([a, b, c]) = normal_idx {
            normals.push(unit_normal(Vector3::new(v[a], v[b], v[c]), n)?);
        }
    }
    build(points, normals)
}

/// Writes xyz-ascii with 9 significant digits per value.
pub fn write_xyz(cloud: &PointCloud, mut out: impl Write) -> std::io::Result<()> {
    for (i, p) in cloud.points().iter().enumerate() {
        write!(
            out,
            "{} {} {}",
            format_sig(p.x, 9),
            format_sig(p.y, 9),
            format_sig(p.z, 9)
        )?;
        if let Some(n) = cloud.normals() {
            let n = n[i];
            write!(
                out,
                " {} {} {}",
                format_sig(n.x, 9),
                format_sig(n.y, 9),
                format_sig(n.z, 9)
            )?;
        }
        writeln!(out)?;
    }
    Ok(())
}
