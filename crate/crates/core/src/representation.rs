//! Feature vectors for the category learner: normalized depth views,
//! multi-view pooling and externally computed embeddings.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::projection::DepthView;
use crate::textfmt::format_sig;

/// Tolerance on `Σ xᵢ = 1`.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Non-negative vector whose components sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    /// Accepts values that already form a distribution.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("feature vector has no components"));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::invalid(
                "feature components must be finite and non-negative",
            ));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::invalid(format!(
                "feature components sum to {sum}, not 1"
            )));
        }
        Ok(FeatureVector(values))
    }

    /// Divides non-negative values by their sum.
    pub fn normalized(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::invalid(
                "feature components must be finite and non-negative",
            ));
        }
        let sum: f64 = values.iter().sum();
        if !(sum > 0.0) {
            return Err(Error::EmptyFeature("all components are zero".into()));
        }
        Ok(FeatureVector(values.into_iter().map(|v| v / sum).collect()))
    }

    /// Shifts by the minimum when any component is negative, then normalizes.
    pub fn shift_normalized(mut values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("feature components must be finite"));
        }
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        if min < 0.0 {
            values.iter_mut().for_each(|v| *v -= min);
        }
        FeatureVector::normalized(values)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for FeatureVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        FeatureVector::new(values)
    }
}

impl From<FeatureVector> for Vec<f64> {
    fn from(f: FeatureVector) -> Self {
        f.0
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PoolingMode {
    Max,
    #[default]
    Avg,
    Append,
}

impl fmt::Display for PoolingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PoolingMode::Max => "max",
            PoolingMode::Avg => "avg",
            PoolingMode::Append => "append",
        })
    }
}

impl FromStr for PoolingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" => Ok(PoolingMode::Max),
            "avg" => Ok(PoolingMode::Avg),
            "append" | "appending" => Ok(PoolingMode::Append),
            other => Err(Error::invalid(format!("unknown pooling mode `{other}`"))),
        }
    }
}

/// Row-major flattening of the normalized view, `d = k²`.
pub fn view_to_feature(view: &DepthView) -> Result<FeatureVector> {
    let total = view.grid.sum();
    if !(total > 0.0) {
        return Err(Error::EmptyView);
    }
    FeatureVector::normalized(view.grid.as_slice().to_vec())
}

/// Fuses per-view features into one vector.
///
/// `Max` and `Append` renormalize the result; `Avg` already sums to one.
pub fn pool_features(features: &[FeatureVector], mode: PoolingMode) -> Result<FeatureVector> {
    let first = features
        .first()
        .ok_or_else(|| Error::invalid("no features to pool"))?;
    let d = first.dim();
    if features.iter().any(|f| f.dim() != d) {
        return Err(Error::invalid("pooled features differ in dimension"));
    }
    if features.len() == 1 && mode != PoolingMode::Append {
        return Ok(first.clone());
    }
    match mode {
        PoolingMode::Max => {
            let mut out = first.0.clone();
            for f in &features[1..] {
                for (o, &v) in out.iter_mut().zip(&f.0) {
                    *o = o.max(v);
                }
            }
            FeatureVector::normalized(out)
        }
        PoolingMode::Avg => {
            let n = features.len() as f64;
            let mut out = vec![0.0; d];
            for f in features {
                for (o, &v) in out.iter_mut().zip(&f.0) {
                    *o += v;
                }
            }
            out.iter_mut().for_each(|o| *o /= n);
            FeatureVector::new(out)
        }
        PoolingMode::Append => {
            FeatureVector::normalized(features.iter().flat_map(|f| f.0.iter().copied()).collect())
        }
    }
}

/// Reads an embedding CSV `id,v_1,...,v_d`. An optional header row whose
/// first field is `id` is skipped. Rows with negative components are
/// shifted by their minimum before normalization.
pub fn load_embeddings(path: impl AsRef<Path>) -> Result<BTreeMap<String, FeatureVector>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_embeddings(&text)
}

pub fn parse_embeddings(text: &str) -> Result<BTreeMap<String, FeatureVector>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut out = BTreeMap::new();
    let mut dim = None;
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let id = record.get(0).unwrap_or_default();
        if line == 1 && id.eq_ignore_ascii_case("id") {
            continue;
        }
        let parse_err = |message: String| Error::Parse { line, message };
        let values = record
            .iter()
            .skip(1)
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|_| parse_err(format!("row `{id}`: `{tok}` is not a number")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.is_empty() {
            return Err(parse_err(format!("row `{id}` has no values")));
        }
        match dim {
            None => dim = Some(values.len()),
            Some(d) if d != values.len() => {
                return Err(parse_err(format!(
                    "row `{id}` has {} values, expected {d}",
                    values.len()
                )))
            }
            _ => {}
        }
        let feature = FeatureVector::shift_normalized(values).map_err(|e| match e {
            Error::EmptyFeature(_) => Error::EmptyFeature(format!("row `{id}` (line {line})")),
            other => other,
        })?;
        if out.insert(id.to_string(), feature).is_some() {
            return Err(parse_err(format!("duplicate id `{id}`")));
        }
    }
    Ok(out)
}

/// Writes descriptor rows `id,d,values...` (9 significant digits).
pub fn write_descriptors<'a>(
    rows: impl IntoIterator<Item = (&'a str, &'a FeatureVector)>,
    out: impl Write,
) -> Result<()> {
    let mut writer = csv::WriterBuilder::new().flexible(true).from_writer(out);
    for (id, f) in rows {
        let mut record = vec![id.to_string(), f.dim().to_string()];
        record.extend(f.values().iter().map(|&v| format_sig(v, 9)));
        writer
            .write_record(&record)
            .map_err(|e| Error::Format(e.to_string()))?;
    }
    writer.flush().map_err(|e| Error::Format(e.to_string()))?;
    Ok(())
}
