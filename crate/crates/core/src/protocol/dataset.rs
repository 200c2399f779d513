use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{load_cloud, CloudFormat};
use crate::pipeline::{describe, DescriptorConfig};
use crate::representation::{load_embeddings, FeatureVector};

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub id: String,
    pub feature: FeatureVector,
}

/// Labeled instances grouped by category.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    categories: BTreeMap<String, Vec<Instance>>,
}

impl Dataset {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a dataset from labeled features, naming instances
    /// `<label>/<index>`.
    pub fn from_features(
        categories: impl IntoIterator<Item = (String, Vec<FeatureVector>)>,
    ) -> Result<Self> {
        let mut data = Dataset::new();
        for (label, features) in categories {
            for (i, f) in features.into_iter().enumerate() {
                data.push(&label, format!("{label}/{i}"), f)?;
            }
        }
        Ok(data)
    }

    pub fn push(&mut self, label: &str, id: String, feature: FeatureVector) -> Result<()> {
        if let Some(dim) = self.dim() {
            if feature.dim() != dim {
                return Err(Error::Format(format!(
                    "instance `{id}` has dimension {}, dataset has {dim}",
                    feature.dim()
                )));
            }
        }
        let list = self.categories.entry(label.to_string()).or_default();
        if list.iter().any(|i| i.id == id) {
            return Err(Error::Format(format!("duplicate instance id `{id}`")));
        }
        list.push(Instance { id, feature });
        Ok(())
    }

    pub fn dim(&self) -> Option<usize> {
        self.categories
            .values()
            .flat_map(|v| v.first())
            .map(|i| i.feature.dim())
            .next()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.categories.keys().map(String::as_str)
    }

    pub fn instances(&self, label: &str) -> &[Instance] {
        self.categories.get(label).map_or(&[], Vec::as_slice)
    }

    pub fn category_count(&self) -> usize {
        self.categories.len()
    }

    pub fn len(&self) -> usize {
        self.categories.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Reads one subdirectory per category. `.csv` files hold feature rows
    /// (see [`crate::representation::parse_embeddings`]); `.xyz` and `.ply`
    /// files are point clouds described with `descriptor`.
    pub fn load_dir(dir: impl AsRef<Path>, descriptor: &DescriptorConfig) -> Result<Self> {
        let dir = dir.as_ref();
        let mut data = Dataset::new();
        for category in sorted_entries(dir)? {
            if !category.is_dir() {
                continue;
            }
            let label = file_name(&category);
            for file in sorted_entries(&category)? {
                let stem = file
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default();
                let ext = file
                    .extension()
                    .map(|e| e.to_string_lossy().to_ascii_lowercase());
                match ext.as_deref() {
                    Some("csv") => {
                        for (id, f) in load_embeddings(&file)? {
                            data.push(&label, format!("{label}/{stem}/{id}"), f)?;
                        }
                    }
                    Some(_) if CloudFormat::from_path(&file).is_some() => {
                        let format = CloudFormat::from_path(&file).expect("checked");
                        let cloud = load_cloud(&file, format)?;
                        let f = describe(&cloud, descriptor)?;
                        data.push(&label, format!("{label}/{stem}"), f)?;
                    }
                    _ => log::debug!("skipping {}", file.display()),
                }
            }
        }
        if data.is_empty() {
            return Err(Error::Format(format!(
                "no instances found under {}",
                dir.display()
            )));
        }
        Ok(data)
    }
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn sorted_entries(dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    let mut out = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|e| Error::io(dir, e)))
        .collect::<Result<Vec<_>>>()?;
    out.sort();
    Ok(out)
}
