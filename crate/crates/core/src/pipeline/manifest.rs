use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::spec::{DatasetSpec, FamilyConfig};
use crate::error::{Error, Result};
use crate::geometry::Seed;
use crate::ifs::{AffineMap, IfsSystem};
use crate::rcdb::RcdbParams;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const BUILD_REPORT_FILE: &str = "build_report.json";
pub const INCOMPLETE_MARKER: &str = ".build-incomplete";
pub const FORMAT_VERSION: u32 = 1;

/// Coefficients of a sampled class system, as written to the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IfsRecord {
    pub dimension: usize,
    pub maps: Vec<Vec<f64>>,
    pub probabilities: Vec<f64>,
}

impl IfsRecord {
    pub fn from_system(system: &IfsSystem) -> Self {
        IfsRecord {
            dimension: system.dimension(),
            maps: system.maps().iter().map(|m| m.coefficients(system.dimension())).collect(),
            probabilities: system.probabilities().to_vec(),
        }
    }

    pub fn to_system(&self) -> Result<IfsSystem> {
        let maps = self
            .maps
            .iter()
            .map(|c| AffineMap::from_coefficients(self.dimension, c))
            .collect::<Result<Vec<_>>>()?;
        IfsSystem::new(self.dimension, maps, self.probabilities.clone())
    }
}

/// Per-class generator parameters: the label of a class is fully defined
/// by this record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassParams {
    Rcdb(RcdbParams),
    Ifs(IfsRecord),
    Lines { line_count: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViewRecord {
    pub instance: u32,
    pub viewpoint: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageRecord {
    pub instance_id: u64,
    /// Seed of the generating instance (shared by all views of a 3D instance).
    pub seed: Seed,
    pub path: String,
    pub sha256: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub view: Option<ViewRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassRecord {
    pub class_id: u32,
    pub class_seed: Seed,
    pub params: ClassParams,
    pub images: Vec<ImageRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub class_id: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<u32>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format_version: u32,
    pub toolkit_version: String,
    pub spec: DatasetSpec,
    pub classes: Vec<ClassRecord>,
    pub errors: Vec<ErrorRecord>,
}

impl DatasetManifest {
    pub fn image_count(&self) -> usize {
        self.classes.iter().map(|c| c.images.len()).sum()
    }

    pub fn images(&self) -> impl Iterator<Item = (&ClassRecord, &ImageRecord)> {
        self.classes.iter().flat_map(|c| c.images.iter().map(move |i| (c, i)))
    }

    /// Training label of a class: its id, or the recorded permutation image.
    pub fn label_of(&self, class_id: u32) -> u32 {
        match &self.spec.family {
            FamilyConfig::Linedb(f) => f.permutation.as_ref().map_or(class_id, |p| p.map.apply(class_id)),
            _ => class_id,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn read(root: &Path) -> Result<Self> {
        let path = root.join(MANIFEST_FILE);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(Error::ManifestMissing(path)),
            Err(e) => return Err(Error::io(path, e)),
        };
        serde_json::from_str(&text).map_err(|e| Error::Manifest(format!("{}: {e}", path.display())))
    }

    /// Write-then-rename so a manifest is either absent or complete.
    pub fn write_atomic(&self, root: &Path) -> Result<()> {
        let mut json = self.to_json()?;
        json.push('\n');
        write_atomic(&root.join(MANIFEST_FILE), json.as_bytes())
    }
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    f.sync_data().map_err(|e| Error::io(&tmp, e))?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}
