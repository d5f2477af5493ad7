use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::encode::{encode_png, sha256_hex};
use super::generate::render_instance;
use super::manifest::{
    ClassParams, DatasetManifest, ImageRecord, BUILD_REPORT_FILE, INCOMPLETE_MARKER, MANIFEST_FILE,
};
use super::spec::FamilyConfig;
use crate::error::{Error, Result};
use crate::ifs::restricted_base;

#[derive(Debug, Clone, Copy, Default)]
pub struct VerifyOptions {
    /// Also regenerate every image from the manifest and compare checksums.
    pub regenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Finding {
    Missing { path: String },
    ChecksumMismatch { path: String, expected: String, actual: String },
    RegenerationMismatch { path: String, reason: String },
    DuplicatePath { path: String },
    Orphan { path: String },
    InvalidParams { class_id: u32, reason: String },
    CountMismatch { class_id: u32, expected: u64, actual: u64 },
    IncompleteMarker,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finding::Missing { path } => write!(f, "missing image {path}"),
            Finding::ChecksumMismatch { path, expected, actual } => {
                write!(f, "checksum mismatch {path}: manifest {expected}, file {actual}")
            }
            Finding::RegenerationMismatch { path, reason } => write!(f, "regeneration mismatch {path}: {reason}"),
            Finding::DuplicatePath { path } => write!(f, "path listed twice {path}"),
            Finding::Orphan { path } => write!(f, "file not in manifest {path}"),
            Finding::InvalidParams { class_id, reason } => write!(f, "class {class_id}: {reason}"),
            Finding::CountMismatch { class_id, expected, actual } => {
                write!(f, "class {class_id}: {actual} images, expected {expected}")
            }
            Finding::IncompleteMarker => write!(f, "partial-build marker {INCOMPLETE_MARKER} present"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub images_checked: usize,
    pub class_counts: BTreeMap<u32, usize>,
    pub failures: Vec<Finding>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn verify_dataset(root: &Path) -> Result<VerificationReport> {
    verify_dataset_with(root, VerifyOptions::default())
}

pub fn verify_dataset_with(root: &Path, options: VerifyOptions) -> Result<VerificationReport> {
    let manifest = DatasetManifest::read(root)?;
    let mut failures = Vec::new();

    if root.join(INCOMPLETE_MARKER).exists() {
        failures.push(Finding::IncompleteMarker);
    }
    check_params(&manifest, &mut failures);

    // Checksums of the files on disk.
    let mut listed = HashSet::new();
    for (_, img) in manifest.images() {
        if !listed.insert(img.path.clone()) {
            failures.push(Finding::DuplicatePath { path: img.path.clone() });
        }
    }
    let checks: Vec<Option<Finding>> = manifest
        .images()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|(_, img)| check_file(root, img))
        .collect::<Result<_>>()?;
    failures.extend(checks.into_iter().flatten());

    for path in list_files(root)? {
        if !listed.contains(&path) {
            failures.push(Finding::Orphan { path });
        }
    }

    if options.regenerate {
        failures.extend(regenerate(&manifest)?);
    }

    let class_counts = manifest
        .classes
        .iter()
        .map(|c| (c.class_id, c.images.len()))
        .collect();
    Ok(VerificationReport {
        images_checked: manifest.image_count(),
        class_counts,
        failures,
    })
}

fn check_file(root: &Path, img: &ImageRecord) -> Result<Option<Finding>> {
    let path = root.join(&img.path);
    match fs::read(&path) {
        Ok(bytes) => {
            let actual = sha256_hex(&bytes);
            Ok((actual != img.sha256).then(|| Finding::ChecksumMismatch {
                path: img.path.clone(),
                expected: img.sha256.clone(),
                actual,
            }))
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Some(Finding::Missing {
            path: img.path.clone(),
        })),
        Err(e) => Err(Error::io(path, e)),
    }
}

fn check_params(manifest: &DatasetManifest, failures: &mut Vec<Finding>) {
    let spec = &manifest.spec;
    if let Err(e) = spec.validate() {
        failures.push(Finding::InvalidParams {
            class_id: 0,
            reason: format!("spec: {e}"),
        });
    }
    let mut seen = HashSet::new();
    let failed_classes: HashSet<u32> = manifest.errors.iter().map(|e| e.class_id).collect();
    for class in &manifest.classes {
        let id = class.class_id;
        let mut bad = |reason: String| failures.push(Finding::InvalidParams { class_id: id, reason });
        if id == 0 || id > spec.class_count || !seen.insert(id) {
            bad(format!("class id outside 1..={} or repeated", spec.class_count));
        }
        if class.class_seed != spec.class_seed(id) {
            bad("class seed does not match the global seed".into());
        }
        match (&spec.family, &class.params) {
            (FamilyConfig::Rcdb(f), ClassParams::Rcdb(p)) => {
                if let Err(e) = p.validate_in_band(f.vertex_band) {
                    bad(e.to_string());
                }
            }
            (FamilyConfig::Fractal2d(f), ClassParams::Ifs(r)) => {
                check_ifs(r, 2, &f.sampler, &mut bad);
            }
            (FamilyConfig::Exfractal3d(f), ClassParams::Ifs(r)) => {
                check_ifs(r, 3, &f.sampler, &mut bad);
            }
            (FamilyConfig::Linedb(_), ClassParams::Lines { line_count }) => {
                if *line_count != id {
                    bad(format!("line count {line_count} does not equal class id"));
                }
            }
            (family, _) => bad(format!("parameters do not belong to family {}", family.name())),
        }
        let expected = spec.images_per_class();
        let actual = class.images.len() as u64;
        if actual != expected && !failed_classes.contains(&id) {
            failures.push(Finding::CountMismatch {
                class_id: id,
                expected,
                actual,
            });
        }
    }
}

fn check_ifs(
    record: &super::manifest::IfsRecord,
    dimension: usize,
    sampler: &crate::ifs::IfsSamplerConfig,
    bad: &mut impl FnMut(String),
) {
    if record.dimension != dimension {
        bad(format!("expected a {dimension}D system, found {}D", record.dimension));
        return;
    }
    let system = match record.to_system() {
        Ok(s) => s,
        Err(e) => return bad(e.to_string()),
    };
    let count = system.maps().len();
    if count < sampler.map_count.min || count > sampler.map_count.max {
        bad(format!("{count} maps outside {}..={}", sampler.map_count.min, sampler.map_count.max));
    }
    if !sampler.acceptance.accepts(&system) {
        bad(format!(
            "weighted contractivity {:.4} fails the acceptance window",
            system.weighted_contractivity()
        ));
    }
    if sampler.restricted {
        for (i, m) in system.maps().iter().enumerate() {
            let c = m.coefficients(2);
            if [c[1], c[3], c[5]] != restricted_base(sampler.restricted_base_seed, i) {
                bad(format!("map {i} does not carry the fixed (b, d, f) coefficients"));
            }
        }
    }
}

/// Relative paths (forward slashes) of every file except the top-level
/// manifest and build report.
fn list_files(root: &Path) -> Result<Vec<String>> {
    let mut out = Vec::new();
    let mut stack = vec![PathBuf::new()];
    while let Some(rel) = stack.pop() {
        let dir = root.join(&rel);
        for entry in fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))? {
            let entry = entry.map_err(|e| Error::io(&dir, e))?;
            let name = entry.file_name();
            let child = rel.join(&name);
            let ty = entry.file_type().map_err(|e| Error::io(entry.path(), e))?;
            if ty.is_dir() {
                stack.push(child);
                continue;
            }
            if rel.as_os_str().is_empty() {
                let n = name.to_string_lossy();
                if n == MANIFEST_FILE || n == BUILD_REPORT_FILE || n == INCOMPLETE_MARKER {
                    continue;
                }
            }
            let parts: Vec<String> = child.iter().map(|p| p.to_string_lossy().into_owned()).collect();
            out.push(parts.join("/"));
        }
    }
    out.sort();
    Ok(out)
}

fn regenerate(manifest: &DatasetManifest) -> Result<Vec<Finding>> {
    let spec = &manifest.spec;
    let per_class: Vec<Vec<Finding>> = manifest
        .classes
        .par_iter()
        .map(|class| {
            // Group image records by the instance that produced them.
            let mut groups: BTreeMap<u32, Vec<&ImageRecord>> = BTreeMap::new();
            for img in &class.images {
                let instance = img.view.map_or(img.instance_id as u32, |v| v.instance);
                groups.entry(instance).or_default().push(img);
            }
            let mut findings = Vec::new();
            for (instance, records) in groups {
                let canvases = match render_instance(spec, &class.params, instance, records[0].seed) {
                    Ok(c) => c,
                    Err(e) => {
                        for r in records {
                            findings.push(Finding::RegenerationMismatch {
                                path: r.path.clone(),
                                reason: e.to_string(),
                            });
                        }
                        continue;
                    }
                };
                for r in records {
                    let v = r.view.map_or(0, |v| v.viewpoint as usize);
                    let reason = match canvases.get(v).map(encode_png) {
                        None => Some(format!("instance produced no image {v}")),
                        Some(Err(e)) => Some(e.to_string()),
                        Some(Ok(bytes)) => {
                            let sha = sha256_hex(&bytes);
                            (sha != r.sha256).then(|| format!("regenerated checksum {sha}"))
                        }
                    };
                    if let Some(reason) = reason {
                        findings.push(Finding::RegenerationMismatch {
                            path: r.path.clone(),
                            reason,
                        });
                    }
                }
            }
            findings
        })
        .collect();
    Ok(per_class.into_iter().flatten().collect())
}
