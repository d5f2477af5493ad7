use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::encode::{encode_png, sha256_hex};
use super::generate::{render_instance, sample_class};
use super::manifest::{
    write_atomic, ClassRecord, DatasetManifest, ErrorRecord, ImageRecord, ViewRecord,
    BUILD_REPORT_FILE, FORMAT_VERSION, INCOMPLETE_MARKER, MANIFEST_FILE,
};
use super::spec::{DatasetSpec, FamilyConfig};
use crate::error::{Error, Result};

/// Environment variable read by the CLI for the default worker count.
pub const WORKERS_ENV: &str = "FDSL_WORKERS";

#[derive(Debug, Clone, Copy, Default)]
pub struct BuildOptions {
    /// Worker threads; 0 uses all available cores.
    pub workers: usize,
    /// Abort on the first generation failure instead of recording it.
    pub fail_fast: bool,
}

/// Timing of one build. Kept out of the manifest, which must not depend on
/// the machine or schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildReport {
    pub family: String,
    pub classes: u32,
    pub images: u64,
    pub workers: usize,
    pub elapsed_secs: f64,
    pub images_per_sec: f64,
}

#[derive(Debug, Clone)]
pub struct BuildOutcome {
    pub manifest: DatasetManifest,
    pub report: BuildReport,
}

struct Progress {
    done: AtomicU64,
    total: u64,
    step: u64,
    start: Instant,
}

impl Progress {
    fn add(&self, n: u64) {
        let before = self.done.fetch_add(n, Ordering::Relaxed);
        let after = before + n;
        if after / self.step != before / self.step || after == self.total {
            let secs = self.start.elapsed().as_secs_f64().max(1e-9);
            log::info!(
                "{after}/{} images ({:.1} images/sec)",
                self.total,
                after as f64 / secs
            );
        }
    }
}

type InstanceResult = std::result::Result<Vec<ImageRecord>, ErrorRecord>;

fn build_instance(
    spec: &DatasetSpec,
    root: &Path,
    class: &ClassRecord,
    instance: u32,
    fail_fast: bool,
    progress: &Progress,
) -> Result<InstanceResult> {
    let seed = spec.instance_seed(class.class_id, instance);
    let canvases = match render_instance(spec, &class.params, instance, seed) {
        Ok(c) => c,
        Err(e) if fail_fast => return Err(e),
        Err(e) => {
            return Ok(Err(ErrorRecord {
                class_id: class.class_id,
                instance: Some(instance),
                message: e.to_string(),
            }))
        }
    };
    let per_instance = canvases.len() as u64;
    let is_multiview = matches!(spec.family, FamilyConfig::Exfractal3d(_));
    let mut records = Vec::with_capacity(canvases.len());
    for (v, canvas) in canvases.iter().enumerate() {
        let image_id = instance as u64 * per_instance + v as u64;
        let rel = spec.relative_path(class.class_id, image_id);
        let bytes = encode_png(canvas)?;
        write_atomic(&root.join(&rel), &bytes)?;
        records.push(ImageRecord {
            instance_id: image_id,
            seed,
            path: rel,
            sha256: sha256_hex(&bytes),
            view: is_multiview.then_some(ViewRecord {
                instance,
                viewpoint: v as u32,
            }),
        });
    }
    progress.add(per_instance);
    Ok(Ok(records))
}

/// Generate every image of `spec` under `spec.output_root` and write the
/// manifest last. The result is identical for any worker count.
pub fn build_dataset(spec: &DatasetSpec, options: BuildOptions) -> Result<BuildOutcome> {
    spec.validate()?;
    let root = spec.output_root.as_path();
    fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
    // A stale manifest would claim completeness for a build that has not finished.
    let manifest_path = root.join(MANIFEST_FILE);
    match fs::remove_file(&manifest_path) {
        Ok(()) => {}
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
        Err(e) => return Err(Error::io(manifest_path, e)),
    }
    let marker = root.join(INCOMPLETE_MARKER);
    fs::write(&marker, b"build in progress\n").map_err(|e| Error::io(&marker, e))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.workers)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    let workers = pool.current_num_threads();
    let start = Instant::now();
    let progress = Progress {
        done: AtomicU64::new(0),
        total: spec.total_images(),
        step: (spec.total_images() / 20).max(1),
        start,
    };
    log::info!(
        "building {} classes x {} images of {} with {workers} workers",
        spec.class_count,
        spec.images_per_class(),
        spec.family.name()
    );

    let (classes, errors) = pool.install(|| -> Result<_> {
        let sampled: Vec<(u32, Result<_>)> = (1..=spec.class_count)
            .into_par_iter()
            .map(|id| (id, sample_class(spec, id)))
            .collect();

        let mut classes = Vec::with_capacity(sampled.len());
        let mut errors = Vec::new();
        for (class_id, params) in sampled {
            match params {
                Ok(params) => {
                    let dir = root.join(spec.relative_path(class_id, 0));
                    let dir = dir.parent().expect("class directory");
                    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
                    classes.push(ClassRecord {
                        class_id,
                        class_seed: spec.class_seed(class_id),
                        params,
                        images: Vec::new(),
                    });
                }
                Err(e) if options.fail_fast => return Err(e),
                Err(e) => errors.push(ErrorRecord {
                    class_id,
                    instance: None,
                    message: e.to_string(),
                }),
            }
        }

        let per_class: Vec<Vec<InstanceResult>> = classes
            .par_iter()
            .map(|class| {
                (0..spec.instances_per_class)
                    .into_par_iter()
                    .map(|i| build_instance(spec, root, class, i, options.fail_fast, &progress))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;

        for (class, results) in classes.iter_mut().zip(per_class) {
            for r in results {
                match r {
                    Ok(records) => class.images.extend(records),
                    Err(e) => errors.push(e),
                }
            }
        }
        Ok((classes, errors))
    })?;

    let manifest = DatasetManifest {
        format_version: FORMAT_VERSION,
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        spec: spec.clone(),
        classes,
        errors,
    };
    manifest.write_atomic(root)?;
    fs::remove_file(&marker).map_err(|e| Error::io(&marker, e))?;

    let elapsed = start.elapsed().as_secs_f64();
    let images = manifest.image_count() as u64;
    let report = BuildReport {
        family: spec.family.name().to_string(),
        classes: spec.class_count,
        images,
        workers,
        elapsed_secs: elapsed,
        images_per_sec: images as f64 / elapsed.max(1e-9),
    };
    let report_json = serde_json::to_vec_pretty(&report)?;
    write_atomic(&root.join(BUILD_REPORT_FILE), &report_json)?;
    log::info!(
        "wrote {images} images in {elapsed:.2}s ({:.1} images/sec), {} errors",
        report.images_per_sec,
        manifest.errors.len()
    );
    Ok(BuildOutcome { manifest, report })
}
