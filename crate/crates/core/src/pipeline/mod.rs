//! Dataset builds on disk: class sampling, parallel image generation,
//! PNG encoding, checksummed manifests, verification and statistics.
//!
//! Layout: `<root>/<class_id>/<image_id>.png` plus `<root>/manifest.json`,
//! which is written last, and `<root>/build_report.json` with timing.

mod build;
mod encode;
mod generate;
mod manifest;
mod spec;
mod stats;
mod verify;

pub use build::{build_dataset, BuildOptions, BuildOutcome, BuildReport, WORKERS_ENV};
pub use encode::{decode_png, encode_png, sha256_hex};
pub use generate::{render_instance, sample_class};
pub use manifest::{
    ClassParams, ClassRecord, DatasetManifest, ErrorRecord, IfsRecord, ImageRecord, ViewRecord,
    BUILD_REPORT_FILE, FORMAT_VERSION, INCOMPLETE_MARKER, MANIFEST_FILE,
};
pub use spec::{
    DatasetSpec, ExFractalFamily, FamilyConfig, Fractal2dFamily, ImageFormat, LineDbFamily,
    PermutationRecord, RcdbFamily,
};
pub use stats::{stats_report, ClassStats, DatasetStats, ForegroundSummary, RATIO_BIN_EDGES};
pub use verify::{verify_dataset, verify_dataset_with, Finding, VerificationReport, VerifyOptions};
