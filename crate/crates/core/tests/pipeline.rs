use std::collections::HashSet;
use std::fs;
use std::path::Path;

use fdsl_core::pipeline::{
    build_dataset, decode_png, stats_report, verify_dataset, verify_dataset_with, BuildOptions,
    ClassParams, DatasetManifest, DatasetSpec, FamilyConfig, Finding, Fractal2dFamily,
    LineDbFamily, RcdbFamily, VerifyOptions, INCOMPLETE_MARKER, MANIFEST_FILE,
};
use fdsl_core::Error;

fn build(spec: &DatasetSpec, workers: usize) -> DatasetManifest {
    build_dataset(spec, BuildOptions { workers, fail_fast: true }).unwrap().manifest
}

fn rcdb_spec(root: &Path, classes: u32, instances: u32) -> DatasetSpec {
    DatasetSpec::new(FamilyConfig::Rcdb(RcdbFamily::default()), classes, instances, 11)
        .with_image_size(64)
        .with_output_root(root)
}

fn png_files(root: &Path) -> Vec<String> {
    let mut out = Vec::new();
    for class in fs::read_dir(root).unwrap() {
        let class = class.unwrap();
        if !class.file_type().unwrap().is_dir() {
            continue;
        }
        for f in fs::read_dir(class.path()).unwrap() {
            let f = f.unwrap();
            out.push(format!(
                "{}/{}",
                class.file_name().to_string_lossy(),
                f.file_name().to_string_lossy()
            ));
        }
    }
    out.sort();
    out
}

#[test]
fn rcdb_ten_by_ten_layout() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = build(&rcdb_spec(dir.path(), 10, 10), 2);
    let files = png_files(dir.path());
    assert_eq!(files.len(), 100);
    let dirs: HashSet<_> = files.iter().map(|f| f.split('/').next().unwrap().to_string()).collect();
    assert_eq!(dirs.len(), 10);
    assert_eq!(manifest.image_count(), 100);
    let sums: HashSet<_> = manifest.images().map(|(_, i)| i.sha256.clone()).collect();
    assert_eq!(sums.len(), 100);
    assert!(files.iter().all(|f| f.ends_with(".png")));
    assert!(!dir.path().join(INCOMPLETE_MARKER).exists());
    let report = verify_dataset(dir.path()).unwrap();
    assert!(report.passed(), "{:?}", report.failures);
    assert_eq!(report.images_checked, 100);
}

#[test]
fn worker_count_does_not_change_output() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ma = build(&rcdb_spec(a.path(), 4, 3), 1);
    let mb = build(&rcdb_spec(b.path(), 4, 3), 16);
    assert_eq!(ma.to_json().unwrap(), mb.to_json().unwrap());
    for f in png_files(a.path()) {
        assert_eq!(fs::read(a.path().join(&f)).unwrap(), fs::read(b.path().join(&f)).unwrap());
    }
}

#[test]
fn byte_flip_is_the_only_failure() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = build(&rcdb_spec(dir.path(), 3, 4), 2);
    let victim = manifest.classes[1].images[2].path.clone();
    let path = dir.path().join(&victim);
    let mut bytes = fs::read(&path).unwrap();
    bytes[40] ^= 0x01;
    fs::write(&path, bytes).unwrap();

    let report = verify_dataset(dir.path()).unwrap();
    assert_eq!(report.failures.len(), 1, "{:?}", report.failures);
    match &report.failures[0] {
        Finding::ChecksumMismatch { path, .. } => assert_eq!(path, &victim),
        other => panic!("unexpected finding {other:?}"),
    }
}

#[test]
fn missing_and_orphan_files_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = build(&rcdb_spec(dir.path(), 2, 2), 1);
    let gone = manifest.classes[0].images[0].path.clone();
    fs::remove_file(dir.path().join(&gone)).unwrap();
    fs::write(dir.path().join("1").join("extra.png"), b"x").unwrap();
    let report = verify_dataset(dir.path()).unwrap();
    assert!(report.failures.contains(&Finding::Missing { path: gone }));
    assert!(report.failures.contains(&Finding::Orphan { path: "1/extra.png".into() }));
    assert_eq!(report.failures.len(), 2);
}

#[test]
fn missing_manifest_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    build(&rcdb_spec(dir.path(), 2, 1), 1);
    fs::remove_file(dir.path().join(MANIFEST_FILE)).unwrap();
    assert!(matches!(verify_dataset(dir.path()), Err(Error::ManifestMissing(_))));
}

#[test]
fn tampered_params_fail_verification() {
    let dir = tempfile::tempdir().unwrap();
    let mut manifest = build(&rcdb_spec(dir.path(), 2, 1), 1);
    if let ClassParams::Rcdb(p) = &mut manifest.classes[0].params {
        p.num_vertices = 900;
    }
    fs::write(dir.path().join(MANIFEST_FILE), manifest.to_json().unwrap()).unwrap();
    let report = verify_dataset(dir.path()).unwrap();
    assert!(matches!(report.failures[..], [Finding::InvalidParams { class_id: 1, .. }]));
}

#[test]
fn rebuild_over_partial_output_matches_clean_build() {
    let clean = tempfile::tempdir().unwrap();
    let partial = tempfile::tempdir().unwrap();
    let spec_clean = rcdb_spec(clean.path(), 3, 3);
    let reference = build(&spec_clean, 1);

    // Simulate an interrupted build: some images, a marker, no manifest.
    let spec = rcdb_spec(partial.path(), 3, 3);
    build(&spec, 1);
    fs::remove_file(partial.path().join(MANIFEST_FILE)).unwrap();
    fs::write(partial.path().join(INCOMPLETE_MARKER), b"").unwrap();
    let half = &reference.classes[2].images[1].path;
    fs::write(partial.path().join(half), b"truncated").unwrap();
    assert!(matches!(verify_dataset(partial.path()), Err(Error::ManifestMissing(_))));

    let rebuilt = build(&spec, 2);
    assert_eq!(rebuilt.to_json().unwrap(), reference.to_json().unwrap());
    assert!(verify_dataset(partial.path()).unwrap().passed());
}

#[test]
fn deep_verification_regenerates_every_family() {
    let families = [
        FamilyConfig::Rcdb(RcdbFamily {
            corrupt_lines: 20,
            ..RcdbFamily::default()
        }),
        FamilyConfig::Fractal2d(Fractal2dFamily {
            point_budget: 3000,
            ..Fractal2dFamily::default()
        }),
        FamilyConfig::Exfractal3d(fdsl_core::pipeline::ExFractalFamily {
            point_budget: 3000,
            viewpoints: 3,
            ..Default::default()
        }),
        FamilyConfig::Linedb(LineDbFamily::permuted(3, 4)),
    ];
    for family in families {
        let dir = tempfile::tempdir().unwrap();
        let spec = DatasetSpec::new(family, 4, 2, 3).with_image_size(48).with_output_root(dir.path());
        build(&spec, 2);
        let report = verify_dataset_with(dir.path(), VerifyOptions { regenerate: true }).unwrap();
        assert!(report.passed(), "{}: {:?}", spec.family.name(), report.failures);
    }
}

#[test]
fn permuted_linedb_differs_only_in_labels() {
    let plain_dir = tempfile::tempdir().unwrap();
    let perm_dir = tempfile::tempdir().unwrap();
    let plain = DatasetSpec::new(FamilyConfig::Linedb(LineDbFamily::default()), 16, 3, 9)
        .with_image_size(64)
        .with_output_root(plain_dir.path());
    let mut permuted = plain.clone().with_output_root(perm_dir.path());
    permuted.family = FamilyConfig::Linedb(LineDbFamily::permuted(9, 16));

    let a = build(&plain, 1);
    let b = build(&permuted, 1);
    assert_eq!(a.classes, b.classes);
    assert_eq!(png_files(plain_dir.path()), png_files(perm_dir.path()));
    assert!((1..=16).any(|c| a.label_of(c) != b.label_of(c)));
    let labels: HashSet<u32> = (1..=16).map(|c| b.label_of(c)).collect();
    assert_eq!(labels.len(), 16);

    let mut ja: serde_json::Value = serde_json::from_str(&a.to_json().unwrap()).unwrap();
    let mut jb: serde_json::Value = serde_json::from_str(&b.to_json().unwrap()).unwrap();
    assert_ne!(ja, jb);
    ja["spec"]["family_config"]["permutation"] = serde_json::Value::Null;
    jb["spec"]["family_config"]["permutation"] = serde_json::Value::Null;
    assert_eq!(ja, jb);
}

#[test]
fn stats_are_deterministic_and_see_empty_images() {
    let dir = tempfile::tempdir().unwrap();
    let spec = DatasetSpec::new(FamilyConfig::Linedb(LineDbFamily::default()), 3, 2, 4)
        .with_image_size(32)
        .with_output_root(dir.path());
    build(&spec, 1);
    // An all-background image is valid input for the statistics pass.
    let path = dir.path().join(spec.relative_path(1, 0));
    let blank = fdsl_core::geometry::Canvas::square(32);
    fs::write(&path, fdsl_core::pipeline::encode_png(&blank).unwrap()).unwrap();

    let a = stats_report(dir.path()).unwrap();
    let b = stats_report(dir.path()).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert_eq!(a.global.images, 6);
    assert_eq!(a.global.min_foreground_pixels, 0);
    assert_eq!(a.global.histogram[0], 1);
    assert_eq!(a.global.histogram.iter().sum::<usize>(), 6);
    assert!(a.build.is_some());
    assert_eq!(a.point_budget, None);
}

#[test]
fn larger_point_budget_gives_more_foreground() {
    let mut means = Vec::new();
    for budget in [10_000, 50_000] {
        let dir = tempfile::tempdir().unwrap();
        let family = FamilyConfig::Fractal2d(Fractal2dFamily {
            point_budget: budget,
            ..Fractal2dFamily::default()
        });
        let spec = DatasetSpec::new(family, 6, 1, 21).with_image_size(128).with_output_root(dir.path());
        build(&spec, 1);
        let stats = stats_report(dir.path()).unwrap();
        assert_eq!(stats.point_budget, Some(budget));
        means.push(stats.global.mean_foreground_pixels);
    }
    assert!(means[0] < means[1], "{means:?}");
}

#[test]
fn images_decode_to_canvas_size() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = build(&rcdb_spec(dir.path(), 2, 2), 1);
    for (_, img) in manifest.images() {
        let c = decode_png(&fs::read(dir.path().join(&img.path)).unwrap()).unwrap();
        assert_eq!((c.width(), c.height()), (64, 64));
        assert!(c.foreground_count() > 0);
    }
}

#[test]
fn build_time_grows_roughly_linearly() {
    // Best of three to damp scheduler noise; generous bound for shared CI.
    let time = |classes: u32| {
        (0..3)
            .map(|_| {
                let dir = tempfile::tempdir().unwrap();
                let spec = rcdb_spec(dir.path(), classes, 5);
                build_dataset(&spec, BuildOptions { workers: 1, fail_fast: true })
                    .unwrap()
                    .report
                    .elapsed_secs
            })
            .fold(f64::INFINITY, f64::min)
    };
    let small = time(4);
    let large = time(16);
    let ratio = large / small;
    assert!(ratio > 1.5 && ratio < 10.0, "ratio {ratio}");
}
