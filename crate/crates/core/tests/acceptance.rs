//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Run with `cargo test --test acceptance`.

use std::time::{Duration, Instant};

use nalgebra::{Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fdsl_core::geometry::{derive_seed, PerlinConfig, Seed, CLASS_LEVEL};
use fdsl_core::ifs::{
    chaos_game, render_points, sample_ifs_system, AffineMap, IfsSamplerConfig, IfsSystem,
};
use fdsl_core::pipeline::{
    build_dataset, stats_report, BuildOptions, DatasetSpec, ExFractalFamily, FamilyConfig, RcdbFamily,
};
use fdsl_core::rcdb::{
    build_rings, corrupt_contours, first_polygon, layout_radial_contour, render_radial_contour,
    sample_class_params, CenterMode, CorruptionConfig, RcdbParams, RenderConfig,
};

type Outcome = Result<String, String>;

// Parameter ranges for RCDB classes.
const N_POLYGONS: (u32, u32) = (1, 200);
const N_VERTICES: (u32, u32) = (3, 502);
const RADIUS: (f64, f64) = (0.0, 100.0);
const LINE_WIDTH: (f64, f64) = (0.0, 0.1);
const RESIZE: (f64, f64) = (1.0, 4.0);
const NOISE: (f64, f64) = (0.0, 4.0);

/// Upper 0.1% point of chi-square with 499 degrees of freedom.
const CHI2_499_999: f64 = 602.348;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_secs: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_secs, || {
        format!("took {:.2}s, limit {limit_secs}s", elapsed.as_secs_f64())
    })
}

fn first_polygon_oracle() -> Outcome {
    let t = Instant::now();
    let square = first_polygon(4, 1.0, [1.0, 1.0]).map_err(|e| e.to_string())?;
    let expected = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0), (1.0, 0.0)];
    for (v, (x, y)) in square.vertices().iter().zip(expected) {
        ensure(v.x == x && v.y == y, || format!("square vertex {v:?} != ({x}, {y})"))?;
    }
    let tri = first_polygon(3, 2.0, [1.0, 2.0]).map_err(|e| e.to_string())?;
    let s3 = 3f64.sqrt();
    let expected = [(2.0, 0.0), (-1.0, 2.0 * s3), (-1.0, -2.0 * s3), (2.0, 0.0)];
    for (v, (x, y)) in tri.vertices().iter().zip(expected) {
        ensure((v.x - x).abs() <= 1e-12 && (v.y - y).abs() <= 1e-12, || {
            format!("triangle vertex {v:?} != ({x}, {y})")
        })?;
    }
    within(t.elapsed(), 1.0)?;
    Ok("n=4 exact, n=3 within 1e-12".into())
}

fn zero_noise_growth() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x2e70);
    let mut worst = 0.0f64;
    for case in 0..100 {
        let n = rng.random_range(N_VERTICES.0..=N_VERTICES.1);
        let big_n = rng.random_range(2..=N_POLYGONS.1);
        let params = RcdbParams {
            num_polygons: big_n,
            num_vertices: n,
            radius: rng.random_range(RADIUS.0..=RADIUS.1),
            line_width: rng.random_range(LINE_WIDTH.0..=LINE_WIDTH.1),
            resize: [rng.random_range(RESIZE.0..=RESIZE.1), rng.random_range(RESIZE.0..=RESIZE.1)],
            noise_scale: [0.0, 0.0],
        };
        let rings = build_rings(&params, Seed(case), &PerlinConfig::default()).map_err(|e| e.to_string())?;
        for pair in rings.windows(2) {
            for (j, (a, b)) in pair[0].vertices().iter().zip(pair[1].vertices()).enumerate() {
                let theta = std::f64::consts::TAU * j as f64 / n as f64;
                let want = Vector2::new(theta.cos(), theta.sin()) * params.line_width;
                worst = worst.max((b - a - want).amax());
            }
        }
    }
    ensure(worst <= 1e-12, || format!("max displacement error {worst:e}"))?;
    Ok(format!("100 (n, N) pairs, max error {worst:.1e}"))
}

fn parameter_ranges() -> Outcome {
    let t = Instant::now();
    let classes = 10_000u64;
    let bins = (N_VERTICES.1 - N_VERTICES.0 + 1) as usize;
    let mut hist = vec![0u64; bins];
    for c in 1..=classes {
        let p = sample_class_params(derive_seed(2024, c, CLASS_LEVEL, 1));
        let inside = (N_POLYGONS.0..=N_POLYGONS.1).contains(&p.num_polygons)
            && (N_VERTICES.0..=N_VERTICES.1).contains(&p.num_vertices)
            && (RADIUS.0..=RADIUS.1).contains(&p.radius)
            && (LINE_WIDTH.0..=LINE_WIDTH.1).contains(&p.line_width)
            && p.resize.iter().all(|o| (RESIZE.0..=RESIZE.1).contains(o))
            && p.noise_scale.iter().all(|l| (NOISE.0..=NOISE.1).contains(l));
        ensure(inside, || format!("class {c} out of range: {p:?}"))?;
        hist[(p.num_vertices - N_VERTICES.0) as usize] += 1;
    }
    let expected = classes as f64 / bins as f64;
    let chi2: f64 = hist.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
    ensure(chi2 < CHI2_499_999, || format!("chi-square {chi2:.1} >= {CHI2_499_999}"))?;
    within(t.elapsed(), 10.0)?;
    Ok(format!("10000 classes in range, n chi-square {chi2:.1} < {CHI2_499_999}"))
}

/// Squared distance from `c` to segment `ab`, by projection clamping.
fn dist_sq(c: Vector2<f64>, a: Vector2<f64>, b: Vector2<f64>) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 == 0.0 { 0.0 } else { ((c - a).dot(&ab) / len2).clamp(0.0, 1.0) };
    (a + ab * t - c).norm_squared()
}

fn raster_oracle() -> Outcome {
    let size = 128u32;
    let mut cases = 0;
    for k in 0..20u64 {
        let mut params = sample_class_params(Seed(0xa11ce + k));
        params.num_polygons = 1;
        if k == 0 {
            params.num_vertices = 4;
            params.noise_scale = [0.0, 0.0];
        }
        let config = RenderConfig {
            center: if k % 2 == 0 { CenterMode::Centered } else { CenterMode::Random },
            ..RenderConfig::default()
        };
        let seed = Seed(k);
        let layout = layout_radial_contour(&params, seed, size, &config).map_err(|e| e.to_string())?;
        let canvas = render_radial_contour(&params, seed, size, &config).map_err(|e| e.to_string())?;
        let segments: Vec<_> = layout.pixel_segments().collect();
        let r2 = (layout.stroke_px * 0.5).powi(2);
        for y in 0..size {
            for x in 0..size {
                let c = Vector2::new(x as f64 + 0.5, y as f64 + 0.5);
                let hit = segments.iter().any(|&(a, b)| dist_sq(c, a, b) <= r2);
                let want = if hit { 255 } else { 0 };
                ensure(canvas.get(x, y) == want, || {
                    format!("case {k}: pixel ({x}, {y}) is {}, oracle {want}", canvas.get(x, y))
                })?;
            }
        }
        cases += 1;
    }
    Ok(format!("{cases} single-ring cases bit-identical at {size}x{size}"))
}

fn chaos_game_oracles() -> Outcome {
    let t = Instant::now();
    let budget = 100_000;

    let shift = Vector3::new(0.3, -0.7, 0.0);
    let single = IfsSystem::new(2, vec![AffineMap::scaled(2, 0.5, shift)], vec![1.0]).map_err(|e| e.to_string())?;
    let cloud = chaos_game(&single, budget, Seed(1)).map_err(|e| e.to_string())?;
    let fixed = shift * 2.0;
    let worst = cloud.points.iter().map(|p| (p - fixed).norm()).fold(0.0, f64::max);
    ensure(worst <= 2f64.powi(-20), || format!("single map: distance {worst:e} from fixed point"))?;

    let origin = IfsSystem::new(2, vec![AffineMap::scaled(2, 0.5, Vector3::zeros())], vec![1.0])
        .map_err(|e| e.to_string())?;
    let cloud = chaos_game(&origin, budget, Seed(2)).map_err(|e| e.to_string())?;
    ensure(cloud.points.iter().all(|p| p.norm() <= 2f64.powi(-20)), || "origin case did not converge".into())?;

    let corners = [Vector2::new(0.0, 0.0), Vector2::new(1.0, 0.0), Vector2::new(0.5, 1.0)];
    let maps = corners
        .iter()
        .map(|v| AffineMap::new_2d(0.5, 0.0, 0.0, 0.5, v.x * 0.5, v.y * 0.5))
        .collect();
    let sierpinski = IfsSystem::new(2, maps, vec![1.0 / 3.0; 3]).map_err(|e| e.to_string())?;
    let cloud = chaos_game(&sierpinski, budget, Seed(3)).map_err(|e| e.to_string())?;
    let bary = |p: Vector2<f64>, t: [Vector2<f64>; 3]| {
        let d = (t[1] - t[0]).perp(&(t[2] - t[0]));
        let l1 = (t[1] - p).perp(&(t[2] - p)) / d;
        let l2 = (t[2] - p).perp(&(t[0] - p)) / d;
        [l1, l2, 1.0 - l1 - l2]
    };
    let middle = [(corners[0] + corners[1]) * 0.5, (corners[1] + corners[2]) * 0.5, (corners[2] + corners[0]) * 0.5];
    let eps = 1e-9;
    let mut in_middle = 0;
    let mut outside = 0;
    for p in cloud.planar() {
        if bary(p, middle).iter().all(|&l| l > eps) {
            in_middle += 1;
        }
        if bary(p, corners).iter().any(|&l| l < -eps) {
            outside += 1;
        }
    }
    ensure(in_middle == 0 && outside == 0, || {
        format!("sierpinski: {in_middle} points in middle triangle, {outside} outside hull")
    })?;
    within(t.elapsed(), 5.0)?;
    Ok(format!("fixed point within 2^-20 ({worst:.1e}), sierpinski clean over {budget} points"))
}

fn point_budget_monotone() -> Outcome {
    let budgets = [500usize, 10_000, 50_000, 200_000];
    let size = 512;
    let cfg = IfsSamplerConfig::default();
    let mut sums = [0.0f64; 4];
    let classes = 50u64;
    for c in 1..=classes {
        let system = sample_ifs_system(derive_seed(77, c, CLASS_LEVEL, 1), 2, &cfg).map_err(|e| e.to_string())?;
        let cloud = chaos_game(&system, budgets[3], derive_seed(77, c, 0, 6)).map_err(|e| e.to_string())?;
        for (sum, &b) in sums.iter_mut().zip(&budgets) {
            *sum += render_points(&cloud, size, b).map_err(|e| e.to_string())?.foreground_count() as f64;
        }
    }
    let means: Vec<f64> = sums.iter().map(|s| s / classes as f64).collect();
    ensure(means.windows(2).all(|w| w[0] < w[1]), || format!("means not increasing: {means:?}"))?;
    Ok(format!(
        "mean white pixels {:.0} < {:.0} < {:.0} < {:.0}",
        means[0], means[1], means[2], means[3]
    ))
}

fn corruption_property() -> Outcome {
    let cfg = CorruptionConfig::default();
    let mut total_removed = 0usize;
    for k in 0..50u64 {
        let params = sample_class_params(Seed(0xc0 + k));
        let seed = Seed(1000 + k);
        let image = render_radial_contour(&params, seed, 512, &RenderConfig::default()).map_err(|e| e.to_string())?;
        let same = corrupt_contours(&image, seed, 0, &cfg).map_err(|e| e.to_string())?;
        ensure(same == image, || format!("image {k}: zero lines changed the canvas"))?;
        let damaged = corrupt_contours(&image, seed, 1000, &cfg).map_err(|e| e.to_string())?;
        let (before, after) = (image.foreground_count(), damaged.foreground_count());
        ensure(after < before, || format!("image {k}: {before} -> {after} foreground pixels"))?;
        total_removed += before - after;
    }
    Ok(format!("50 images all reduced ({total_removed} pixels erased in total), 0 lines is identity"))
}

fn exfractal_class_shape() -> Outcome {
    let spec_for = |root: &std::path::Path| {
        DatasetSpec::new(FamilyConfig::Exfractal3d(ExFractalFamily::default()), 2, 25, 31).with_output_root(root)
    };
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    let build = |root: &std::path::Path, workers| {
        build_dataset(&spec_for(root), BuildOptions { workers, fail_fast: true }).map_err(|e| e.to_string())
    };
    let one = build(a.path(), 1)?.manifest;
    let many = build(b.path(), 16)?.manifest;
    for class in &one.classes {
        ensure(class.images.len() == 1000, || {
            format!("class {} has {} images", class.class_id, class.images.len())
        })?;
    }
    ensure(one.classes.len() == 2, || format!("{} classes", one.classes.len()))?;
    let (ja, jb) = (one.to_json().map_err(|e| e.to_string())?, many.to_json().map_err(|e| e.to_string())?);
    ensure(ja == jb, || "manifests differ between 1 and 16 workers".into())?;
    Ok("2 classes x 1000 images, 1 and 16 workers identical".into())
}

fn rcdb_throughput() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let spec = DatasetSpec::new(FamilyConfig::Rcdb(RcdbFamily::default()), 100, 10, 5).with_output_root(dir.path());
    let t = Instant::now();
    build_dataset(&spec, BuildOptions::default()).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    let stats = stats_report(dir.path()).map_err(|e| e.to_string())?;
    let report = stats.build.ok_or("stats did not report build throughput")?;
    ensure(stats.global.images == 1000, || format!("{} images", stats.global.images))?;
    ensure(report.images_per_sec > 0.0, || "zero throughput reported".into())?;
    within(elapsed, 300.0)?;
    Ok(format!(
        "1000 images at 512x512 in {:.1}s, {:.1} images/sec on {} workers",
        elapsed.as_secs_f64(),
        report.images_per_sec,
        report.workers
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("first polygon oracle", first_polygon_oracle),
        ("zero-noise ring growth", zero_noise_growth),
        ("RCDB parameter ranges and vertex uniformity", parameter_ranges),
        ("single-ring rasterization oracle", raster_oracle),
        ("chaos game oracles", chaos_game_oracles),
        ("point budget monotonicity", point_budget_monotone),
        ("contour corruption", corruption_property),
        ("3D fractal class shape and worker invariance", exfractal_class_shape),
        ("RCDB build throughput", rcdb_throughput),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail} [{secs:.2}s]"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why} [{secs:.2}s]");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
