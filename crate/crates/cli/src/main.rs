use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use fdsl_core::ifs::{ViewpointMode, FIXED_VIEWPOINTS};
use fdsl_core::pipeline::{
    build_dataset, stats_report, verify_dataset_with, BuildOptions, DatasetSpec, ExFractalFamily,
    FamilyConfig, Fractal2dFamily, LineDbFamily, RcdbFamily, VerifyOptions, WORKERS_ENV,
};
use fdsl_core::rcdb::{restrict_vertex_band, VertexBand};
use log::{error, info};

const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_BUILD_ERROR: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "fdsl", version, about = "Build, verify and inspect formula-driven image datasets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a dataset into a directory.
    Build(BuildArgs),
    /// Check every image against the manifest checksums and parameter ranges.
    Verify {
        dir: PathBuf,
        /// Also regenerate every image and compare.
        #[arg(long)]
        deep: bool,
    },
    /// Foreground statistics and build throughput.
    Stats {
        dir: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Family {
    Rcdb,
    Fractal2d,
    Exfractal3d,
    Linedb,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Random,
    Fixed,
}

#[derive(Debug, Parser)]
struct BuildArgs {
    #[arg(long, value_enum)]
    family: Family,

    /// Number of classes. For linedb this is the number of line-count categories.
    #[arg(long)]
    classes: u32,

    /// Seeded instances per class.
    #[arg(long)]
    instances: u32,

    #[arg(long)]
    seed: u64,

    #[arg(long)]
    out: PathBuf,

    #[arg(long, default_value_t = 512)]
    image_size: u32,

    /// Chaos-game points per image (fractal families).
    #[arg(long, default_value_t = 100_000)]
    point_budget: usize,

    #[arg(long, value_enum, default_value_t = Mode::Random)]
    viewpoint_mode: Mode,

    /// Views per instance for exfractal3d. Defaults to 40 random or 12 fixed.
    #[arg(long)]
    viewpoints: Option<u32>,

    /// Vary only (a, c, e) of each 2D map between classes.
    #[arg(long)]
    restricted: bool,

    /// Restrict RCDB vertex counts, e.g. `3:20`.
    #[arg(long, value_parser = parse_band)]
    vertex_band: Option<VertexBand>,

    /// Random background-colored lines drawn over each RCDB image.
    #[arg(long, default_value_t = 0)]
    corrupt_lines: u32,

    /// Assign linedb labels through a random non-identity permutation.
    #[arg(long)]
    permute_labels: bool,

    /// Worker threads; 0 uses every core.
    #[arg(long, env = WORKERS_ENV, default_value_t = 0)]
    workers: usize,

    /// Abort on the first failing instance instead of recording it.
    #[arg(long)]
    fail_fast: bool,
}

fn parse_band(s: &str) -> Result<VertexBand, String> {
    let (lo, hi) = s.split_once(':').ok_or("expected LO:HI")?;
    let lo = lo.trim().parse().map_err(|e| format!("{lo}: {e}"))?;
    let hi = hi.trim().parse().map_err(|e| format!("{hi}: {e}"))?;
    restrict_vertex_band(lo, hi).map_err(|e| e.to_string())
}

fn family_config(args: &BuildArgs) -> FamilyConfig {
    match args.family {
        Family::Rcdb => FamilyConfig::Rcdb(RcdbFamily {
            vertex_band: args.vertex_band.unwrap_or_default(),
            corrupt_lines: args.corrupt_lines,
            ..RcdbFamily::default()
        }),
        Family::Fractal2d => {
            let mut f = Fractal2dFamily {
                point_budget: args.point_budget,
                ..Fractal2dFamily::default()
            };
            f.sampler.restricted = args.restricted;
            FamilyConfig::Fractal2d(f)
        }
        Family::Exfractal3d => {
            let (mode, default_views) = match args.viewpoint_mode {
                Mode::Random => (ViewpointMode::Random, 40),
                Mode::Fixed => (ViewpointMode::Fixed, FIXED_VIEWPOINTS as u32),
            };
            let mut f = ExFractalFamily {
                point_budget: args.point_budget,
                viewpoint_mode: mode,
                viewpoints: args.viewpoints.unwrap_or(default_views),
                ..ExFractalFamily::default()
            };
            f.sampler.restricted = args.restricted;
            FamilyConfig::Exfractal3d(f)
        }
        Family::Linedb if args.permute_labels => {
            FamilyConfig::Linedb(LineDbFamily::permuted(args.seed, args.classes))
        }
        Family::Linedb => FamilyConfig::Linedb(LineDbFamily::default()),
    }
}

fn build(args: BuildArgs) -> ExitCode {
    let spec = DatasetSpec::new(family_config(&args), args.classes, args.instances, args.seed)
        .with_image_size(args.image_size)
        .with_output_root(&args.out);
    let options = BuildOptions {
        workers: args.workers,
        fail_fast: args.fail_fast,
    };
    match build_dataset(&spec, options) {
        Ok(outcome) => {
            let r = &outcome.report;
            info!(
                "{} images in {:.2}s ({:.1} images/sec, {} workers)",
                r.images, r.elapsed_secs, r.images_per_sec, r.workers
            );
            for e in &outcome.manifest.errors {
                error!("class {} instance {:?}: {}", e.class_id, e.instance, e.message);
            }
            if outcome.manifest.errors.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_BUILD_ERROR)
            }
        }
        Err(e) => {
            error!("build failed: {e}");
            ExitCode::from(EXIT_BUILD_ERROR)
        }
    }
}

fn verify(dir: PathBuf, deep: bool) -> ExitCode {
    match verify_dataset_with(&dir, VerifyOptions { regenerate: deep }) {
        Ok(report) if report.passed() => {
            println!("ok: {} images in {} classes", report.images_checked, report.class_counts.len());
            ExitCode::SUCCESS
        }
        Ok(report) => {
            for f in &report.failures {
                println!("FAIL {f}");
            }
            println!("{} failures in {} images", report.failures.len(), report.images_checked);
            ExitCode::from(EXIT_VERIFY_FAILED)
        }
        Err(e) => {
            println!("FAIL {e}");
            ExitCode::from(EXIT_VERIFY_FAILED)
        }
    }
}

fn stats(dir: PathBuf, json: bool) -> ExitCode {
    let report = match stats_report(&dir) {
        Ok(r) => r,
        Err(e) => {
            error!("{e}");
            return ExitCode::from(EXIT_VERIFY_FAILED);
        }
    };
    if json {
        match serde_json::to_string_pretty(&report) {
            Ok(s) => println!("{s}"),
            Err(e) => {
                error!("{e}");
                return ExitCode::from(EXIT_BUILD_ERROR);
            }
        }
    } else {
        print!("{report}");
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Build(args) => build(args),
        Command::Verify { dir, deep } => verify(dir, deep),
        Command::Stats { dir, json } => stats(dir, json),
    }
}
