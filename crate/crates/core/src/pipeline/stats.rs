use std::fmt;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::build::BuildReport;
use super::encode::decode_png;
use super::manifest::{DatasetManifest, BUILD_REPORT_FILE};
use crate::error::{Error, Result};

/// Upper edges of the foreground-ratio histogram bins; the first bin starts
/// at 0 and the last includes 1.
pub const RATIO_BIN_EDGES: [f64; 10] = [1e-3, 2e-3, 5e-3, 1e-2, 2e-2, 5e-2, 0.1, 0.2, 0.5, 1.0];

fn bin_of(ratio: f64) -> usize {
    RATIO_BIN_EDGES
        .iter()
        .position(|&edge| ratio < edge)
        .unwrap_or(RATIO_BIN_EDGES.len() - 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForegroundSummary {
    pub images: usize,
    pub mean_foreground_ratio: f64,
    pub mean_foreground_pixels: f64,
    pub min_foreground_pixels: usize,
    pub max_foreground_pixels: usize,
    pub histogram: Vec<usize>,
}

impl ForegroundSummary {
    fn from_counts(counts: &[(usize, f64)]) -> Self {
        let mut histogram = vec![0; RATIO_BIN_EDGES.len()];
        for &(_, ratio) in counts {
            histogram[bin_of(ratio)] += 1;
        }
        let n = counts.len().max(1) as f64;
        ForegroundSummary {
            images: counts.len(),
            mean_foreground_ratio: counts.iter().map(|c| c.1).sum::<f64>() / n,
            mean_foreground_pixels: counts.iter().map(|c| c.0 as f64).sum::<f64>() / n,
            min_foreground_pixels: counts.iter().map(|c| c.0).min().unwrap_or(0),
            max_foreground_pixels: counts.iter().map(|c| c.0).max().unwrap_or(0),
            histogram,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub class_id: u32,
    pub label: u32,
    #[serde(flatten)]
    pub foreground: ForegroundSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub family: String,
    pub classes: usize,
    pub histogram_edges: Vec<f64>,
    pub global: ForegroundSummary,
    pub per_class: Vec<ClassStats>,
    /// Chaos-game points per image for fractal families.
    pub point_budget: Option<usize>,
    /// Throughput of the build that produced the dataset, when recorded.
    pub build: Option<BuildReport>,
}

pub fn stats_report(root: &Path) -> Result<DatasetStats> {
    let manifest = DatasetManifest::read(root)?;
    let per_class: Vec<(u32, Vec<(usize, f64)>)> = manifest
        .classes
        .par_iter()
        .map(|class| {
            let counts = class
                .images
                .iter()
                .map(|img| {
                    let path = root.join(&img.path);
                    let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
                    let canvas = decode_png(&bytes)?;
                    Ok((canvas.foreground_count(), canvas.foreground_ratio()))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((class.class_id, counts))
        })
        .collect::<Result<_>>()?;

    let all: Vec<(usize, f64)> = per_class.iter().flat_map(|(_, c)| c.iter().copied()).collect();
    let build = match fs::read(root.join(BUILD_REPORT_FILE)) {
        Ok(bytes) => serde_json::from_slice(&bytes).ok(),
        Err(_) => None,
    };
    Ok(DatasetStats {
        family: manifest.spec.family.name().to_string(),
        classes: per_class.len(),
        histogram_edges: RATIO_BIN_EDGES.to_vec(),
        global: ForegroundSummary::from_counts(&all),
        per_class: per_class
            .iter()
            .map(|(id, counts)| ClassStats {
                class_id: *id,
                label: manifest.label_of(*id),
                foreground: ForegroundSummary::from_counts(counts),
            })
            .collect(),
        point_budget: manifest.spec.family.point_budget(),
        build,
    })
}

impl fmt::Display for DatasetStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = &self.global;
        writeln!(f, "family:            {}", self.family)?;
        writeln!(f, "classes:           {}", self.classes)?;
        writeln!(f, "images:            {}", g.images)?;
        if let Some(b) = self.point_budget {
            writeln!(f, "point budget:      {b}")?;
        }
        writeln!(f, "foreground ratio:  mean {:.5}", g.mean_foreground_ratio)?;
        writeln!(
            f,
            "foreground pixels: mean {:.1}, min {}, max {}",
            g.mean_foreground_pixels, g.min_foreground_pixels, g.max_foreground_pixels
        )?;
        writeln!(f, "ratio histogram:")?;
        let mut lo = 0.0;
        for (edge, count) in self.histogram_edges.iter().zip(&g.histogram) {
            writeln!(f, "  [{lo:<6}, {edge:<6}) {count}")?;
            lo = *edge;
        }
        match &self.build {
            Some(b) => writeln!(
                f,
                "throughput:        {:.1} images/sec ({} images in {:.2}s, {} workers)",
                b.images_per_sec, b.images, b.elapsed_secs, b.workers
            ),
            None => writeln!(f, "throughput:        not recorded"),
        }
    }
}
