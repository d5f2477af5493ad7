use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{derive_seed, stream, Fit, Seed, CLASS_LEVEL};
use crate::ifs::{ExFractalConfig, IfsSamplerConfig, ViewpointMode, DEFAULT_BURN_IN, FIXED_VIEWPOINTS};
use crate::linedb::{LabelPermutation, DEFAULT_STROKE_PX};
use crate::rcdb::{CorruptionConfig, RenderConfig, VertexBand};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImageFormat {
    Png,
}

impl ImageFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ImageFormat::Png => "png",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RcdbFamily {
    pub vertex_band: VertexBand,
    pub render: RenderConfig,
    pub corrupt_lines: u32,
    pub corruption: CorruptionConfig,
}

impl Default for RcdbFamily {
    fn default() -> Self {
        RcdbFamily {
            vertex_band: VertexBand::full(),
            render: RenderConfig::default(),
            corrupt_lines: 0,
            corruption: CorruptionConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fractal2dFamily {
    pub sampler: IfsSamplerConfig,
    pub jitter: f64,
    pub burn_in: usize,
    pub point_budget: usize,
    pub fit: Fit,
}

impl Default for Fractal2dFamily {
    fn default() -> Self {
        Fractal2dFamily {
            sampler: IfsSamplerConfig::default(),
            jitter: 0.1,
            burn_in: DEFAULT_BURN_IN,
            point_budget: 100_000,
            fit: Fit::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExFractalFamily {
    pub sampler: IfsSamplerConfig,
    pub jitter: f64,
    pub burn_in: usize,
    pub point_budget: usize,
    pub viewpoint_mode: ViewpointMode,
    pub viewpoints: u32,
    pub fit: Fit,
}

impl Default for ExFractalFamily {
    fn default() -> Self {
        ExFractalFamily {
            sampler: IfsSamplerConfig::default(),
            jitter: 0.1,
            burn_in: DEFAULT_BURN_IN,
            point_budget: 100_000,
            viewpoint_mode: ViewpointMode::Random,
            viewpoints: 40,
            fit: Fit::default(),
        }
    }
}

impl ExFractalFamily {
    pub fn to_config(&self, image_size: u32) -> ExFractalConfig {
        ExFractalConfig {
            sampler: self.sampler,
            jitter: self.jitter,
            burn_in: self.burn_in,
            point_budget: self.point_budget,
            viewpoint_mode: self.viewpoint_mode,
            canvas_size: image_size,
            fit: self.fit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermutationRecord {
    pub seed: Seed,
    pub map: LabelPermutation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineDbFamily {
    pub stroke_px: f64,
    /// Label of class `k` is `map[k - 1]`; `None` means labels are line counts.
    pub permutation: Option<PermutationRecord>,
}

impl Default for LineDbFamily {
    fn default() -> Self {
        LineDbFamily {
            stroke_px: DEFAULT_STROKE_PX,
            permutation: None,
        }
    }
}

impl LineDbFamily {
    /// Random non-identity label map derived from the dataset's global seed.
    pub fn permuted(global_seed: u64, categories: u32) -> Self {
        let seed = derive_seed(global_seed, 0, 0, stream::PERMUTATION);
        LineDbFamily {
            stroke_px: DEFAULT_STROKE_PX,
            permutation: Some(PermutationRecord {
                seed,
                map: LabelPermutation::random(seed, categories),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "family_config", rename_all = "snake_case")]
pub enum FamilyConfig {
    Rcdb(RcdbFamily),
    Fractal2d(Fractal2dFamily),
    Exfractal3d(ExFractalFamily),
    Linedb(LineDbFamily),
}

impl FamilyConfig {
    pub fn name(&self) -> &'static str {
        match self {
            FamilyConfig::Rcdb(_) => "rcdb",
            FamilyConfig::Fractal2d(_) => "fractal2d",
            FamilyConfig::Exfractal3d(_) => "exfractal3d",
            FamilyConfig::Linedb(_) => "linedb",
        }
    }

    pub fn point_budget(&self) -> Option<usize> {
        match self {
            FamilyConfig::Fractal2d(f) => Some(f.point_budget),
            FamilyConfig::Exfractal3d(f) => Some(f.point_budget),
            _ => None,
        }
    }
}

/// What to generate. The output location is not part of the echoed spec so
/// that manifests do not depend on where a dataset was written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    #[serde(flatten)]
    pub family: FamilyConfig,
    pub class_count: u32,
    /// Seeded instances per class. For `exfractal3d` each instance yields
    /// one image per viewpoint.
    pub instances_per_class: u32,
    pub global_seed: u64,
    pub image_size: u32,
    pub encoder: ImageFormat,
    #[serde(skip)]
    pub output_root: PathBuf,
}

impl DatasetSpec {
    pub fn new(family: FamilyConfig, class_count: u32, instances_per_class: u32, global_seed: u64) -> Self {
        DatasetSpec {
            family,
            class_count,
            instances_per_class,
            global_seed,
            image_size: 512,
            encoder: ImageFormat::Png,
            output_root: PathBuf::new(),
        }
    }

    pub fn with_image_size(mut self, size: u32) -> Self {
        self.image_size = size;
        self
    }

    pub fn with_output_root(mut self, root: impl Into<PathBuf>) -> Self {
        self.output_root = root.into();
        self
    }

    /// Images written per class.
    pub fn images_per_class(&self) -> u64 {
        match &self.family {
            FamilyConfig::Exfractal3d(f) => self.instances_per_class as u64 * f.viewpoints as u64,
            _ => self.instances_per_class as u64,
        }
    }

    pub fn total_images(&self) -> u64 {
        self.class_count as u64 * self.images_per_class()
    }

    pub fn class_seed(&self, class_id: u32) -> Seed {
        derive_seed(self.global_seed, class_id as u64, CLASS_LEVEL, stream::CLASS_PARAMS)
    }

    pub fn instance_seed(&self, class_id: u32, instance: u32) -> Seed {
        derive_seed(self.global_seed, class_id as u64, instance as u64, stream::INSTANCE)
    }

    /// `<class_id>/<image_id>.<ext>`, zero-padded so lexical order is numeric.
    pub fn relative_path(&self, class_id: u32, image_id: u64) -> String {
        let cw = digits(self.class_count as u64);
        let iw = digits(self.images_per_class().saturating_sub(1));
        format!(
            "{class_id:0cw$}/{image_id:0iw$}.{}",
            self.encoder.extension()
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.class_count == 0 || self.instances_per_class == 0 {
            return Err(Error::invalid("class count and instances per class must be >= 1"));
        }
        if self.image_size == 0 {
            return Err(Error::invalid("image size must be positive"));
        }
        match &self.family {
            FamilyConfig::Rcdb(f) => {
                crate::rcdb::restrict_vertex_band(f.vertex_band.low, f.vertex_band.high)?;
            }
            FamilyConfig::Fractal2d(f) => {
                if f.point_budget == 0 {
                    return Err(Error::invalid("point budget must be positive"));
                }
            }
            FamilyConfig::Exfractal3d(f) => {
                if f.point_budget == 0 || f.viewpoints == 0 {
                    return Err(Error::invalid("point budget and viewpoints must be positive"));
                }
                if f.sampler.restricted {
                    return Err(Error::invalid("restricted sampling applies to 2D fractals only"));
                }
                if f.viewpoint_mode == ViewpointMode::Fixed && f.viewpoints as usize > FIXED_VIEWPOINTS {
                    return Err(Error::invalid(format!(
                        "fixed viewpoint mode supports at most {FIXED_VIEWPOINTS} viewpoints"
                    )));
                }
            }
            FamilyConfig::Linedb(f) => {
                if !(f.stroke_px >= 0.0) {
                    return Err(Error::invalid("stroke width must be non-negative"));
                }
                if let Some(p) = &f.permutation {
                    if p.map.len() != self.class_count as usize || !p.map.is_bijection() {
                        return Err(Error::invalid("label permutation must be a bijection on 1..=C"));
                    }
                }
            }
        }
        Ok(())
    }
}

fn digits(n: u64) -> usize {
    n.max(1).ilog10() as usize + 1
}
