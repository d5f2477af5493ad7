//! Line-counting images: category `k` holds images with exactly `k` random
//! white strokes. An optional fixed label permutation is recorded alongside.

use nalgebra::Vector2;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{derive_seed, rasterize_segment, stream, Canvas, Seed, FOREGROUND};

/// Category counts used for the LineDB scaling sweep.
pub const STANDARD_CATEGORY_COUNTS: [u32; 7] = [16, 32, 64, 128, 256, 512, 1000];

pub const DEFAULT_STROKE_PX: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineDbSpec {
    pub category_count: u32,
    pub images_per_category: u32,
    pub permute_labels: bool,
    pub permutation_seed: Seed,
}

impl LineDbSpec {
    /// A spec using one of [`STANDARD_CATEGORY_COUNTS`].
    pub fn standard(category_count: u32, images_per_category: u32) -> Result<Self> {
        if !STANDARD_CATEGORY_COUNTS.contains(&category_count) {
            return Err(Error::invalid(format!(
                "{category_count} is not one of {STANDARD_CATEGORY_COUNTS:?}"
            )));
        }
        Ok(LineDbSpec {
            category_count,
            images_per_category,
            permute_labels: false,
            permutation_seed: Seed(0),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.category_count == 0 || self.images_per_category == 0 {
            return Err(Error::invalid("category_count and images_per_category must be >= 1"));
        }
        Ok(())
    }
}

/// `map[k - 1]` is the label given to category `k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LabelPermutation {
    map: Vec<u32>,
}

impl LabelPermutation {
    pub fn identity(categories: u32) -> Self {
        LabelPermutation {
            map: (1..=categories).collect(),
        }
    }

    /// Uniform over non-identity permutations when `categories >= 2`.
    pub fn random(seed: Seed, categories: u32) -> Self {
        let mut rng = seed.rng();
        let mut map: Vec<u32> = (1..=categories).collect();
        loop {
            map.shuffle(&mut rng);
            if categories < 2 || map.iter().zip(1..).any(|(&m, k)| m != k) {
                return LabelPermutation { map };
            }
        }
    }

    pub fn from_map(map: Vec<u32>) -> Result<Self> {
        let p = LabelPermutation { map };
        if !p.is_bijection() {
            return Err(Error::invalid("label map is not a permutation of 1..=C"));
        }
        Ok(p)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.map
    }

    pub fn apply(&self, category: u32) -> u32 {
        self.map[category as usize - 1]
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().zip(1..).all(|(&m, k)| m == k)
    }

    pub fn is_bijection(&self) -> bool {
        let mut sorted = self.map.clone();
        sorted.sort_unstable();
        sorted.iter().zip(1..).all(|(&m, k)| m == k)
    }
}

/// Endpoints uniform over the canvas.
pub fn line_segments(line_count: usize, seed: Seed, canvas_size: u32) -> Vec<(Vector2<f64>, Vector2<f64>)> {
    let size = canvas_size as f64;
    let mut rng = seed.child(0, stream::LINES).rng();
    let mut point = move || Vector2::new(rng.random_range(0.0..size), rng.random_range(0.0..size));
    (0..line_count).map(|_| (point(), point())).collect()
}

/// Draws the segments and returns the canvas together with the number of
/// strokes issued.
pub fn draw_lines(
    segments: &[(Vector2<f64>, Vector2<f64>)],
    canvas_size: u32,
    stroke_px: f64,
) -> Result<(Canvas, usize)> {
    let mut canvas = Canvas::square(canvas_size);
    let mut strokes = 0;
    for (p, q) in segments {
        rasterize_segment(&mut canvas, *p, *q, stroke_px, FOREGROUND)?;
        strokes += 1;
    }
    Ok((canvas, strokes))
}

pub fn generate_line_image(line_count: usize, seed: Seed, canvas_size: u32) -> Result<Canvas> {
    generate_line_image_with(line_count, seed, canvas_size, DEFAULT_STROKE_PX)
}

pub fn generate_line_image_with(line_count: usize, seed: Seed, canvas_size: u32, stroke_px: f64) -> Result<Canvas> {
    draw_lines(&line_segments(line_count, seed, canvas_size), canvas_size, stroke_px).map(|(c, _)| c)
}

#[derive(Debug, Clone)]
pub struct LabeledImage {
    /// Number of lines drawn, which is also the category id.
    pub category: u32,
    pub label: u32,
    pub instance: u32,
    pub seed: Seed,
    pub canvas: Canvas,
}

#[derive(Debug, Clone)]
pub struct LineDataset {
    pub images: Vec<LabeledImage>,
    pub permutation: Option<LabelPermutation>,
}

/// Seed of image `instance` of `category`, shared with on-disk builds.
pub fn image_seed(global_seed: Seed, category: u32, instance: u32) -> Seed {
    derive_seed(global_seed.value(), category as u64, instance as u64, stream::INSTANCE)
}

pub fn build_linedb(spec: &LineDbSpec, global_seed: Seed, canvas_size: u32) -> Result<LineDataset> {
    spec.validate()?;
    let permutation = spec
        .permute_labels
        .then(|| LabelPermutation::random(spec.permutation_seed, spec.category_count));
    let mut images = Vec::with_capacity((spec.category_count * spec.images_per_category) as usize);
    for category in 1..=spec.category_count {
        let label = permutation.as_ref().map_or(category, |p| p.apply(category));
        for instance in 0..spec.images_per_category {
            let seed = image_seed(global_seed, category, instance);
            images.push(LabeledImage {
                category,
                label,
                instance,
                seed,
                canvas: generate_line_image(category as usize, seed, canvas_size)?,
            });
        }
    }
    Ok(LineDataset { images, permutation })
}
