//! Radial contour images: `N` nested `n`-gons grown outward from a resized
//! regular polygon, each ring displaced by per-vertex Perlin noise, drawn as
//! white strokes on black.

use nalgebra::Vector2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    perlin1d_with, rasterize_segment, stream, Canvas, PerlinConfig, Seed, BACKGROUND,
    FOREGROUND,
};

pub const POLYGONS: (u32, u32) = (1, 200);
pub const VERTICES: (u32, u32) = (3, 502);
pub const RADIUS: (f64, f64) = (0.0, 100.0);
pub const LINE_WIDTH: (f64, f64) = (0.0, 0.1);
pub const RESIZE: (f64, f64) = (1.0, 4.0);
pub const NOISE_SCALE: (f64, f64) = (0.0, 4.0);

/// Class hyperparameters of one radial contour category.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RcdbParams {
    pub num_polygons: u32,
    pub num_vertices: u32,
    pub radius: f64,
    pub line_width: f64,
    pub resize: [f64; 2],
    pub noise_scale: [f64; 2],
}

fn check_range(name: &str, v: f64, (lo, hi): (f64, f64)) -> Result<()> {
    if v.is_finite() && v >= lo && v <= hi {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} = {v} outside [{lo}, {hi}]")))
    }
}

impl RcdbParams {
    /// Checks every field against the standard sampling ranges.
    pub fn validate(&self) -> Result<()> {
        self.validate_in_band(VertexBand::full())
    }

    pub fn validate_in_band(&self, band: VertexBand) -> Result<()> {
        if !(POLYGONS.0..=POLYGONS.1).contains(&self.num_polygons) {
            return Err(Error::invalid(format!(
                "num_polygons = {} outside {{{}..{}}}",
                self.num_polygons, POLYGONS.0, POLYGONS.1
            )));
        }
        if !(band.low..=band.high).contains(&self.num_vertices) {
            return Err(Error::invalid(format!(
                "num_vertices = {} outside {{{}..{}}}",
                self.num_vertices, band.low, band.high
            )));
        }
        check_range("radius", self.radius, RADIUS)?;
        check_range("line_width", self.line_width, LINE_WIDTH)?;
        for &o in &self.resize {
            check_range("resize", o, RESIZE)?;
        }
        for &l in &self.noise_scale {
            check_range("noise_scale", l, NOISE_SCALE)?;
        }
        Ok(())
    }
}

/// One closed polygon: `n + 1` vertices with the last equal to the first.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonRing {
    vertices: Vec<Vector2<f64>>,
    index: u32,
}

impl PolygonRing {
    pub fn vertices(&self) -> &[Vector2<f64>] {
        &self.vertices
    }

    /// 1-based ring number.
    pub fn index(&self) -> u32 {
        self.index
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn is_closed(&self) -> bool {
        self.vertices.len() >= 2 && self.vertices.first() == self.vertices.last()
    }

    pub fn edges(&self) -> impl Iterator<Item = (Vector2<f64>, Vector2<f64>)> + '_ {
        self.vertices.windows(2).map(|w| (w[0], w[1]))
    }
}

/// `(cos 2πj/n, sin 2πj/n)`, reduced to the first quadrant so that
/// quarter turns are exact and the four quadrants are exact rotations of
/// each other.
pub fn unit_direction(j: usize, n: usize) -> Vector2<f64> {
    let m = (j % n) as u64;
    let n = n as u64;
    let quarter = 4 * m / n;
    let rem = 4 * m % n;
    let (c, s) = if rem == 0 {
        (1.0, 0.0)
    } else {
        let a = std::f64::consts::FRAC_PI_2 * rem as f64 / n as f64;
        (a.cos(), a.sin())
    };
    match quarter {
        0 => Vector2::new(c, s),
        1 => Vector2::new(-s, c),
        2 => Vector2::new(-c, -s),
        _ => Vector2::new(s, -c),
    }
}

/// The seed ring: a regular `n`-gon of radius `r` stretched by `o`.
pub fn first_polygon(n: u32, r: f64, o: [f64; 2]) -> Result<PolygonRing> {
    if n < 3 {
        return Err(Error::invalid(format!("a polygon needs at least 3 vertices, got {n}")));
    }
    if !(r >= 0.0 && r.is_finite()) || !o.iter().all(|v| v.is_finite()) {
        return Err(Error::invalid(format!("bad radius {r} or resize {o:?}")));
    }
    let n = n as usize;
    let mut vertices: Vec<Vector2<f64>> = (0..n)
        .map(|j| {
            let u = unit_direction(j, n);
            Vector2::new(r * o[0] * u.x, r * o[1] * u.y)
        })
        .collect();
    vertices.push(vertices[0]);
    Ok(PolygonRing { vertices, index: 1 })
}

/// Grow `prev` outward: vertex `j` moves by
/// `((l_w + λx ε_j) cos θ_j, (l_w + λy ε_j) sin θ_j)`.
///
/// `noise_column[j]` is the noise value for vertex `j`, `j = 0..n`; the
/// closing vertex reuses entry 0.
pub fn next_polygon(
    prev: &PolygonRing,
    line_width: f64,
    noise_scale: [f64; 2],
    noise_column: &[f64],
) -> Result<PolygonRing> {
    if !prev.is_closed() {
        return Err(Error::invalid("previous ring is not closed"));
    }
    let n = prev.vertex_count();
    if noise_column.len() != n {
        return Err(Error::invalid(format!(
            "noise column has {} entries for {n} vertices",
            noise_column.len()
        )));
    }
    let mut vertices: Vec<Vector2<f64>> = prev.vertices[..n]
        .iter()
        .zip(noise_column)
        .enumerate()
        .map(|(j, (v, &eps))| {
            let u = unit_direction(j, n);
            v + Vector2::new(
                (line_width + noise_scale[0] * eps) * u.x,
                (line_width + noise_scale[1] * eps) * u.y,
            )
        })
        .collect();
    vertices.push(vertices[0]);
    Ok(PolygonRing {
        vertices,
        index: prev.index + 1,
    })
}

/// Inclusive range of vertex counts a sampler may draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexBand {
    pub low: u32,
    pub high: u32,
}

impl VertexBand {
    pub fn full() -> Self {
        VertexBand {
            low: VERTICES.0,
            high: VERTICES.1,
        }
    }
}

impl Default for VertexBand {
    fn default() -> Self {
        Self::full()
    }
}

pub fn restrict_vertex_band(low: u32, high: u32) -> Result<VertexBand> {
    if low < VERTICES.0 || high > VERTICES.1 || low > high {
        return Err(Error::invalid(format!(
            "vertex band {low}..{high} must satisfy {} <= low <= high <= {}",
            VERTICES.0, VERTICES.1
        )));
    }
    Ok(VertexBand { low, high })
}

/// Draws class parameters uniformly from the standard ranges.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RcdbSampler {
    pub vertex_band: VertexBand,
}

impl RcdbSampler {
    pub fn with_band(vertex_band: VertexBand) -> Self {
        RcdbSampler { vertex_band }
    }

    pub fn sample(&self, class_seed: Seed) -> RcdbParams {
        let mut rng = class_seed.rng();
        RcdbParams {
            num_polygons: rng.random_range(POLYGONS.0..=POLYGONS.1),
            num_vertices: rng.random_range(self.vertex_band.low..=self.vertex_band.high),
            radius: rng.random_range(RADIUS.0..=RADIUS.1),
            line_width: rng.random_range(LINE_WIDTH.0..=LINE_WIDTH.1),
            resize: [
                rng.random_range(RESIZE.0..=RESIZE.1),
                rng.random_range(RESIZE.0..=RESIZE.1),
            ],
            noise_scale: [
                rng.random_range(NOISE_SCALE.0..=NOISE_SCALE.1),
                rng.random_range(NOISE_SCALE.0..=NOISE_SCALE.1),
            ],
        }
    }
}

pub fn sample_class_params(class_seed: Seed) -> RcdbParams {
    RcdbSampler::default().sample(class_seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CenterMode {
    /// Uniform over the central half of the canvas in each axis.
    Random,
    Centered,
}

/// Rendering controls that are not part of the class hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenderConfig {
    pub noise: PerlinConfig,
    /// Fraction of the canvas left free on each side when fitting the shape.
    pub margin: f64,
    pub center: CenterMode,
    pub min_stroke_px: f64,
}

impl Default for RenderConfig {
    fn default() -> Self {
        RenderConfig {
            noise: PerlinConfig {
                frequency: 1.0,
                offset: 0.5,
            },
            margin: 0.05,
            center: CenterMode::Random,
            min_stroke_px: 1.0,
        }
    }
}

/// Rings in formula units together with their placement on the canvas.
#[derive(Debug, Clone)]
pub struct RadialLayout {
    pub rings: Vec<PolygonRing>,
    /// Pixel position of the formula origin.
    pub center: Vector2<f64>,
    /// Pixels per formula unit.
    pub scale: f64,
    pub stroke_px: f64,
}

impl RadialLayout {
    #[inline]
    pub fn to_pixel(&self, v: &Vector2<f64>) -> Vector2<f64> {
        Vector2::new(self.center.x + self.scale * v.x, self.center.y - self.scale * v.y)
    }

    pub fn pixel_segments(&self) -> impl Iterator<Item = (Vector2<f64>, Vector2<f64>)> + '_ {
        self.rings
            .iter()
            .flat_map(|ring| ring.edges())
            .map(|(a, b)| (self.to_pixel(&a), self.to_pixel(&b)))
    }
}

/// Noise sequences `ε_j = (ε_{j,1}, …, ε_{j,N})`, one per vertex index.
fn noise_sequences(params: &RcdbParams, seed: Seed, config: &PerlinConfig) -> Result<Vec<Vec<f64>>> {
    (0..params.num_vertices as u64)
        .map(|j| perlin1d_with(seed.child(j, stream::NOISE), params.num_polygons as usize, config))
        .collect()
}

pub fn build_rings(params: &RcdbParams, seed: Seed, config: &PerlinConfig) -> Result<Vec<PolygonRing>> {
    if params.num_polygons == 0 {
        return Err(Error::invalid("num_polygons must be at least 1"));
    }
    let noise = noise_sequences(params, seed, config)?;
    let mut rings = Vec::with_capacity(params.num_polygons as usize);
    rings.push(first_polygon(params.num_vertices, params.radius, params.resize)?);
    let mut column = vec![0.0; params.num_vertices as usize];
    for p in 2..=params.num_polygons as usize {
        // Ring p uses ε_{j, p-1}.
        for (slot, seq) in column.iter_mut().zip(&noise) {
            *slot = seq[p - 2];
        }
        let next = next_polygon(rings.last().unwrap(), params.line_width, params.noise_scale, &column)?;
        rings.push(next);
    }
    Ok(rings)
}

pub fn layout_radial_contour(
    params: &RcdbParams,
    seed: Seed,
    canvas_size: u32,
    config: &RenderConfig,
) -> Result<RadialLayout> {
    if canvas_size == 0 {
        return Err(Error::invalid("canvas size must be positive"));
    }
    if !(0.0..0.5).contains(&config.margin) {
        return Err(Error::invalid(format!("margin {} must be in [0, 0.5)", config.margin)));
    }
    let rings = build_rings(params, seed, &config.noise)?;
    let extent = rings
        .iter()
        .flat_map(|r| r.vertices.iter())
        .fold(0.0f64, |m, v| m.max(v.x.abs()).max(v.y.abs()));
    if !extent.is_finite() {
        return Err(Error::InvalidGeometry("ring vertex is not finite".into()));
    }
    let size = canvas_size as f64;
    let scale = if extent > 0.0 {
        (0.5 - config.margin) * size / extent
    } else {
        1.0
    };
    let center = match config.center {
        CenterMode::Centered => Vector2::new(size * 0.5, size * 0.5),
        CenterMode::Random => {
            let mut rng = seed.child(0, stream::CENTER).rng();
            Vector2::new(
                rng.random_range(0.25 * size..=0.75 * size),
                rng.random_range(0.25 * size..=0.75 * size),
            )
        }
    };
    let stroke_px = (params.line_width * scale).max(config.min_stroke_px);
    Ok(RadialLayout {
        rings,
        center,
        scale,
        stroke_px,
    })
}

pub fn render_radial_contour(
    params: &RcdbParams,
    seed: Seed,
    canvas_size: u32,
    config: &RenderConfig,
) -> Result<Canvas> {
    let layout = layout_radial_contour(params, seed, canvas_size, config)?;
    let mut canvas = Canvas::square(canvas_size);
    for (a, b) in layout.pixel_segments() {
        rasterize_segment(&mut canvas, a, b, layout.stroke_px, FOREGROUND)?;
    }
    if canvas.foreground_count() == 0 {
        return Err(Error::DegenerateImage);
    }
    Ok(canvas)
}

/// One radial contour image with the default rendering configuration.
pub fn generate_radial_contour(params: &RcdbParams, seed: Seed, canvas_size: u32) -> Result<Canvas> {
    render_radial_contour(params, seed, canvas_size, &RenderConfig::default())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum WidthPolicy {
    Fixed { px: f64 },
    Uniform { min_px: f64, max_px: f64 },
}

impl Default for WidthPolicy {
    fn default() -> Self {
        WidthPolicy::Fixed { px: 2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorruptionConfig {
    pub width: WidthPolicy,
    /// Longest erasing stroke as a fraction of the shorter canvas side.
    pub max_length_fraction: f64,
}

impl Default for CorruptionConfig {
    fn default() -> Self {
        CorruptionConfig {
            width: WidthPolicy::default(),
            max_length_fraction: 0.125,
        }
    }
}

/// Erase `line_count` background-colored strokes with random midpoint,
/// angle, and length.
pub fn corrupt_contours(
    canvas: &Canvas,
    seed: Seed,
    line_count: usize,
    config: &CorruptionConfig,
) -> Result<Canvas> {
    let mut out = canvas.clone();
    if line_count == 0 {
        return Ok(out);
    }
    match config.width {
        WidthPolicy::Fixed { px } if px >= 0.0 => {}
        WidthPolicy::Uniform { min_px, max_px } if 0.0 <= min_px && min_px <= max_px => {}
        w => return Err(Error::invalid(format!("bad corruption width policy {w:?}"))),
    }
    let (w, h) = (canvas.width() as f64, canvas.height() as f64);
    let max_len = config.max_length_fraction.max(0.0) * w.min(h);
    let mut rng = seed.rng();
    for _ in 0..line_count {
        let mid = Vector2::new(rng.random_range(0.0..w), rng.random_range(0.0..h));
        let angle: f64 = rng.random_range(0.0..std::f64::consts::PI);
        let len = rng.random_range(0.0..=max_len);
        let stroke = match config.width {
            WidthPolicy::Fixed { px } => px,
            WidthPolicy::Uniform { min_px, max_px } => rng.random_range(min_px..=max_px),
        };
        let half = Vector2::new(angle.cos(), angle.sin()) * (len * 0.5);
        rasterize_segment(&mut out, mid - half, mid + half, stroke, BACKGROUND)?;
    }
    Ok(out)
}
