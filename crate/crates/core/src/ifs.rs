//! Iterated function systems: class sampling, chaos-game iteration, point
//! rendering and the multi-viewpoint 3D variant.

use nalgebra::{Matrix3, Vector2, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    sample_unit_sphere, stream, CameraPose, Canvas, Fit, Framing, Seed, FOREGROUND,
};

/// `x ↦ A x + t`. Two-dimensional maps keep the third row, column and
/// translation component at zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub linear: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl AffineMap {
    pub fn new_2d(a: f64, b: f64, c: f64, d: f64, e: f64, f: f64) -> Self {
        AffineMap {
            linear: Matrix3::new(a, b, 0.0, c, d, 0.0, 0.0, 0.0, 0.0),
            translation: Vector3::new(e, f, 0.0),
        }
    }

    /// Uniform scaling by `s` followed by translation `t`.
    pub fn scaled(dimension: usize, s: f64, t: Vector3<f64>) -> Self {
        let mut linear = Matrix3::identity() * s;
        let mut translation = t;
        if dimension == 2 {
            linear[(2, 2)] = 0.0;
            translation.z = 0.0;
        }
        AffineMap {
            linear,
            translation,
        }
    }

    #[inline]
    pub fn apply(&self, x: &Vector3<f64>) -> Vector3<f64> {
        self.linear * x + self.translation
    }

    /// Largest singular value of the linear part.
    pub fn operator_norm(&self) -> f64 {
        self.linear.singular_values().max()
    }

    pub fn determinant(&self, dimension: usize) -> f64 {
        if dimension == 2 {
            self.linear.fixed_view::<2, 2>(0, 0).determinant()
        } else {
            self.linear.determinant()
        }
    }

    /// Free coefficients: `(a, b, c, d, e, f)` in 2D with
    /// `w(x, y) = (a x + b y + e, c x + d y + f)`; in 3D the nine linear
    /// entries row-major followed by the three translation entries.
    pub fn coefficients(&self, dimension: usize) -> Vec<f64> {
        let m = &self.linear;
        let t = &self.translation;
        if dimension == 2 {
            vec![m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)], t.x, t.y]
        } else {
            let mut out: Vec<f64> = (0..3)
                .flat_map(|r| (0..3).map(move |c| (r, c)))
                .map(|(r, c)| m[(r, c)])
                .collect();
            out.extend_from_slice(t.as_slice());
            out
        }
    }

    pub fn from_coefficients(dimension: usize, coeffs: &[f64]) -> Result<Self> {
        check_dimension(dimension)?;
        let want = free_coefficients(dimension);
        if coeffs.len() != want {
            return Err(Error::invalid(format!(
                "{dimension}D affine map needs {want} coefficients, got {}",
                coeffs.len()
            )));
        }
        if !coeffs.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("affine coefficients must be finite"));
        }
        Ok(if dimension == 2 {
            let c = coeffs;
            AffineMap::new_2d(c[0], c[1], c[2], c[3], c[4], c[5])
        } else {
            AffineMap {
                linear: Matrix3::from_row_slice(&coeffs[..9]),
                translation: Vector3::from_column_slice(&coeffs[9..]),
            }
        })
    }
}

/// Coefficients per map: 6 in 2D, 12 in 3D.
pub fn free_coefficients(dimension: usize) -> usize {
    dimension * dimension + dimension
}

fn check_dimension(dimension: usize) -> Result<()> {
    if dimension == 2 || dimension == 3 {
        Ok(())
    } else {
        Err(Error::invalid(format!("IFS dimension must be 2 or 3, got {dimension}")))
    }
}

/// Affine maps with selection probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct IfsSystem {
    dimension: usize,
    maps: Vec<AffineMap>,
    probabilities: Vec<f64>,
}

impl IfsSystem {
    pub fn new(dimension: usize, maps: Vec<AffineMap>, probabilities: Vec<f64>) -> Result<Self> {
        check_dimension(dimension)?;
        if maps.is_empty() {
            return Err(Error::invalid("an IFS needs at least one map"));
        }
        if maps.len() != probabilities.len() {
            return Err(Error::invalid(format!(
                "{} maps but {} probabilities",
                maps.len(),
                probabilities.len()
            )));
        }
        for m in &maps {
            let finite = m.linear.iter().chain(m.translation.iter()).all(|v| v.is_finite());
            if !finite {
                return Err(Error::invalid("affine coefficients must be finite"));
            }
            if dimension == 2
                && (m.linear.row(2).iter().any(|&v| v != 0.0)
                    || m.linear.column(2).iter().any(|&v| v != 0.0)
                    || m.translation.z != 0.0)
            {
                return Err(Error::invalid("2D map has a non-zero third component"));
            }
        }
        if !probabilities.iter().all(|&p| p > 0.0 && p.is_finite()) {
            return Err(Error::invalid("probabilities must be positive"));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("probabilities sum to {total}, not 1")));
        }
        Ok(IfsSystem {
            dimension,
            maps,
            probabilities,
        })
    }

    /// Probabilities proportional to `max(|det A_i|, floor)`.
    pub fn with_determinant_weights(dimension: usize, maps: Vec<AffineMap>, floor: f64) -> Result<Self> {
        let weights: Vec<f64> = maps
            .iter()
            .map(|m| m.determinant(dimension).abs().max(floor))
            .collect();
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::invalid("all map weights are zero"));
        }
        let probabilities = weights.iter().map(|w| w / total).collect();
        Self::new(dimension, maps, probabilities)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn maps(&self) -> &[AffineMap] {
        &self.maps
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// `Σ p_i ‖A_i‖`.
    pub fn weighted_contractivity(&self) -> f64 {
        self.maps
            .iter()
            .zip(&self.probabilities)
            .map(|(m, p)| p * m.operator_norm())
            .sum()
    }

    pub fn max_operator_norm(&self) -> f64 {
        self.maps.iter().map(AffineMap::operator_norm).fold(0.0, f64::max)
    }

    /// Radius of a ball around the origin that contains the attractor and
    /// every chaos-game iterate started at the origin:
    /// `max ‖t_i‖ / (1 - max ‖A_i‖)`. `None` unless every map contracts.
    pub fn attractor_radius_bound(&self) -> Option<f64> {
        let s = self.max_operator_norm();
        if s >= 1.0 {
            return None;
        }
        let t = self
            .maps
            .iter()
            .map(|m| m.translation.norm())
            .fold(0.0, f64::max);
        Some(t / (1.0 - s))
    }
}

/// Accept a sampled system iff every map is a strict contraction and the
/// probability-weighted mean operator norm lies in `[low, high)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceWindow {
    pub low: f64,
    pub high: f64,
}

impl Default for AcceptanceWindow {
    fn default() -> Self {
        AcceptanceWindow { low: 0.5, high: 1.0 }
    }
}

impl AcceptanceWindow {
    pub fn accepts(&self, system: &IfsSystem) -> bool {
        if system.max_operator_norm() >= 1.0 {
            return false;
        }
        let c = system.weighted_contractivity();
        c >= self.low && c < self.high
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapCount {
    pub min: usize,
    pub max: usize,
}

impl Default for MapCount {
    fn default() -> Self {
        MapCount { min: 2, max: 8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IfsSamplerConfig {
    pub map_count: MapCount,
    pub acceptance: AcceptanceWindow,
    pub probability_floor: f64,
    pub max_attempts: usize,
    /// Vary only `(a, c, e)` per class; `(b, d, f)` of map `i` come from
    /// [`restricted_base`] with this seed. 2D only.
    pub restricted: bool,
    pub restricted_base_seed: u64,
}

impl Default for IfsSamplerConfig {
    fn default() -> Self {
        IfsSamplerConfig {
            map_count: MapCount::default(),
            acceptance: AcceptanceWindow::default(),
            probability_floor: 0.01,
            max_attempts: 1000,
            restricted: false,
            restricted_base_seed: 0x0B5E_ED5E_ED5E_ED00,
        }
    }
}

/// Fixed `(b_i, d_i, f_i)` shared by every restricted class. Drawn from
/// `[-0.5, 0.5]` so that `‖(b, d)‖ < 1` and contracting `(a, c)` exist.
pub fn restricted_base(base_seed: u64, map_index: usize) -> [f64; 3] {
    let mut rng = Seed(base_seed).child(map_index as u64, stream::CLASS_PARAMS).rng();
    [
        rng.random_range(-0.5..=0.5),
        rng.random_range(-0.5..=0.5),
        rng.random_range(-0.5..=0.5),
    ]
}

fn sample_map<R: Rng>(
    rng: &mut R,
    dimension: usize,
    index: usize,
    config: &IfsSamplerConfig,
) -> Result<AffineMap> {
    for _ in 0..config.max_attempts {
        let map = if config.restricted {
            let [b, d, f] = restricted_base(config.restricted_base_seed, index);
            let a = rng.random_range(-1.0..=1.0);
            let c = rng.random_range(-1.0..=1.0);
            let e = rng.random_range(-1.0..=1.0);
            AffineMap::new_2d(a, b, c, d, e, f)
        } else {
            let coeffs: Vec<f64> = (0..free_coefficients(dimension))
                .map(|_| rng.random_range(-1.0..=1.0))
                .collect();
            AffineMap::from_coefficients(dimension, &coeffs)?
        };
        if map.operator_norm() < 1.0 {
            return Ok(map);
        }
    }
    Err(Error::ClassGenerationFailure {
        attempts: config.max_attempts,
        reason: format!("no contracting draw for map {index}"),
    })
}

/// Sample one fractal class: coefficients uniform in `[-1, 1]`, rejection
/// until the acceptance window passes.
pub fn sample_ifs_system(class_seed: Seed, dimension: usize, config: &IfsSamplerConfig) -> Result<IfsSystem> {
    check_dimension(dimension)?;
    let MapCount { min, max } = config.map_count;
    if min == 0 || min > max {
        return Err(Error::invalid(format!("bad map count range {min}..{max}")));
    }
    if config.restricted && dimension != 2 {
        return Err(Error::invalid("restricted sampling is defined for 2D systems only"));
    }
    let mut rng = class_seed.rng();
    for _ in 0..config.max_attempts {
        let count = rng.random_range(min..=max);
        let maps = (0..count)
            .map(|i| sample_map(&mut rng, dimension, i, config))
            .collect::<Result<Vec<_>>>()?;
        let system = IfsSystem::with_determinant_weights(dimension, maps, config.probability_floor)?;
        if config.acceptance.accepts(&system) {
            return Ok(system);
        }
    }
    Err(Error::ClassGenerationFailure {
        attempts: config.max_attempts,
        reason: format!(
            "weighted contractivity never fell in [{}, {})",
            config.acceptance.low, config.acceptance.high
        ),
    })
}

/// Intra-class variant: every free coefficient scaled by `1 + u`,
/// `u ~ U[-amplitude, amplitude]`, redrawn until `acceptance` passes.
/// Restricted systems keep their fixed `(b, d, f)`.
pub fn jitter_system(
    base: &IfsSystem,
    seed: Seed,
    amplitude: f64,
    config: &IfsSamplerConfig,
) -> Result<IfsSystem> {
    if amplitude == 0.0 {
        return Ok(base.clone());
    }
    let dim = base.dimension;
    let mut rng = seed.rng();
    for _ in 0..config.max_attempts {
        let maps = base
            .maps
            .iter()
            .map(|m| {
                let mut coeffs = m.coefficients(dim);
                for (k, c) in coeffs.iter_mut().enumerate() {
                    // Restricted 2D layout (a, b, c, d, e, f): only even slots vary.
                    if config.restricted && k % 2 == 1 {
                        continue;
                    }
                    *c *= 1.0 + rng.random_range(-amplitude..=amplitude);
                }
                AffineMap::from_coefficients(dim, &coeffs)
            })
            .collect::<Result<Vec<_>>>()?;
        let system = IfsSystem::with_determinant_weights(dim, maps, config.probability_floor)?;
        if config.acceptance.accepts(&system) {
            return Ok(system);
        }
    }
    Err(Error::ClassGenerationFailure {
        attempts: config.max_attempts,
        reason: "no jittered variant passed the acceptance window".into(),
    })
}

/// Chaos-game samples. 2D clouds have `z = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub dimension: usize,
    pub points: Vec<Vector3<f64>>,
    pub burn_in: usize,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn planar(&self) -> impl Iterator<Item = Vector2<f64>> + '_ {
        self.points.iter().map(|p| p.xy())
    }
}

pub const DEFAULT_BURN_IN: usize = 20;

pub fn chaos_game(system: &IfsSystem, budget: usize, seed: Seed) -> Result<PointCloud> {
    chaos_game_with(system, budget, seed, DEFAULT_BURN_IN)
}

/// Random iteration from the origin; the first `burn_in` iterates are
/// discarded and the next `budget` kept.
pub fn chaos_game_with(
    system: &IfsSystem,
    budget: usize,
    seed: Seed,
    burn_in: usize,
) -> Result<PointCloud> {
    if budget == 0 {
        return Err(Error::EmptyRequest("chaos game with a zero point budget"));
    }
    let mut cumulative: Vec<f64> = system
        .probabilities
        .iter()
        .scan(0.0, |acc, p| {
            *acc += p;
            Some(*acc)
        })
        .collect();
    *cumulative.last_mut().unwrap() = f64::INFINITY;

    let mut rng = seed.rng();
    let mut x = Vector3::zeros();
    let mut points = Vec::with_capacity(budget);
    for iteration in 0..burn_in + budget {
        let u: f64 = rng.random();
        let i = cumulative.iter().position(|&c| u < c).unwrap();
        x = system.maps[i].apply(&x);
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::DivergentSystem { iteration });
        }
        if iteration >= burn_in {
            points.push(x);
        }
    }
    Ok(PointCloud {
        dimension: system.dimension,
        points,
        burn_in,
    })
}

fn splat(canvas: &mut Canvas, p: &Vector2<f64>) {
    let (x, y) = (p.x.floor(), p.y.floor());
    if x >= 0.0 && y >= 0.0 && x < canvas.width() as f64 && y < canvas.height() as f64 {
        canvas.set(x as u32, y as u32, FOREGROUND);
    }
}

/// Fit the whole planar cloud to the canvas, then mark the pixel under each
/// of the first `point_budget` points. Framing does not depend on the budget,
/// so larger budgets only add pixels.
pub fn render_points(cloud: &PointCloud, canvas_size: u32, point_budget: usize) -> Result<Canvas> {
    render_points_with(cloud, canvas_size, point_budget, Fit::default())
}

pub fn render_points_with(
    cloud: &PointCloud,
    canvas_size: u32,
    point_budget: usize,
    fit: Fit,
) -> Result<Canvas> {
    if point_budget > cloud.len() {
        return Err(Error::invalid(format!(
            "point budget {point_budget} exceeds cloud size {}",
            cloud.len()
        )));
    }
    let mut canvas = Canvas::square(canvas_size);
    if point_budget == 0 {
        return Ok(canvas);
    }
    let planar: Vec<Vector2<f64>> = cloud.planar().collect();
    let framing = Framing::fit(&planar, canvas_size, canvas_size, fit)?;
    for p in &planar[..point_budget] {
        splat(&mut canvas, &framing.apply(p));
    }
    Ok(canvas)
}

/// Orthographic projection from `pose`, framed and splatted (no depth test).
pub fn render_projected(cloud: &PointCloud, pose: &CameraPose, canvas_size: u32, fit: Fit) -> Result<Canvas> {
    if cloud.is_empty() {
        return Err(Error::EmptyRequest("rendering an empty cloud"));
    }
    let frame = pose.frame();
    let planar: Vec<Vector2<f64>> = cloud
        .points
        .iter()
        .map(|p| CameraPose::plane_coords(&frame, p))
        .collect();
    let framing = Framing::fit(&planar, canvas_size, canvas_size, fit)?;
    let mut canvas = Canvas::square(canvas_size);
    for p in &planar {
        splat(&mut canvas, &framing.apply(p));
    }
    Ok(canvas)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViewpointMode {
    Random,
    Fixed,
}

pub const FIXED_VIEWPOINTS: usize = 12;

/// The 12 vertices of an icosahedron, `(0, ±1, ±φ)`, `(±1, ±φ, 0)`,
/// `(±φ, 0, ±1)` in that order, normalized.
pub fn icosahedron_poses() -> Vec<CameraPose> {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut out = Vec::with_capacity(FIXED_VIEWPOINTS);
    for (s1, s2) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
        out.push(Vector3::new(0.0, s1, s2 * phi));
    }
    for (s1, s2) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
        out.push(Vector3::new(s1, s2 * phi, 0.0));
    }
    for (s1, s2) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
        out.push(Vector3::new(s1 * phi, 0.0, s2));
    }
    out.into_iter()
        .map(|p| CameraPose::looking_at_origin(p).expect("icosahedron vertex is nonzero"))
        .collect()
}

pub fn viewpoints_for_instance(mode: ViewpointMode, count: usize, seed: Seed) -> Result<Vec<CameraPose>> {
    if count == 0 {
        return Err(Error::invalid("at least one viewpoint is required"));
    }
    match mode {
        ViewpointMode::Random => Ok(sample_unit_sphere(seed, count)),
        ViewpointMode::Fixed if count <= FIXED_VIEWPOINTS => {
            Ok(icosahedron_poses().into_iter().take(count).collect())
        }
        ViewpointMode::Fixed => Err(Error::invalid(format!(
            "fixed grid has {FIXED_VIEWPOINTS} viewpoints, {count} requested"
        ))),
    }
}

/// Everything needed to turn a 3D class system into images.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExFractalConfig {
    pub sampler: IfsSamplerConfig,
    pub jitter: f64,
    pub burn_in: usize,
    pub point_budget: usize,
    pub viewpoint_mode: ViewpointMode,
    pub canvas_size: u32,
    pub fit: Fit,
}

impl Default for ExFractalConfig {
    fn default() -> Self {
        ExFractalConfig {
            sampler: IfsSamplerConfig::default(),
            jitter: 0.1,
            burn_in: DEFAULT_BURN_IN,
            point_budget: 100_000,
            viewpoint_mode: ViewpointMode::Random,
            canvas_size: 512,
            fit: Fit::default(),
        }
    }
}

/// One seeded 3D instance of a class seen from `viewpoints` cameras.
/// `instance` is only used to label errors.
pub fn render_exfractal_instance(
    base: &IfsSystem,
    config: &ExFractalConfig,
    instance_seed: Seed,
    instance: usize,
    viewpoints: usize,
) -> Result<Vec<Canvas>> {
    let in_view = |viewpoint: Option<usize>| {
        move |e: Error| Error::InView {
            instance,
            viewpoint,
            source: Box::new(e),
        }
    };
    let system = jitter_system(base, instance_seed.child(0, stream::JITTER), config.jitter, &config.sampler)
        .map_err(in_view(None))?;
    let cloud = chaos_game_with(
        &system,
        config.point_budget,
        instance_seed.child(0, stream::CHAOS),
        config.burn_in,
    )
    .map_err(in_view(None))?;
    let poses = viewpoints_for_instance(
        config.viewpoint_mode,
        viewpoints,
        instance_seed.child(0, stream::VIEWPOINTS),
    )?;
    poses
        .iter()
        .enumerate()
        .map(|(v, pose)| {
            render_projected(&cloud, pose, config.canvas_size, config.fit).map_err(in_view(Some(v)))
        })
        .collect()
}

/// `instances × viewpoints` images for one class, instance-major.
pub fn generate_exfractal_class(
    config: &ExFractalConfig,
    class_seed: Seed,
    instances: usize,
    viewpoints: usize,
) -> Result<Vec<Canvas>> {
    if instances == 0 || viewpoints == 0 {
        return Err(Error::invalid("instances and viewpoints must be at least 1"));
    }
    let base = sample_ifs_system(class_seed, 3, &config.sampler)?;
    let mut images = Vec::with_capacity(instances * viewpoints);
    for k in 0..instances {
        let seed = class_seed.child(k as u64, stream::INSTANCE);
        images.extend(render_exfractal_instance(&base, config, seed, k, viewpoints)?);
    }
    Ok(images)
}
