use nalgebra::{Vector2, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::canvas::Canvas;
use super::seed::Seed;
use crate::error::{Error, Result};

const DEFAULT_UP: Vector3<f64> = Vector3::new(0.0, 0.0, 1.0);
const FALLBACK_UP: Vector3<f64> = Vector3::new(0.0, 1.0, 0.0);

/// A camera on the unit sphere looking at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraPose {
    position: Vector3<f64>,
    up_hint: Vector3<f64>,
}

/// Orthonormal camera basis. `forward` points from the camera to the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraFrame {
    pub right: Vector3<f64>,
    pub up: Vector3<f64>,
    pub forward: Vector3<f64>,
}

impl CameraPose {
    /// Normalizes `position` onto the unit sphere; the up hint is +z.
    pub fn looking_at_origin(position: Vector3<f64>) -> Result<Self> {
        Self::with_up_hint(position, DEFAULT_UP)
    }

    pub fn with_up_hint(position: Vector3<f64>, up_hint: Vector3<f64>) -> Result<Self> {
        let norm = position.norm();
        if !(norm.is_finite() && norm > 0.0) || !up_hint.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidGeometry(format!(
                "camera position {position:?} cannot be normalized"
            )));
        }
        Ok(CameraPose {
            position: position / norm,
            up_hint,
        })
    }

    pub fn position(&self) -> Vector3<f64> {
        self.position
    }

    pub fn up_hint(&self) -> Vector3<f64> {
        self.up_hint
    }

    pub fn frame(&self) -> CameraFrame {
        let forward = -self.position;
        let mut right = forward.cross(&self.up_hint);
        if right.norm() < 1e-6 {
            right = forward.cross(&FALLBACK_UP);
        }
        let right = right.normalize();
        let up = right.cross(&forward);
        CameraFrame { right, up, forward }
    }

    /// Coordinates of `point` in the camera's (right, up) image plane.
    #[inline]
    pub fn plane_coords(frame: &CameraFrame, point: &Vector3<f64>) -> Vector2<f64> {
        Vector2::new(frame.right.dot(point), frame.up.dot(point))
    }
}

/// Uniform positions on S² from the cylindrical equal-area map:
/// `z ~ U[-1, 1]`, `phi ~ U[0, 2pi)`.
pub fn sample_unit_sphere(seed: Seed, count: usize) -> Vec<CameraPose> {
    let mut rng = seed.rng();
    (0..count)
        .map(|_| {
            let z: f64 = rng.random_range(-1.0..=1.0);
            let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let rho = (1.0 - z * z).max(0.0).sqrt();
            let p = Vector3::new(rho * phi.cos(), rho * phi.sin(), z);
            CameraPose {
                position: p / p.norm(),
                up_hint: DEFAULT_UP,
            }
        })
        .collect()
}

/// Fraction of the shorter canvas side the framed bounding square occupies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub fraction: f64,
}

impl Default for Fit {
    fn default() -> Self {
        Fit { fraction: 0.9 }
    }
}

/// Similarity transform from a point set's plane into canvas pixels.
/// The canvas y axis points down, so plane `up` maps to decreasing rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Framing {
    scale: f64,
    source_center: Vector2<f64>,
    canvas_center: Vector2<f64>,
}

impl Framing {
    pub fn fit<'a, I>(points: I, width: u32, height: u32, fit: Fit) -> Result<Self>
    where
        I: IntoIterator<Item = &'a Vector2<f64>>,
    {
        let mut lo = Vector2::repeat(f64::INFINITY);
        let mut hi = Vector2::repeat(f64::NEG_INFINITY);
        let mut any = false;
        for p in points {
            lo = lo.inf(p);
            hi = hi.sup(p);
            any = true;
        }
        if !any {
            return Err(Error::EmptyRequest("framing an empty point set"));
        }
        if !(fit.fraction > 0.0 && fit.fraction <= 1.0) {
            return Err(Error::invalid(format!(
                "fit fraction must be in (0, 1], got {}",
                fit.fraction
            )));
        }
        let side = (hi - lo).max();
        if !side.is_finite() {
            return Err(Error::InvalidGeometry("non-finite point in cloud".into()));
        }
        if side <= f64::MIN_POSITIVE {
            return Err(Error::DegenerateCloud);
        }
        let target = fit.fraction * width.min(height) as f64;
        Ok(Framing {
            scale: target / side,
            source_center: (lo + hi) * 0.5,
            canvas_center: Vector2::new(width as f64 * 0.5, height as f64 * 0.5),
        })
    }

    #[inline]
    pub fn apply(&self, p: &Vector2<f64>) -> Vector2<f64> {
        let d = (p - self.source_center) * self.scale;
        Vector2::new(self.canvas_center.x + d.x, self.canvas_center.y - d.y)
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }
}

/// Orthographic projection of `points` onto the camera plane, framed onto
/// `canvas` so the bounding square fills `fit` of the shorter side.
pub fn project_orthographic(
    pose: &CameraPose,
    points: &[Vector3<f64>],
    canvas: &Canvas,
    fit: Fit,
) -> Result<Vec<Vector2<f64>>> {
    if points.is_empty() {
        return Err(Error::EmptyRequest("projecting an empty point set"));
    }
    let frame = pose.frame();
    let planar: Vec<Vector2<f64>> = points
        .iter()
        .map(|p| CameraPose::plane_coords(&frame, p))
        .collect();
    let framing = Framing::fit(&planar, canvas.width(), canvas.height(), fit)?;
    Ok(planar.iter().map(|p| framing.apply(p)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn assert_orthonormal(f: &CameraFrame) {
        for (a, b) in [(f.right, f.up), (f.up, f.forward), (f.right, f.forward)] {
            assert!(a.dot(&b).abs() < 1e-9);
        }
        for v in [f.right, f.up, f.forward] {
            assert!((v.norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn sphere_samples_are_unit_and_reproducible() {
        let a = sample_unit_sphere(Seed(4), 500);
        let b = sample_unit_sphere(Seed(4), 500);
        assert_eq!(a, b);
        for pose in &a {
            assert!((pose.position().norm() - 1.0).abs() < 1e-9);
            assert_orthonormal(&pose.frame());
        }
    }

    #[test]
    fn sphere_mean_is_near_origin() {
        let poses = sample_unit_sphere(Seed(2024), 100_000);
        let mean = poses
            .iter()
            .fold(Vector3::zeros(), |acc, p| acc + p.position())
            / poses.len() as f64;
        assert!(mean.iter().all(|c| c.abs() < 0.02), "{mean:?}");
    }

    #[test]
    fn sphere_is_equal_area() {
        // Archimedes: |z| < 0.5 covers half the sphere; so does each hemisphere.
        let poses = sample_unit_sphere(Seed(3), 50_000);
        let band = poses.iter().filter(|p| p.position().z.abs() < 0.5).count() as f64;
        let east = poses.iter().filter(|p| p.position().x > 0.0).count() as f64;
        assert!((band / 50_000.0 - 0.5).abs() < 0.01);
        assert!((east / 50_000.0 - 0.5).abs() < 0.01);
    }

    #[test]
    fn pole_pose_uses_fallback_up() {
        let pose = CameraPose::looking_at_origin(Vector3::new(0.0, 0.0, 1.0)).unwrap();
        let f = pose.frame();
        assert_orthonormal(&f);
        assert!((f.right - Vector3::new(1.0, 0.0, 0.0)).norm() < 1e-15);
        assert!((f.up - Vector3::new(0.0, 1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn axis_aligned_projection_is_affine_in_xy() {
        let pose = CameraPose::looking_at_origin(Vector3::new(0.0, 0.0, 1.0)).unwrap();
        let pts = vec![
            Vector3::new(0.0, 0.0, 0.0),
            Vector3::new(1.0, 0.0, 0.0),
            Vector3::new(0.0, 2.0, 0.0),
            Vector3::new(0.3, 0.7, 0.0),
        ];
        let canvas = Canvas::square(100);
        let out = project_orthographic(&pose, &pts, &canvas, Fit::default()).unwrap();
        // Bounding square side 2 → scale 45 px per unit; y is flipped.
        let s = 45.0;
        for (p, o) in pts.iter().zip(&out) {
            let expected = Vector2::new(50.0 + (p.x - 0.5) * s, 50.0 - (p.y - 1.0) * s);
            assert!((o - expected).norm() < 1e-9, "{o:?} vs {expected:?}");
        }
    }

    #[test]
    fn cube_corners_collapse_pairwise() {
        let pose = CameraPose::looking_at_origin(Vector3::new(0.0, 0.0, 1.0)).unwrap();
        let mut corners = Vec::new();
        for x in [-1.0, 1.0] {
            for y in [-1.0, 1.0] {
                for z in [-1.0, 1.0] {
                    corners.push(Vector3::new(x, y, z));
                }
            }
        }
        let out = project_orthographic(&pose, &corners, &Canvas::square(64), Fit::default())
            .unwrap();
        let mut distinct: Vec<Vector2<f64>> = Vec::new();
        for p in out {
            if !distinct.iter().any(|d| (d - p).norm() < 1e-9) {
                distinct.push(p);
            }
        }
        assert_eq!(distinct.len(), 4);
    }

    #[test]
    fn random_cloud_fills_fit_fraction() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let pts: Vec<Vector3<f64>> = (0..2000)
            .map(|_| {
                Vector3::new(
                    rng.random_range(-3.0..2.0),
                    rng.random_range(-1.0..5.0),
                    rng.random_range(0.0..1.0),
                )
            })
            .collect();
        for pose in sample_unit_sphere(Seed(1), 10) {
            let canvas = Canvas::new(200, 160);
            let out = project_orthographic(&pose, &pts, &canvas, Fit::default()).unwrap();
            let (mut lo, mut hi) = (Vector2::repeat(f64::MAX), Vector2::repeat(f64::MIN));
            for p in &out {
                lo = lo.inf(p);
                hi = hi.sup(p);
            }
            let side = (hi - lo).max();
            assert!((side - 0.9 * 160.0).abs() <= 1.0);
            let center = (lo + hi) * 0.5;
            assert!((center - Vector2::new(100.0, 80.0)).norm() <= 1.0);
        }
    }

    #[test]
    fn translation_invariant() {
        let pts: Vec<Vector3<f64>> = (0..50)
            .map(|i| {
                let t = i as f64;
                Vector3::new(t.sin(), (2.0 * t).cos(), 0.1 * t)
            })
            .collect();
        let shift = Vector3::new(12.5, -7.0, 3.25);
        let moved: Vec<_> = pts.iter().map(|p| p + shift).collect();
        let canvas = Canvas::square(128);
        for pose in sample_unit_sphere(Seed(77), 5) {
            let a = project_orthographic(&pose, &pts, &canvas, Fit::default()).unwrap();
            let b = project_orthographic(&pose, &moved, &canvas, Fit::default()).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn coincident_points_are_degenerate() {
        let pose = CameraPose::looking_at_origin(Vector3::new(1.0, 1.0, 1.0)).unwrap();
        let pts = vec![Vector3::new(0.5, 0.5, 0.5); 10];
        assert!(matches!(
            project_orthographic(&pose, &pts, &Canvas::square(32), Fit::default()),
            Err(Error::DegenerateCloud)
        ));
        assert!(project_orthographic(&pose, &[], &Canvas::square(32), Fit::default()).is_err());
    }
}
