use nalgebra::Vector2;

use super::canvas::Canvas;
use crate::error::{Error, Result};

/// Squared distance from `c` to the closed segment `ab`.
#[inline]
pub fn segment_distance_sq(c: Vector2<f64>, a: Vector2<f64>, b: Vector2<f64>) -> f64 {
    let d = b - a;
    let len_sq = d.norm_squared();
    if len_sq == 0.0 {
        return (c - a).norm_squared();
    }
    let t = ((c - a).dot(&d) / len_sq).clamp(0.0, 1.0);
    (c - (a + d * t)).norm_squared()
}

/// Paint every pixel whose center lies within `stroke_width / 2` of the
/// segment `pq`. Off-canvas pixels are ignored.
pub fn rasterize_segment(
    canvas: &mut Canvas,
    p: Vector2<f64>,
    q: Vector2<f64>,
    stroke_width: f64,
    intensity: u8,
) -> Result<()> {
    if !(p.iter().chain(q.iter()).all(|v| v.is_finite())) {
        return Err(Error::InvalidGeometry(format!(
            "non-finite segment endpoint ({p:?}, {q:?})"
        )));
    }
    if !(stroke_width >= 0.0 && stroke_width.is_finite()) {
        return Err(Error::InvalidGeometry(format!(
            "stroke width must be finite and non-negative, got {stroke_width}"
        )));
    }
    if canvas.width() == 0 || canvas.height() == 0 {
        return Ok(());
    }

    // Fixed endpoint order makes the result independent of argument order.
    let (a, b) = if (p.x, p.y) <= (q.x, q.y) { (p, q) } else { (q, p) };
    let radius = stroke_width * 0.5;
    let radius_sq = radius * radius;
    let max_x = canvas.width() as f64 - 1.0;
    let max_y = canvas.height() as f64 - 1.0;

    // Pixel (x, y) has its center at (x + 0.5, y + 0.5).
    let y_lo = (a.y.min(b.y) - radius - 0.5).ceil().max(0.0);
    let y_hi = (a.y.max(b.y) + radius - 0.5).floor().min(max_y);
    let bx_lo = (a.x.min(b.x) - radius - 0.5).ceil().max(0.0);
    let bx_hi = (a.x.max(b.x) + radius - 0.5).floor().min(max_x);
    if y_lo > y_hi || bx_lo > bx_hi {
        return Ok(());
    }

    let d = b - a;
    let len = d.norm();
    let slanted = len > 0.0 && d.y.abs() > 1e-9 * len;

    for y in y_lo as u32..=y_hi as u32 {
        let cy = y as f64 + 0.5;
        let (mut x_lo, mut x_hi) = (bx_lo, bx_hi);
        if slanted {
            // The stroke lies inside the infinite band of half-width `radius`
            // around the carrier line; intersect that band with this row,
            // padded by a pixel so the exact test below decides the edges.
            let xc = a.x + (cy - a.y) * d.x / d.y;
            let half = radius * len / d.y.abs();
            x_lo = x_lo.max((xc - half - 1.5).ceil());
            x_hi = x_hi.min((xc + half + 0.5).floor());
        }
        if x_lo > x_hi {
            continue;
        }
        for x in x_lo as u32..=x_hi as u32 {
            let c = Vector2::new(x as f64 + 0.5, cy);
            if segment_distance_sq(c, a, b) <= radius_sq {
                canvas.set(x, y, intensity);
            }
        }
    }
    Ok(())
}
