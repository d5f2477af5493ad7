//! Family dispatch shared by building and regeneration.

use super::manifest::{ClassParams, IfsRecord};
use super::spec::{DatasetSpec, FamilyConfig};
use crate::error::Result;
use crate::geometry::{stream, Canvas, Seed};
use crate::ifs::{self, chaos_game_with, jitter_system, render_points_with, sample_ifs_system};
use crate::linedb::generate_line_image_with;
use crate::rcdb::{corrupt_contours, render_radial_contour, RcdbSampler};

pub fn sample_class(spec: &DatasetSpec, class_id: u32) -> Result<ClassParams> {
    let seed = spec.class_seed(class_id);
    Ok(match &spec.family {
        FamilyConfig::Rcdb(f) => ClassParams::Rcdb(RcdbSampler::with_band(f.vertex_band).sample(seed)),
        FamilyConfig::Fractal2d(f) => {
            ClassParams::Ifs(IfsRecord::from_system(&sample_ifs_system(seed, 2, &f.sampler)?))
        }
        FamilyConfig::Exfractal3d(f) => {
            ClassParams::Ifs(IfsRecord::from_system(&sample_ifs_system(seed, 3, &f.sampler)?))
        }
        FamilyConfig::Linedb(_) => ClassParams::Lines { line_count: class_id },
    })
}

/// Images produced by one (class, instance) task: one image, or one per
/// viewpoint for 3D fractals.
pub fn render_instance(
    spec: &DatasetSpec,
    params: &ClassParams,
    instance: u32,
    seed: Seed,
) -> Result<Vec<Canvas>> {
    let size = spec.image_size;
    match (&spec.family, params) {
        (FamilyConfig::Rcdb(f), ClassParams::Rcdb(p)) => {
            let mut canvas = render_radial_contour(p, seed, size, &f.render)?;
            if f.corrupt_lines > 0 {
                canvas = corrupt_contours(
                    &canvas,
                    seed.child(0, stream::CORRUPTION),
                    f.corrupt_lines as usize,
                    &f.corruption,
                )?;
            }
            Ok(vec![canvas])
        }
        (FamilyConfig::Fractal2d(f), ClassParams::Ifs(record)) => {
            let base = record.to_system()?;
            let system = jitter_system(&base, seed.child(0, stream::JITTER), f.jitter, &f.sampler)?;
            let cloud = chaos_game_with(&system, f.point_budget, seed.child(0, stream::CHAOS), f.burn_in)?;
            Ok(vec![render_points_with(&cloud, size, cloud.len(), f.fit)?])
        }
        (FamilyConfig::Exfractal3d(f), ClassParams::Ifs(record)) => {
            let base = record.to_system()?;
            ifs::render_exfractal_instance(&base, &f.to_config(size), seed, instance as usize, f.viewpoints as usize)
        }
        (FamilyConfig::Linedb(f), ClassParams::Lines { line_count }) => {
            Ok(vec![generate_line_image_with(*line_count as usize, seed, size, f.stroke_px)?])
        }
        (family, params) => Err(crate::Error::Manifest(format!(
            "{} dataset cannot use class parameters {params:?}",
            family.name()
        ))),
    }
}
