//! Deterministic primitives shared by every generator family.

mod camera;
mod canvas;
mod noise;
mod raster;
mod seed;

pub use camera::{
    project_orthographic, sample_unit_sphere, CameraFrame, CameraPose, Fit, Framing,
};
pub use canvas::{Canvas, BACKGROUND, FOREGROUND};
pub use noise::{perlin1d, perlin1d_with, Perlin1d, PerlinConfig};
pub use raster::{rasterize_segment, segment_distance_sq};
pub use seed::{derive_seed, splitmix64, stream, Seed, CLASS_LEVEL};
