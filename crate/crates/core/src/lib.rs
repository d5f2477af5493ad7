//! Formula-driven synthetic image datasets.
//!
//! Every image is a pure function of a parameter set and a 64-bit seed:
//! radial contours ([`rcdb`]), 2D/3D iterated function system fractals
//! ([`ifs`]) and counted random lines ([`linedb`]). The [`pipeline`] module
//! turns a family configuration into a class-per-directory PNG dataset with a
//! checksummed JSON manifest.

pub mod error;
pub mod geometry;
pub mod ifs;
pub mod linedb;
pub mod pipeline;
pub mod rcdb;

pub use error::{Error, Result};
