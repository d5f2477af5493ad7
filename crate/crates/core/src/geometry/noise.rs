use serde::{Deserialize, Serialize};

use super::seed::{splitmix64, stream, Seed};
use crate::error::{Error, Result};

/// Sampling controls for a 1D Perlin sequence: sample `k` is taken at
/// lattice coordinate `(k + offset) * frequency`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerlinConfig {
    pub frequency: f64,
    pub offset: f64,
}

impl Default for PerlinConfig {
    fn default() -> Self {
        PerlinConfig {
            frequency: 1.0,
            offset: 0.0,
        }
    }
}

/// Classic gradient-lattice noise in one dimension.
///
/// Each integer lattice point `k` carries a slope `g_k` in `[-1, 1]` hashed
/// from the seed; the value at `t` blends `g_i * f` and `g_{i+1} * (f - 1)`
/// with the quintic smootherstep and is scaled by 2 so the range is `[-1, 1]`.
#[derive(Debug, Clone, Copy)]
pub struct Perlin1d {
    key: u64,
}

impl Perlin1d {
    pub fn new(seed: Seed) -> Self {
        Perlin1d {
            key: seed.child(0, stream::GRADIENT).value(),
        }
    }

    fn gradient(&self, lattice: i64) -> f64 {
        let h = splitmix64(self.key ^ splitmix64(lattice as u64));
        // 53 high bits -> [0, 1], then to [-1, 1].
        let unit = (h >> 11) as f64 / ((1u64 << 53) - 1) as f64;
        2.0 * unit - 1.0
    }

    pub fn sample(&self, t: f64) -> f64 {
        let cell = t.floor();
        let f = t - cell;
        let i = cell as i64;
        let n0 = self.gradient(i) * f;
        let n1 = self.gradient(i.wrapping_add(1)) * (f - 1.0);
        let s = smootherstep(f);
        2.0 * (n0 + s * (n1 - n0))
    }
}

#[inline]
fn smootherstep(f: f64) -> f64 {
    f * f * f * (f * (f * 6.0 - 15.0) + 10.0)
}

/// `length` samples at coordinates `k * frequency`, `k = 0..length`.
pub fn perlin1d(seed: Seed, length: usize, frequency: f64) -> Result<Vec<f64>> {
    perlin1d_with(
        seed,
        length,
        &PerlinConfig {
            frequency,
            offset: 0.0,
        },
    )
}

pub fn perlin1d_with(seed: Seed, length: usize, config: &PerlinConfig) -> Result<Vec<f64>> {
    if length == 0 {
        return Err(Error::EmptyRequest("perlin sequence of length 0"));
    }
    if !(config.frequency > 0.0 && config.frequency.is_finite()) {
        return Err(Error::invalid(format!(
            "perlin frequency must be positive and finite, got {}",
            config.frequency
        )));
    }
    if !config.offset.is_finite() {
        return Err(Error::invalid("perlin offset must be finite"));
    }
    let noise = Perlin1d::new(seed);
    Ok((0..length)
        .map(|k| noise.sample((k as f64 + config.offset) * config.frequency))
        .collect())
}
