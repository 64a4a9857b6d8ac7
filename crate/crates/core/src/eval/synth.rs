//! Synthetic benchmark scene: spatially contiguous class blocks with smooth
//! class signatures plus additive noise. The noise has a white part and a
//! clutter part: a few smooth spectral shapes shared by every class, each
//! scaled by an independent Gaussian amplitude per pixel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::cube::{HyperCube, LabelRaster};
use crate::error::{HsiError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub size: usize,
    pub bands: usize,
    /// Laid out as blocks on a `ceil(sqrt(classes))`-wide grid.
    pub classes: u16,
    /// Standard deviation of the white per-band noise.
    pub noise: f64,
    /// Number of shared clutter shapes.
    pub clutter_shapes: usize,
    /// Standard deviation of each clutter amplitude.
    pub clutter: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            size: 32,
            bands: 20,
            classes: 4,
            noise: 0.01,
            clutter_shapes: 2,
            clutter: 0.12,
        }
    }
}

/// Class of pixel `(p, q)`: the grid block it falls in.
fn block_class(p: usize, q: usize, size: usize, classes: usize) -> usize {
    let cols = (classes as f64).sqrt().ceil() as usize;
    let rows = classes.div_ceil(cols);
    let r = p * rows / size;
    let c = q * cols / size;
    (r * cols + c).min(classes - 1)
}

pub fn synthesize(cfg: &SynthConfig, seed: u64) -> Result<(HyperCube, LabelRaster)> {
    if cfg.size == 0 || cfg.bands == 0 || cfg.classes == 0 {
        return Err(HsiError::config("synthetic scene dimensions must be positive"));
    }
    let noise = Normal::new(0.0, cfg.noise)
        .map_err(|e| HsiError::config(format!("noise level {}: {e}", cfg.noise)))?;
    let clutter = Normal::new(0.0, cfg.clutter)
        .map_err(|e| HsiError::config(format!("clutter level {}: {e}", cfg.clutter)))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let classes = cfg.classes as usize;
    let bands = cfg.bands as f64;

    // Shared background curve plus two class-specific Gaussian bumps.
    let signatures: Vec<Vec<f64>> = (0..classes)
        .map(|_| {
            let bumps: Vec<(f64, f64, f64)> = (0..2)
                .map(|_| {
                    (
                        rng.random_range(0.0..bands),
                        rng.random_range(0.1 * bands..0.25 * bands),
                        rng.random_range(0.05..0.15),
                    )
                })
                .collect();
            (0..cfg.bands)
                .map(|b| {
                    let x = b as f64;
                    let base = 0.3 + 0.2 * (x / bands);
                    base + bumps
                        .iter()
                        .map(|&(mu, s, a)| a * (-(x - mu) * (x - mu) / (2.0 * s * s)).exp())
                        .sum::<f64>()
                })
                .collect()
        })
        .collect();

    let shapes: Vec<Vec<f64>> = (0..cfg.clutter_shapes)
        .map(|_| {
            let mu = rng.random_range(0.0..bands);
            let s = rng.random_range(0.2 * bands..0.4 * bands);
            (0..cfg.bands)
                .map(|b| {
                    let x = b as f64;
                    (-(x - mu) * (x - mu) / (2.0 * s * s)).exp()
                })
                .collect()
        })
        .collect();

    let n = cfg.size * cfg.size;
    let mut data = Vec::with_capacity(n * cfg.bands);
    let mut labels = Vec::with_capacity(n);
    for p in 0..cfg.size {
        for q in 0..cfg.size {
            let c = block_class(p, q, cfg.size, classes);
            labels.push(c as u16 + 1);
            let amps: Vec<f64> = shapes.iter().map(|_| clutter.sample(&mut rng)).collect();
            for (b, v) in signatures[c].iter().enumerate() {
                let cl: f64 = shapes.iter().zip(&amps).map(|(s, a)| a * s[b]).sum();
                data.push(v + cl + noise.sample(&mut rng));
            }
        }
    }
    Ok((
        HyperCube::new(cfg.size, cfg.size, cfg.bands, data)?,
        LabelRaster::new(cfg.size, cfg.size, cfg.classes, labels)?,
    ))
}
