//! Weighted mean filter.
//!
//! Each pixel is replaced by the mean of its spatial window, weighting
//! member `x_k` by `exp(-gamma0 * |x_center - x_k|^2)`. The center always has
//! weight one. Windows are clipped at the raster border.

use rayon::prelude::*;

use crate::cube::{half_width, HyperCube, PixelCoord};
use crate::error::{HsiError, Result};

pub const DEFAULT_GAMMA0: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterConfig {
    pub w: usize,
    pub gamma0: f64,
}

impl FilterConfig {
    pub fn new(w: usize, gamma0: f64) -> Result<Self> {
        let cfg = Self { w, gamma0 };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_window(w: usize) -> Result<Self> {
        Self::new(w, DEFAULT_GAMMA0)
    }

    pub fn validate(&self) -> Result<()> {
        half_width(self.w)?;
        if !(self.gamma0 > 0.0 && self.gamma0.is_finite()) {
            return Err(HsiError::config(format!(
                "gamma0 must be positive, got {}",
                self.gamma0
            )));
        }
        Ok(())
    }

    pub fn half_width(&self) -> usize {
        (self.w - 1) / 2
    }
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn wmf_weight(center: &[f64], neighbor: &[f64], gamma0: f64) -> Result<f64> {
    if center.len() != neighbor.len() {
        return Err(HsiError::shape(format!(
            "spectra of length {} and {}",
            center.len(),
            neighbor.len()
        )));
    }
    Ok((-gamma0 * squared_distance(center, neighbor)).exp())
}

fn filter_index(cube: &HyperCube, index: usize, cfg: &FilterConfig) -> Result<Vec<f64>> {
    let center = cube.pixel(index);
    let window = cube.window_indices(cube.coord(index), cfg.w)?;
    // Accumulate offsets from the center so equal members contribute exactly zero.
    let mut offset = vec![0.0; center.len()];
    let mut lo = center.to_vec();
    let mut hi = center.to_vec();
    let mut norm = 1.0;
    for &j in &window {
        if j == index {
            continue;
        }
        let member = cube.pixel(j);
        let v = (-cfg.gamma0 * squared_distance(center, member)).exp();
        norm += v;
        for b in 0..center.len() {
            offset[b] += v * (member[b] - center[b]);
            lo[b] = lo[b].min(member[b]);
            hi[b] = hi[b].max(member[b]);
        }
    }
    // Roundoff may push the mean a hair past the window's range.
    Ok((0..center.len())
        .map(|b| (center[b] + offset[b] / norm).clamp(lo[b], hi[b]))
        .collect())
}

pub fn filter_pixel(cube: &HyperCube, center: PixelCoord, cfg: &FilterConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    cube.check_coord(center)?;
    filter_index(cube, center.p * cube.width() + center.q, cfg)
}

pub fn filter_cube(cube: &HyperCube, cfg: &FilterConfig) -> Result<HyperCube> {
    cfg.validate()?;
    if cfg.w == 1 {
        return Ok(cube.clone());
    }
    let pixels: Vec<Vec<f64>> = (0..cube.pixel_count())
        .into_par_iter()
        .map(|i| filter_index(cube, i, cfg))
        .collect::<Result<_>>()?;
    HyperCube::new(cube.height(), cube.width(), cube.bands(), pixels.concat())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_cube(rng: &mut ChaCha8Rng, h: usize, w: usize, d: usize) -> HyperCube {
        let data = (0..h * w * d).map(|_| rng.random_range(0.0..2.0)).collect();
        HyperCube::new(h, w, d, data).unwrap()
    }

    #[test]
    fn weight_examples() {
        let a = [0.3, -1.0, 2.0];
        assert_eq!(wmf_weight(&a, &a, 0.2).unwrap(), 1.0);
        let b = [0.3 + 1.0, -1.0 + 2.0, 2.0];
        assert!((wmf_weight(&a, &b, 0.2).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        assert!(wmf_weight(&a, &b[..2], 0.2).is_err());
    }

    #[test]
    fn weight_matches_scalar_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let a: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
            let b: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mut s = 0.0;
            for t in 0..8 {
                let d = a[t] - b[t];
                s += d * d;
            }
            let expected = f64::exp(-0.2 * s);
            assert!((wmf_weight(&a, &b, 0.2).unwrap() - expected).abs() <= 1e-12);
        }
    }

    #[test]
    fn window_one_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cube = random_cube(&mut rng, 4, 5, 3);
        let cfg = FilterConfig::with_window(1).unwrap();
        assert_eq!(filter_cube(&cube, &cfg).unwrap(), cube);
        let c = PixelCoord::new(2, 3);
        assert_eq!(filter_pixel(&cube, c, &cfg).unwrap(), cube.pixel_at(c).unwrap());
    }

    #[test]
    fn constant_window_is_fixed() {
        let cube = HyperCube::new(3, 3, 2, [0.25, 4.0].repeat(9)).unwrap();
        let cfg = FilterConfig::with_window(3).unwrap();
        assert_eq!(filter_cube(&cube, &cfg).unwrap(), cube);
    }

    #[test]
    fn pixel_matches_direct_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cube = random_cube(&mut rng, 3, 3, 5);
        let cfg = FilterConfig::with_window(3).unwrap();
        let got = filter_pixel(&cube, PixelCoord::new(1, 1), &cfg).unwrap();
        // Direct evaluation over all nine members, center included with weight exp(0).
        let center = cube.pixel(4).to_vec();
        let mut num = vec![0.0; 5];
        let mut den = 0.0;
        for j in 0..9 {
            let x = cube.pixel(j);
            let mut s = 0.0;
            for b in 0..5 {
                s += (center[b] - x[b]).powi(2);
            }
            let v = (-0.2 * s).exp();
            den += v;
            for b in 0..5 {
                num[b] += v * x[b];
            }
        }
        for b in 0..5 {
            let expected = num[b] / den;
            assert!((got[b] - expected).abs() <= 1e-10 * expected.abs().max(1e-300));
        }
    }

    #[test]
    fn cube_matches_pixelwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let cube = random_cube(&mut rng, 6, 6, 4);
        let cfg = FilterConfig::with_window(3).unwrap();
        let out = filter_cube(&cube, &cfg).unwrap();
        for i in 0..36 {
            let px = filter_pixel(&cube, cube.coord(i), &cfg).unwrap();
            assert_eq!(out.pixel(i), &px[..]);
        }
    }

    #[test]
    fn rejects_bad_config() {
        assert!(FilterConfig::new(4, 0.2).is_err());
        assert!(FilterConfig::new(3, 0.0).is_err());
        assert!(FilterConfig::new(3, f64::NAN).is_err());
    }
}
