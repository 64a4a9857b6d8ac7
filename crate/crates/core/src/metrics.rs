//! Pixel distances: the spatial coordinate distance and the
//! spatial-spectral combined distance (SSCD).
//!
//! SSCD from pixel `i` to pixel `j` compares the filtered spectrum of `j`
//! against every raw member of the spatial window around `i`, averaging the
//! member distances under a heat kernel whose width is their mean. It is not
//! symmetric.

use crate::cube::{HyperCube, PixelCoord};
use crate::error::{HsiError, Result};
use crate::wmf::{filter_cube, squared_distance, FilterConfig};

/// Euclidean distance between raster coordinates, in pixels.
pub fn scd(a: PixelCoord, b: PixelCoord) -> f64 {
    let dp = a.p as f64 - b.p as f64;
    let dq = a.q as f64 - b.q as f64;
    (dp * dp + dq * dq).sqrt()
}

fn member_distances<'a, I>(query: &[f64], window: I) -> Result<Vec<f64>>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let mut out = Vec::new();
    for member in window {
        if member.len() != query.len() {
            return Err(HsiError::shape(format!(
                "window member has {} bands, query has {}",
                member.len(),
                query.len()
            )));
        }
        out.push(squared_distance(query, member).sqrt());
    }
    if out.is_empty() {
        return Err(HsiError::config("window must contain at least one member"));
    }
    Ok(out)
}

/// Mean distance from `query` to the window members.
pub fn heat_kernel_sigma(query: &[f64], window: &[&[f64]]) -> Result<f64> {
    let dists = member_distances(query, window.iter().copied())?;
    Ok(dists.iter().sum::<f64>() / dists.len() as f64)
}

/// Heat-kernel weighted mean of member distances. A zero kernel width (the
/// query coincides with every member) yields zero.
pub(crate) fn weighted_mean_distance(dists: &[f64]) -> f64 {
    if dists.len() == 1 {
        return dists[0];
    }
    let sigma = dists.iter().sum::<f64>() / dists.len() as f64;
    if sigma == 0.0 {
        return 0.0;
    }
    let inv = 1.0 / (sigma * sigma);
    let mut num = 0.0;
    let mut den = 0.0;
    for &d in dists {
        let v = (-d * d * inv).exp();
        num += v * d;
        den += v;
    }
    num / den
}

pub fn window_distance(query: &[f64], window: &[&[f64]]) -> Result<f64> {
    let dists = member_distances(query, window.iter().copied())?;
    Ok(weighted_mean_distance(&dists))
}

/// Raw and filtered versions of one cube, sharing the filter window.
#[derive(Debug, Clone)]
pub struct SscdContext {
    raw: HyperCube,
    filtered: HyperCube,
    cfg: FilterConfig,
}

impl SscdContext {
    pub fn new(raw: HyperCube, cfg: FilterConfig) -> Result<Self> {
        let filtered = filter_cube(&raw, &cfg)?;
        Ok(Self { raw, filtered, cfg })
    }

    /// Pairs a cube with a previously filtered copy. The caller vouches that
    /// `filtered` came from `filter_cube(&raw, &cfg)`.
    pub fn from_parts(raw: HyperCube, filtered: HyperCube, cfg: FilterConfig) -> Result<Self> {
        cfg.validate()?;
        if (raw.height(), raw.width(), raw.bands())
            != (filtered.height(), filtered.width(), filtered.bands())
        {
            return Err(HsiError::shape("raw and filtered cubes differ in shape"));
        }
        Ok(Self { raw, filtered, cfg })
    }

    pub fn raw(&self) -> &HyperCube {
        &self.raw
    }

    pub fn filtered(&self) -> &HyperCube {
        &self.filtered
    }

    pub fn config(&self) -> &FilterConfig {
        &self.cfg
    }

    pub fn pixel_count(&self) -> usize {
        self.raw.pixel_count()
    }

    pub(crate) fn window(&self, i: usize) -> Vec<usize> {
        self.raw
            .window_indices(self.raw.coord(i), self.cfg.w)
            .expect("validated window and index")
    }

    /// SSCD against a precomputed window of `i`.
    pub(crate) fn sscd_with_window(&self, window: &[usize], j: usize) -> f64 {
        let query = self.filtered.pixel(j);
        let dists: Vec<f64> = window
            .iter()
            .map(|&s| squared_distance(query, self.raw.pixel(s)).sqrt())
            .collect();
        weighted_mean_distance(&dists)
    }

    pub fn scd(&self, i: usize, j: usize) -> f64 {
        scd(self.raw.coord(i), self.raw.coord(j))
    }
}

/// Spatial-spectral combined distance from pixel `i` (via its raw window) to
/// pixel `j` (via its filtered spectrum).
pub fn sscd(ctx: &SscdContext, i: usize, j: usize) -> Result<f64> {
    ctx.raw.check_index(i)?;
    ctx.raw.check_index(j)?;
    if i == j {
        return Err(HsiError::config("sscd of a pixel with itself is undefined"));
    }
    Ok(ctx.sscd_with_window(&ctx.window(i), j))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_vec(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
        (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    fn loop_dist(a: &[f64], b: &[f64]) -> f64 {
        let mut s = 0.0;
        for t in 0..a.len() {
            s += (a[t] - b[t]) * (a[t] - b[t]);
        }
        s.sqrt()
    }

    /// Direct transcription of the kernel-weighted window distance.
    fn window_distance_oracle(query: &[f64], window: &[Vec<f64>]) -> f64 {
        let n = window.len() as f64;
        let sigma: f64 = window.iter().map(|m| loop_dist(query, m)).sum::<f64>() / n;
        let mut num = 0.0;
        let mut den = 0.0;
        for m in window {
            let d = loop_dist(query, m);
            let v = f64::exp(-(d * d) / (sigma * sigma));
            num += v * d;
            den += v;
        }
        num / den
    }

    #[test]
    fn scd_examples() {
        let a = PixelCoord::new(3, 7);
        assert_eq!(scd(a, a), 0.0);
        assert_eq!(scd(PixelCoord::new(0, 0), PixelCoord::new(3, 4)), 5.0);
        assert!((scd(PixelCoord::new(1, 1), PixelCoord::new(2, 2)) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn sigma_examples() {
        let q = [1.0, 2.0];
        assert_eq!(heat_kernel_sigma(&q, &[&q]).unwrap(), 0.0);
        let members = [[4.0, 2.0], [1.0, -1.0], [-2.0, 2.0]];
        let refs: Vec<&[f64]> = members.iter().map(|m| &m[..]).collect();
        assert!((heat_kernel_sigma(&q, &refs).unwrap() - 3.0).abs() < 1e-15);
        assert!(heat_kernel_sigma(&q, &[]).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let q = rand_vec(&mut rng, 6);
        let win: Vec<Vec<f64>> = (0..9).map(|_| rand_vec(&mut rng, 6)).collect();
        let refs: Vec<&[f64]> = win.iter().map(|m| &m[..]).collect();
        let oracle = win.iter().map(|m| loop_dist(&q, m)).sum::<f64>() / 9.0;
        assert!((heat_kernel_sigma(&q, &refs).unwrap() - oracle).abs() <= 1e-12);
    }

    #[test]
    fn window_distance_examples() {
        let q = [0.0, 0.0];
        assert_eq!(window_distance(&q, &[&[3.0, 4.0]]).unwrap(), 5.0);
        let ring = [[2.0, 0.0], [0.0, 2.0], [-2.0, 0.0]];
        let refs: Vec<&[f64]> = ring.iter().map(|m| &m[..]).collect();
        assert!((window_distance(&q, &refs).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(window_distance(&q, &[&q, &q]).unwrap(), 0.0);
        assert!(window_distance(&q, &[]).is_err());
        assert!(window_distance(&q, &[&[1.0]]).is_err());
    }

    #[test]
    fn window_distance_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for size in [2usize, 4, 9, 25] {
            let q = rand_vec(&mut rng, 7);
            let win: Vec<Vec<f64>> = (0..size).map(|_| rand_vec(&mut rng, 7)).collect();
            let refs: Vec<&[f64]> = win.iter().map(|m| &m[..]).collect();
            let got = window_distance(&q, &refs).unwrap();
            let expected = window_distance_oracle(&q, &win);
            assert!((got - expected).abs() <= 1e-10 * expected);
        }
    }

    #[test]
    fn sscd_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let data: Vec<f64> = (0..8 * 8 * 6).map(|_| rng.random_range(0.0..1.0)).collect();
        let cube = HyperCube::new(8, 8, 6, data).unwrap();

        let ctx1 = SscdContext::new(cube.clone(), FilterConfig::with_window(1).unwrap()).unwrap();
        let d = sscd(&ctx1, 3, 40).unwrap();
        assert_eq!(d, loop_dist(cube.pixel(40), cube.pixel(3)));

        let ctx = SscdContext::new(cube.clone(), FilterConfig::with_window(3).unwrap()).unwrap();
        for (i, j) in [(0usize, 63usize), (27, 28), (9, 54)] {
            let win: Vec<Vec<f64>> = cube
                .window_of(cube.coord(i), 3)
                .unwrap()
                .into_iter()
                .map(|(_, x)| x.to_vec())
                .collect();
            let expected = window_distance_oracle(ctx.filtered().pixel(j), &win);
            let got = sscd(&ctx, i, j).unwrap();
            assert!((got - expected).abs() <= 1e-10 * expected);
        }
        assert!(sscd(&ctx, 5, 5).is_err());
        assert!(sscd(&ctx, 5, 64).is_err());
    }

    #[test]
    fn sscd_zero_on_constant_cube() {
        let cube = HyperCube::new(4, 4, 3, [0.5, 0.1, 0.9].repeat(16)).unwrap();
        let ctx = SscdContext::new(cube, FilterConfig::with_window(3).unwrap()).unwrap();
        for i in 0..16 {
            for j in 0..16 {
                if i != j {
                    assert_eq!(sscd(&ctx, i, j).unwrap(), 0.0);
                }
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn scd_metric(a in (0usize..50, 0usize..50), b in (0usize..50, 0usize..50), c in (0usize..50, 0usize..50)) {
                let (a, b, c) = (PixelCoord::new(a.0, a.1), PixelCoord::new(b.0, b.1), PixelCoord::new(c.0, c.1));
                prop_assert_eq!(scd(a, b), scd(b, a));
                prop_assert!(scd(a, c) <= scd(a, b) + scd(b, c) + 1e-12);
                prop_assert_eq!(scd(a, b) == 0.0, a == b);
            }

            #[test]
            fn window_distance_bounded_and_homogeneous(
                seed in 0u64..1000, size in 1usize..12, alpha in 0.1f64..10.0
            ) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let q = rand_vec(&mut rng, 5);
                let win: Vec<Vec<f64>> = (0..size).map(|_| rand_vec(&mut rng, 5)).collect();
                let refs: Vec<&[f64]> = win.iter().map(|m| &m[..]).collect();
                let got = window_distance(&q, &refs).unwrap();
                let dists: Vec<f64> = win.iter().map(|m| loop_dist(&q, m)).collect();
                let lo = dists.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = dists.iter().cloned().fold(0.0, f64::max);
                prop_assert!(got >= lo - 1e-12 && got <= hi + 1e-12);

                let qs: Vec<f64> = q.iter().map(|v| v * alpha).collect();
                let ws: Vec<Vec<f64>> = win.iter().map(|m| m.iter().map(|v| v * alpha).collect()).collect();
                let wrefs: Vec<&[f64]> = ws.iter().map(|m| &m[..]).collect();
                let scaled = window_distance(&qs, &wrefs).unwrap();
                prop_assert!((scaled - alpha * got).abs() <= 1e-9 * alpha * got.max(1e-12));
            }
        }
    }
}
