//! In-memory raster types.
//!
//! A [`HyperCube`] stores its pixels band-interleaved: the `bands` values of
//! pixel `i = p * width + q` occupy `data[i * bands..(i + 1) * bands]`.

use nalgebra::DMatrix;

use crate::error::{HsiError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PixelCoord {
    pub p: usize,
    pub q: usize,
}

impl PixelCoord {
    pub fn new(p: usize, q: usize) -> Self {
        Self { p, q }
    }
}

/// Row-major flat index of `coord` in a raster `width` pixels wide.
pub fn flat_index(coord: PixelCoord, width: usize) -> Result<usize> {
    if coord.q >= width {
        return Err(HsiError::Bounds(format!(
            "column {} outside width {width}",
            coord.q
        )));
    }
    Ok(coord.p * width + coord.q)
}

pub fn coord_of(index: usize, width: usize) -> Result<PixelCoord> {
    if width == 0 {
        return Err(HsiError::Bounds("raster width is zero".into()));
    }
    Ok(PixelCoord::new(index / width, index % width))
}

/// Half-width `t = (w - 1) / 2` of an odd window.
pub fn half_width(w: usize) -> Result<usize> {
    if w == 0 || w.is_multiple_of(2) {
        return Err(HsiError::config(format!(
            "window size must be a positive odd integer, got {w}"
        )));
    }
    Ok((w - 1) / 2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HyperCube {
    height: usize,
    width: usize,
    bands: usize,
    data: Vec<f64>,
}

impl HyperCube {
    pub fn new(height: usize, width: usize, bands: usize, data: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 || bands == 0 {
            return Err(HsiError::shape(format!(
                "cube dimensions must be positive, got {height}x{width}x{bands}"
            )));
        }
        let expected = height
            .checked_mul(width)
            .and_then(|v| v.checked_mul(bands))
            .ok_or_else(|| HsiError::shape("cube dimensions overflow"))?;
        if data.len() != expected {
            return Err(HsiError::shape(format!(
                "expected {expected} values for {height}x{width}x{bands}, got {}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(HsiError::shape(format!("non-finite value at position {pos}")));
        }
        Ok(Self {
            height,
            width,
            bands,
            data,
        })
    }

    /// Builds a cube from per-pixel spectra in row-major pixel order.
    pub fn from_pixels(height: usize, width: usize, pixels: &[Vec<f64>]) -> Result<Self> {
        let bands = pixels.first().map_or(0, Vec::len);
        if pixels.iter().any(|px| px.len() != bands) {
            return Err(HsiError::shape("pixels have differing band counts"));
        }
        Self::new(height, width, bands, pixels.concat())
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    pub fn pixel_count(&self) -> usize {
        self.height * self.width
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn pixel(&self, index: usize) -> &[f64] {
        &self.data[index * self.bands..(index + 1) * self.bands]
    }

    pub fn pixel_at(&self, coord: PixelCoord) -> Result<&[f64]> {
        self.check_coord(coord)?;
        Ok(self.pixel(coord.p * self.width + coord.q))
    }

    pub fn coord(&self, index: usize) -> PixelCoord {
        PixelCoord::new(index / self.width, index % self.width)
    }

    pub fn check_coord(&self, coord: PixelCoord) -> Result<()> {
        if coord.p >= self.height || coord.q >= self.width {
            return Err(HsiError::Bounds(format!(
                "pixel ({}, {}) outside {}x{} raster",
                coord.p, coord.q, self.height, self.width
            )));
        }
        Ok(())
    }

    pub fn check_index(&self, index: usize) -> Result<()> {
        if index >= self.pixel_count() {
            return Err(HsiError::Bounds(format!(
                "flat index {index} outside raster of {} pixels",
                self.pixel_count()
            )));
        }
        Ok(())
    }

    /// Flat indices of the window of size `w` around `center`, clipped to
    /// the raster, in row-major order. The center is included.
    pub fn window_indices(&self, center: PixelCoord, w: usize) -> Result<Vec<usize>> {
        let t = half_width(w)?;
        self.check_coord(center)?;
        let p0 = center.p.saturating_sub(t);
        let p1 = (center.p + t).min(self.height - 1);
        let q0 = center.q.saturating_sub(t);
        let q1 = (center.q + t).min(self.width - 1);
        let mut out = Vec::with_capacity((p1 - p0 + 1) * (q1 - q0 + 1));
        for p in p0..=p1 {
            for q in q0..=q1 {
                out.push(p * self.width + q);
            }
        }
        Ok(out)
    }

    /// All in-bounds pixels within Chebyshev distance `(w - 1) / 2` of
    /// `center`, with their spectra.
    pub fn window_of(&self, center: PixelCoord, w: usize) -> Result<Vec<(PixelCoord, &[f64])>> {
        Ok(self
            .window_indices(center, w)?
            .into_iter()
            .map(|i| (self.coord(i), self.pixel(i)))
            .collect())
    }

    /// Spectra of the selected pixels as a `bands x indices.len()` matrix.
    pub fn columns(&self, indices: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(self.bands, indices.len(), |b, c| self.pixel(indices[c])[b])
    }

    /// Spectra of every pixel as a `bands x (height * width)` matrix.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_column_slice(self.bands, self.pixel_count(), &self.data)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelRaster {
    height: usize,
    width: usize,
    classes: u16,
    labels: Vec<u16>,
}

impl LabelRaster {
    /// `classes` is the largest admissible label `c`; `0` marks unlabeled pixels.
    pub fn new(height: usize, width: usize, classes: u16, labels: Vec<u16>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(HsiError::shape("label raster dimensions must be positive"));
        }
        if classes == 0 {
            return Err(HsiError::config("class count must be at least 1"));
        }
        if labels.len() != height * width {
            return Err(HsiError::shape(format!(
                "expected {} labels, got {}",
                height * width,
                labels.len()
            )));
        }
        if let Some((pos, &l)) = labels.iter().enumerate().find(|(_, &l)| l > classes) {
            return Err(HsiError::shape(format!(
                "label {l} at pixel {pos} exceeds class count {classes}"
            )));
        }
        Ok(Self {
            height,
            width,
            classes,
            labels,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn classes(&self) -> u16 {
        self.classes
    }

    pub fn labels(&self) -> &[u16] {
        &self.labels
    }

    pub fn get(&self, index: usize) -> u16 {
        self.labels[index]
    }

    pub fn matches(&self, cube: &HyperCube) -> Result<()> {
        if self.height != cube.height() || self.width != cube.width() {
            return Err(HsiError::shape(format!(
                "labels are {}x{} but cube is {}x{}",
                self.height,
                self.width,
                cube.height(),
                cube.width()
            )));
        }
        Ok(())
    }
}

/// Reduced features, one column per sample (`dim x count`).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    values: DMatrix<f64>,
}

impl FeatureMatrix {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(HsiError::Singular("non-finite feature value".into()));
        }
        Ok(Self { values })
    }

    pub fn dim(&self) -> usize {
        self.values.nrows()
    }

    pub fn count(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.values
    }
}
