//! Hyperspectral cube storage and per-band normalization.

use crate::error::{Error, Result};

/// A width x height x bands radiance grid, band-sequential: the value of
/// band `b` at pixel (row, col) sits at `b*W*H + row*W + col`.
///
/// Immutable after construction; safe to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct HsiCube {
    width: usize,
    height: usize,
    bands: usize,
    data: Vec<f64>,
}

impl HsiCube {
    pub fn new(width: usize, height: usize, bands: usize, data: Vec<f64>) -> Result<HsiCube> {
        if width == 0 || height == 0 || bands == 0 {
            return Err(Error::Contract(format!(
                "cube dimensions must be positive, got {width}x{height}x{bands}"
            )));
        }
        if data.len() != width * height * bands {
            return Err(Error::Contract(format!(
                "cube data holds {} values but {width}x{height}x{bands} needs {}",
                data.len(),
                width * height * bands
            )));
        }
        Ok(HsiCube {
            width,
            height,
            bands,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    pub fn num_pixels(&self) -> usize {
        self.width * self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    fn idx(&self, band: usize, row: usize, col: usize) -> usize {
        debug_assert!(band < self.bands && row < self.height && col < self.width);
        band * self.width * self.height + row * self.width + col
    }

    #[inline]
    pub fn value(&self, band: usize, row: usize, col: usize) -> f64 {
        self.data[self.idx(band, row, col)]
    }

    /// One band as a contiguous slice of W*H values, row-major.
    pub fn band(&self, band: usize) -> &[f64] {
        let n = self.width * self.height;
        &self.data[band * n..(band + 1) * n]
    }

    /// The full spectrum of one pixel.
    pub fn spectrum(&self, row: usize, col: usize) -> Vec<f64> {
        (0..self.bands)
            .map(|b| self.value(b, row, col))
            .collect()
    }

    /// Min-max scale each band independently onto [0, 1].
    ///
    /// A constant band maps to all zeros. Uses scene-wide statistics only,
    /// so no label information can leak through the scaling.
    pub fn normalize_bands(&self) -> HsiCube {
        let n = self.width * self.height;
        let mut out = self.data.clone();
        for b in 0..self.bands {
            let band = &mut out[b * n..(b + 1) * n];
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for &v in band.iter() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
            if hi > lo {
                let span = hi - lo;
                for v in band.iter_mut() {
                    *v = (*v - lo) / span;
                }
            } else {
                band.fill(0.0);
            }
        }
        HsiCube {
            width: self.width,
            height: self.height,
            bands: self.bands,
            data: out,
        }
    }
}
