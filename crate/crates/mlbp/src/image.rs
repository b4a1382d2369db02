//! Grayscale image container used throughout the pipeline.
//!
//! Intensities are stored as `f64` in [0, 255]. Smoothing and resizing keep
//! real-valued outputs instead of re-quantizing, so downstream comparisons
//! never suffer quantization ties that the source image did not have.

use crate::error::{Error, Result};

/// Rectangular grid of scalar intensities, row-major, values in [0, 255].
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    /// Builds an image, validating dimensions, pixel count and value range.
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!(
                "zero dimension: {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "pixel count {} does not match {width}x{height}",
                pixels.len()
            )));
        }
        if let Some((i, &v)) = pixels
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0 || **v > 255.0)
        {
            return Err(Error::InvalidImage(format!(
                "intensity {v} at index {i} outside [0, 255]"
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn constant(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    /// Intensity at (x, y). Panics if out of bounds.
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        debug_assert!(x < self.width && y < self.height);
        self.pixels[y * self.width + x]
    }

    /// Applies `f` to every pixel; the results must stay inside [0, 255].
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.width,
            self.height,
            self.pixels.iter().map(|&v| f(v)).collect(),
        )
    }

    /// Counter-clockwise quarter turn: pixel (x, y) moves to (y, width-1-x).
    pub fn rot90(&self) -> Self {
        let mut out = vec![0.0; self.pixels.len()];
        for y in 0..self.height {
            for x in 0..self.width {
                let nx = y;
                let ny = self.width - 1 - x;
                out[ny * self.height + nx] = self.get(x, y);
            }
        }
        Self {
            width: self.height,
            height: self.width,
            pixels: out,
        }
    }
}
