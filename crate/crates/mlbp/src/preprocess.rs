//! Preprocessing: Gaussian smoothing and bilinear resizing to a canonical
//! square frame, applied before feature extraction.

use crate::error::{Error, Result};
use crate::image::GrayImage;

/// Parameters for the preprocessing stage.
///
/// `target_size` must satisfy `W >= 2*R + 2` for every neighborhood radius
/// used downstream; `extract` checks this when both are known.
#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessConfig {
    /// Side length W of the canonical W x W frame.
    pub target_size: usize,
    pub gaussian_sigma: f64,
    /// Kernel half-width; the 1-D kernel has `2 * kernel_radius + 1` taps.
    pub kernel_radius: usize,
    pub smoothing_enabled: bool,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            target_size: 128,
            gaussian_sigma: 1.0,
            kernel_radius: 2,
            smoothing_enabled: true,
        }
    }
}

impl PreprocessConfig {
    /// A configuration that leaves a `size` x `size` image untouched.
    pub fn identity(size: usize) -> Self {
        Self {
            target_size: size,
            smoothing_enabled: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.target_size == 0 {
            return Err(Error::InvalidParameter("target_size must be >= 1".into()));
        }
        if !self.gaussian_sigma.is_finite() || self.gaussian_sigma <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "gaussian_sigma must be > 0, got {}",
                self.gaussian_sigma
            )));
        }
        if self.kernel_radius < 1 {
            return Err(Error::InvalidParameter("kernel_radius must be >= 1".into()));
        }
        Ok(())
    }
}

/// Truncated, renormalized 1-D Gaussian kernel with `2*radius + 1` taps.
pub fn gaussian_kernel(sigma: f64, radius: usize) -> Result<Vec<f64>> {
    if !sigma.is_finite() || sigma <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "sigma must be > 0, got {sigma}"
        )));
    }
    if radius < 1 {
        return Err(Error::InvalidParameter("kernel radius must be >= 1".into()));
    }
    let mut kernel: Vec<f64> = (-(radius as isize)..=radius as isize)
        .map(|i| {
            let x = i as f64;
            (-x * x / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let sum: f64 = kernel.iter().sum();
    for w in &mut kernel {
        *w /= sum;
    }
    Ok(kernel)
}

/// Separable Gaussian convolution with replicate padding at the borders.
pub fn gaussian_smooth(img: &GrayImage, sigma: f64, kernel_radius: usize) -> Result<GrayImage> {
    let kernel = gaussian_kernel(sigma, kernel_radius)?;
    let r = kernel_radius as isize;
    let (w, h) = (img.width(), img.height());

    // Horizontal pass.
    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, &weight) in kernel.iter().enumerate() {
                let sx = (x as isize + k as isize - r).clamp(0, w as isize - 1) as usize;
                acc += weight * img.get(sx, y);
            }
            tmp[y * w + x] = acc;
        }
    }

    // Vertical pass, clamping the result back into the valid range (the
    // renormalized kernel sums to 1 only within floating-point error).
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, &weight) in kernel.iter().enumerate() {
                let sy = (y as isize + k as isize - r).clamp(0, h as isize - 1) as usize;
                acc += weight * tmp[sy * w + x];
            }
            out[y * w + x] = acc.clamp(0.0, 255.0);
        }
    }
    GrayImage::new(w, h, out)
}

/// Linear interpolation written as `a + t*(b - a)`.
///
/// This form returns `a` exactly when `a == b` or `t == 0`, which keeps
/// constant regions constant and grid-aligned samples exact.
#[inline]
pub(crate) fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + t * (b - a)
}

/// Bilinear sample at a real-valued coordinate, clamping the 2x2 support to
/// the image bounds. Callers must pass coordinates inside [0, size-1].
#[inline]
pub(crate) fn bilinear_clamped(img: &GrayImage, fx: f64, fy: f64) -> f64 {
    let x0 = fx.floor() as usize;
    let y0 = fy.floor() as usize;
    let x1 = (x0 + 1).min(img.width() - 1);
    let y1 = (y0 + 1).min(img.height() - 1);
    let tx = fx - x0 as f64;
    let ty = fy - y0 as f64;
    let top = lerp(img.get(x0, y0), img.get(x1, y0), tx);
    let bottom = lerp(img.get(x0, y1), img.get(x1, y1), tx);
    lerp(top, bottom, ty)
}

/// Resizes to `target` x `target` with bilinear interpolation.
///
/// Output pixel (x, y) samples the source at
/// `src = (dst + 0.5) * (src_size / target) - 0.5`, clamped to the valid
/// range (align-corners-off convention).
pub fn resize_bilinear(img: &GrayImage, target: usize) -> Result<GrayImage> {
    if target == 0 {
        return Err(Error::InvalidParameter("target size must be >= 1".into()));
    }
    let scale_x = img.width() as f64 / target as f64;
    let scale_y = img.height() as f64 / target as f64;
    let mut out = vec![0.0; target * target];
    for y in 0..target {
        let fy = ((y as f64 + 0.5) * scale_y - 0.5).clamp(0.0, img.height() as f64 - 1.0);
        for x in 0..target {
            let fx = ((x as f64 + 0.5) * scale_x - 0.5).clamp(0.0, img.width() as f64 - 1.0);
            out[y * target + x] = bilinear_clamped(img, fx, fy).clamp(0.0, 255.0);
        }
    }
    GrayImage::new(target, target, out)
}

/// Full preprocessing: Gaussian smoothing (when enabled) followed by the
/// resize to the canonical frame.
pub fn preprocess(img: &GrayImage, cfg: &PreprocessConfig) -> Result<GrayImage> {
    cfg.validate()?;
    let smoothed;
    let stage = if cfg.smoothing_enabled {
        smoothed = gaussian_smooth(img, cfg.gaussian_sigma, cfg.kernel_radius)?;
        &smoothed
    } else {
        img
    };
    resize_bilinear(stage, cfg.target_size)
}
