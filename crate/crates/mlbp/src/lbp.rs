//! Modified local binary patterns: circular-neighborhood comparisons,
//! uniformity labeling, and the probabilistic label histogram.
//!
//! A pattern compares the center pixel against P neighbors sampled on a
//! circle of radius R (bilinear interpolation off the grid). Patterns whose
//! circular 0/1 transition count is at most U_T are labeled by their number
//! of one bits; all remaining patterns share the single label P+1. The
//! per-image feature is the (P+2)-bin label histogram normalized to sum 1.

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::preprocess::{bilinear_clamped, preprocess, PreprocessConfig};

/// Coordinates within this distance of a grid point are snapped to it, so
/// that neighbors that land on the grid (up to trig rounding) compare as
/// exact pixels.
const SNAP_EPS: f64 = 1e-6;

/// Circular sampling geometry: P neighbors at radius R, plus the uniformity
/// threshold U_T that separates uniform from non-uniform patterns.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodSpec {
    neighbors: usize,
    radius: f64,
    uniformity_threshold: u32,
    offsets: Vec<(f64, f64)>,
}

impl Default for NeighborhoodSpec {
    fn default() -> Self {
        Self::new(8, 1.0, 2).expect("default spec is valid")
    }
}

impl NeighborhoodSpec {
    /// Builds a spec with an explicit uniformity threshold.
    pub fn new(neighbors: usize, radius: f64, uniformity_threshold: u32) -> Result<Self> {
        if !(4..=32).contains(&neighbors) {
            return Err(Error::InvalidParameter(format!(
                "neighbor count must be in [4, 32], got {neighbors}"
            )));
        }
        if !radius.is_finite() || radius <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "radius must be positive and finite, got {radius}"
            )));
        }
        if uniformity_threshold as usize > neighbors {
            return Err(Error::InvalidParameter(format!(
                "uniformity threshold {uniformity_threshold} exceeds neighbor count {neighbors}"
            )));
        }
        Ok(Self {
            neighbors,
            radius,
            uniformity_threshold,
            offsets: circle_offsets(neighbors, radius),
        })
    }

    /// Builds a spec with the recommended threshold `floor(P / 4)`.
    pub fn with_default_threshold(neighbors: usize, radius: f64) -> Result<Self> {
        let threshold = (neighbors / 4) as u32;
        Self::new(neighbors, radius, threshold)
    }

    pub fn neighbors(&self) -> usize {
        self.neighbors
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn uniformity_threshold(&self) -> u32 {
        self.uniformity_threshold
    }

    /// Sampling offsets (dx_k, dy_k), k = 1..P, relative to the center.
    pub fn offsets(&self) -> &[(f64, f64)] {
        &self.offsets
    }

    /// Border width inside which no full neighborhood fits.
    pub fn margin(&self) -> usize {
        self.radius.ceil() as usize
    }

    /// The shared label of all non-uniform patterns.
    pub fn nonuniform_label(&self) -> u8 {
        (self.neighbors + 1) as u8
    }

    /// Number of histogram bins: labels 0..P plus the non-uniform bin.
    pub fn feature_len(&self) -> usize {
        self.neighbors + 2
    }
}

/// Offsets of the k-th neighbor: angle `2*pi*(k-1)/P` counter-clockwise from
/// +x with the image y axis pointing down, so `dx = R cos, dy = -R sin`.
///
/// When P is divisible by 4 the first quadrant is computed with trig and the
/// rest by exact quarter turns `(dx, dy) -> (dy, -dx)`, which makes the
/// offset set bit-exactly symmetric under 90-degree rotation.
fn circle_offsets(neighbors: usize, radius: f64) -> Vec<(f64, f64)> {
    let direct = |k: usize| {
        let angle = std::f64::consts::TAU * k as f64 / neighbors as f64;
        (radius * angle.cos(), -radius * angle.sin())
    };
    if !neighbors.is_multiple_of(4) {
        return (0..neighbors).map(direct).collect();
    }
    let quarter = neighbors / 4;
    let mut offsets: Vec<(f64, f64)> = (0..quarter).map(direct).collect();
    for k in quarter..neighbors {
        let (dx, dy) = offsets[k - quarter];
        offsets.push((dy, -dx));
    }
    offsets
}

/// Ordered P-bit comparison result at one pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryPattern {
    bits: Vec<u8>,
}

impl BinaryPattern {
    pub fn from_bits(bits: Vec<u8>) -> Result<Self> {
        if bits.is_empty() || bits.len() > 64 {
            return Err(Error::InvalidParameter(format!(
                "pattern length must be in [1, 64], got {}",
                bits.len()
            )));
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidParameter("pattern bits must be 0 or 1".into()));
        }
        Ok(Self { bits })
    }

    /// Decodes `code` into P bits with b_1 as the least significant bit.
    pub fn from_code(code: u64, neighbors: usize) -> Result<Self> {
        if neighbors == 0 || neighbors > 64 {
            return Err(Error::InvalidParameter(format!(
                "pattern length must be in [1, 64], got {neighbors}"
            )));
        }
        if neighbors < 64 && code >> neighbors != 0 {
            return Err(Error::InvalidParameter(format!(
                "code {code} does not fit in {neighbors} bits"
            )));
        }
        Ok(Self {
            bits: (0..neighbors).map(|k| ((code >> k) & 1) as u8).collect(),
        })
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// LBP code: sum of `b_k * 2^(k-1)`.
    pub fn code(&self) -> u64 {
        self.bits
            .iter()
            .enumerate()
            .map(|(k, &b)| (b as u64) << k)
            .sum()
    }

    pub fn ones(&self) -> u32 {
        self.bits.iter().map(|&b| b as u32).sum()
    }

    /// Uniformity U: circular count of 0/1 transitions. Always even.
    pub fn uniformity(&self) -> u32 {
        let n = self.bits.len();
        let mut u = (self.bits[0] as i32 - self.bits[n - 1] as i32).unsigned_abs();
        for k in 1..n {
            u += (self.bits[k] as i32 - self.bits[k - 1] as i32).unsigned_abs();
        }
        u
    }

    /// The MLBP label: count of ones for uniform patterns (U <= threshold),
    /// P+1 for everything else.
    pub fn mlbp_label(&self, uniformity_threshold: u32) -> u8 {
        if self.uniformity() <= uniformity_threshold {
            self.ones() as u8
        } else {
            (self.len() + 1) as u8
        }
    }

    /// Cyclic left rotation of the bit sequence by `shift` positions.
    pub fn rotated(&self, shift: usize) -> Self {
        let n = self.bits.len();
        Self {
            bits: (0..n).map(|k| self.bits[(k + shift) % n]).collect(),
        }
    }
}

fn snap(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() <= SNAP_EPS {
        r
    } else {
        v
    }
}

/// Intensity at a real-valued coordinate: exact pixel when both coordinates
/// are within the snap tolerance of integers, bilinear interpolation of the
/// four surrounding pixels otherwise.
pub fn bilinear_at(img: &GrayImage, fx: f64, fy: f64) -> Result<f64> {
    let sx = snap(fx);
    let sy = snap(fy);
    if sx < 0.0 || sy < 0.0 || sx > (img.width() - 1) as f64 || sy > (img.height() - 1) as f64 {
        return Err(Error::CoordinateOutOfRange {
            x: fx,
            y: fy,
            width: img.width(),
            height: img.height(),
        });
    }
    Ok(bilinear_clamped(img, sx, sy))
}

/// Samples the P circular neighbors of the interior pixel (xc, yc).
pub fn sample_neighbors(
    img: &GrayImage,
    xc: usize,
    yc: usize,
    spec: &NeighborhoodSpec,
) -> Result<Vec<f64>> {
    let m = spec.margin();
    if xc < m || yc < m || xc + m >= img.width() || yc + m >= img.height() {
        return Err(Error::NotInterior {
            x: xc,
            y: yc,
            radius: spec.radius(),
            width: img.width(),
            height: img.height(),
        });
    }
    spec.offsets()
        .iter()
        .map(|&(dx, dy)| bilinear_at(img, xc as f64 + dx, yc as f64 + dy))
        .collect()
}

/// Binary comparison pattern of a center against its sampled neighbors:
/// bit k is 1 iff `g_k - g_c >= 0` (ties count as 1).
pub fn lbp_code(center: f64, neighbors: &[f64]) -> BinaryPattern {
    BinaryPattern {
        bits: neighbors.iter().map(|&g| (g >= center) as u8).collect(),
    }
}

/// MLBP label of one neighborhood, without materializing the pattern.
pub fn mlbp_label(center: f64, neighbors: &[f64], spec: &NeighborhoodSpec) -> u8 {
    debug_assert_eq!(neighbors.len(), spec.neighbors());
    let first = neighbors[0] >= center;
    let mut prev = first;
    let mut ones = first as u32;
    let mut transitions = 0u32;
    for &g in &neighbors[1..] {
        let b = g >= center;
        ones += b as u32;
        transitions += (b != prev) as u32;
        prev = b;
    }
    transitions += (prev != first) as u32;
    if transitions <= spec.uniformity_threshold() {
        ones as u8
    } else {
        spec.nonuniform_label()
    }
}

/// Per-interior-pixel MLBP labels in raster order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelImage {
    width: usize,
    height: usize,
    labels: Vec<u8>,
}

impl LabelImage {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        debug_assert!(x < self.width && y < self.height);
        self.labels[y * self.width + x]
    }
}

/// Labels every interior pixel (margin `ceil(R)` on each side).
pub fn label_image(img: &GrayImage, spec: &NeighborhoodSpec) -> Result<LabelImage> {
    let m = spec.margin();
    if img.width() <= 2 * m || img.height() <= 2 * m {
        return Err(Error::ImageTooSmall {
            width: img.width(),
            height: img.height(),
            radius: spec.radius(),
        });
    }
    let out_w = img.width() - 2 * m;
    let out_h = img.height() - 2 * m;
    let mut labels = Vec::with_capacity(out_w * out_h);
    let mut neighbors = vec![0.0; spec.neighbors()];
    for yc in m..img.height() - m {
        for xc in m..img.width() - m {
            for (slot, &(dx, dy)) in neighbors.iter_mut().zip(spec.offsets()) {
                *slot = bilinear_clamped(img, snap(xc as f64 + dx), snap(yc as f64 + dy));
            }
            labels.push(mlbp_label(img.get(xc, yc), &neighbors, spec));
        }
    }
    Ok(LabelImage {
        width: out_w,
        height: out_h,
        labels,
    })
}

/// Probabilistic label histogram of dimension P+2, summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    values: Vec<f64>,
    spec: NeighborhoodSpec,
}

impl FeatureVector {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn spec(&self) -> &NeighborhoodSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Counts label occurrences and normalizes by the number of interior pixels.
pub fn histogram_features(labels: &LabelImage, spec: &NeighborhoodSpec) -> Result<FeatureVector> {
    let total = labels.labels().len();
    if total == 0 {
        return Err(Error::InvalidParameter("empty label image".into()));
    }
    let mut counts = vec![0usize; spec.feature_len()];
    for &label in labels.labels() {
        let bin = label as usize;
        if bin >= counts.len() {
            return Err(Error::InvalidParameter(format!(
                "label {label} out of range for P = {}",
                spec.neighbors()
            )));
        }
        counts[bin] += 1;
    }
    Ok(FeatureVector {
        values: counts
            .into_iter()
            .map(|c| c as f64 / total as f64)
            .collect(),
        spec: spec.clone(),
    })
}

/// Full descriptor pipeline: preprocess, label, histogram.
pub fn extract(
    img: &GrayImage,
    spec: &NeighborhoodSpec,
    cfg: &PreprocessConfig,
) -> Result<FeatureVector> {
    cfg.validate()?;
    if (cfg.target_size as f64) < 2.0 * spec.radius() + 2.0 {
        return Err(Error::InvalidParameter(format!(
            "target size {} too small for radius {} (needs W >= 2R + 2)",
            cfg.target_size,
            spec.radius()
        )));
    }
    let prepared = preprocess(img, cfg)?;
    histogram_features(&label_image(&prepared, spec)?, spec)
}

/// Concatenation of per-scale histograms; each scale is individually
/// normalized, so the result sums to the number of scales.
pub fn extract_multiscale(
    img: &GrayImage,
    specs: &[NeighborhoodSpec],
    cfg: &PreprocessConfig,
) -> Result<Vec<f64>> {
    if specs.is_empty() {
        return Err(Error::InvalidParameter("no neighborhood specs given".into()));
    }
    let mut out = Vec::with_capacity(specs.iter().map(|s| s.feature_len()).sum());
    for spec in specs {
        out.extend_from_slice(extract(img, spec, cfg)?.values());
    }
    Ok(out)
}
