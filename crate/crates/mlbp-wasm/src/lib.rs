//! Browser bindings for the mlbp pipeline: analyze a texture into a label
//! map plus histogram, compare two histograms, and generate sample textures.
//!
//! Build with `wasm-pack build --target web` and open `www/index.html`.

use wasm_bindgen::prelude::*;

use mlbp::io::gray_from_rgba;
use mlbp::lbp::{histogram_features, label_image, NeighborhoodSpec};
use mlbp::preprocess::{preprocess, PreprocessConfig};
use mlbp::synth;
use mlbp::GrayImage;

/// Label map, histogram, and the preprocessed frame for one texture.
#[wasm_bindgen]
pub struct TextureAnalysis {
    label_width: usize,
    label_height: usize,
    label_rgba: Vec<u8>,
    frame_size: usize,
    frame_rgba: Vec<u8>,
    histogram: Vec<f64>,
    nonuniform_fraction: f64,
}

#[wasm_bindgen]
impl TextureAnalysis {
    #[wasm_bindgen(getter)]
    pub fn label_width(&self) -> usize {
        self.label_width
    }

    #[wasm_bindgen(getter)]
    pub fn label_height(&self) -> usize {
        self.label_height
    }

    /// False-color label map as RGBA bytes, row-major.
    pub fn label_rgba(&self) -> Vec<u8> {
        self.label_rgba.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn frame_size(&self) -> usize {
        self.frame_size
    }

    /// The preprocessed W x W grayscale frame as RGBA bytes.
    pub fn frame_rgba(&self) -> Vec<u8> {
        self.frame_rgba.clone()
    }

    /// The P+2 label probabilities, summing to 1.
    pub fn histogram(&self) -> Vec<f64> {
        self.histogram.clone()
    }

    /// Share of pixels carrying the non-uniform label P+1.
    #[wasm_bindgen(getter)]
    pub fn nonuniform_fraction(&self) -> f64 {
        self.nonuniform_fraction
    }
}

fn spec_from(neighbors: usize, radius: f64, threshold: i32) -> Result<NeighborhoodSpec, String> {
    let spec = if threshold < 0 {
        NeighborhoodSpec::with_default_threshold(neighbors, radius)
    } else {
        NeighborhoodSpec::new(neighbors, radius, threshold as u32)
    };
    spec.map_err(|e| e.to_string())
}

/// Distinct colors for labels 0..=P+1: a hue sweep for the uniform labels,
/// near-black for the non-uniform bin.
fn label_color(label: u8, neighbors: usize) -> [u8; 3] {
    if label as usize == neighbors + 1 {
        return [24, 24, 24];
    }
    let t = label as f64 / neighbors as f64;
    hsv_to_rgb(260.0 * (1.0 - t), 0.85, 0.95)
}

fn hsv_to_rgb(h: f64, s: f64, v: f64) -> [u8; 3] {
    let c = v * s;
    let hp = h / 60.0;
    let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    [
        ((r + m) * 255.0).round() as u8,
        ((g + m) * 255.0).round() as u8,
        ((b + m) * 255.0).round() as u8,
    ]
}

fn gray_to_rgba(img: &GrayImage) -> Vec<u8> {
    let mut out = Vec::with_capacity(img.pixels().len() * 4);
    for &v in img.pixels() {
        let g = v.round().clamp(0.0, 255.0) as u8;
        out.extend_from_slice(&[g, g, g, 255]);
    }
    out
}

/// Runs the full pipeline on an RGBA buffer (e.g. canvas image data) and
/// returns the label map, histogram, and preprocessed frame.
#[allow(clippy::too_many_arguments)]
#[wasm_bindgen]
pub fn analyze(
    width: usize,
    height: usize,
    rgba: &[u8],
    neighbors: usize,
    radius: f64,
    uniformity_threshold: i32,
    target_size: usize,
    sigma: f64,
    smooth: bool,
) -> Result<TextureAnalysis, JsError> {
    analyze_impl(
        width,
        height,
        rgba,
        neighbors,
        radius,
        uniformity_threshold,
        target_size,
        sigma,
        smooth,
    )
    .map_err(|msg| JsError::new(&msg))
}

// JsError can only be constructed on the wasm target, so the logic lives in
// a plain-error twin that host tests can exercise.
#[allow(clippy::too_many_arguments)]
fn analyze_impl(
    width: usize,
    height: usize,
    rgba: &[u8],
    neighbors: usize,
    radius: f64,
    uniformity_threshold: i32,
    target_size: usize,
    sigma: f64,
    smooth: bool,
) -> Result<TextureAnalysis, String> {
    let spec = spec_from(neighbors, radius, uniformity_threshold)?;
    let cfg = PreprocessConfig {
        target_size,
        gaussian_sigma: sigma,
        kernel_radius: 2,
        smoothing_enabled: smooth,
    };
    let err = |e: mlbp::Error| e.to_string();

    let gray = gray_from_rgba(width, height, rgba).map_err(err)?;
    let frame = preprocess(&gray, &cfg).map_err(err)?;
    let labels = label_image(&frame, &spec).map_err(err)?;
    let features = histogram_features(&labels, &spec).map_err(err)?;

    let mut label_rgba = Vec::with_capacity(labels.labels().len() * 4);
    for &label in labels.labels() {
        let [r, g, b] = label_color(label, spec.neighbors());
        label_rgba.extend_from_slice(&[r, g, b, 255]);
    }
    Ok(TextureAnalysis {
        label_width: labels.width(),
        label_height: labels.height(),
        label_rgba,
        frame_size: frame.width(),
        frame_rgba: gray_to_rgba(&frame),
        histogram: features.values().to_vec(),
        nonuniform_fraction: features.values()[spec.neighbors() + 1],
    })
}

/// Tanimoto distance between two histograms.
#[wasm_bindgen]
pub fn tanimoto(a: &[f64], b: &[f64]) -> Result<f64, JsError> {
    mlbp::tanimoto_distance(a, b).map_err(|e| JsError::new(&e.to_string()))
}

/// Euclidean distance between two histograms (baseline comparison).
#[wasm_bindgen]
pub fn euclidean(a: &[f64], b: &[f64]) -> Result<f64, JsError> {
    mlbp::euclidean_distance(a, b).map_err(|e| JsError::new(&e.to_string()))
}

/// Deterministic sample textures as RGBA bytes. Kinds: `smooth` (blurred
/// noise), `grain` (binary noise), `noise` (uniform noise).
#[wasm_bindgen]
pub fn generate_texture(kind: &str, size: usize, seed: u64) -> Result<Vec<u8>, JsError> {
    generate_texture_impl(kind, size, seed).map_err(|msg| JsError::new(&msg))
}

fn generate_texture_impl(kind: &str, size: usize, seed: u64) -> Result<Vec<u8>, String> {
    if size == 0 || size > 512 {
        return Err("size must be in [1, 512]".into());
    }
    let img = match kind {
        "smooth" => synth::smooth_noise(size, seed),
        "grain" => synth::binary_noise(size, seed),
        "noise" => synth::uniform_noise(size, seed),
        other => return Err(format!("unknown texture kind {other:?}")),
    };
    Ok(gray_to_rgba(&img))
}

/// Quarter-turn (counter-clockwise) of an RGBA buffer, for the rotation
/// invariance demo.
#[wasm_bindgen]
pub fn rotate90(width: usize, height: usize, rgba: &[u8]) -> Result<Vec<u8>, JsError> {
    rotate90_impl(width, height, rgba).map_err(|msg| JsError::new(&msg))
}

fn rotate90_impl(width: usize, height: usize, rgba: &[u8]) -> Result<Vec<u8>, String> {
    if rgba.len() != width * height * 4 {
        return Err("buffer size does not match dimensions".into());
    }
    let mut out = vec![0u8; rgba.len()];
    for y in 0..height {
        for x in 0..width {
            let src = (y * width + x) * 4;
            let (nx, ny) = (y, width - 1 - x);
            let dst = (ny * height + nx) * 4;
            out[dst..dst + 4].copy_from_slice(&rgba[src..src + 4]);
        }
    }
    Ok(out)
}
