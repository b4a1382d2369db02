//! Deterministic synthetic texture generators, used by the test suites, the
//! browser demo, and anyone who needs a labeled corpus without real data.

use crate::image::GrayImage;
use crate::preprocess::gaussian_smooth;
use crate::rng::SplitMix64;

/// Per-pixel uniform noise over the full intensity range.
pub fn uniform_noise(size: usize, seed: u64) -> GrayImage {
    let mut rng = SplitMix64::new(seed);
    let pixels = (0..size * size)
        .map(|_| rng.next_below(256) as f64)
        .collect();
    GrayImage::new(size, size, pixels).expect("generated pixels are in range")
}

/// High-frequency texture: every pixel independently black or white.
pub fn binary_noise(size: usize, seed: u64) -> GrayImage {
    let mut rng = SplitMix64::new(seed);
    let pixels = (0..size * size)
        .map(|_| if rng.next_below(2) == 0 { 0.0 } else { 255.0 })
        .collect();
    GrayImage::new(size, size, pixels).expect("generated pixels are in range")
}

/// Low-frequency texture: white noise blurred with a wide Gaussian and
/// stretched back to the full [0, 255] range.
pub fn smooth_noise(size: usize, seed: u64) -> GrayImage {
    let noise = uniform_noise(size, seed);
    let blurred = gaussian_smooth(&noise, size as f64 / 16.0, size / 8 + 1)
        .expect("blur parameters are valid");
    let min = blurred.pixels().iter().cloned().fold(f64::INFINITY, f64::min);
    let max = blurred
        .pixels()
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let range = (max - min).max(f64::MIN_POSITIVE);
    blurred
        .map(|v| ((v - min) / range * 255.0).clamp(0.0, 255.0))
        .expect("stretched pixels are in range")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(uniform_noise(16, 9).pixels(), uniform_noise(16, 9).pixels());
        assert_eq!(binary_noise(16, 9).pixels(), binary_noise(16, 9).pixels());
        assert_eq!(smooth_noise(16, 9).pixels(), smooth_noise(16, 9).pixels());
        assert_ne!(smooth_noise(16, 9).pixels(), smooth_noise(16, 10).pixels());
    }

    #[test]
    fn binary_noise_is_two_valued() {
        let img = binary_noise(32, 3);
        assert!(img.pixels().iter().all(|&v| v == 0.0 || v == 255.0));
    }

    #[test]
    fn smooth_noise_uses_full_range_but_varies_slowly() {
        let img = smooth_noise(64, 4);
        let min = img.pixels().iter().cloned().fold(f64::INFINITY, f64::min);
        let max = img.pixels().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(min, 0.0);
        assert_eq!(max, 255.0);
        // neighboring pixels stay close after heavy blurring
        let mut max_step: f64 = 0.0;
        for y in 0..64 {
            for x in 1..64 {
                max_step = max_step.max((img.get(x, y) - img.get(x - 1, y)).abs());
            }
        }
        assert!(max_step < 64.0, "max step {max_step}");
    }
}
