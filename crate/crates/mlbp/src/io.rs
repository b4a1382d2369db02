//! Image file loading: PGM (P2 ASCII and P5 binary) and 8-bit PNG.
//!
//! RGB inputs are reduced with BT.601 luminance. A PGM writer is provided
//! for generating datasets and fixtures.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::GrayImage;

/// BT.601 luminance, written so that gray pixels (r == g == b) come out
/// exactly equal to the channel value.
#[inline]
fn luminance(r: f64, g: f64, b: f64) -> f64 {
    // 0.299 r + 0.587 g + 0.114 b, regrouped around g.
    (g + 0.299 * (r - g) + 0.114 * (b - g)).clamp(0.0, 255.0)
}

/// Converts an RGBA byte buffer (e.g. canvas image data) to grayscale.
pub fn gray_from_rgba(width: usize, height: usize, rgba: &[u8]) -> Result<GrayImage> {
    if rgba.len() != width * height * 4 {
        return Err(Error::InvalidImage(format!(
            "rgba buffer has {} bytes, expected {}",
            rgba.len(),
            width * height * 4
        )));
    }
    let pixels = rgba
        .chunks_exact(4)
        .map(|px| luminance(px[0] as f64, px[1] as f64, px[2] as f64))
        .collect();
    GrayImage::new(width, height, pixels)
}

/// Loads a PGM or PNG file, sniffing the format from the leading bytes.
pub fn load_image(path: &Path) -> Result<GrayImage> {
    let bytes = fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    match bytes.first() {
        Some(b'P') if bytes.get(1) == Some(&b'2') || bytes.get(1) == Some(&b'5') => {
            decode_pgm(&bytes, path)
        }
        Some(0x89) if bytes.get(1..4) == Some(b"PNG") => decode_png(&bytes, path),
        _ => Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
            detail: "expected PGM (P2/P5) or PNG magic bytes".into(),
        }),
    }
}

/// Writes an image as binary PGM (P5, maxval 255), rounding intensities to
/// the nearest integer.
pub fn write_pgm(path: &Path, img: &GrayImage) -> Result<()> {
    let mut data = Vec::with_capacity(32 + img.pixels().len());
    write!(data, "P5\n{} {}\n255\n", img.width(), img.height()).expect("vec write");
    data.extend(img.pixels().iter().map(|&v| v.round().clamp(0.0, 255.0) as u8));
    fs::write(path, data).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Cursor over PGM header tokens; skips whitespace and `#` comments.
struct PgmCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> PgmCursor<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    fn skip_separators(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn next_token(&mut self) -> Option<&'a [u8]> {
        self.skip_separators();
        let start = self.pos;
        while self.pos < self.bytes.len()
            && !self.bytes[self.pos].is_ascii_whitespace()
            && self.bytes[self.pos] != b'#'
        {
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.bytes[start..self.pos])
    }

    fn next_usize(&mut self, what: &str, path: &Path) -> Result<usize> {
        let token = self.next_token().ok_or_else(|| Error::MalformedImage {
            path: path.to_path_buf(),
            detail: format!("missing {what}"),
        })?;
        std::str::from_utf8(token)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::MalformedImage {
                path: path.to_path_buf(),
                detail: format!("invalid {what}: {}", String::from_utf8_lossy(token)),
            })
    }
}

fn decode_pgm(bytes: &[u8], path: &Path) -> Result<GrayImage> {
    let mut cur = PgmCursor::new(bytes);
    let magic = cur.next_token().unwrap_or(b"");
    let binary = match magic {
        b"P5" => true,
        b"P2" => false,
        _ => unreachable!("caller checked the magic"),
    };
    let width = cur.next_usize("width", path)?;
    let height = cur.next_usize("height", path)?;
    if width == 0 || height == 0 {
        return Err(Error::ZeroDimension {
            path: path.to_path_buf(),
        });
    }
    let maxval = cur.next_usize("maxval", path)?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
            detail: format!("maxval {maxval} (only 8-bit PGM supported)"),
        });
    }
    // Values are scaled so that maxval maps to 255; for maxval 255 this is
    // exactly the raw value.
    let scale = 255.0 / maxval as f64;
    let count = width * height;

    let pixels: Vec<f64> = if binary {
        // A single whitespace byte separates the maxval from the raster.
        let raster_start = cur.pos + 1;
        if raster_start > bytes.len() || !bytes[cur.pos].is_ascii_whitespace() {
            return Err(Error::MalformedImage {
                path: path.to_path_buf(),
                detail: "missing raster separator after maxval".into(),
            });
        }
        let raster = &bytes[raster_start..];
        if raster.len() < count {
            return Err(Error::MalformedImage {
                path: path.to_path_buf(),
                detail: format!("raster has {} bytes, expected {count}", raster.len()),
            });
        }
        raster[..count].iter().map(|&b| b as f64 * scale).collect()
    } else {
        let mut values = Vec::with_capacity(count);
        for i in 0..count {
            let v = cur.next_usize(&format!("pixel {i}"), path)?;
            if v > maxval {
                return Err(Error::MalformedImage {
                    path: path.to_path_buf(),
                    detail: format!("pixel {i} value {v} exceeds maxval {maxval}"),
                });
            }
            values.push(v as f64 * scale);
        }
        values
    };
    GrayImage::new(width, height, pixels)
}

fn decode_png(bytes: &[u8], path: &Path) -> Result<GrayImage> {
    use image::DynamicImage;

    let decoded = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)
        .map_err(|e| Error::MalformedImage {
            path: path.to_path_buf(),
            detail: e.to_string(),
        })?;
    let (width, height) = (decoded.width() as usize, decoded.height() as usize);
    if width == 0 || height == 0 {
        return Err(Error::ZeroDimension {
            path: path.to_path_buf(),
        });
    }
    let pixels: Vec<f64> = match decoded {
        DynamicImage::ImageLuma8(img) => img.into_raw().iter().map(|&v| v as f64).collect(),
        DynamicImage::ImageLumaA8(img) => img
            .pixels()
            .map(|p| p.0[0] as f64)
            .collect(),
        DynamicImage::ImageRgb8(img) => img
            .pixels()
            .map(|p| luminance(p.0[0] as f64, p.0[1] as f64, p.0[2] as f64))
            .collect(),
        DynamicImage::ImageRgba8(img) => img
            .pixels()
            .map(|p| luminance(p.0[0] as f64, p.0[1] as f64, p.0[2] as f64))
            .collect(),
        other => {
            return Err(Error::UnsupportedFormat {
                path: path.to_path_buf(),
                detail: format!("{:?} PNG (only 8-bit grayscale/RGB supported)", other.color()),
            })
        }
    };
    GrayImage::new(width, height, pixels)
}
