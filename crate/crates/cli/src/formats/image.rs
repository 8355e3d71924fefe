//! Grayscale PGM (binary P5) and PNG. Values live in `[0, 1]`; files are
//! written with 16-bit samples, so save-then-load is exact up to 1/65535.

use std::path::Path;

use image::{ImageBuffer, ImageFormat, Luma};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Row-major grayscale image.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

fn format_of(path: &Path) -> Result<ImageFormat> {
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("pgm") => Ok(ImageFormat::Pnm),
        Some("png") => Ok(ImageFormat::Png),
        _ => Err(CliError::malformed(path, "images must have a .pgm or .png extension")),
    }
}

pub fn load_image(path: &Path) -> Result<GrayImage> {
    let format = format_of(path)?;
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    let img = image::load_from_memory_with_format(&bytes, format)
        .map_err(|e| CliError::malformed(path, e.to_string()))?
        .into_luma16();
    let (w, h) = img.dimensions();
    Ok(GrayImage {
        width: w as usize,
        height: h as usize,
        data: img.into_raw().into_iter().map(|v| f64::from(v) / 65535.0).collect(),
    })
}

/// Encodes to bytes; values are clamped to `[0, 1]` and rounded to 16 bits.
pub fn encode_image(img: &GrayImage, format: ImageFormat) -> Result<Vec<u8>> {
    let raw: Vec<u16> = img.data.iter().map(|v| (v.clamp(0.0, 1.0) * 65535.0).round() as u16).collect();
    let buf: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_raw(img.width as u32, img.height as u32, raw).ok_or_else(|| {
            CliError::validation("image", format!("{} values for a {}x{} image", img.data.len(), img.width, img.height))
        })?;
    if format == ImageFormat::Pnm {
        // The PNM encoder has no 16-bit graymap; P5 is header plus
        // big-endian samples.
        let mut bytes = format!("P5\n{} {}\n65535\n", buf.width(), buf.height()).into_bytes();
        bytes.extend(buf.as_raw().iter().flat_map(|v| v.to_be_bytes()));
        return Ok(bytes);
    }
    let mut out = std::io::Cursor::new(Vec::new());
    buf.write_to(&mut out, format).map_err(|e| CliError::validation("image", e.to_string()))?;
    Ok(out.into_inner())
}

pub fn save_image(path: &Path, img: &GrayImage) -> Result<()> {
    let bytes = encode_image(img, format_of(path)?)?;
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

/// How a non-square or non-power-of-two input becomes an `n × n` grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResizeMode {
    /// Centre crop to the largest power of two not above the shorter side.
    #[default]
    Crop,
    /// Centre pad with zeros to the smallest power of two not below the
    /// longer side.
    Pad,
}

/// Centre crop or zero pad to a square power-of-two grid. With an odd
/// surplus the extra row or column is dropped (or padded) at the end.
pub fn fit_square(img: &GrayImage, mode: ResizeMode) -> Result<(Vec<f64>, usize)> {
    if img.width == 0 || img.height == 0 {
        return Err(CliError::validation("image", "empty image"));
    }
    let n = match mode {
        ResizeMode::Crop => 1usize << (usize::BITS - 1 - img.width.min(img.height).leading_zeros()),
        ResizeMode::Pad => img.width.max(img.height).next_power_of_two(),
    };
    let mut out = vec![0.0; n * n];
    // Offset of the output origin inside the input, possibly negative.
    let ox = (img.width as i64 - n as i64).div_euclid(2);
    let oy = (img.height as i64 - n as i64).div_euclid(2);
    for r in 0..n {
        let sr = r as i64 + oy;
        if sr < 0 || sr >= img.height as i64 {
            continue;
        }
        for c in 0..n {
            let sc = c as i64 + ox;
            if sc >= 0 && sc < img.width as i64 {
                out[r * n + c] = img.data[sr as usize * img.width + sc as usize];
            }
        }
    }
    Ok((out, n))
}
