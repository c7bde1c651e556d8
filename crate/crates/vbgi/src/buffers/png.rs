//! 8-bit PNG previews of HDR buffers.

use std::fmt;
use std::path::Path;

use super::ImageBuf;
use crate::math::Vec3;

/// HDR-to-display mapping applied before quantization.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ToneMap {
    /// clamp(v, 0, 1) ^ (1/2.2)
    ClampGamma22,
    /// (v / (1 + v)) ^ (1/2.2)
    ReinhardGamma22,
}

#[derive(Debug)]
pub enum PngError {
    /// Negative or non-finite input value; previews require a physical image.
    InvalidValue { x: u32, y: u32, value: f32 },
    Encode(image::ImageError),
}

impl fmt::Display for PngError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PngError::InvalidValue { x, y, value } => {
                write!(f, "value {value} at ({x}, {y}) is not finite and non-negative")
            }
            PngError::Encode(e) => write!(f, "png encode failed: {e}"),
        }
    }
}

impl std::error::Error for PngError {}

pub fn tone_map_byte(v: f32, tone: ToneMap) -> u8 {
    let mapped = match tone {
        ToneMap::ClampGamma22 => v.clamp(0.0, 1.0),
        ToneMap::ReinhardGamma22 => v / (1.0 + v),
    };
    (255.0 * mapped.powf(1.0 / 2.2)).round() as u8
}

fn check(v: f32, x: u32, y: u32) -> Result<f32, PngError> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(PngError::InvalidValue { x, y, value: v })
    }
}

pub fn save_png_rgb(img: &ImageBuf<Vec3>, path: &Path, tone: ToneMap) -> Result<(), PngError> {
    let mut out = image::RgbImage::new(img.width(), img.height());
    for (x, y, v) in img.enumerate() {
        let px = image::Rgb([
            tone_map_byte(check(v.x, x, y)?, tone),
            tone_map_byte(check(v.y, x, y)?, tone),
            tone_map_byte(check(v.z, x, y)?, tone),
        ]);
        out.put_pixel(x, y, px);
    }
    out.save_with_format(path, image::ImageFormat::Png).map_err(PngError::Encode)
}

pub fn save_png_scalar(img: &ImageBuf<f32>, path: &Path, tone: ToneMap) -> Result<(), PngError> {
    let mut out = image::GrayImage::new(img.width(), img.height());
    for (x, y, &v) in img.enumerate() {
        out.put_pixel(x, y, image::Luma([tone_map_byte(check(v, x, y)?, tone)]));
    }
    out.save_with_format(path, image::ImageFormat::Png).map_err(PngError::Encode)
}
