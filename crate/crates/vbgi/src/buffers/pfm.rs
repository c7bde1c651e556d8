//! PFM (portable float map) reader/writer.
//!
//! Grayscale images use the "Pf" header, RGB images "PF". Rows are stored
//! bottom to top. We always write little-endian (negative scale); both
//! endiannesses are accepted on load and the scale magnitude is ignored.
//! Infinities are legal pixel values (the sky sentinel), NaN is rejected on
//! save.

use std::fmt;
use std::fs;
use std::path::Path;

use super::ImageBuf;
use crate::math::{vec3, Vec3};

#[derive(Debug)]
pub enum PfmError {
    Io(std::io::Error),
    /// Structural problem at a byte offset into the file.
    Malformed { offset: usize, what: String },
    /// NaN encountered while saving.
    NonFinite { x: u32, y: u32 },
}

impl fmt::Display for PfmError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PfmError::Io(e) => write!(f, "pfm i/o error: {e}"),
            PfmError::Malformed { offset, what } => {
                write!(f, "malformed pfm at byte {offset}: {what}")
            }
            PfmError::NonFinite { x, y } => write!(f, "NaN at pixel ({x}, {y}), refusing to save"),
        }
    }
}

impl std::error::Error for PfmError {}

impl From<std::io::Error> for PfmError {
    fn from(e: std::io::Error) -> Self {
        PfmError::Io(e)
    }
}

/// Result of loading a PFM: one or three channels.
#[derive(Clone, Debug)]
pub enum PfmData {
    Scalar(ImageBuf<f32>),
    Rgb(ImageBuf<Vec3>),
}

impl PfmData {
    pub fn into_scalar(self) -> Option<ImageBuf<f32>> {
        match self {
            PfmData::Scalar(img) => Some(img),
            PfmData::Rgb(_) => None,
        }
    }

    pub fn into_rgb(self) -> Option<ImageBuf<Vec3>> {
        match self {
            PfmData::Rgb(img) => Some(img),
            PfmData::Scalar(_) => None,
        }
    }
}

fn header(magic: &str, width: u32, height: u32) -> String {
    format!("{magic}\n{width} {height}\n{:.4}\n", -1.0f32)
}

pub fn save_pfm_scalar(img: &ImageBuf<f32>, path: &Path) -> Result<(), PfmError> {
    for (x, y, v) in img.enumerate() {
        if v.is_nan() {
            return Err(PfmError::NonFinite { x, y });
        }
    }
    let mut out = header("Pf", img.width(), img.height()).into_bytes();
    out.reserve(img.data().len() * 4);
    for y in (0..img.height()).rev() {
        for x in 0..img.width() {
            out.extend_from_slice(&img.at(x, y).to_le_bytes());
        }
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn save_pfm_rgb(img: &ImageBuf<Vec3>, path: &Path) -> Result<(), PfmError> {
    for (x, y, v) in img.enumerate() {
        if v.x.is_nan() || v.y.is_nan() || v.z.is_nan() {
            return Err(PfmError::NonFinite { x, y });
        }
    }
    let mut out = header("PF", img.width(), img.height()).into_bytes();
    out.reserve(img.data().len() * 12);
    for y in (0..img.height()).rev() {
        for x in 0..img.width() {
            let v = img.at(x, y);
            out.extend_from_slice(&v.x.to_le_bytes());
            out.extend_from_slice(&v.y.to_le_bytes());
            out.extend_from_slice(&v.z.to_le_bytes());
        }
    }
    fs::write(path, out)?;
    Ok(())
}

struct Tokens<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Tokens<'a> {
    /// Next whitespace-delimited token and its starting offset. Advances past
    /// exactly one trailing whitespace byte (the PFM header terminator rule).
    fn next(&mut self) -> Result<(&'a str, usize), PfmError> {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(PfmError::Malformed { offset: start, what: "unexpected end of header".into() });
        }
        let tok = std::str::from_utf8(&self.bytes[start..self.pos]).map_err(|_| PfmError::Malformed {
            offset: start,
            what: "non-ascii header token".into(),
        })?;
        if self.pos < self.bytes.len() {
            self.pos += 1; // single whitespace terminator
        }
        Ok((tok, start))
    }
}

pub fn load_pfm(path: &Path) -> Result<PfmData, PfmError> {
    let bytes = fs::read(path)?;
    let mut toks = Tokens { bytes: &bytes, pos: 0 };

    let (magic, off) = toks.next()?;
    let channels = match magic {
        "PF" => 3usize,
        "Pf" => 1,
        other => {
            return Err(PfmError::Malformed { offset: off, what: format!("bad magic {other:?}") })
        }
    };
    let (wtok, woff) = toks.next()?;
    let width: u32 = wtok
        .parse()
        .map_err(|_| PfmError::Malformed { offset: woff, what: format!("bad width {wtok:?}") })?;
    let (htok, hoff) = toks.next()?;
    let height: u32 = htok
        .parse()
        .map_err(|_| PfmError::Malformed { offset: hoff, what: format!("bad height {htok:?}") })?;
    let (stok, soff) = toks.next()?;
    let scale: f32 = stok
        .parse()
        .map_err(|_| PfmError::Malformed { offset: soff, what: format!("bad scale {stok:?}") })?;
    if width == 0 || height == 0 {
        return Err(PfmError::Malformed { offset: woff, what: format!("degenerate size {width}x{height}") });
    }
    let little_endian = scale < 0.0;

    let payload = toks.pos;
    let count = (width as usize) * (height as usize) * channels;
    let need = count * 4;
    if bytes.len() - payload < need {
        return Err(PfmError::Malformed {
            offset: bytes.len(),
            what: format!("payload truncated: need {need} bytes, have {}", bytes.len() - payload),
        });
    }
    let mut values = Vec::with_capacity(count);
    for i in 0..count {
        let b: [u8; 4] = bytes[payload + i * 4..payload + i * 4 + 4].try_into().unwrap();
        values.push(if little_endian { f32::from_le_bytes(b) } else { f32::from_be_bytes(b) });
    }

    // PFM stores the bottom row first; flip into top-down order.
    let (w, h) = (width as usize, height as usize);
    if channels == 1 {
        let mut data = vec![0.0f32; w * h];
        for row in 0..h {
            let src = &values[row * w..(row + 1) * w];
            data[(h - 1 - row) * w..(h - row) * w].copy_from_slice(src);
        }
        Ok(PfmData::Scalar(ImageBuf::from_vec(width, height, data)))
    } else {
        let mut data = vec![Vec3::ZERO; w * h];
        for row in 0..h {
            for x in 0..w {
                let i = (row * w + x) * 3;
                data[(h - 1 - row) * w + x] = vec3(values[i], values[i + 1], values[i + 2]);
            }
        }
        Ok(PfmData::Rgb(ImageBuf::from_vec(width, height, data)))
    }
}
