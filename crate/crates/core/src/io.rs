//! Image files: binary PGM (P5) natively, PNG through the `image` crate.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::types::GrayImage;

/// Parses a binary 8-bit PGM (`P5`, maxval <= 255). Comments are allowed
/// in the header.
pub fn decode_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut pos = 0;
    let mut token = || -> Result<String> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::ImageFormat("truncated PGM header".into()));
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    if token()? != "P5" {
        return Err(Error::ImageFormat("not a binary PGM (P5)".into()));
    }
    let mut number = |what: &str| -> Result<usize> {
        token()?
            .parse()
            .map_err(|_| Error::ImageFormat(format!("bad PGM {what}")))
    };
    let width = number("width")?;
    let height = number("height")?;
    let maxval = number("maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::ImageFormat(format!(
            "unsupported PGM maxval {maxval}"
        )));
    }
    // exactly one whitespace byte separates the header from the raster
    let start = pos + 1;
    let end = start + width * height;
    if end > bytes.len() {
        return Err(Error::ImageFormat("truncated PGM raster".into()));
    }
    let mut data = bytes[start..end].to_vec();
    if maxval != 255 {
        for p in &mut data {
            *p = ((u32::from(*p) * 255 + maxval as u32 / 2) / maxval as u32).min(255) as u8;
        }
    }
    GrayImage::new(width, height, data)
}

pub fn encode_pgm(image: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend_from_slice(image.pixels());
    out
}

fn is_pgm(path: &Path) -> bool {
    matches!(
        path.extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .as_deref(),
        Some("pgm") | Some("pnm")
    )
}

/// Reads a grayscale image; colour PNG/JPEG inputs are converted to luma.
pub fn read_image(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if is_pgm(path) || bytes.starts_with(b"P5") {
        return decode_pgm(&bytes);
    }
    let img = image::load_from_memory(&bytes)
        .map_err(|e| Error::ImageFormat(format!("{}: {e}", path.display())))?
        .into_luma8();
    let (w, h) = img.dimensions();
    GrayImage::new(w as usize, h as usize, img.into_raw())
}

/// Writes PGM for `.pgm`/`.pnm` paths and PNG otherwise.
pub fn write_image(path: impl AsRef<Path>, image: &GrayImage) -> Result<()> {
    let path = path.as_ref();
    let bytes = if is_pgm(path) {
        encode_pgm(image)
    } else {
        let mut buf = Vec::new();
        image::ImageEncoder::write_image(
            image::codecs::png::PngEncoder::new(&mut buf),
            image.pixels(),
            image.width() as u32,
            image.height() as u32,
            image::ExtendedColorType::L8,
        )
        .map_err(|e| Error::Codec(e.to_string()))?;
        buf
    };
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
