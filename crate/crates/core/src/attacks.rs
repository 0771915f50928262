//! Channel and editing attacks applied between embedding and extraction.
//!
//! Every attack is a pure function of its input and [`AttackSpec`]; the
//! randomized ones draw from [`SplitMix64`] seeded by its `rng_seed`.

use std::fmt;
use std::io::Cursor;
use std::str::FromStr;

use image::codecs::jpeg::JpegEncoder;
use image::{ExtendedColorType, ImageFormat};

use crate::error::{Error, Result};
use crate::keystream::SplitMix64;
use crate::transform::{inverse_block_dct, quantize, BlockDctPlane};
use crate::types::GrayImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AttackKind {
    LaplaceNoise,
    PixelLoss,
    Jpeg,
    Brightness,
    AutoAdjust,
}

impl AttackKind {
    pub fn name(&self) -> &'static str {
        match self {
            AttackKind::LaplaceNoise => "laplace-noise",
            AttackKind::PixelLoss => "pixel-loss",
            AttackKind::Jpeg => "jpeg",
            AttackKind::Brightness => "brightness",
            AttackKind::AutoAdjust => "auto-adjust",
        }
    }
}

impl fmt::Display for AttackKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AttackKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "laplace-noise" | "noise" => Ok(AttackKind::LaplaceNoise),
            "pixel-loss" => Ok(AttackKind::PixelLoss),
            "jpeg" | "jpg" => Ok(AttackKind::Jpeg),
            "brightness" => Ok(AttackKind::Brightness),
            "auto-adjust" => Ok(AttackKind::AutoAdjust),
            _ => Err(Error::InvalidParameter(format!("unknown attack `{s}`"))),
        }
    }
}

/// Where additive noise is injected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseDomain {
    #[default]
    Pixel,
    /// Into every block-DCT coefficient of the block-aligned region.
    Dct,
}

impl FromStr for NoiseDomain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pixel" => Ok(NoiseDomain::Pixel),
            "dct" => Ok(NoiseDomain::Dct),
            _ => Err(Error::InvalidParameter(format!(
                "unknown noise domain `{s}`"
            ))),
        }
    }
}

/// `parameter` is the SNR in dB, the loss fraction, the JPEG quality or the
/// brightness ratio depending on `kind`; auto-adjust ignores it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackSpec {
    pub kind: AttackKind,
    pub parameter: f64,
    pub rng_seed: u64,
    pub domain: NoiseDomain,
}

impl AttackSpec {
    pub fn new(kind: AttackKind, parameter: f64, rng_seed: u64) -> Result<Self> {
        let spec = Self {
            kind,
            parameter,
            rng_seed,
            domain: NoiseDomain::Pixel,
        };
        spec.check()?;
        Ok(spec)
    }

    pub fn in_domain(mut self, domain: NoiseDomain) -> Self {
        self.domain = domain;
        self
    }

    pub fn check(&self) -> Result<()> {
        let p = self.parameter;
        let ok = match self.kind {
            AttackKind::LaplaceNoise => !p.is_nan() && p != f64::NEG_INFINITY,
            AttackKind::PixelLoss => (0.0..1.0).contains(&p),
            AttackKind::Jpeg => (1.0..=100.0).contains(&p) && p.fract() == 0.0,
            AttackKind::Brightness => p > 0.0 && p.is_finite(),
            AttackKind::AutoAdjust => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "{} parameter {p} out of range",
                self.kind
            )))
        }
    }

    pub fn apply(&self, image: &GrayImage) -> Result<GrayImage> {
        self.check()?;
        match self.kind {
            AttackKind::LaplaceNoise => {
                laplace_noise_attack(image, self.parameter, self.rng_seed, self.domain)
                    .map(|n| n.image)
            }
            AttackKind::PixelLoss => pixel_loss_attack(image, self.parameter, self.rng_seed),
            AttackKind::Jpeg => jpeg_attack(image, self.parameter as u8),
            AttackKind::Brightness => brightness_attack(image, self.parameter),
            AttackKind::AutoAdjust => Ok(auto_adjust_attack(image)),
        }
    }
}

/// Laplacian scale giving `snr_db` against a signal of the given mean square.
pub fn noise_scale_for_snr(signal_power: f64, snr_db: f64) -> f64 {
    if snr_db == f64::INFINITY {
        return 0.0;
    }
    (signal_power / (2.0 * 10f64.powf(snr_db / 10.0))).sqrt()
}

pub fn mean_square(values: &[f64]) -> f64 {
    values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64
}

/// Adds i.i.d. Laplacian noise at `snr_db` relative to the samples' own
/// mean square. Returns the noisy samples and the noise scale used.
/// `snr_db = +inf` is the identity.
pub fn laplace_noise_samples(values: &[f64], snr_db: f64, seed: u64) -> (Vec<f64>, f64) {
    let scale = noise_scale_for_snr(mean_square(values), snr_db);
    if scale == 0.0 {
        return (values.to_vec(), 0.0);
    }
    let mut rng = SplitMix64::new(seed);
    let noisy = values.iter().map(|v| v + rng.next_laplace(scale)).collect();
    (noisy, scale)
}

#[derive(Debug, Clone)]
pub struct NoisyImage {
    pub image: GrayImage,
    /// Laplacian scale of the injected noise (per pixel or per coefficient).
    pub scale: f64,
}

pub fn laplace_noise_attack(
    image: &GrayImage,
    snr_db: f64,
    seed: u64,
    domain: NoiseDomain,
) -> Result<NoisyImage> {
    match domain {
        NoiseDomain::Pixel => {
            let samples: Vec<f64> = image.pixels().iter().map(|&p| f64::from(p)).collect();
            let (noisy, scale) = laplace_noise_samples(&samples, snr_db, seed);
            let data = noisy.into_iter().map(quantize).collect();
            Ok(NoisyImage {
                image: GrayImage::new(image.width(), image.height(), data)?,
                scale,
            })
        }
        NoiseDomain::Dct => {
            let region = image.block_region();
            let inner = image.crop(region);
            let samples: Vec<f64> = inner.pixels().iter().map(|&p| f64::from(p)).collect();
            let plane = BlockDctPlane::from_samples(inner.width(), inner.height(), &samples)?;
            let (noisy, scale) = laplace_noise_samples(plane.coeffs(), snr_db, seed);
            let mut plane = plane;
            plane.coeffs_mut().copy_from_slice(&noisy);
            let mut out = image.clone();
            out.paste(region, &inverse_block_dct(&plane))?;
            Ok(NoisyImage { image: out, scale })
        }
    }
}

/// Zeroes exactly `round(fraction * width * height)` distinct pixels.
pub fn pixel_loss_attack(image: &GrayImage, fraction: f64, seed: u64) -> Result<GrayImage> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(Error::InvalidParameter(format!("loss fraction {fraction}")));
    }
    let total = image.pixels().len();
    let count = (fraction * total as f64).round() as usize;
    let mut out = image.clone();
    for idx in sample_without_replacement(total, count, seed) {
        out.pixels_mut()[idx] = 0;
    }
    Ok(out)
}

/// `count` distinct indices from `0..total` via a partial Fisher-Yates shuffle.
pub fn sample_without_replacement(total: usize, count: usize, seed: u64) -> Vec<usize> {
    let mut rng = SplitMix64::new(seed);
    let mut pool: Vec<usize> = (0..total).collect();
    for i in 0..count.min(total) {
        let j = i + rng.next_below((total - i) as u64) as usize;
        pool.swap(i, j);
    }
    pool.truncate(count.min(total));
    pool
}

/// Baseline JPEG round trip at `quality` (1..=100).
pub fn jpeg_attack(image: &GrayImage, quality: u8) -> Result<GrayImage> {
    if !(1..=100).contains(&quality) {
        return Err(Error::InvalidParameter(format!("jpeg quality {quality}")));
    }
    let mut buf = Vec::new();
    JpegEncoder::new_with_quality(&mut buf, quality)
        .encode(
            image.pixels(),
            image.width() as u32,
            image.height() as u32,
            ExtendedColorType::L8,
        )
        .map_err(|e| Error::Codec(e.to_string()))?;
    let decoded = image::load(Cursor::new(buf), ImageFormat::Jpeg)
        .map_err(|e| Error::Codec(e.to_string()))?
        .into_luma8();
    let (w, h) = decoded.dimensions();
    GrayImage::new(w as usize, h as usize, decoded.into_raw())
}

/// `pixel <- clamp(round(ratio * pixel))`
pub fn brightness_attack(image: &GrayImage, ratio: f64) -> Result<GrayImage> {
    if !(ratio > 0.0 && ratio.is_finite()) {
        return Err(Error::InvalidParameter(format!("brightness ratio {ratio}")));
    }
    let data = image
        .pixels()
        .iter()
        .map(|&p| quantize(ratio * f64::from(p)))
        .collect();
    GrayImage::new(image.width(), image.height(), data)
}

/// Intensities at the 1st and 99th percentiles: the smallest values whose
/// cumulative count reaches 1% and 99% of the pixels.
pub fn percentile_bounds(image: &GrayImage) -> (u8, u8) {
    let mut hist = [0usize; 256];
    for &p in image.pixels() {
        hist[p as usize] += 1;
    }
    let n = image.pixels().len() as f64;
    let find = |q: f64| {
        let target = (q * n).ceil().max(1.0) as usize;
        let mut acc = 0;
        for (v, &c) in hist.iter().enumerate() {
            acc += c;
            if acc >= target {
                return v as u8;
            }
        }
        255
    };
    (find(0.01), find(0.99))
}

/// Linear contrast stretch taking the 1st percentile to 0 and the 99th to 255.
pub fn auto_adjust_attack(image: &GrayImage) -> GrayImage {
    let (lo, hi) = percentile_bounds(image);
    if hi <= lo {
        return image.clone();
    }
    let gain = 255.0 / f64::from(hi - lo);
    let lut: Vec<u8> = (0..=255u8)
        .map(|v| quantize((f64::from(v) - f64::from(lo)) * gain))
        .collect();
    let data = image.pixels().iter().map(|&p| lut[p as usize]).collect();
    GrayImage::new(image.width(), image.height(), data).expect("same dims")
}
