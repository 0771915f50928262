//! Multiplicative spread-spectrum embedding `y = x (1 + alpha (2b - 1) w)`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::keystream::{generate_chips, SpreadSequence};
use crate::metrics;
use crate::transform::{forward_block_dct, gather_midband, inverse_block_dct, scatter_midband};
use crate::types::{validate_key, BitPayload, CoeffStream, GrayImage, WatermarkKey};

/// Embeds one bit into a segment. `alpha` may be zero here (identity).
pub fn embed_stream(x: &[f64], bit: u8, chips: &[i8], alpha: f64) -> Result<Vec<f64>> {
    let mut y = x.to_vec();
    embed_in_place(&mut y, bit, chips, alpha)?;
    Ok(y)
}

pub fn embed_in_place(segment: &mut [f64], bit: u8, chips: &[i8], alpha: f64) -> Result<()> {
    if segment.len() != chips.len() {
        return Err(Error::LengthMismatch {
            expected: segment.len(),
            actual: chips.len(),
        });
    }
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::InvalidAlpha(alpha));
    }
    if bit > 1 {
        return Err(Error::InvalidParameter(format!("bit value {bit}")));
    }
    let polarity = if bit == 1 { alpha } else { -alpha };
    for (v, &w) in segment.iter_mut().zip(chips) {
        *v *= 1.0 + polarity * f64::from(w);
    }
    Ok(())
}

/// Embeds a payload into a coefficient stream laid out per the key.
/// Coefficients past `payload.len() * N` are left untouched.
pub fn embed_coefficients(
    stream: &CoeffStream,
    payload: &BitPayload,
    chips: &SpreadSequence,
    alpha: f64,
    chips_per_bit: usize,
) -> Result<CoeffStream> {
    let used = payload.len() * chips_per_bit;
    if used > stream.len() {
        return Err(Error::CapacityExceeded {
            bits: payload.len(),
            capacity: stream.len() / chips_per_bit,
        });
    }
    if chips.len() < used {
        return Err(Error::LengthMismatch {
            expected: used,
            actual: chips.len(),
        });
    }
    let mut out = stream.clone();
    out.values_mut()[..used]
        .par_chunks_mut(chips_per_bit)
        .zip(payload.bits().par_iter())
        .enumerate()
        .try_for_each(|(k, (segment, &bit))| {
            embed_in_place(segment, bit, chips.segment(k, chips_per_bit), alpha)
        })?;
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct EmbedResult {
    pub watermarked: GrayImage,
    /// Against the cover, after pixel quantization.
    pub achieved_psnr: f64,
    /// Over the modulated coefficients, before quantization.
    pub achieved_dwr: f64,
    pub bits_embedded: usize,
}

/// Full pipeline: block DCT, gather, embed, scatter, inverse DCT, quantize.
///
/// Covers whose sides are not multiples of 4 are centre-cropped to the
/// block grid; the border pixels are copied through unchanged.
pub fn embed_image(
    cover: &GrayImage,
    payload: &BitPayload,
    key: &WatermarkKey,
) -> Result<EmbedResult> {
    let region = cover.block_region();
    let capacity = validate_key(key, (region.width, region.height))?;
    if payload.len() > capacity {
        return Err(Error::CapacityExceeded {
            bits: payload.len(),
            capacity,
        });
    }
    let plane = forward_block_dct(&cover.crop(region))?;
    let host = gather_midband(&plane, &key.mask);
    let used = payload.len() * key.chips_per_bit;
    let chips = generate_chips(key, used);
    let marked = embed_coefficients(&host, payload, &chips, key.alpha, key.chips_per_bit)?;

    let achieved_dwr = if used == 0 {
        f64::INFINITY
    } else {
        metrics::dwr(&host.values()[..used], &marked.values()[..used])?
    };

    let plane = scatter_midband(plane, &marked, &key.mask)?;
    let mut watermarked = cover.clone();
    watermarked.paste(region, &inverse_block_dct(&plane))?;
    let achieved_psnr = metrics::psnr(cover, &watermarked)?;
    Ok(EmbedResult {
        watermarked,
        achieved_psnr,
        achieved_dwr,
        bits_embedded: payload.len(),
    })
}
