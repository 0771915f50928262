//! Orthonormal 4x4 block DCT-II and the mid-band gather/scatter.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::types::{CoeffStream, GrayImage, MidbandMask, BLOCK};

/// `basis[k][n] = c_k cos(pi (2n + 1) k / 8)` with `c_0 = 1/2`, `c_k = 1/sqrt(2)`.
fn basis() -> &'static [[f64; BLOCK]; BLOCK] {
    static BASIS: OnceLock<[[f64; BLOCK]; BLOCK]> = OnceLock::new();
    BASIS.get_or_init(|| {
        let mut m = [[0.0; BLOCK]; BLOCK];
        for (k, row) in m.iter_mut().enumerate() {
            let c = if k == 0 {
                (1.0 / BLOCK as f64).sqrt()
            } else {
                (2.0 / BLOCK as f64).sqrt()
            };
            for (n, v) in row.iter_mut().enumerate() {
                *v = c
                    * (std::f64::consts::PI * (2 * n + 1) as f64 * k as f64 / (2 * BLOCK) as f64)
                        .cos();
            }
        }
        m
    })
}

type Block = [[f64; BLOCK]; BLOCK];

/// `C * b * C^T`
pub fn dct_block(b: &Block) -> Block {
    let c = basis();
    let mut tmp = [[0.0; BLOCK]; BLOCK];
    for k in 0..BLOCK {
        for j in 0..BLOCK {
            tmp[k][j] = (0..BLOCK).map(|n| c[k][n] * b[n][j]).sum();
        }
    }
    let mut out = [[0.0; BLOCK]; BLOCK];
    for k in 0..BLOCK {
        for l in 0..BLOCK {
            out[k][l] = (0..BLOCK).map(|j| tmp[k][j] * c[l][j]).sum();
        }
    }
    out
}

/// `C^T * x * C`
pub fn idct_block(x: &Block) -> Block {
    let c = basis();
    let mut tmp = [[0.0; BLOCK]; BLOCK];
    for n in 0..BLOCK {
        for l in 0..BLOCK {
            tmp[n][l] = (0..BLOCK).map(|k| c[k][n] * x[k][l]).sum();
        }
    }
    let mut out = [[0.0; BLOCK]; BLOCK];
    for n in 0..BLOCK {
        for m in 0..BLOCK {
            out[n][m] = (0..BLOCK).map(|l| tmp[n][l] * c[l][m]).sum();
        }
    }
    out
}

/// Block-wise DCT coefficients laid out like the image: coefficient `(u, v)`
/// of block `(bx, by)` sits at sample `(4 bx + v, 4 by + u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDctPlane {
    width: usize,
    height: usize,
    coeffs: Vec<f64>,
}

impl BlockDctPlane {
    /// Transforms real-valued samples (row-major, `width * height`).
    pub fn from_samples(width: usize, height: usize, samples: &[f64]) -> Result<Self> {
        check_dims(width, height)?;
        if samples.len() != width * height {
            return Err(Error::LengthMismatch {
                expected: width * height,
                actual: samples.len(),
            });
        }
        Ok(Self {
            width,
            height,
            coeffs: map_blocks(width, height, samples, dct_block),
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn num_blocks(&self) -> usize {
        (self.width / BLOCK) * (self.height / BLOCK)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    /// Coefficient `(row, col)` of block number `block` (raster order).
    pub fn coeff(&self, block: usize, row: usize, col: usize) -> f64 {
        self.coeffs[self.index(block, row, col)]
    }

    fn index(&self, block: usize, row: usize, col: usize) -> usize {
        let blocks_per_row = self.width / BLOCK;
        let (by, bx) = (block / blocks_per_row, block % blocks_per_row);
        (by * BLOCK + row) * self.width + bx * BLOCK + col
    }

    /// Inverse transform without quantization.
    pub fn inverse_samples(&self) -> Vec<f64> {
        map_blocks(self.width, self.height, &self.coeffs, idct_block)
    }
}

fn check_dims(width: usize, height: usize) -> Result<()> {
    if !width.is_multiple_of(BLOCK) || !height.is_multiple_of(BLOCK) || width == 0 || height == 0 {
        return Err(Error::DimensionMismatch {
            expected: format!("non-empty multiples of {BLOCK}"),
            actual: format!("{width}x{height}"),
        });
    }
    Ok(())
}

fn map_blocks(width: usize, height: usize, input: &[f64], f: fn(&Block) -> Block) -> Vec<f64> {
    let mut out = vec![0.0; input.len()];
    for by in (0..height).step_by(BLOCK) {
        for bx in (0..width).step_by(BLOCK) {
            let mut block = [[0.0; BLOCK]; BLOCK];
            for (r, row) in block.iter_mut().enumerate() {
                let start = (by + r) * width + bx;
                row.copy_from_slice(&input[start..start + BLOCK]);
            }
            let res = f(&block);
            for (r, row) in res.iter().enumerate() {
                let start = (by + r) * width + bx;
                out[start..start + BLOCK].copy_from_slice(row);
            }
        }
    }
    out
}

pub fn forward_block_dct(image: &GrayImage) -> Result<BlockDctPlane> {
    let samples: Vec<f64> = image.pixels().iter().map(|&p| f64::from(p)).collect();
    BlockDctPlane::from_samples(image.width(), image.height(), &samples)
}

/// Inverse transform followed by pixel quantization.
pub fn inverse_block_dct(plane: &BlockDctPlane) -> GrayImage {
    let data = plane.inverse_samples().into_iter().map(quantize).collect();
    GrayImage::new(plane.width, plane.height, data).expect("plane dims")
}

/// Round half away from zero, then clamp to [0, 255].
pub fn quantize(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// Collects the masked coefficients in the canonical layout.
pub fn gather_midband(plane: &BlockDctPlane, mask: &MidbandMask) -> CoeffStream {
    let mut values = Vec::with_capacity(plane.num_blocks() * mask.len());
    for block in 0..plane.num_blocks() {
        for p in mask.positions() {
            values.push(plane.coeff(block, p.row, p.col));
        }
    }
    CoeffStream::new(values)
}

/// Writes `stream` back into the masked positions of `plane`.
pub fn scatter_midband(
    mut plane: BlockDctPlane,
    stream: &CoeffStream,
    mask: &MidbandMask,
) -> Result<BlockDctPlane> {
    let expected = plane.num_blocks() * mask.len();
    if stream.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            actual: stream.len(),
        });
    }
    let mut values = stream.values().iter();
    for block in 0..plane.num_blocks() {
        for p in mask.positions() {
            let idx = plane.index(block, p.row, p.col);
            plane.coeffs[idx] = *values.next().expect("length checked");
        }
    }
    Ok(plane)
}
