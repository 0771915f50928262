//! Domain types shared by the embedder, decoder and harness.
//!
//! Layout contract: an image is split into non-overlapping 4x4 blocks in
//! raster order (left to right, top to bottom). Within a block the masked
//! coefficient positions are visited in zig-zag order. Bit `k` of a payload
//! occupies stream entries `[k*N, (k+1)*N)` where `N` is the number of chips
//! per bit; trailing entries that do not fill a whole segment are left alone.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Side length of a transform block.
pub const BLOCK: usize = 4;

/// Number of coefficients in a block.
pub const BLOCK_AREA: usize = BLOCK * BLOCK;

/// An 8-bit single channel raster, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl fmt::Debug for GrayImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GrayImage")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish_non_exhaustive()
    }
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::LengthMismatch {
                expected: width * height,
                actual: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn pixels(&self) -> &[u8] {
        &self.data
    }

    pub fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.data
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    /// The centred region whose sides are multiples of the block size.
    pub fn block_region(&self) -> Region {
        Region::centered(self.width, self.height)
    }

    pub fn crop(&self, region: Region) -> GrayImage {
        let mut data = Vec::with_capacity(region.width * region.height);
        for y in region.y..region.y + region.height {
            let row = y * self.width;
            data.extend_from_slice(&self.data[row + region.x..row + region.x + region.width]);
        }
        GrayImage {
            width: region.width,
            height: region.height,
            data,
        }
    }

    /// Writes `patch` over `region`; pixels outside it are untouched.
    pub fn paste(&mut self, region: Region, patch: &GrayImage) -> Result<()> {
        if patch.dims() != (region.width, region.height) {
            return Err(Error::dims((region.width, region.height), patch.dims()));
        }
        if region.x + region.width > self.width || region.y + region.height > self.height {
            return Err(Error::InvalidParameter("paste region outside image".into()));
        }
        for y in 0..region.height {
            let dst = (region.y + y) * self.width + region.x;
            self.data[dst..dst + region.width]
                .copy_from_slice(&patch.data[y * region.width..(y + 1) * region.width]);
        }
        Ok(())
    }
}

/// Axis-aligned rectangle in pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Region {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

impl Region {
    /// Largest block-aligned region, centred (odd remainders favour the top/left border).
    pub fn centered(width: usize, height: usize) -> Self {
        let w = width - width % BLOCK;
        let h = height - height % BLOCK;
        Self {
            x: (width - w) / 2,
            y: (height - h) / 2,
            width: w,
            height: h,
        }
    }

    pub fn num_blocks(&self) -> usize {
        (self.width / BLOCK) * (self.height / BLOCK)
    }
}

/// Coefficient position inside a 4x4 block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockPos {
    pub row: usize,
    pub col: usize,
}

impl BlockPos {
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }

    pub fn is_dc(&self) -> bool {
        self.row == 0 && self.col == 0
    }

    /// Row-major offset within the block.
    pub fn offset(&self) -> usize {
        self.row * BLOCK + self.col
    }

    /// JPEG-style zig-zag rank.
    pub fn zigzag_rank(&self) -> usize {
        let d = self.row + self.col;
        let before: usize = (0..d).map(diagonal_len).sum();
        let lo = d.saturating_sub(BLOCK - 1);
        let within = if d.is_multiple_of(2) {
            // even diagonals run bottom-left to top-right
            (d.min(BLOCK - 1)) - self.row
        } else {
            self.row - lo
        };
        before + within
    }
}

fn diagonal_len(d: usize) -> usize {
    if d < BLOCK {
        d + 1
    } else {
        2 * BLOCK - 1 - d
    }
}

/// Set of coefficient positions carrying the watermark, kept in zig-zag order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MidbandMask {
    positions: Vec<BlockPos>,
}

impl MidbandMask {
    pub fn new(positions: impl IntoIterator<Item = BlockPos>) -> Result<Self> {
        let mut positions: Vec<BlockPos> = positions.into_iter().collect();
        if positions.is_empty() {
            return Err(Error::EmptyMask);
        }
        for p in &positions {
            if p.row >= BLOCK || p.col >= BLOCK || p.is_dc() {
                return Err(Error::InvalidMaskPosition(p.row, p.col));
            }
        }
        positions.sort_by_key(BlockPos::zigzag_rank);
        if positions.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::KeyFormat("duplicate mask position".into()));
        }
        Ok(Self { positions })
    }

    pub fn positions(&self) -> &[BlockPos] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

impl Default for MidbandMask {
    /// The anti-diagonals `row + col` in {2, 3}.
    fn default() -> Self {
        let positions = [(0, 2), (1, 1), (2, 0), (0, 3), (1, 2), (2, 1), (3, 0)]
            .into_iter()
            .map(|(r, c)| BlockPos::new(r, c));
        MidbandMask::new(positions).expect("default mask is valid")
    }
}

impl fmt::Display for MidbandMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.positions.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, "{},{}", p.row, p.col)?;
        }
        Ok(())
    }
}

impl FromStr for MidbandMask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut positions = Vec::new();
        for pair in s.split(';').filter(|p| !p.is_empty()) {
            let (r, c) = pair
                .split_once(',')
                .ok_or_else(|| Error::KeyFormat(format!("bad mask entry `{pair}`")))?;
            let parse = |v: &str| {
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::KeyFormat(format!("bad mask entry `{pair}`")))
            };
            positions.push(BlockPos::new(parse(r)?, parse(c)?));
        }
        MidbandMask::new(positions)
    }
}

/// Everything the embedder and decoder must share.
#[derive(Debug, Clone, PartialEq)]
pub struct WatermarkKey {
    pub seed: u64,
    pub alpha: f64,
    pub chips_per_bit: usize,
    pub mask: MidbandMask,
}

impl WatermarkKey {
    pub fn new(seed: u64, alpha: f64, chips_per_bit: usize) -> Result<Self> {
        let key = Self {
            seed,
            alpha,
            chips_per_bit,
            mask: MidbandMask::default(),
        };
        key.check()?;
        Ok(key)
    }

    pub fn with_mask(mut self, mask: MidbandMask) -> Self {
        self.mask = mask;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        self.alpha = alpha;
        self.check()?;
        Ok(self)
    }

    /// Parameter checks that do not depend on the image.
    pub fn check(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        if self.chips_per_bit == 0 {
            return Err(Error::ZeroChipsPerBit);
        }
        if self.mask.is_empty() {
            return Err(Error::EmptyMask);
        }
        if let Some(p) = self.mask.positions().iter().find(|p| p.is_dc()) {
            return Err(Error::InvalidMaskPosition(p.row, p.col));
        }
        Ok(())
    }

    /// Number of whole bits an image of the given block-aligned size can carry.
    /// Bits that fit in an image of these dimensions after block cropping.
    pub fn capacity(&self, dims: (usize, usize)) -> Result<usize> {
        validate_key(self, (dims.0 / BLOCK * BLOCK, dims.1 / BLOCK * BLOCK))
    }

    pub fn to_record(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for WatermarkKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // f64 Display is the shortest string that parses back to the same value.
        write!(
            f,
            "v1 seed={} alpha={} n={} mask={}",
            self.seed, self.alpha, self.chips_per_bit, self.mask
        )
    }
}

impl FromStr for WatermarkKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let line = s.trim_end_matches(['\n', '\r']);
        let mut fields = line.split(' ');
        if fields.next() != Some("v1") {
            return Err(Error::KeyFormat("missing `v1` tag".into()));
        }
        let (mut seed, mut alpha, mut n, mut mask) = (None, None, None, None);
        for field in fields {
            let (name, value) = field
                .split_once('=')
                .ok_or_else(|| Error::KeyFormat(format!("bad field `{field}`")))?;
            let bad = || Error::KeyFormat(format!("bad value in `{field}`"));
            match name {
                "seed" => seed = Some(value.parse::<u64>().map_err(|_| bad())?),
                "alpha" => alpha = Some(value.parse::<f64>().map_err(|_| bad())?),
                "n" => n = Some(value.parse::<usize>().map_err(|_| bad())?),
                "mask" => mask = Some(value.parse::<MidbandMask>()?),
                _ => return Err(Error::KeyFormat(format!("unknown field `{name}`"))),
            }
        }
        let missing = |f: &str| Error::KeyFormat(format!("missing `{f}`"));
        let key = WatermarkKey {
            seed: seed.ok_or_else(|| missing("seed"))?,
            alpha: alpha.ok_or_else(|| missing("alpha"))?,
            chips_per_bit: n.ok_or_else(|| missing("n"))?,
            mask: mask.ok_or_else(|| missing("mask"))?,
        };
        key.check()?;
        Ok(key)
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}

/// Validates `key` against an image of `dims` and returns its bit capacity.
pub fn validate_key(key: &WatermarkKey, dims: (usize, usize)) -> Result<usize> {
    key.check()?;
    let (width, height) = dims;
    if width % BLOCK != 0 || height % BLOCK != 0 {
        return Err(Error::InvalidParameter(format!(
            "image dimensions {width}x{height} are not multiples of {BLOCK}"
        )));
    }
    let blocks = (width / BLOCK) * (height / BLOCK);
    let capacity = blocks * key.mask.len() / key.chips_per_bit;
    if capacity == 0 {
        return Err(Error::ZeroCapacity {
            width,
            height,
            chips_per_bit: key.chips_per_bit,
        });
    }
    Ok(capacity)
}

/// Message bits, each 0 or 1.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BitPayload {
    bits: Vec<u8>,
}

impl BitPayload {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidParameter(format!("bit value {b}")));
        }
        Ok(Self { bits })
    }

    pub fn from_bools(bits: impl IntoIterator<Item = bool>) -> Self {
        Self {
            bits: bits.into_iter().map(u8::from).collect(),
        }
    }

    /// Most significant bit of each byte first.
    pub fn from_bytes(bytes: &[u8]) -> Self {
        Self::from_bools(
            bytes
                .iter()
                .flat_map(|b| (0..8).rev().map(move |i| (b >> i) & 1 == 1)),
        )
    }

    /// Four bits per hex digit, most significant first.
    pub fn from_hex(hex: &str) -> Result<Self> {
        let mut bits = Vec::with_capacity(hex.len() * 4);
        for ch in hex.trim().chars() {
            let v = ch
                .to_digit(16)
                .ok_or_else(|| Error::InvalidParameter(format!("invalid hex digit `{ch}`")))?;
            bits.extend((0..4).rev().map(|i| ((v >> i) & 1) as u8));
        }
        Ok(Self { bits })
    }

    /// Lowercase hex; a trailing partial nibble is zero-padded.
    pub fn to_hex(&self) -> String {
        self.bits
            .chunks(4)
            .map(|nib| {
                let v = nib
                    .iter()
                    .chain(std::iter::repeat(&0))
                    .take(4)
                    .fold(0u32, |acc, &b| (acc << 1) | u32::from(b));
                char::from_digit(v, 16).expect("nibble")
            })
            .collect()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

/// Ordered mid-band coefficients in the canonical layout.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CoeffStream(pub Vec<f64>);

impl CoeffStream {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The `index`-th segment of `chips_per_bit` coefficients.
    pub fn segment(&self, index: usize, chips_per_bit: usize) -> &[f64] {
        &self.0[index * chips_per_bit..(index + 1) * chips_per_bit]
    }
}

/// Laplacian host (and optional noise) model in scale form:
/// density `exp(-|t| / scale) / (2 * scale)`. The rate is `1 / scale`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplacianModel {
    scale_x: f64,
    scale_n: Option<f64>,
}

impl LaplacianModel {
    pub fn new(scale_x: f64, scale_n: Option<f64>) -> Result<Self> {
        check_scale(scale_x)?;
        if let Some(s) = scale_n {
            check_scale(s)?;
        }
        Ok(Self { scale_x, scale_n })
    }

    pub fn from_rates(rate_x: f64, rate_n: Option<f64>) -> Result<Self> {
        Self::new(1.0 / rate_x, rate_n.map(|r| 1.0 / r))
    }

    pub fn scale_x(&self) -> f64 {
        self.scale_x
    }

    pub fn scale_n(&self) -> Option<f64> {
        self.scale_n
    }

    pub fn rate_x(&self) -> f64 {
        1.0 / self.scale_x
    }

    pub fn rate_n(&self) -> Option<f64> {
        self.scale_n.map(|s| 1.0 / s)
    }
}

pub(crate) fn check_scale(scale: f64) -> Result<()> {
    if scale > 0.0 && scale.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "scale must be positive and finite, got {scale}"
        )))
    }
}
