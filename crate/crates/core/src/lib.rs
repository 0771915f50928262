//! Multiplicative spread-spectrum watermarking of grayscale images in the
//! 4x4 block-DCT mid band, with maximum-likelihood decoders built on
//! Laplacian host and noise models.
//!
//! Each payload bit `b` is spread over `N` mid-band coefficients with a
//! keyed +/-1 chip sequence `w`:
//!
//! ```text
//! y_i = x_i (1 + alpha (2b - 1) w_i)
//! ```
//!
//! Extraction is blind: only the key file and the received image are needed.
//!
//! ```
//! use lapmark::{embed_image, extract_image, BitPayload, DecoderModel, GrayImage, WatermarkKey};
//!
//! let cover = GrayImage::from_fn(64, 64, |x, y| ((x * 7 + y * 13) % 200 + 20) as u8);
//! let key = WatermarkKey::new(2024, 0.5, 64).unwrap();
//! let payload = BitPayload::from_hex("b").unwrap();
//! let marked = embed_image(&cover, &payload, &key).unwrap();
//! let out = extract_image(&marked.watermarked, &key, 4, None, DecoderModel::LaplaceClean).unwrap();
//! assert_eq!(out.payload.len(), 4);
//! ```

pub mod attacks;
pub mod decode;
pub mod embed;
pub mod error;
pub mod harness;
pub mod io;
pub mod keystream;
pub mod metrics;
pub mod statmodel;
pub mod transform;
pub mod types;

pub use attacks::{AttackKind, AttackSpec, NoiseDomain};
pub use decode::{
    decode_clean, decode_gaussian_baseline, decode_llr_oracle, decode_noisy, extract_image,
    DecisionTrace, DecoderModel, Extraction,
};
pub use embed::{embed_image, embed_stream, EmbedResult};
pub use error::{Error, Result};
pub use keystream::{generate_chips, SpreadSequence};
pub use statmodel::{fit_report, mle_scale, sum_density, FitReport, SumDensityParams};
pub use transform::{
    forward_block_dct, gather_midband, inverse_block_dct, scatter_midband, BlockDctPlane,
};
pub use types::{
    validate_key, BitPayload, BlockPos, CoeffStream, GrayImage, LaplacianModel, MidbandMask,
    WatermarkKey,
};
