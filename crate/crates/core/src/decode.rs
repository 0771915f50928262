//! Blind maximum-likelihood bit decisions.
//!
//! Conditioned on the bit `b`, a received coefficient is Laplacian with
//! scale `s (1 + alpha (2b - 1) w)` (clean channel) or the sum of such a
//! Laplacian and Laplacian noise of scale `s_n` (noisy channel). Because
//! every chip is `+/-1`, the per-chip log-likelihood ratio is always
//! `w * D(z)` for a chip-independent `D`, which is what the simplified
//! rules below exploit. [`decode_llr_oracle`] evaluates the unsimplified
//! likelihood ratio directly and is the reference they are checked against.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::keystream::generate_chips;
use crate::statmodel::{laplace_pdf, mle_scale, sum_density, SumDensityParams, EQUAL_SCALE_TOL};
use crate::transform::{forward_block_dct, gather_midband};
use crate::types::{check_alpha, check_scale, validate_key, BitPayload, GrayImage, WatermarkKey};

/// How a decision was reached when the regular rule could not be used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TraceFlag {
    #[default]
    None,
    /// The simplified noisy statistic was not finite; the oracle decided.
    OracleFallback,
    /// The segment carried no energy; the tie rule decided.
    DegenerateSegment,
}

impl fmt::Display for TraceFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TraceFlag::None => "",
            TraceFlag::OracleFallback => "oracle-fallback",
            TraceFlag::DegenerateSegment => "degenerate",
        })
    }
}

/// One bit decision: `bit = 1` iff `statistic >= threshold`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTrace {
    pub statistic: f64,
    pub threshold: f64,
    pub bit: u8,
    pub per_chip_terms: Option<Vec<f64>>,
    pub flag: TraceFlag,
}

impl DecisionTrace {
    fn decide(statistic: f64, threshold: f64) -> Self {
        Self {
            statistic,
            threshold,
            // ties go to 1
            bit: u8::from(statistic >= threshold),
            per_chip_terms: None,
            flag: TraceFlag::None,
        }
    }

    pub fn margin(&self) -> f64 {
        self.statistic - self.threshold
    }
}

fn check_lengths(z: &[f64], chips: &[i8]) -> Result<()> {
    if z.len() != chips.len() {
        return Err(Error::LengthMismatch {
            expected: z.len(),
            actual: chips.len(),
        });
    }
    if z.is_empty() {
        return Err(Error::InvalidParameter("empty segment".into()));
    }
    Ok(())
}

fn chip_sum(chips: &[i8]) -> f64 {
    chips.iter().map(|&w| f64::from(w)).sum()
}

/// Noise-free rule: `T = sum |y_i| w_i` against
/// `tau = (1 - alpha^2) s / (2 alpha) * ln((1 + alpha) / (1 - alpha)) * sum w_i`.
pub fn decode_clean(y: &[f64], chips: &[i8], alpha: f64, scale_x: f64) -> Result<DecisionTrace> {
    check_lengths(y, chips)?;
    check_alpha(alpha)?;
    check_scale(scale_x)?;
    let statistic: f64 = y
        .iter()
        .zip(chips)
        .map(|(v, &w)| v.abs() * f64::from(w))
        .sum();
    let log_ratio = (alpha.ln_1p() - (-alpha).ln_1p()) * chip_sum(chips);
    let threshold = (1.0 - alpha * alpha) * scale_x / (2.0 * alpha) * log_ratio;
    Ok(DecisionTrace::decide(statistic, threshold))
}

/// `ln g(z; A)` for the host-plus-noise density split into a part that
/// depends on `|z|` and a constant: `ln g = h(|z|) + k`.
#[derive(Debug, Clone, Copy)]
struct SplitLogDensity {
    host: f64,
    noise: f64,
    equal: bool,
}

impl SplitLogDensity {
    fn new(host: f64, noise: f64) -> Self {
        Self {
            host,
            noise,
            equal: (host - noise).abs() / host < EQUAL_SCALE_TOL,
        }
    }

    /// `ln |A e^{-t/A} - B e^{-t/B}|`, or `ln(1 + t/A) - t/A` when `A == B`.
    fn varying(&self, t: f64) -> f64 {
        let (a, b) = (self.host, self.noise);
        if self.equal {
            return (t / a).ln_1p() - t / a;
        }
        let u = a.ln() - t / a;
        let v = b.ln() - t / b;
        let (hi, lo) = if u > v { (u, v) } else { (v, u) };
        hi + (-(lo - hi).exp_m1()).ln()
    }

    /// `-ln(2 |A^2 - B^2|)`, or `-ln(4A)` when `A == B`.
    fn constant(&self) -> f64 {
        let (a, b) = (self.host, self.noise);
        if self.equal {
            -(4.0 * a).ln()
        } else {
            -(2.0 * (a - b).abs() * (a + b)).ln()
        }
    }
}

/// Noisy-channel rule `sum w_i F(z_i) >= tau_n`.
///
/// With `A_pm = s (1 +/- alpha)`, `F(z) = h(|z|; A_+) - h(|z|; A_-)` and
/// `tau_n = (k(A_-) - k(A_+)) sum w_i`, where `h` and `k` split the log of the
/// host-plus-noise density into its `|z|`-dependent and constant parts.
pub fn decode_noisy(
    z: &[f64],
    chips: &[i8],
    alpha: f64,
    scale_x: f64,
    scale_n: f64,
) -> Result<DecisionTrace> {
    check_lengths(z, chips)?;
    check_alpha(alpha)?;
    check_scale(scale_x)?;
    check_scale(scale_n)?;
    let plus = SplitLogDensity::new(scale_x * (1.0 + alpha), scale_n);
    let minus = SplitLogDensity::new(scale_x * (1.0 - alpha), scale_n);
    let statistic: f64 = z
        .iter()
        .zip(chips)
        .map(|(v, &w)| {
            let t = v.abs();
            f64::from(w) * (plus.varying(t) - minus.varying(t))
        })
        .sum();
    let threshold = (minus.constant() - plus.constant()) * chip_sum(chips);
    if !statistic.is_finite() || !threshold.is_finite() {
        let mut trace = decode_llr_oracle(z, chips, alpha, scale_x, Some(scale_n))?;
        trace.flag = TraceFlag::OracleFallback;
        return Ok(trace);
    }
    Ok(DecisionTrace::decide(statistic, threshold))
}

/// Direct log-likelihood ratio `sum ln f(z_i | b=1) - ln f(z_i | b=0)`
/// against zero, with per-chip terms recorded.
pub fn decode_llr_oracle(
    z: &[f64],
    chips: &[i8],
    alpha: f64,
    scale_x: f64,
    scale_n: Option<f64>,
) -> Result<DecisionTrace> {
    check_lengths(z, chips)?;
    check_alpha(alpha)?;
    check_scale(scale_x)?;
    if let Some(s) = scale_n {
        check_scale(s)?;
    }
    let density = |v: f64, scale: f64| -> Result<f64> {
        match scale_n {
            None => laplace_pdf(v, scale),
            Some(sn) => Ok(sum_density(v, SumDensityParams::new(scale, sn)?)),
        }
    };
    let mut terms = Vec::with_capacity(z.len());
    for (i, (&v, &w)) in z.iter().zip(chips).enumerate() {
        let w = f64::from(w);
        let f1 = density(v, scale_x * (1.0 + alpha * w))?;
        let f0 = density(v, scale_x * (1.0 - alpha * w))?;
        if f1 == 0.0 && f0 == 0.0 {
            return Err(Error::VanishingLikelihood(i));
        }
        terms.push(f1.ln() - f0.ln());
    }
    let llr = terms.iter().sum();
    let mut trace = DecisionTrace::decide(llr, 0.0);
    trace.per_chip_terms = Some(terms);
    Ok(trace)
}

/// Exact likelihood ratio under a zero-mean Gaussian host (std `sigma_x`)
/// and Gaussian noise (std `sigma_n`, may be zero). It reduces to the
/// weighted energy detector `sum w_i z_i^2 >= tau_g`.
pub fn decode_gaussian_baseline(
    z: &[f64],
    chips: &[i8],
    alpha: f64,
    sigma_x: f64,
    sigma_n: f64,
) -> Result<DecisionTrace> {
    check_lengths(z, chips)?;
    check_alpha(alpha)?;
    check_scale(sigma_x)?;
    if !(sigma_n >= 0.0 && sigma_n.is_finite()) {
        return Err(Error::InvalidParameter(format!("noise std {sigma_n}")));
    }
    let noise_var = sigma_n * sigma_n;
    let var_hi = sigma_x * sigma_x * (1.0 + alpha) * (1.0 + alpha) + noise_var;
    let var_lo = sigma_x * sigma_x * (1.0 - alpha) * (1.0 - alpha) + noise_var;
    // per chip with w = +1: LLR = c z^2 - d
    let c = 0.5 * (1.0 / var_lo - 1.0 / var_hi);
    let d = 0.5 * (var_hi / var_lo).ln();
    let statistic: f64 = z
        .iter()
        .zip(chips)
        .map(|(v, &w)| f64::from(w) * v * v)
        .sum();
    let threshold = d / c * chip_sum(chips);
    Ok(DecisionTrace::decide(statistic, threshold))
}

/// Decoder selection for image extraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DecoderModel {
    LaplaceClean,
    LaplaceNoisy,
    Gaussian,
}

impl DecoderModel {
    pub const ALL: [DecoderModel; 3] = [
        DecoderModel::LaplaceClean,
        DecoderModel::LaplaceNoisy,
        DecoderModel::Gaussian,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            DecoderModel::LaplaceClean => "laplace-clean",
            DecoderModel::LaplaceNoisy => "laplace-noisy",
            DecoderModel::Gaussian => "gaussian",
        }
    }
}

impl fmt::Display for DecoderModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DecoderModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "clean" | "laplace-clean" => Ok(DecoderModel::LaplaceClean),
            "noisy" | "laplace-noisy" => Ok(DecoderModel::LaplaceNoisy),
            "gauss" | "gaussian" => Ok(DecoderModel::Gaussian),
            _ => Err(Error::InvalidParameter(format!(
                "unknown decoder model `{s}`"
            ))),
        }
    }
}

/// Host scale for the noisy rule: second-moment deconvolution of the
/// received segment, `E z^2 = 2 s^2 (1 + alpha^2) + 2 s_n^2`.
pub fn deconvolved_host_scale(z: &[f64], alpha: f64, scale_n: f64) -> Result<f64> {
    let floor = 1e-6 * mle_scale(z)?;
    let mean_sq = z.iter().map(|v| v * v).sum::<f64>() / z.len() as f64;
    let host_sq = (0.5 * mean_sq - scale_n * scale_n) / (1.0 + alpha * alpha);
    Ok(host_sq.max(floor * floor).sqrt())
}

/// Decodes one segment with parameters estimated from the segment itself.
/// `noise_scale` is the Laplacian scale of the channel noise in the
/// coefficient domain; the Gaussian baseline uses the matching std.
pub fn decode_segment_blind(
    z: &[f64],
    chips: &[i8],
    alpha: f64,
    noise_scale: Option<f64>,
    model: DecoderModel,
) -> Result<DecisionTrace> {
    if z.iter().all(|&v| v == 0.0) {
        let mut trace = DecisionTrace::decide(0.0, 0.0);
        trace.flag = TraceFlag::DegenerateSegment;
        return Ok(trace);
    }
    match model {
        DecoderModel::LaplaceClean => decode_clean(z, chips, alpha, mle_scale(z)?),
        DecoderModel::LaplaceNoisy => {
            let scale_n = noise_scale.ok_or_else(|| {
                Error::InvalidParameter("the noisy decoder needs a noise scale".into())
            })?;
            let scale_x = deconvolved_host_scale(z, alpha, scale_n)?;
            decode_noisy(z, chips, alpha, scale_x, scale_n)
        }
        DecoderModel::Gaussian => {
            let sigma_n = noise_scale.map_or(0.0, |s| s * std::f64::consts::SQRT_2);
            let mean_sq = z.iter().map(|v| v * v).sum::<f64>() / z.len() as f64;
            let host_var =
                ((mean_sq - sigma_n * sigma_n) / (1.0 + alpha * alpha)).max(1e-12 * mean_sq);
            decode_gaussian_baseline(z, chips, alpha, host_var.sqrt(), sigma_n)
        }
    }
}

#[derive(Debug, Clone)]
pub struct Extraction {
    pub payload: BitPayload,
    pub traces: Vec<DecisionTrace>,
}

impl Extraction {
    /// `bit_index,statistic,threshold,bit,flag`
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("bit_index,statistic,threshold,bit,flag\n");
        for (i, t) in self.traces.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                i, t.statistic, t.threshold, t.bit, t.flag
            ));
        }
        out
    }
}

/// Blind extraction of `bit_count` bits.
pub fn extract_image(
    image: &GrayImage,
    key: &WatermarkKey,
    bit_count: usize,
    noise_scale: Option<f64>,
    model: DecoderModel,
) -> Result<Extraction> {
    let region = image.block_region();
    let capacity = validate_key(key, (region.width, region.height))?;
    if bit_count > capacity {
        return Err(Error::CapacityExceeded {
            bits: bit_count,
            capacity,
        });
    }
    if let Some(s) = noise_scale {
        check_scale(s)?;
    }
    let plane = forward_block_dct(&image.crop(region))?;
    let stream = gather_midband(&plane, &key.mask);
    let n = key.chips_per_bit;
    let chips = generate_chips(key, bit_count * n);
    let traces = (0..bit_count)
        .into_par_iter()
        .map(|k| {
            decode_segment_blind(
                stream.segment(k, n),
                chips.segment(k, n),
                key.alpha,
                noise_scale,
                model,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let payload = BitPayload::new(traces.iter().map(|t| t.bit).collect())?;
    Ok(Extraction { payload, traces })
}
