//! Transparency and error-rate metrics.

use crate::error::{Error, Result};
use crate::types::{BitPayload, GrayImage};

/// Header of every metrics CSV report.
pub const CSV_HEADER: &str = "metric,image,alpha,n,param,value";

/// One row of a metrics report.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub metric: String,
    pub image: String,
    pub alpha: f64,
    pub n: usize,
    pub param: f64,
    pub value: f64,
}

impl MetricRow {
    pub fn new(
        metric: impl Into<String>,
        image: impl Into<String>,
        alpha: f64,
        n: usize,
        param: f64,
        value: f64,
    ) -> Self {
        Self {
            metric: metric.into(),
            image: image.into(),
            alpha,
            n,
            param,
            value,
        }
    }

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            csv_field(&self.metric),
            csv_field(&self.image),
            self.alpha,
            self.n,
            self.param,
            fmt_value(self.value)
        )
    }
}

fn fmt_value(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else {
        v.to_string()
    }
}

/// Strips characters that would break the unquoted CSV layout.
pub fn csv_field(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c == ',' || c == '\n' || c == '\r' {
                ' '
            } else {
                c
            }
        })
        .collect()
}

/// Renders rows with the header, LF line endings.
pub fn to_csv(rows: &[MetricRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv());
        out.push('\n');
    }
    out
}

/// Mean squared difference of two equal-length real sequences.
pub fn mse(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::InvalidParameter("mse of empty input".into()));
    }
    let sum: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(sum / a.len() as f64)
}

pub fn image_mse(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    if a.dims() != b.dims() {
        return Err(Error::dims(a.dims(), b.dims()));
    }
    let sum: u64 = a
        .pixels()
        .iter()
        .zip(b.pixels())
        .map(|(&x, &y)| {
            let d = i64::from(x) - i64::from(y);
            (d * d) as u64
        })
        .sum();
    Ok(sum as f64 / a.pixels().len() as f64)
}

/// `10 log10(255^2 / mse)`; infinite when `mse == 0`.
pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (255.0f64 * 255.0 / mse).log10()
    }
}

pub fn psnr(cover: &GrayImage, test: &GrayImage) -> Result<f64> {
    image_mse(cover, test).map(psnr_from_mse)
}

/// Document-to-watermark ratio `10 log10(sum x^2 / sum (y - x)^2)` in dB.
pub fn dwr(cover: &[f64], marked: &[f64]) -> Result<f64> {
    if cover.len() != marked.len() {
        return Err(Error::LengthMismatch {
            expected: cover.len(),
            actual: marked.len(),
        });
    }
    let host: f64 = cover.iter().map(|x| x * x).sum();
    if host == 0.0 {
        return Err(Error::InvalidParameter("zero cover energy".into()));
    }
    let wm: f64 = cover
        .iter()
        .zip(marked)
        .map(|(x, y)| (y - x) * (y - x))
        .sum();
    Ok(if wm == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (host / wm).log10()
    })
}

/// The analytic value `-20 log10(alpha)`.
pub fn dwr_analytic(alpha: f64) -> f64 {
    -20.0 * alpha.log10()
}

/// Fraction of differing bits.
pub fn ber(sent: &BitPayload, received: &BitPayload) -> Result<f64> {
    if sent.len() != received.len() {
        return Err(Error::LengthMismatch {
            expected: sent.len(),
            actual: received.len(),
        });
    }
    if sent.is_empty() {
        return Err(Error::InvalidParameter("empty payload".into()));
    }
    Ok(bit_errors(sent, received) as f64 / sent.len() as f64)
}

pub fn bit_errors(sent: &BitPayload, received: &BitPayload) -> usize {
    sent.bits()
        .iter()
        .zip(received.bits())
        .filter(|(a, b)| a != b)
        .count()
}

pub fn recovery_rate(sent: &BitPayload, received: &BitPayload) -> Result<f64> {
    ber(sent, received).map(|b| 1.0 - b)
}

/// Wilson score interval at 95% confidence for `errors` out of `trials`.
pub fn wilson_interval(errors: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054;
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = z * z;
    let center = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n);
    let lo = if errors == 0 {
        0.0
    } else {
        (center - half).max(0.0)
    };
    let hi = if errors == trials {
        1.0
    } else {
        (center + half).min(1.0)
    };
    (lo, hi)
}
