//! Laplacian host and noise model.
//!
//! Every density here is written in scale form, `exp(-|t|/b) / (2b)`; the
//! rate `lambda = 1/b` only appears at API edges ([`crate::LaplacianModel`]).
//!
//! DCT coefficients are classically modelled by a generalized Gaussian
//! `A exp(-|beta (x - m)|^c)`; the Laplacian is its `c = 1` member and is
//! the only one implemented.

use crate::error::{Error, Result};
use crate::types::check_scale;

/// Relative scale gap below which [`sum_density`] switches to the equal-scale limit.
pub const EQUAL_SCALE_TOL: f64 = 1e-9;

pub fn laplace_pdf(t: f64, scale: f64) -> Result<f64> {
    check_scale(scale)?;
    Ok((-t.abs() / scale).exp() / (2.0 * scale))
}

pub fn laplace_cdf(t: f64, scale: f64) -> f64 {
    if t < 0.0 {
        0.5 * (t / scale).exp()
    } else {
        1.0 - 0.5 * (-t / scale).exp()
    }
}

pub fn normal_cdf(t: f64, sigma: f64) -> f64 {
    0.5 * (1.0 + libm::erf(t / (sigma * std::f64::consts::SQRT_2)))
}

/// Maximum-likelihood Laplacian scale of zero-mean samples: the mean absolute value.
pub fn mle_scale(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::DegenerateSample);
    }
    let sum: f64 = samples.iter().map(|v| v.abs()).sum();
    if sum == 0.0 || !sum.is_finite() {
        return Err(Error::DegenerateSample);
    }
    Ok(sum / samples.len() as f64)
}

/// Scales of two independent zero-mean Laplacians whose sum is modelled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumDensityParams {
    pub scale_a: f64,
    pub scale_b: f64,
}

impl SumDensityParams {
    pub fn new(scale_a: f64, scale_b: f64) -> Result<Self> {
        check_scale(scale_a)?;
        check_scale(scale_b)?;
        Ok(Self { scale_a, scale_b })
    }

    fn nearly_equal(&self) -> bool {
        (self.scale_a - self.scale_b).abs() / self.scale_a < EQUAL_SCALE_TOL
    }
}

/// Density of `X + N` with `X ~ Laplace(a)`, `N ~ Laplace(b)`:
///
/// `f(z) = (a e^{-|z|/a} - b e^{-|z|/b}) / (2 (a^2 - b^2))`
///
/// and `(1 + |z|/a) e^{-|z|/a} / (4a)` when `a == b`.
pub fn sum_density(z: f64, params: SumDensityParams) -> f64 {
    let SumDensityParams {
        scale_a: a,
        scale_b: b,
    } = params;
    let t = z.abs();
    if params.nearly_equal() {
        return (1.0 + t / a) * (-t / a).exp() / (4.0 * a);
    }
    (a * (-t / a).exp() - b * (-t / b).exp()) / (2.0 * (a * a - b * b))
}

/// `ln` of [`sum_density`], evaluated without underflow or cancellation.
pub fn ln_sum_density(z: f64, params: SumDensityParams) -> f64 {
    let t = z.abs();
    if params.nearly_equal() {
        let a = params.scale_a;
        return (t / a).ln_1p() - t / a - (4.0 * a).ln();
    }
    let (big, small) = if params.scale_a > params.scale_b {
        (params.scale_a, params.scale_b)
    } else {
        (params.scale_b, params.scale_a)
    };
    // big e^{-t/big} (1 - (small/big) e^{-t (1/small - 1/big)}) / (2 (big^2 - small^2))
    let gap = big - small;
    let exponent = (-gap / big).ln_1p() - t * gap / (big * small);
    let bracket = -exponent.exp_m1();
    big.ln() - t / big + bracket.ln() - (2.0 * gap * (big + small)).ln()
}

/// Goodness of fit of a zero-mean Laplacian (and, for comparison, a
/// zero-mean Gaussian) to a coefficient sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitReport {
    pub scale: f64,
    /// Sup distance between the empirical CDF and the fitted Laplacian CDF.
    pub ks_laplace: f64,
    pub sigma: f64,
    /// Same distance for the moment-fitted Gaussian.
    pub ks_gauss: f64,
}

impl FitReport {
    /// `image,scale,ks_laplace,ks_gauss`
    pub fn csv_row(&self, image: &str) -> String {
        format!(
            "{},{},{},{}",
            image, self.scale, self.ks_laplace, self.ks_gauss
        )
    }
}

pub const FIT_CSV_HEADER: &str = "image,scale,ks_laplace,ks_gauss";

pub fn fit_report(samples: &[f64]) -> Result<FitReport> {
    let scale = mle_scale(samples)?;
    let sigma = (samples.iter().map(|v| v * v).sum::<f64>() / samples.len() as f64).sqrt();
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(FitReport {
        scale,
        ks_laplace: ks_distance(&sorted, |t| laplace_cdf(t, scale)),
        sigma,
        ks_gauss: ks_distance(&sorted, |t| normal_cdf(t, sigma)),
    })
}

/// Kolmogorov-Smirnov statistic of sorted data against `cdf`.
pub fn ks_distance(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        // step over ties so the empirical CDF jumps once per distinct value
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let f = cdf(sorted[i]);
        d = d
            .max((f - i as f64 / n).abs())
            .max(((j + 1) as f64 / n - f).abs());
        i = j + 1;
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::keystream::SplitMix64;

    fn trapezoid(f: impl Fn(f64) -> f64, lo: f64, hi: f64, steps: usize) -> f64 {
        let h = (hi - lo) / steps as f64;
        let inner: f64 = (1..steps).map(|i| f(lo + i as f64 * h)).sum();
        h * (inner + 0.5 * (f(lo) + f(hi)))
    }

    #[test]
    fn pdf_values() {
        assert_eq!(laplace_pdf(0.0, 1.0).unwrap(), 0.5);
        assert_eq!(
            laplace_pdf(-3.0, 1.0).unwrap(),
            laplace_pdf(3.0, 1.0).unwrap()
        );
        assert!(laplace_pdf(1.0, 0.0).is_err());
        assert!(laplace_pdf(1.0, -2.0).is_err());
    }

    #[test]
    fn pdf_normalizes() {
        for scale in [0.3, 1.0, 7.5] {
            // odd step count puts a node on the cusp at zero
            let total = trapezoid(
                |t| laplace_pdf(t, scale).unwrap(),
                -40.0 * scale,
                40.0 * scale,
                400_000,
            );
            assert!((total - 1.0).abs() < 1e-6, "scale {scale}: {total}");
        }
    }

    #[test]
    fn mle_examples() {
        assert_eq!(mle_scale(&[1.0, 3.0]).unwrap(), 2.0);
        assert_eq!(mle_scale(&[-2.0, 2.0]).unwrap(), 2.0);
        assert!(matches!(
            mle_scale(&[0.0, 0.0]),
            Err(Error::DegenerateSample)
        ));
        assert!(mle_scale(&[]).is_err());
    }

    #[test]
    fn mle_recovers_scale() {
        let mut rng = SplitMix64::new(21);
        let samples: Vec<f64> = (0..100_000).map(|_| rng.next_laplace(3.0)).collect();
        let est = mle_scale(&samples).unwrap();
        assert!((est - 3.0).abs() < 0.05, "{est}");
    }

    #[test]
    fn sum_density_examples() {
        let p = SumDensityParams::new(2.0, 1.0).unwrap();
        assert!((sum_density(0.0, p) - 1.0 / 6.0).abs() < 1e-15);
        let eq = SumDensityParams::new(1.0, 1.0).unwrap();
        assert_eq!(sum_density(0.0, eq), 0.25);
        assert!(SumDensityParams::new(0.0, 1.0).is_err());
    }

    #[test]
    fn sum_density_normalizes() {
        for (a, b) in [
            (2.0, 1.0),
            (1.0, 1.0),
            (0.5, 3.0),
            (10.0, 0.1),
            (1.0, 1.0 + 1e-12),
        ] {
            let p = SumDensityParams::new(a, b).unwrap();
            let span = 40.0 * f64::max(a, b);
            let total = trapezoid(|z| sum_density(z, p), -span, span, 800_001);
            assert!((total - 1.0).abs() < 1e-6, "({a},{b}): {total}");
        }
    }

    #[test]
    fn sum_density_continuous_at_equal_scales() {
        for a in [0.5, 1.0, 4.0] {
            let near = SumDensityParams::new(a, a * (1.0 + 1e-7)).unwrap();
            let eq = SumDensityParams::new(a, a).unwrap();
            for i in 0..50 {
                let z = i as f64 * 0.2 * a;
                let d = (sum_density(z, near) - sum_density(z, eq)).abs();
                assert!(d < 1e-6, "a={a} z={z}: {d}");
            }
        }
    }

    #[test]
    fn ln_sum_density_agrees_and_survives_tails() {
        for (a, b) in [
            (2.0, 1.0),
            (1.0, 2.0),
            (1.0, 1.0),
            (3.0, 3.0 * (1.0 + 1e-6)),
            (0.2, 5.0),
        ] {
            let p = SumDensityParams::new(a, b).unwrap();
            for i in 0..40 {
                let z = -10.0 + i as f64 * 0.5;
                let direct = sum_density(z, p).ln();
                let stable = ln_sum_density(z, p);
                assert!(
                    (direct - stable).abs() < 1e-8,
                    "({a},{b}) z={z}: {direct} {stable}"
                );
            }
            let far = ln_sum_density(1e5, p);
            assert!(far.is_finite() && far < -1e3);
        }
    }

    #[test]
    fn fit_separates_laplace_from_uniform() {
        let mut rng = SplitMix64::new(8);
        let lap: Vec<f64> = (0..100_000).map(|_| rng.next_laplace(1.0)).collect();
        let rep = fit_report(&lap).unwrap();
        assert!(rep.ks_laplace < 0.01, "{rep:?}");
        assert!(rep.ks_gauss > rep.ks_laplace);

        let uni: Vec<f64> = (0..100_000)
            .map(|_| 2.0 * rng.next_open01() - 1.0)
            .collect();
        let rep = fit_report(&uni).unwrap();
        assert!(rep.ks_laplace > 0.05, "{rep:?}");
    }

    #[test]
    fn ks_distance_small_cases() {
        // single point at the median: empirical CDF jumps 0 -> 1 where F = 0.5
        assert!((ks_distance(&[0.0], |t| laplace_cdf(t, 1.0)) - 0.5).abs() < 1e-15);
        let ties = [1.0, 1.0, 1.0];
        assert!(
            (ks_distance(&ties, |t| laplace_cdf(t, 1.0)) - laplace_cdf(1.0, 1.0)).abs() < 1e-15
        );
    }

    #[test]
    fn csv_row_format() {
        let r = FitReport {
            scale: 2.5,
            ks_laplace: 0.01,
            sigma: 3.0,
            ks_gauss: 0.1,
        };
        assert_eq!(r.csv_row("camera"), "camera,2.5,0.01,0.1");
    }
}
