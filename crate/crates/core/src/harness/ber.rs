use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;

use super::{fit_image, load_dataset, random_payload, Config, SweepReport};
use crate::attacks::{laplace_noise_attack, laplace_noise_samples, NoiseDomain};
use crate::decode::{
    decode_clean, decode_gaussian_baseline, decode_noisy, extract_image, DecoderModel,
};
use crate::embed::{embed_image, embed_in_place};
use crate::error::{Error, Result};
use crate::io::read_image;
use crate::keystream::{chips_from_seed, derive_seed, SplitMix64};
use crate::metrics::{bit_errors, wilson_interval, MetricRow};
use crate::types::{MidbandMask, WatermarkKey};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BerMode {
    /// Laplacian hosts drawn at a fixed scale; noise added to coefficients.
    Synthetic,
    /// Real images, noise injected in the DCT domain, blind extraction.
    Image,
}

impl FromStr for BerMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "synthetic" => Ok(BerMode::Synthetic),
            "image" => Ok(BerMode::Image),
            _ => Err(Error::Config(format!("unknown mode `{s}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BerSweepConfig {
    pub mode: BerMode,
    pub snr_db: Vec<f64>,
    pub alphas: Vec<f64>,
    pub n_values: Vec<usize>,
    /// Bits per cell (synthetic) or keys per image (image mode).
    pub trials: usize,
    pub models: Vec<DecoderModel>,
    /// Synthetic host scale; taken from `reference_image` when that is set.
    pub host_scale: f64,
    pub reference_image: Option<PathBuf>,
    pub dataset: Option<PathBuf>,
    pub seed: u64,
}

impl Default for BerSweepConfig {
    fn default() -> Self {
        Self {
            mode: BerMode::Synthetic,
            snr_db: vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0],
            alphas: vec![0.06],
            n_values: vec![8000],
            trials: 1000,
            models: DecoderModel::ALL.to_vec(),
            host_scale: 10.0,
            reference_image: None,
            dataset: None,
            seed: 1,
        }
    }
}

impl BerSweepConfig {
    pub fn from_config(cfg: &Config) -> Result<Self> {
        let d = Self::default();
        let out = Self {
            mode: cfg.get_or("mode", d.mode)?,
            snr_db: cfg.list_or("snr_db", d.snr_db)?,
            alphas: cfg.list_or("alphas", d.alphas)?,
            n_values: cfg.list_or("n_values", d.n_values)?,
            trials: cfg.get_or("trials", d.trials)?,
            models: cfg.list_or("models", d.models)?,
            host_scale: cfg.get_or("host_scale", d.host_scale)?,
            reference_image: cfg.get_path("reference_image"),
            dataset: cfg.get_path("dataset"),
            seed: cfg.get_or("seed", d.seed)?,
        };
        if out.trials == 0 {
            return Err(Error::Config("`trials` must be at least 1".into()));
        }
        Ok(out)
    }
}

/// Bit errors per model over `trials` bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BerCounts {
    pub trials: u64,
    pub errors: Vec<(DecoderModel, u64)>,
}

impl BerCounts {
    pub fn ber(&self, model: DecoderModel) -> Option<f64> {
        self.errors
            .iter()
            .find(|(m, _)| *m == model)
            .map(|&(_, e)| e as f64 / self.trials as f64)
    }

    fn rows(&self, image: &str, alpha: f64, n: usize, snr: f64) -> Vec<MetricRow> {
        let mut rows = vec![MetricRow::new(
            "trials",
            image,
            alpha,
            n,
            snr,
            self.trials as f64,
        )];
        for &(model, errors) in &self.errors {
            let (lo, hi) = wilson_interval(errors, self.trials);
            let p = errors as f64 / self.trials as f64;
            rows.push(MetricRow::new(
                format!("ber.{model}"),
                image,
                alpha,
                n,
                snr,
                p,
            ));
            rows.push(MetricRow::new(
                format!("ber_lo.{model}"),
                image,
                alpha,
                n,
                snr,
                lo,
            ));
            rows.push(MetricRow::new(
                format!("ber_hi.{model}"),
                image,
                alpha,
                n,
                snr,
                hi,
            ));
        }
        rows
    }
}

fn cell_seed(seed: u64, snr: f64, alpha: f64, n: usize) -> u64 {
    derive_seed(
        derive_seed(derive_seed(seed, snr.to_bits()), alpha.to_bits()),
        n as u64,
    )
}

/// One synthetic Monte-Carlo cell. Each trial draws a fresh host, chip
/// sequence and bit; all models decode the same noisy segment with the
/// true host scale and the noise scale actually used.
pub fn simulate_cell(
    host_scale: f64,
    alpha: f64,
    n: usize,
    snr_db: f64,
    trials: usize,
    models: &[DecoderModel],
    seed: u64,
) -> Result<BerCounts> {
    crate::types::check_alpha(alpha)?;
    crate::types::check_scale(host_scale)?;
    let sqrt2 = std::f64::consts::SQRT_2;
    let per_trial = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<Vec<u64>> {
            let trial_seed = derive_seed(seed, t as u64);
            let mut rng = SplitMix64::new(trial_seed);
            let bit = (rng.next_u64() >> 63) as u8;
            let chips = chips_from_seed(derive_seed(trial_seed, 1), n);
            let mut y: Vec<f64> = (0..n).map(|_| rng.next_laplace(host_scale)).collect();
            embed_in_place(&mut y, bit, chips.chips(), alpha)?;
            let (z, noise_scale) = laplace_noise_samples(&y, snr_db, derive_seed(trial_seed, 2));
            models
                .iter()
                .map(|&model| {
                    let trace = match model {
                        DecoderModel::LaplaceClean => {
                            decode_clean(&z, chips.chips(), alpha, host_scale)?
                        }
                        DecoderModel::LaplaceNoisy if noise_scale > 0.0 => {
                            decode_noisy(&z, chips.chips(), alpha, host_scale, noise_scale)?
                        }
                        DecoderModel::LaplaceNoisy => {
                            decode_clean(&z, chips.chips(), alpha, host_scale)?
                        }
                        DecoderModel::Gaussian => decode_gaussian_baseline(
                            &z,
                            chips.chips(),
                            alpha,
                            sqrt2 * host_scale,
                            sqrt2 * noise_scale,
                        )?,
                    };
                    Ok(u64::from(trace.bit != bit))
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;
    let errors = models
        .iter()
        .enumerate()
        .map(|(i, &m)| (m, per_trial.iter().map(|e| e[i]).sum()))
        .collect();
    Ok(BerCounts {
        trials: trials as u64,
        errors,
    })
}

/// BER per (model, SNR, alpha, N) with Wilson 95% bounds. Rows are
/// `ber.<model>`, `ber_lo.<model>`, `ber_hi.<model>` and `trials`, with the
/// SNR in the `param` column.
pub fn run_ber_sweep(cfg: &BerSweepConfig) -> Result<SweepReport> {
    match cfg.mode {
        BerMode::Synthetic => synthetic_sweep(cfg),
        BerMode::Image => image_sweep(cfg),
    }
}

fn grid(cfg: &BerSweepConfig) -> Vec<(f64, f64, usize)> {
    let mut cells = Vec::new();
    for &snr in &cfg.snr_db {
        for &alpha in &cfg.alphas {
            for &n in &cfg.n_values {
                cells.push((snr, alpha, n));
            }
        }
    }
    cells
}

fn synthetic_sweep(cfg: &BerSweepConfig) -> Result<SweepReport> {
    let host_scale = match &cfg.reference_image {
        Some(p) => fit_image(&read_image(p)?, &MidbandMask::default())?.scale,
        None => cfg.host_scale,
    };
    let mut report = SweepReport::default();
    for (snr, alpha, n) in grid(cfg) {
        let seed = cell_seed(cfg.seed, snr, alpha, n);
        match simulate_cell(host_scale, alpha, n, snr, cfg.trials, &cfg.models, seed) {
            Ok(counts) => report.rows.extend(counts.rows("synthetic", alpha, n, snr)),
            Err(e) => report.fail(format!("snr={snr}/alpha={alpha}/n={n}"), "synthetic", &e),
        }
    }
    Ok(report.finish())
}

fn image_sweep(cfg: &BerSweepConfig) -> Result<SweepReport> {
    let dir = cfg
        .dataset
        .as_ref()
        .ok_or_else(|| Error::Config("image mode needs `dataset`".into()))?;
    let mut report = SweepReport::default();
    for (name, img) in load_dataset(dir)? {
        let img = match img {
            Ok(img) => img,
            Err(e) => {
                report.fail(name.clone(), &name, &e);
                continue;
            }
        };
        for (snr, alpha, n) in grid(cfg) {
            let seed = cell_seed(cfg.seed, snr, alpha, n);
            let run = || -> Result<BerCounts> {
                let per_key = (0..cfg.trials)
                    .into_par_iter()
                    .map(|t| -> Result<(u64, Vec<u64>)> {
                        let key_seed = derive_seed(seed, t as u64);
                        let key = WatermarkKey::new(key_seed, alpha, n)?;
                        let r = img.block_region();
                        let payload = random_payload(key.capacity((r.width, r.height))?, key_seed);
                        let marked = embed_image(&img, &payload, &key)?;
                        let noisy = laplace_noise_attack(
                            &marked.watermarked,
                            snr,
                            derive_seed(key_seed, 2),
                            NoiseDomain::Dct,
                        )?;
                        let noise = (noisy.scale > 0.0).then_some(noisy.scale);
                        let errs = cfg
                            .models
                            .iter()
                            .map(|&m| {
                                let out =
                                    extract_image(&noisy.image, &key, payload.len(), noise, m)?;
                                Ok(bit_errors(&payload, &out.payload) as u64)
                            })
                            .collect::<Result<Vec<_>>>()?;
                        Ok((payload.len() as u64, errs))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(BerCounts {
                    trials: per_key.iter().map(|(b, _)| b).sum(),
                    errors: cfg
                        .models
                        .iter()
                        .enumerate()
                        .map(|(i, &m)| (m, per_key.iter().map(|(_, e)| e[i]).sum()))
                        .collect(),
                })
            };
            match run() {
                Ok(counts) => report.rows.extend(counts.rows(&name, alpha, n, snr)),
                Err(e) => report.fail(format!("{name}/snr={snr}/alpha={alpha}/n={n}"), &name, &e),
            }
        }
    }
    Ok(report.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_are_reproducible() {
        let models = DecoderModel::ALL;
        let a = simulate_cell(10.0, 0.1, 200, 5.0, 50, &models, 9).unwrap();
        let b = simulate_cell(10.0, 0.1, 200, 5.0, 50, &models, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.trials, 50);
    }

    #[test]
    fn strong_watermark_without_noise_is_error_free() {
        let counts =
            simulate_cell(5.0, 0.5, 100, f64::INFINITY, 200, &DecoderModel::ALL, 3).unwrap();
        for (m, e) in counts.errors {
            assert_eq!(e, 0, "{m}");
        }
    }

    #[test]
    fn sweep_rows_and_order() {
        let cfg = BerSweepConfig {
            snr_db: vec![10.0, 0.0],
            alphas: vec![0.2],
            n_values: vec![64],
            trials: 40,
            ..BerSweepConfig::default()
        };
        let rep = run_ber_sweep(&cfg).unwrap();
        assert!(rep.is_complete());
        // trials + 3 rows per model, for 2 SNRs
        assert_eq!(rep.rows.len(), 2 * (1 + 3 * 3));
        assert_eq!(rep.to_csv(), run_ber_sweep(&cfg).unwrap().to_csv());
        let lo = rep.find("ber_lo.gaussian", "synthetic", 0.0).unwrap().value;
        let p = rep.find("ber.gaussian", "synthetic", 0.0).unwrap().value;
        let hi = rep.find("ber_hi.gaussian", "synthetic", 0.0).unwrap().value;
        assert!(lo <= p && p <= hi);
    }

    #[test]
    fn config_parsing() {
        let cfg = Config::parse("snr_db = 4\nmodels = noisy, gauss\ntrials = 10\n").unwrap();
        let c = BerSweepConfig::from_config(&cfg).unwrap();
        assert_eq!(
            c.models,
            [DecoderModel::LaplaceNoisy, DecoderModel::Gaussian]
        );
        assert_eq!(c.snr_db, [4.0]);
        assert!(BerSweepConfig::from_config(&Config::parse("trials = 0").unwrap()).is_err());
        assert!(BerSweepConfig::from_config(&Config::parse("mode = other").unwrap()).is_err());
    }
}
