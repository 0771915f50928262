use std::path::PathBuf;

use rayon::prelude::*;

use super::{load_dataset, random_payload, Config, SweepReport};
use crate::attacks::{laplace_noise_attack, AttackKind, AttackSpec, NoiseDomain};
use crate::decode::{extract_image, DecoderModel};
use crate::embed::embed_image;
use crate::error::{Error, Result};
use crate::keystream::derive_seed;
use crate::metrics::{bit_errors, MetricRow};
use crate::types::{BitPayload, GrayImage, MidbandMask, WatermarkKey};

#[derive(Debug, Clone)]
pub struct AttackSuiteConfig {
    pub dataset: PathBuf,
    pub chips_per_bit: usize,
    /// Fixed strength; when `None` it is calibrated per image to `target_psnr`.
    pub alpha: Option<f64>,
    pub target_psnr: f64,
    pub keys_per_image: usize,
    pub seed: u64,
    pub model: DecoderModel,
    pub mask: MidbandMask,
    pub noise_domain: NoiseDomain,
    /// (kind, parameter) cells; auto-adjust takes parameter 0.
    pub attacks: Vec<(AttackKind, f64)>,
}

impl AttackSuiteConfig {
    /// Grid keys: `pixel_loss`, `jpeg`, `brightness`, `noise` (SNR dB) take
    /// lists; `auto_adjust = true` adds the single auto-adjust cell.
    pub fn from_config(cfg: &Config) -> Result<Self> {
        let mut attacks = Vec::new();
        for (key, kind) in [
            ("pixel_loss", AttackKind::PixelLoss),
            ("jpeg", AttackKind::Jpeg),
            ("brightness", AttackKind::Brightness),
            ("noise", AttackKind::LaplaceNoise),
        ] {
            for p in cfg.list_or::<f64>(key, vec![])? {
                AttackSpec::new(kind, p, 0)?;
                attacks.push((kind, p));
            }
        }
        if cfg.get_or("auto_adjust", false)? {
            attacks.push((AttackKind::AutoAdjust, 0.0));
        }
        Ok(Self {
            dataset: cfg
                .get_path("dataset")
                .ok_or_else(|| Error::Config("missing `dataset`".into()))?,
            chips_per_bit: cfg.get_or("n", 1000)?,
            alpha: cfg.get("alpha")?,
            target_psnr: cfg.get_or("target_psnr", 33.0)?,
            keys_per_image: cfg.get_or("keys", 1)?,
            seed: cfg.get_or("seed", 1)?,
            model: cfg.get_or("model", DecoderModel::LaplaceClean)?,
            mask: cfg.get_or("mask", MidbandMask::default())?,
            noise_domain: cfg.get_or("noise_domain", NoiseDomain::Pixel)?,
            attacks,
        })
    }
}

fn full_payload(img: &GrayImage, key: &WatermarkKey) -> Result<BitPayload> {
    let r = img.block_region();
    Ok(random_payload(
        key.capacity((r.width, r.height))?,
        derive_seed(key.seed, 0x9a7),
    ))
}

/// Bisection for the strength whose full-capacity embedding lands on
/// `target_psnr`. Returns 0.95 if even that is more transparent.
pub fn calibrate_alpha(img: &GrayImage, base: &WatermarkKey, target_psnr: f64) -> Result<f64> {
    let psnr_at = |alpha: f64| -> Result<f64> {
        let key = base.clone().with_alpha(alpha)?;
        Ok(embed_image(img, &full_payload(img, &key)?, &key)?.achieved_psnr)
    };
    let (mut lo, mut hi) = (0.0, 0.95);
    if psnr_at(hi)? >= target_psnr {
        return Ok(hi);
    }
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if psnr_at(mid)? > target_psnr {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

type ImageOutcome = Result<(f64, f64, Vec<Result<CellCount>>)>;

struct CellCount {
    kind: Option<AttackKind>,
    param: f64,
    bits: u64,
    errors: u64,
}

fn attack_name(kind: Option<AttackKind>) -> &'static str {
    kind.map_or("none", |k| k.name())
}

/// Embed, attack, extract. Rows per (image, attack, parameter):
/// `ber.<attack>` and `recovery.<attack>`; `ber.none` is the unattacked
/// baseline and `psnr` the embedding distortion. Rows with image `mean`
/// average the per-image values.
pub fn run_attack_suite(cfg: &AttackSuiteConfig) -> Result<SweepReport> {
    let mut report = SweepReport::default();
    let images = load_dataset(&cfg.dataset)?;
    let n = cfg.chips_per_bit;
    let mut cells: Vec<(Option<AttackKind>, f64)> = vec![(None, 0.0)];
    cells.extend(cfg.attacks.iter().map(|&(k, p)| (Some(k), p)));

    let per_image: Vec<_> = images
        .par_iter()
        .map(|(name, img)| -> (String, ImageOutcome) {
            let run = || -> ImageOutcome {
                let img = img
                    .as_ref()
                    .map_err(|e| Error::ImageFormat(e.to_string()))?;
                let base =
                    WatermarkKey::new(derive_seed(cfg.seed, 0), cfg.alpha.unwrap_or(0.5), n)?
                        .with_mask(cfg.mask.clone());
                let alpha = match cfg.alpha {
                    Some(a) => a,
                    None => calibrate_alpha(img, &base, cfg.target_psnr)?,
                };
                let mut psnr = 0.0;
                let mut counts: Vec<Result<CellCount>> = cells
                    .iter()
                    .map(|&(kind, param)| {
                        Ok(CellCount {
                            kind,
                            param,
                            bits: 0,
                            errors: 0,
                        })
                    })
                    .collect();
                for k in 0..cfg.keys_per_image {
                    let key = base.clone().with_alpha(alpha)?;
                    let key = WatermarkKey {
                        seed: derive_seed(cfg.seed, k as u64),
                        ..key
                    };
                    let payload = full_payload(img, &key)?;
                    let marked = embed_image(img, &payload, &key)?;
                    if k == 0 {
                        psnr = marked.achieved_psnr;
                    }
                    let outcomes: Vec<Result<usize>> = cells
                        .par_iter()
                        .enumerate()
                        .map(|(ci, &(kind, param))| {
                            let seed = derive_seed(key.seed, 0xa77ac + ci as u64);
                            let (attacked, noise) = match kind {
                                None => (marked.watermarked.clone(), None),
                                Some(AttackKind::LaplaceNoise) => {
                                    let out = laplace_noise_attack(
                                        &marked.watermarked,
                                        param,
                                        seed,
                                        cfg.noise_domain,
                                    )?;
                                    let s = (out.scale > 0.0).then_some(out.scale);
                                    (out.image, s)
                                }
                                Some(kind) => (
                                    AttackSpec::new(kind, param, seed)?
                                        .apply(&marked.watermarked)?,
                                    None,
                                ),
                            };
                            let model =
                                if noise.is_none() && cfg.model == DecoderModel::LaplaceNoisy {
                                    DecoderModel::LaplaceClean
                                } else {
                                    cfg.model
                                };
                            let out = extract_image(&attacked, &key, payload.len(), noise, model)?;
                            Ok(bit_errors(&payload, &out.payload))
                        })
                        .collect();
                    for (c, o) in counts.iter_mut().zip(outcomes) {
                        if let Ok(cc) = c {
                            match o {
                                Ok(e) => {
                                    cc.bits += payload.len() as u64;
                                    cc.errors += e as u64;
                                }
                                Err(e) => *c = Err(e),
                            }
                        }
                    }
                }
                Ok((alpha, psnr, counts))
            };
            (name.clone(), run())
        })
        .collect();

    let mut sums: Vec<(f64, f64, usize)> = vec![(0.0, 0.0, 0); cells.len()];
    let mut alpha_sum = 0.0;
    let mut ok_images = 0;
    for (name, res) in per_image {
        let (alpha, psnr, counts) = match res {
            Ok(v) => v,
            Err(e) => {
                report.fail(name.clone(), &name, &e);
                continue;
            }
        };
        ok_images += 1;
        alpha_sum += alpha;
        report
            .rows
            .push(MetricRow::new("psnr", name.as_str(), alpha, n, 0.0, psnr));
        for (ci, c) in counts.into_iter().enumerate() {
            let (kind, param) = cells[ci];
            match c {
                Ok(c) => {
                    let ber = c.errors as f64 / c.bits as f64;
                    let label = attack_name(c.kind);
                    report.rows.push(MetricRow::new(
                        format!("ber.{label}"),
                        name.as_str(),
                        alpha,
                        n,
                        c.param,
                        ber,
                    ));
                    report.rows.push(MetricRow::new(
                        format!("recovery.{label}"),
                        name.as_str(),
                        alpha,
                        n,
                        c.param,
                        1.0 - ber,
                    ));
                    sums[ci].0 += ber;
                    sums[ci].1 += 1.0 - ber;
                    sums[ci].2 += 1;
                }
                Err(e) => report.fail(format!("{name}/{}={param}", attack_name(kind)), &name, &e),
            }
        }
    }
    if ok_images > 0 {
        let mean_alpha = alpha_sum / ok_images as f64;
        for (ci, &(kind, param)) in cells.iter().enumerate() {
            let (b, r, count) = sums[ci];
            if count > 0 {
                let label = attack_name(kind);
                let k = count as f64;
                report.rows.push(MetricRow::new(
                    format!("ber.{label}"),
                    "mean",
                    mean_alpha,
                    n,
                    param,
                    b / k,
                ));
                report.rows.push(MetricRow::new(
                    format!("recovery.{label}"),
                    "mean",
                    mean_alpha,
                    n,
                    param,
                    r / k,
                ));
            }
        }
    }
    Ok(report.finish())
}
