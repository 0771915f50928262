use std::path::PathBuf;

use rayon::prelude::*;

use super::{load_dataset, random_payload, Config, SweepReport};
use crate::embed::embed_image;
use crate::error::Result;
use crate::keystream::derive_seed;
use crate::metrics::{dwr_analytic, MetricRow};
use crate::types::{MidbandMask, WatermarkKey};

/// PSNR and DWR of full-capacity embeddings over a dataset.
#[derive(Debug, Clone)]
pub struct TransparencyConfig {
    pub dataset: PathBuf,
    pub alphas: Vec<f64>,
    pub n_values: Vec<usize>,
    pub seed: u64,
    pub mask: MidbandMask,
}

impl TransparencyConfig {
    pub fn from_config(cfg: &Config) -> Result<Self> {
        Ok(Self {
            dataset: cfg
                .get_path("dataset")
                .ok_or_else(|| crate::Error::Config("missing `dataset`".into()))?,
            alphas: cfg.list_or("alphas", vec![0.01, 0.02])?,
            n_values: cfg.list_or("n_values", vec![8000])?,
            seed: cfg.get_or("seed", 1)?,
            mask: cfg.get_or("mask", MidbandMask::default())?,
        })
    }
}

/// Rows per (image, alpha, N): `psnr`, `dwr` and `dwr_analytic`.
pub fn run_transparency_sweep(cfg: &TransparencyConfig) -> Result<SweepReport> {
    let mut report = SweepReport::default();
    if cfg.alphas.is_empty() || cfg.n_values.is_empty() {
        return Ok(report);
    }
    let images = load_dataset(&cfg.dataset)?;
    let mut cells = Vec::new();
    for (name, img) in &images {
        match img {
            Ok(img) => {
                for &alpha in &cfg.alphas {
                    for &n in &cfg.n_values {
                        cells.push((name, img, alpha, n));
                    }
                }
            }
            Err(e) => report.fail(name.clone(), name, e),
        }
    }
    let results: Vec<_> = cells
        .par_iter()
        .map(|&(name, img, alpha, n)| {
            let run = || -> Result<Vec<MetricRow>> {
                let key = WatermarkKey::new(cfg.seed, alpha, n)?.with_mask(cfg.mask.clone());
                let r = img.block_region();
                let capacity = key.capacity((r.width, r.height))?;
                let payload = random_payload(capacity, derive_seed(cfg.seed, n as u64));
                let res = embed_image(img, &payload, &key)?;
                Ok(vec![
                    MetricRow::new("psnr", name.as_str(), alpha, n, 0.0, res.achieved_psnr),
                    MetricRow::new("dwr", name.as_str(), alpha, n, 0.0, res.achieved_dwr),
                    MetricRow::new(
                        "dwr_analytic",
                        name.as_str(),
                        alpha,
                        n,
                        0.0,
                        dwr_analytic(alpha),
                    ),
                ])
            };
            (format!("{name}/alpha={alpha}/n={n}"), name, run())
        })
        .collect();
    for (cell, name, res) in results {
        match res {
            Ok(rows) => report.rows.extend(rows),
            Err(e) => report.fail(cell, name, &e),
        }
    }
    Ok(report.finish())
}
