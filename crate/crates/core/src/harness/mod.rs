//! Batch experiment drivers. Each sweep is a set of independent cells run
//! on the rayon pool; rows come back in a canonical order so reruns with
//! the same config produce byte-identical CSV.

mod attack_suite;
mod ber;
pub mod config;
mod transparency;

use std::cmp::Ordering;
use std::path::{Path, PathBuf};

pub use attack_suite::{calibrate_alpha, run_attack_suite, AttackSuiteConfig};
pub use ber::{run_ber_sweep, simulate_cell, BerCounts, BerMode, BerSweepConfig};
pub use config::Config;
pub use transparency::{run_transparency_sweep, TransparencyConfig};

use crate::error::{Error, Result};
use crate::io::read_image;
use crate::keystream::SplitMix64;
use crate::metrics::{self, MetricRow};
use crate::statmodel::{fit_report, FIT_CSV_HEADER};
use crate::transform::{forward_block_dct, gather_midband};
use crate::types::{BitPayload, GrayImage, MidbandMask};

/// A cell that could not be computed.
#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub cell: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepReport {
    pub rows: Vec<MetricRow>,
    pub failures: Vec<CellFailure>,
}

impl SweepReport {
    pub fn is_complete(&self) -> bool {
        self.failures.is_empty()
    }

    /// Metrics CSV. Failed cells appear as `error` rows with a NaN value.
    pub fn to_csv(&self) -> String {
        metrics::to_csv(&self.rows)
    }

    pub fn find(&self, metric: &str, image: &str, param: f64) -> Option<&MetricRow> {
        self.rows
            .iter()
            .find(|r| r.metric == metric && r.image == image && r.param == param)
    }

    pub fn values(&self, metric: &str) -> impl Iterator<Item = &MetricRow> {
        let metric = metric.to_string();
        self.rows.iter().filter(move |r| r.metric == metric)
    }

    pub(crate) fn fail(&mut self, cell: String, image: &str, err: &Error) {
        self.rows.push(MetricRow::new(
            "error",
            image,
            f64::NAN,
            0,
            f64::NAN,
            f64::NAN,
        ));
        self.failures.push(CellFailure {
            cell,
            message: err.to_string(),
        });
    }

    pub(crate) fn finish(mut self) -> Self {
        self.rows.sort_by(row_order);
        self.rows.dedup();
        self.failures.sort_by(|a, b| a.cell.cmp(&b.cell));
        self
    }
}

fn row_order(a: &MetricRow, b: &MetricRow) -> Ordering {
    a.metric
        .cmp(&b.metric)
        .then_with(|| a.image.cmp(&b.image))
        .then_with(|| a.alpha.total_cmp(&b.alpha))
        .then_with(|| a.n.cmp(&b.n))
        .then_with(|| a.param.total_cmp(&b.param))
        .then_with(|| a.value.total_cmp(&b.value))
}

const IMAGE_EXTENSIONS: [&str; 4] = ["pgm", "pnm", "png", "jpg"];

/// Image files of a directory in name order.
pub fn list_dataset(dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        if path.is_file() && ext.is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.as_str())) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

pub fn image_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Named images of a dataset; unreadable files come back as errors in place.
pub fn load_dataset(dir: impl AsRef<Path>) -> Result<Vec<(String, Result<GrayImage>)>> {
    Ok(list_dataset(dir)?
        .into_iter()
        .map(|p| (image_name(&p), read_image(&p)))
        .collect())
}

/// Deterministic pseudo-random payload.
pub fn random_payload(len: usize, seed: u64) -> BitPayload {
    let mut rng = SplitMix64::new(seed);
    BitPayload::from_bools((0..len).map(|_| rng.next_u64() >> 63 == 1))
}

/// Laplacian fit of an image's mid-band coefficients.
pub fn fit_image(image: &GrayImage, mask: &MidbandMask) -> Result<crate::statmodel::FitReport> {
    let inner = image.crop(image.block_region());
    let stream = gather_midband(&forward_block_dct(&inner)?, mask);
    fit_report(stream.values())
}

/// Fit CSV over several images; failing images are reported separately.
pub fn fit_images(paths: &[PathBuf], mask: &MidbandMask) -> (String, Vec<CellFailure>) {
    let mut out = format!("{FIT_CSV_HEADER}\n");
    let mut failures = Vec::new();
    for path in paths {
        let name = image_name(path);
        match read_image(path).and_then(|img| fit_image(&img, mask)) {
            Ok(rep) => {
                out.push_str(&rep.csv_row(&metrics::csv_field(&name)));
                out.push('\n');
            }
            Err(e) => failures.push(CellFailure {
                cell: name,
                message: e.to_string(),
            }),
        }
    }
    (out, failures)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_sort_canonically() {
        let mut rep = SweepReport::default();
        rep.rows
            .push(MetricRow::new("psnr", "b", 0.02, 10, 0.0, 1.0));
        rep.rows
            .push(MetricRow::new("psnr", "a", 0.02, 10, 0.0, 1.0));
        rep.rows
            .push(MetricRow::new("dwr", "b", 0.01, 10, 0.0, 1.0));
        rep.rows
            .push(MetricRow::new("psnr", "a", 0.01, 10, 0.0, 1.0));
        let rep = rep.finish();
        let keys: Vec<_> = rep
            .rows
            .iter()
            .map(|r| (r.metric.as_str(), r.image.as_str(), r.alpha))
            .collect();
        assert_eq!(
            keys,
            [
                ("dwr", "b", 0.01),
                ("psnr", "a", 0.01),
                ("psnr", "a", 0.02),
                ("psnr", "b", 0.02)
            ]
        );
    }

    #[test]
    fn payloads_are_reproducible() {
        assert_eq!(random_payload(100, 5), random_payload(100, 5));
        assert_ne!(random_payload(100, 5), random_payload(100, 6));
        let ones = random_payload(10_000, 1)
            .bits()
            .iter()
            .filter(|&&b| b == 1)
            .count();
        assert!((4800..5200).contains(&ones));
    }
}
