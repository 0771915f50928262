//! PSNR and empirical vs analytic DWR over the bundled images.

use lapmark::harness::{run_transparency_sweep, TransparencyConfig};
use lapmark::MidbandMask;

fn main() -> lapmark::Result<()> {
    let cfg = TransparencyConfig {
        dataset: concat!(env!("CARGO_MANIFEST_DIR"), "/../../data").into(),
        alphas: vec![0.005, 0.01, 0.02, 0.05],
        n_values: vec![1000, 4000, 8000],
        seed: 1,
        mask: MidbandMask::default(),
    };
    let report = run_transparency_sweep(&cfg)?;
    print!("{}", report.to_csv());
    Ok(())
}
