//! Laplacian vs Gaussian fit of the mid-band DCT coefficients of every
//! image in a directory (default: the bundled test images).

use std::path::PathBuf;

use lapmark::harness::{fit_images, list_dataset};
use lapmark::MidbandMask;

fn main() -> lapmark::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data"));
    let (csv, failures) = fit_images(&list_dataset(dir)?, &MidbandMask::default());
    print!("{csv}");
    for f in failures {
        eprintln!("{}: {}", f.cell, f.message);
    }
    Ok(())
}
