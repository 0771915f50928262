//! Per-bit decision traces from an extraction, as written by `--trace`.

use lapmark::harness::random_payload;
use lapmark::io::read_image;
use lapmark::{embed_image, extract_image, DecoderModel, WatermarkKey};

fn main() -> lapmark::Result<()> {
    let cover = read_image(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/brick.pgm"))?;
    let key = WatermarkKey::new(3, 0.1, 2000)?;
    let payload = random_payload(16, 3);
    let marked = embed_image(&cover, &payload, &key)?;
    let out = extract_image(
        &marked.watermarked,
        &key,
        payload.len(),
        None,
        DecoderModel::LaplaceClean,
    )?;
    print!("{}", out.trace_csv());
    let worst = out
        .traces
        .iter()
        .map(|t| t.margin().abs())
        .fold(f64::INFINITY, f64::min);
    eprintln!("smallest |margin| {worst:.3}");
    Ok(())
}
