//! Embed a payload into a test image and read it back blindly.
//!
//! cargo run --release --example embed_extract [image] [alpha] [n]

use std::path::PathBuf;

use lapmark::io::read_image;
use lapmark::metrics::ber;
use lapmark::{embed_image, extract_image, BitPayload, DecoderModel, WatermarkKey};

fn main() -> lapmark::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/gravel.pgm"));
    let alpha: f64 = args.next().map_or(0.3, |a| a.parse().expect("alpha"));
    let n: usize = args.next().map_or(500, |a| a.parse().expect("n"));

    let cover = read_image(&path)?;
    let key = WatermarkKey::new(0x5eed, alpha, n)?;
    let payload = BitPayload::from_hex("c0ffee42")?;
    let marked = embed_image(&cover, &payload, &key)?;
    println!("key      {key}");
    println!("psnr     {:.2} dB", marked.achieved_psnr);
    println!("dwr      {:.2} dB", marked.achieved_dwr);

    for model in DecoderModel::ALL {
        let out = extract_image(&marked.watermarked, &key, payload.len(), Some(1.0), model)?;
        println!(
            "{:<14} {} ber {:.4}",
            model.name(),
            out.payload.to_hex(),
            ber(&payload, &out.payload)?
        );
    }
    Ok(())
}
