//! Key records and the chip sequences they expand to.

use lapmark::keystream::SplitMix64;
use lapmark::{generate_chips, MidbandMask, WatermarkKey};

fn main() -> lapmark::Result<()> {
    let mask: MidbandMask = "1,1;2,0;0,2".parse()?;
    let key = WatermarkKey::new(42, 0.02, 8000)?.with_mask(mask);
    let record = key.to_record();
    println!("{record}");
    let back: WatermarkKey = record.parse()?;
    assert_eq!(back, key);

    let chips = generate_chips(&key, 64);
    let line: String = chips
        .chips()
        .iter()
        .map(|&c| if c > 0 { '+' } else { '-' })
        .collect();
    println!("{line}");

    let mut rng = SplitMix64::new(key.seed);
    let first: Vec<u64> = (0..3).map(|_| rng.next_u64()).collect();
    println!("{first:?}");
    println!("capacity of 512x512: {} bits", key.capacity((512, 512))?);
    Ok(())
}
