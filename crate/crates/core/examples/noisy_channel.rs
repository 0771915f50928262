//! Decode a single spread bit through a Laplacian noise channel with the
//! clean rule, the noise-aware rule and the Gaussian energy detector.

use lapmark::attacks::laplace_noise_samples;
use lapmark::embed::embed_stream;
use lapmark::keystream::{chips_from_seed, SplitMix64};
use lapmark::{decode_clean, decode_gaussian_baseline, decode_llr_oracle, decode_noisy};

fn main() -> lapmark::Result<()> {
    let (scale, alpha, n) = (8.0, 0.06, 8000);
    let mut rng = SplitMix64::new(11);
    let host: Vec<f64> = (0..n).map(|_| rng.next_laplace(scale)).collect();
    let chips = chips_from_seed(99, n);

    for bit in [0u8, 1] {
        let y = embed_stream(&host, bit, chips.chips(), alpha)?;
        for snr in [10.0, 4.0, 0.0] {
            let (z, noise) = laplace_noise_samples(&y, snr, 7);
            let w = chips.chips();
            let clean = decode_clean(&z, w, alpha, scale)?;
            let noisy = decode_noisy(&z, w, alpha, scale, noise)?;
            let oracle = decode_llr_oracle(&z, w, alpha, scale, Some(noise))?;
            let gauss = decode_gaussian_baseline(
                &z,
                w,
                alpha,
                scale * std::f64::consts::SQRT_2,
                noise * std::f64::consts::SQRT_2,
            )?;
            println!(
                "bit {bit} snr {snr:>4} dB: clean {} noisy {} (margin {:+.3}, llr {:+.3}) gauss {}",
                clean.bit,
                noisy.bit,
                noisy.margin(),
                oracle.statistic,
                gauss.bit
            );
        }
    }
    Ok(())
}
