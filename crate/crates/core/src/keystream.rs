//! Keyed +/-1 spreading sequences.
//!
//! The generator is SplitMix64: the state advances by the golden-ratio
//! increment and each output is the state passed through the finalizer.
//! Chip `i` is `+1` when bit 63 of output `i` is set and `-1` otherwise.
//! All arithmetic is wrapping `u64`, so the sequence is the same in every
//! language that implements those few lines.

use crate::types::WatermarkKey;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 generator. Also drives the attack randomness.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform on the open interval (0, 1): 53 random bits offset by half an ulp.
    #[inline]
    pub fn next_open01(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, bound)` without modulo bias.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "empty range");
        // Lemire's multiply-and-reject.
        let threshold = bound.wrapping_neg() % bound;
        loop {
            let m = u128::from(self.next_u64()) * u128::from(bound);
            if (m as u64) >= threshold {
                return (m >> 64) as u64;
            }
        }
    }

    /// Zero-mean Laplacian deviate with the given scale, by inverse CDF.
    #[inline]
    pub fn next_laplace(&mut self, scale: f64) -> f64 {
        let centered = self.next_open01() - 0.5;
        -scale * centered.signum() * (1.0 - 2.0 * centered.abs()).ln()
    }
}

/// The SplitMix64 output finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent stream seed from a base seed and a label.
pub fn derive_seed(base: u64, label: u64) -> u64 {
    mix64(base ^ mix64(label.wrapping_add(GOLDEN_GAMMA)))
}

/// A sequence of +/-1 chips.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpreadSequence {
    chips: Vec<i8>,
}

impl SpreadSequence {
    pub fn chips(&self) -> &[i8] {
        &self.chips
    }

    pub fn len(&self) -> usize {
        self.chips.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chips.is_empty()
    }

    /// Chips for bit `index` when each bit spans `chips_per_bit` chips.
    pub fn segment(&self, index: usize, chips_per_bit: usize) -> &[i8] {
        &self.chips[index * chips_per_bit..(index + 1) * chips_per_bit]
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.chips.iter().map(|&c| f64::from(c)).collect()
    }
}

impl From<Vec<i8>> for SpreadSequence {
    fn from(chips: Vec<i8>) -> Self {
        assert!(
            chips.iter().all(|&c| c == 1 || c == -1),
            "chips must be +/-1"
        );
        Self { chips }
    }
}

/// Generates `count` chips from a raw seed.
pub fn chips_from_seed(seed: u64, count: usize) -> SpreadSequence {
    let mut rng = SplitMix64::new(seed);
    let chips = (0..count)
        .map(|_| if rng.next_u64() >> 63 == 1 { 1 } else { -1 })
        .collect();
    SpreadSequence { chips }
}

/// Generates the first `count` chips of the key's continuous chip stream.
pub fn generate_chips(key: &WatermarkKey, count: usize) -> SpreadSequence {
    chips_from_seed(key.seed, count)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_outputs() {
        // Published SplitMix64 outputs for seed 1234567.
        let mut rng = SplitMix64::new(1_234_567);
        let expected = [
            6_457_827_717_110_365_317u64,
            3_203_168_211_198_807_973,
            9_817_491_932_198_370_423,
            4_593_380_528_125_082_431,
            16_408_922_859_458_223_821,
        ];
        for e in expected {
            assert_eq!(rng.next_u64(), e);
        }
    }

    #[test]
    fn deterministic() {
        assert_eq!(chips_from_seed(99, 500), chips_from_seed(99, 500));
        assert_ne!(chips_from_seed(99, 500), chips_from_seed(100, 500));
        let long = chips_from_seed(5, 100);
        let short = chips_from_seed(5, 40);
        assert_eq!(&long.chips()[..40], short.chips());
    }

    #[test]
    fn balanced_and_uncorrelated() {
        let n = 1_000_000;
        let a = chips_from_seed(0, n);
        let mean: f64 = a.chips().iter().map(|&c| f64::from(c)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.005, "mean {mean}");
        let one = chips_from_seed(1, n);
        let two = chips_from_seed(2, n);
        let corr: f64 = one
            .chips()
            .iter()
            .zip(two.chips())
            .map(|(&x, &y)| f64::from(x * y))
            .sum::<f64>()
            / n as f64;
        assert!(corr.abs() < 0.005, "corr {corr}");
    }

    #[test]
    fn bounded_integers_in_range() {
        let mut rng = SplitMix64::new(3);
        let mut seen = [0usize; 7];
        for _ in 0..7000 {
            seen[rng.next_below(7) as usize] += 1;
        }
        assert!(seen.iter().all(|&c| c > 800 && c < 1200), "{seen:?}");
    }

    #[test]
    fn open_unit_interval() {
        let mut rng = SplitMix64::new(0);
        for _ in 0..10_000 {
            let u = rng.next_open01();
            assert!(u > 0.0 && u < 1.0);
        }
    }

    #[test]
    fn laplace_moments() {
        let mut rng = SplitMix64::new(11);
        let n = 1_000_000;
        let scale = 1.5;
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let v = rng.next_laplace(scale);
            s1 += v.abs();
            s2 += v * v;
        }
        let mean_abs = s1 / n as f64;
        let var = s2 / n as f64;
        assert!((mean_abs / scale - 1.0).abs() < 0.01, "{mean_abs}");
        assert!((var / (2.0 * scale * scale) - 1.0).abs() < 0.02, "{var}");
    }
}
