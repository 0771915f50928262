//! Synthetic Monte-Carlo BER of the three decoders against SNR.
//!
//! cargo run --release --example ber_sweep [trials]

use lapmark::harness::{run_ber_sweep, BerSweepConfig};

fn main() -> lapmark::Result<()> {
    let trials = std::env::args()
        .nth(1)
        .map_or(2000, |t| t.parse().expect("trials"));
    let cfg = BerSweepConfig {
        snr_db: vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0],
        alphas: vec![0.02, 0.06],
        n_values: vec![2000, 8000],
        trials,
        ..BerSweepConfig::default()
    };
    let report = run_ber_sweep(&cfg)?;
    for row in report.rows.iter().filter(|r| r.metric.starts_with("ber.")) {
        println!(
            "{:<18} alpha {:<5} n {:<5} snr {:>4} dB  {:.5}",
            row.metric, row.alpha, row.n, row.param, row.value
        );
    }
    Ok(())
}
