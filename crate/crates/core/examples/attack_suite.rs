//! Embed at 33 dB PSNR, attack, extract; prints dataset-average BERs.

use lapmark::harness::{run_attack_suite, AttackSuiteConfig, Config};

fn main() -> lapmark::Result<()> {
    let mut cfg = Config::parse(
        "n = 128
         keys = 4
         target_psnr = 33
         pixel_loss = 0.1, 0.3, 0.5, 0.7
         jpeg = 75, 85, 95
         brightness = 0.7, 0.8, 0.9, 1.1, 1.2, 1.3
         noise = 20, 30
         auto_adjust = true",
    )?;
    cfg.set(
        "dataset",
        concat!(env!("CARGO_MANIFEST_DIR"), "/../../data"),
    );
    let report = run_attack_suite(&AttackSuiteConfig::from_config(&cfg)?)?;
    for row in report
        .rows
        .iter()
        .filter(|r| r.image == "mean" && r.metric.starts_with("ber."))
    {
        println!("{:<16} {:>5}  {:.4}", row.metric, row.param, row.value);
    }
    Ok(())
}
