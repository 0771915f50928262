use std::path::PathBuf;

use lapmark::attacks::{laplace_noise_attack, NoiseDomain};
use lapmark::harness::{calibrate_alpha, random_payload, simulate_cell};
use lapmark::io::{read_image, write_image};
use lapmark::metrics::ber;
use lapmark::{embed_image, extract_image, DecoderModel, WatermarkKey};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

#[test]
fn unaligned_cover_round_trips() {
    let cover = read_image(data("chelsea.pgm")).unwrap();
    assert_eq!(cover.dims(), (451, 300));
    let key = WatermarkKey::new(12, 0.4, 300).unwrap();
    let payload = random_payload(key.capacity(cover.dims()).unwrap(), 12);
    let marked = embed_image(&cover, &payload, &key).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.png");
    write_image(&path, &marked.watermarked).unwrap();
    let back = read_image(&path).unwrap();
    assert_eq!(back, marked.watermarked);
    let out = extract_image(&back, &key, payload.len(), None, DecoderModel::LaplaceClean).unwrap();
    let e = ber(&payload, &out.payload).unwrap();
    assert!(e < 0.05, "ber {e}");
}

#[test]
fn calibration_hits_target_psnr() {
    let cover = read_image(data("astronaut.pgm")).unwrap();
    let key = WatermarkKey::new(1, 0.5, 256).unwrap();
    let alpha = calibrate_alpha(&cover, &key, 35.0).unwrap();
    let key = key.with_alpha(alpha).unwrap();
    let payload = random_payload(key.capacity(cover.dims()).unwrap(), 0);
    let psnr = embed_image(&cover, &payload, &key).unwrap().achieved_psnr;
    assert!(alpha > 0.0 && alpha < 0.95);
    // payloads differ from the one used for calibration, so allow a little slack
    assert!((psnr - 35.0).abs() < 0.2, "psnr {psnr} at alpha {alpha}");
}

#[test]
fn dct_noise_channel_decodes_with_all_models() {
    let cover = read_image(data("gravel.pgm")).unwrap();
    let key = WatermarkKey::new(5, 0.3, 500).unwrap();
    let payload = random_payload(key.capacity(cover.dims()).unwrap(), 5);
    let marked = embed_image(&cover, &payload, &key).unwrap();
    let noisy = laplace_noise_attack(&marked.watermarked, 15.0, 9, NoiseDomain::Dct).unwrap();
    assert!(noisy.scale > 0.0);
    for model in DecoderModel::ALL {
        let out =
            extract_image(&noisy.image, &key, payload.len(), Some(noisy.scale), model).unwrap();
        let e = ber(&payload, &out.payload).unwrap();
        assert!(e < 0.2, "{model}: {e}");
    }
}

#[test]
fn dwr_does_not_depend_on_n() {
    let cover = read_image(data("camera.pgm")).unwrap();
    let dwr = |n: usize| {
        let key = WatermarkKey::new(2, 0.01, n).unwrap();
        let payload = random_payload(key.capacity(cover.dims()).unwrap(), 2);
        embed_image(&cover, &payload, &key).unwrap().achieved_dwr
    };
    assert!((dwr(2000) - dwr(10000)).abs() < 0.2);
}

#[test]
fn ber_trends_in_snr_alpha_and_n() {
    let models = DecoderModel::ALL;
    let ber_at = |alpha: f64, n: usize, snr: f64| {
        simulate_cell(5.0, alpha, n, snr, 3000, &models, 77).unwrap()
    };
    let low = ber_at(0.02, 1000, 0.0);
    let high = ber_at(0.02, 1000, 8.0);
    let strong = ber_at(0.04, 1000, 0.0);
    let long = ber_at(0.02, 4000, 0.0);
    for m in models {
        let base = low.ber(m).unwrap();
        assert!(base > 0.0, "{m} should make errors in this regime");
        assert!(high.ber(m).unwrap() <= base, "{m}: snr");
        assert!(strong.ber(m).unwrap() <= base, "{m}: alpha");
        assert!(long.ber(m).unwrap() <= base, "{m}: n");
    }
    // the noise-aware Laplacian rule is never worse than the Gaussian detector
    for c in [&low, &high, &strong, &long] {
        let lap = c.ber(DecoderModel::LaplaceNoisy).unwrap();
        let gauss = c.ber(DecoderModel::Gaussian).unwrap();
        assert!(lap <= gauss + 0.01, "{lap} vs {gauss}");
    }
}
