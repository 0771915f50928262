//! Apply every attack to one image and write the results next to each other.

use lapmark::attacks::{AttackKind, AttackSpec, NoiseDomain};
use lapmark::io::{read_image, write_image};
use lapmark::metrics::psnr;

fn main() -> lapmark::Result<()> {
    let img = read_image(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../data/camera.pgm"
    ))?;
    let out = std::env::temp_dir().join("lapmark-attacks");
    std::fs::create_dir_all(&out).map_err(|e| lapmark::Error::Io {
        path: out.clone(),
        source: e,
    })?;
    let specs = [
        AttackSpec::new(AttackKind::LaplaceNoise, 20.0, 1)?,
        AttackSpec::new(AttackKind::LaplaceNoise, 20.0, 1)?.in_domain(NoiseDomain::Dct),
        AttackSpec::new(AttackKind::PixelLoss, 0.5, 1)?,
        AttackSpec::new(AttackKind::Jpeg, 75.0, 0)?,
        AttackSpec::new(AttackKind::Brightness, 1.3, 0)?,
        AttackSpec::new(AttackKind::AutoAdjust, 0.0, 0)?,
    ];
    for (i, spec) in specs.iter().enumerate() {
        let attacked = spec.apply(&img)?;
        let path = out.join(format!("{i}-{}.png", spec.kind));
        write_image(&path, &attacked)?;
        println!(
            "{:<40} psnr {:6.2} dB",
            path.display(),
            psnr(&img, &attacked)?
        );
    }
    Ok(())
}
