use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lapmark::attacks::{laplace_noise_attack, AttackKind, AttackSpec, NoiseDomain};
use lapmark::harness::{
    self, AttackSuiteConfig, BerSweepConfig, CellFailure, Config, SweepReport, TransparencyConfig,
};
use lapmark::io::{read_image, write_image};
use lapmark::metrics::{self, MetricRow};
use lapmark::{
    embed_image, extract_image, BitPayload, DecoderModel, Error, MidbandMask, WatermarkKey,
};

#[derive(Parser)]
#[command(
    name = "lapmark",
    version,
    about = "Blind spread-spectrum image watermarking"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Embed a payload into a cover image.
    Embed {
        #[arg(long)]
        cover: PathBuf,
        /// Key file; written first when --seed/--alpha/--n are given.
        #[arg(long)]
        key: PathBuf,
        /// Hex string, or a file holding one.
        #[arg(long)]
        bits: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, requires_all = ["alpha", "n"])]
        seed: Option<u64>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Blindly extract a payload.
    Extract {
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        key: PathBuf,
        /// Number of bits to decode.
        #[arg(long)]
        bits: usize,
        #[arg(long, default_value = "clean")]
        model: DecoderModel,
        #[arg(long)]
        noise_scale: Option<f64>,
        /// `-` for stdout.
        #[arg(long, default_value = "-")]
        out: String,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Apply one attack to an image.
    Attack {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        kind: AttackKind,
        #[arg(long, default_value_t = 0.0)]
        param: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "pixel")]
        domain: NoiseDomain,
    },
    /// Laplacian fit of mid-band coefficients.
    Fit {
        images: Vec<PathBuf>,
        /// Config with `dataset` (and optionally `mask`).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    SweepTransparency(SweepArgs),
    SweepBer(SweepArgs),
    SweepAttacks(SweepArgs),
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn emit(out: Option<&Path>, text: &str) -> lapmark::Result<()> {
    match out {
        Some(p) if p != Path::new("-") => std::fs::write(p, text).map_err(|e| Error::Io {
            path: p.to_path_buf(),
            source: e,
        }),
        _ => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_key(path: &Path) -> lapmark::Result<WatermarkKey> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?
        .parse()
}

fn report_failures(failures: &[CellFailure]) -> ExitCode {
    for f in failures {
        eprintln!("cell {} failed: {}", f.cell, f.message);
    }
    if failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn finish(report: SweepReport, out: Option<&Path>) -> lapmark::Result<ExitCode> {
    emit(out, &report.to_csv())?;
    Ok(report_failures(&report.failures))
}

fn run(cli: Cli) -> lapmark::Result<ExitCode> {
    match cli.command {
        Command::Embed {
            cover,
            key,
            bits,
            out,
            report,
            seed,
            alpha,
            n,
        } => {
            let key = match (seed, alpha, n) {
                (Some(s), Some(a), Some(n)) => {
                    let k = WatermarkKey::new(s, a, n)?;
                    emit(Some(&key), &format!("{}\n", k.to_record()))?;
                    k
                }
                _ => read_key(&key)?,
            };
            let hex = if Path::new(&bits).is_file() {
                std::fs::read_to_string(&bits).map_err(|e| Error::Io {
                    path: bits.clone().into(),
                    source: e,
                })?
            } else {
                bits
            };
            let payload = BitPayload::from_hex(hex.trim())?;
            let res = embed_image(&read_image(&cover)?, &payload, &key)?;
            write_image(&out, &res.watermarked)?;
            if let Some(report) = report {
                let name = harness::image_name(&cover);
                let n = key.chips_per_bit;
                let rows = [
                    MetricRow::new("psnr", name.as_str(), key.alpha, n, 0.0, res.achieved_psnr),
                    MetricRow::new("dwr", name.as_str(), key.alpha, n, 0.0, res.achieved_dwr),
                    MetricRow::new(
                        "bits",
                        name.as_str(),
                        key.alpha,
                        n,
                        0.0,
                        res.bits_embedded as f64,
                    ),
                ];
                emit(Some(&report), &metrics::to_csv(&rows))?;
            }
        }
        Command::Extract {
            image,
            key,
            bits,
            model,
            noise_scale,
            out,
            trace,
        } => {
            let key = read_key(&key)?;
            let ex = extract_image(&read_image(&image)?, &key, bits, noise_scale, model)?;
            emit(Some(Path::new(&out)), &format!("{}\n", ex.payload.to_hex()))?;
            if let Some(trace) = trace {
                emit(Some(&trace), &ex.trace_csv())?;
            }
        }
        Command::Attack {
            input,
            out,
            kind,
            param,
            seed,
            domain,
        } => {
            let img = read_image(&input)?;
            let attacked = if kind == AttackKind::LaplaceNoise {
                let noisy = laplace_noise_attack(&img, param, seed, domain)?;
                eprintln!("noise scale {}", noisy.scale);
                noisy.image
            } else {
                AttackSpec::new(kind, param, seed)?.apply(&img)?
            };
            write_image(&out, &attacked)?;
        }
        Command::Fit {
            mut images,
            config,
            out,
        } => {
            let mut mask = MidbandMask::default();
            if let Some(cfg) = config {
                let cfg = Config::load(cfg)?;
                mask = cfg.get_or("mask", mask)?;
                if let Some(dir) = cfg.get_path("dataset") {
                    images.extend(harness::list_dataset(dir)?);
                }
            }
            if images.is_empty() {
                return Err(Error::Config("no images to fit".into()));
            }
            let (csv, failures) = harness::fit_images(&images, &mask);
            emit(out.as_deref(), &csv)?;
            return Ok(report_failures(&failures));
        }
        Command::SweepTransparency(a) => {
            let cfg = TransparencyConfig::from_config(&Config::load(&a.config)?)?;
            return finish(harness::run_transparency_sweep(&cfg)?, a.out.as_deref());
        }
        Command::SweepBer(a) => {
            let cfg = BerSweepConfig::from_config(&Config::load(&a.config)?)?;
            return finish(harness::run_ber_sweep(&cfg)?, a.out.as_deref());
        }
        Command::SweepAttacks(a) => {
            let cfg = AttackSuiteConfig::from_config(&Config::load(&a.config)?)?;
            return finish(harness::run_attack_suite(&cfg)?, a.out.as_deref());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
