use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

fn lapmark(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lapmark"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn embed_then_extract_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let key = dir.path().join("key.txt");
    let marked = dir.path().join("marked.pgm");
    let report = dir.path().join("report.csv");
    let out = lapmark(&[
        "embed",
        "--cover",
        s(&data("gravel.pgm")),
        "--key",
        s(&key),
        "--bits",
        "deadbeef",
        "--out",
        s(&marked),
        "--report",
        s(&report),
        "--seed",
        "7",
        "--alpha",
        "0.3",
        "--n",
        "500",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(std::fs::read_to_string(&key)
        .unwrap()
        .starts_with("v1 seed=7 alpha=0.3 n=500 mask="));
    let csv = std::fs::read_to_string(&report).unwrap();
    assert!(csv.starts_with("metric,image,alpha,n,param,value\npsnr,gravel,0.3,500,0,"));

    for model in ["clean", "noisy", "gauss"] {
        let out = lapmark(&[
            "extract",
            "--image",
            s(&marked),
            "--key",
            s(&key),
            "--bits",
            "32",
            "--model",
            model,
            "--noise-scale",
            "0.5",
        ]);
        assert!(out.status.success());
        assert_eq!(stdout(&out).trim(), "deadbeef", "{model}");
    }

    let trace = dir.path().join("trace.csv");
    let hex = dir.path().join("bits.txt");
    let out = lapmark(&[
        "extract",
        "--image",
        s(&marked),
        "--key",
        s(&key),
        "--bits",
        "8",
        "--out",
        s(&hex),
        "--trace",
        s(&trace),
    ]);
    assert!(out.status.success());
    assert_eq!(std::fs::read_to_string(&hex).unwrap(), "de\n");
    let trace = std::fs::read_to_string(&trace).unwrap();
    assert_eq!(trace.lines().count(), 9);
    assert!(trace.starts_with("bit_index,statistic,threshold,bit,flag\n"));

    // payload from a file, existing key file reused
    let bits_file = dir.path().join("payload.hex");
    std::fs::write(&bits_file, "a5\n").unwrap();
    let png = dir.path().join("marked.png");
    let out = lapmark(&[
        "embed",
        "--cover",
        s(&data("gravel.pgm")),
        "--key",
        s(&key),
        "--bits",
        s(&bits_file),
        "--out",
        s(&png),
    ]);
    assert!(out.status.success());
    let out = lapmark(&[
        "extract",
        "--image",
        s(&png),
        "--key",
        s(&key),
        "--bits",
        "8",
    ]);
    assert_eq!(stdout(&out).trim(), "a5");
}

#[test]
fn attacks_write_images() {
    let dir = tempfile::tempdir().unwrap();
    for (kind, param) in [
        ("noise", "20"),
        ("pixel-loss", "0.5"),
        ("jpeg", "75"),
        ("brightness", "1.2"),
        ("auto-adjust", "0"),
    ] {
        let out_path = dir.path().join(format!("{kind}.pgm"));
        let out = lapmark(&[
            "attack",
            "--in",
            s(&data("camera.pgm")),
            "--out",
            s(&out_path),
            "--kind",
            kind,
            "--param",
            param,
            "--seed",
            "3",
        ]);
        assert!(
            out.status.success(),
            "{kind}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let img = lapmark::io::read_image(&out_path).unwrap();
        assert_eq!(img.dims(), (512, 512));
    }
    let out = lapmark(&[
        "attack",
        "--in",
        s(&data("camera.pgm")),
        "--out",
        s(&dir.path().join("x.pgm")),
        "--kind",
        "pixel-loss",
        "--param",
        "1.5",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

fn small_dataset(dir: &Path) -> PathBuf {
    let ds = dir.join("images");
    std::fs::create_dir_all(&ds).unwrap();
    for name in ["gravel", "grass"] {
        let img = lapmark::io::read_image(data(&format!("{name}.pgm"))).unwrap();
        let crop = img.crop(lapmark::types::Region {
            x: 0,
            y: 0,
            width: 128,
            height: 96,
        });
        lapmark::io::write_image(ds.join(format!("{name}.png")), &crop).unwrap();
    }
    ds
}

#[test]
fn transparency_sweep_is_reproducible_and_reports_bad_files() {
    let dir = tempfile::tempdir().unwrap();
    small_dataset(dir.path());
    let cfg = dir.path().join("sweep.cfg");
    std::fs::write(
        &cfg,
        "dataset = images\nalphas = 0.05, 0.1\nn_values = 100, 200\nseed = 3\n",
    )
    .unwrap();
    let a = lapmark(&["sweep-transparency", "--config", s(&cfg)]);
    let b = lapmark(&["sweep-transparency", "--config", s(&cfg)]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    // 2 images x 2 alphas x 2 N x 3 metrics
    assert_eq!(text.lines().count(), 1 + 24);
    assert!(!text.contains('\r'));

    std::fs::write(dir.path().join("images/broken.pgm"), b"P5\n10 10\n255\n").unwrap();
    let out_csv = dir.path().join("out.csv");
    let c = lapmark(&[
        "sweep-transparency",
        "--config",
        s(&cfg),
        "--out",
        s(&out_csv),
    ]);
    assert_eq!(c.status.code(), Some(2));
    let text = std::fs::read_to_string(&out_csv).unwrap();
    assert!(text.lines().any(|l| l.starts_with("error,broken,")));
    assert!(String::from_utf8_lossy(&c.stderr).contains("broken"));

    std::fs::write(&cfg, "dataset = images\nalphas =\n").unwrap();
    let d = lapmark(&["sweep-transparency", "--config", s(&cfg)]);
    assert_eq!(d.status.code(), Some(0));
    assert_eq!(stdout(&d), "metric,image,alpha,n,param,value\n");
}

#[test]
fn ber_and_attack_sweeps_run_from_config() {
    let dir = tempfile::tempdir().unwrap();
    small_dataset(dir.path());
    let ber = dir.path().join("ber.cfg");
    std::fs::write(
        &ber,
        "mode = synthetic\nsnr_db = 0, 10\nalphas = 0.1\nn_values = 200\ntrials = 100\nseed = 1\n",
    )
    .unwrap();
    let out = lapmark(&["sweep-ber", "--config", s(&ber)]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text
        .lines()
        .any(|l| l.starts_with("ber.laplace-noisy,synthetic,0.1,200,10,")));
    assert!(text
        .lines()
        .any(|l| l.starts_with("trials,synthetic,0.1,200,0,100")));

    let img_ber = dir.path().join("img.cfg");
    std::fs::write(
        &img_ber,
        "mode = image\ndataset = images\nsnr_db = 20\nalphas = 0.3\nn_values = 64\ntrials = 2\n",
    )
    .unwrap();
    let out = lapmark(&["sweep-ber", "--config", s(&img_ber)]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(stdout(&out).contains("ber.gaussian,grass,0.3,64,20,"));

    let atk = dir.path().join("atk.cfg");
    std::fs::write(
        &atk,
        "dataset = images\nn = 64\nkeys = 2\ntarget_psnr = 35\njpeg = 50, 90\nauto_adjust = true\nnoise = 25\n",
    )
    .unwrap();
    let a = lapmark(&["sweep-attacks", "--config", s(&atk)]);
    let b = lapmark(&["sweep-attacks", "--config", s(&atk)]);
    assert_eq!(
        a.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&a.stderr)
    );
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    for prefix in [
        "ber.jpeg,mean,",
        "recovery.auto-adjust,grass,",
        "ber.laplace-noise,gravel,",
        "psnr,gravel,",
    ] {
        assert!(text.contains(prefix), "{prefix}");
    }
}

#[test]
fn fit_and_failures() {
    let dir = tempfile::tempdir().unwrap();
    let out = lapmark(&["fit", s(&data("camera.pgm")), s(&data("grass.pgm"))]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("image,scale,ks_laplace,ks_gauss\ncamera,"));
    assert_eq!(text.lines().count(), 3);

    let cfg = dir.path().join("fit.cfg");
    std::fs::write(&cfg, format!("dataset = {}\n", s(&data("")))).unwrap();
    let out = lapmark(&["fit", "--config", s(&cfg)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).lines().count(), 8);

    let out = lapmark(&[
        "fit",
        s(&data("camera.pgm")),
        s(&dir.path().join("none.pgm")),
    ]);
    assert_eq!(out.status.code(), Some(2));

    std::fs::write(&cfg, "this is not a config\n").unwrap();
    assert_eq!(
        lapmark(&["sweep-ber", "--config", s(&cfg)]).status.code(),
        Some(1)
    );
    assert_eq!(
        lapmark(&[
            "sweep-attacks",
            "--config",
            s(&dir.path().join("missing.cfg"))
        ])
        .status
        .code(),
        Some(1)
    );

    let key = dir.path().join("k.txt");
    std::fs::write(&key, "v1 seed=1 alpha=0.1 n=100 mask=2,0;1,1\n").unwrap();
    let out = lapmark(&[
        "extract",
        "--image",
        s(&data("camera.pgm")),
        "--key",
        s(&key),
        "--bits",
        "4",
        "--model",
        "noisy",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let out = lapmark(&[
        "extract",
        "--image",
        s(&data("camera.pgm")),
        "--key",
        s(&key),
        "--bits",
        "100000",
    ]);
    assert_eq!(out.status.code(), Some(1));
}
