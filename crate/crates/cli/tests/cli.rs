use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qiren(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qiren"))
        .args(args)
        .env_remove("QIREN_SEED")
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

const TINY: &[&str] = &["--qubits", "2", "--depth", "1", "--reuploads", "1", "--blocks", "1"];

#[test]
fn help_lists_every_flag() {
    let out = qiren(&["train", "--help"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for flag in [
        "--family", "--data", "--epochs", "--seeds", "--seed", "--lr", "--qubits", "--reuploads", "--blocks",
        "--entangler", "--noise", "--out", "--threads", "--config",
    ] {
        assert!(text.contains(flag), "train --help lacks {flag}");
    }
    for (cmd, flags) in [
        ("superres", &["--factor", "--checkpoint", "--out"][..]),
        ("spectrum", &["--cutoff", "--checkpoint", "--data"][..]),
        ("ablate", &["--seeds", "--noise", "--grid"][..]),
        ("verify", &["--seeds"][..]),
    ] {
        let text = String::from_utf8(qiren(&[cmd, "--help"]).stdout).unwrap();
        for f in flags {
            assert!(text.contains(f), "{cmd} --help lacks {f}");
        }
    }
}

#[test]
fn missing_file_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = qiren(&["train", "--data", "/no/such/sound.wav", "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn bad_flags_and_config_exit_1() {
    assert_eq!(qiren(&["train", "--family", "nope"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"epochs": 1, "learning_rate": 3}"#).unwrap();
    let out = qiren(&["train", "--config", path(&cfg), "--data", "synthetic:two-tone"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn zero_epochs_writes_report_only() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["train", "--data", "synthetic:two-tone", "--epochs", "0", "--out", path(dir.path())];
    args.extend(TINY);
    let out = qiren(&args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("report.json").exists());
    assert!(!dir.path().join("model.qirn").exists());
}

#[test]
fn divergence_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = qiren(&[
        "train", "--family", "relu", "--data", "synthetic:two-tone", "--epochs", "30", "--lr", "1e300", "--out",
        path(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn train_is_deterministic_and_config_is_overridden() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"epochs": 50, "seeds": [7], "noise": 0.05}"#).unwrap();
    let run = |name: &str| {
        let out_dir = dir.path().join(name);
        let mut args = vec![
            "train", "--config", path(&cfg), "--data", "synthetic:two-tone", "--epochs", "3", "--seeds", "2", "--out",
            path(&out_dir),
        ];
        args.extend(TINY);
        let out = qiren(&args);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        (
            fs::read_to_string(out_dir.join("report.json")).unwrap(),
            fs::read(out_dir.join("model.qirn")).unwrap(),
        )
    };
    let (r1, c1) = run("a");
    let (r2, c2) = run("b");
    assert_eq!(r1, r2);
    assert_eq!(c1, c2);
    let report: serde_json::Value = serde_json::from_str(&r1).unwrap();
    assert_eq!(report["train"]["epochs"], 3);
    assert!([7, 8].contains(&report["seed"].as_u64().unwrap()));
    assert_eq!(report["model"]["noise_bound"], 0.05);
    assert_eq!(report["loss_curve"].as_array().unwrap().len(), 3);
}

#[test]
fn seed_comes_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["train", "--data", "synthetic:two-tone", "--epochs", "0", "--out", path(dir.path())];
    args.extend(TINY);
    let out = Command::new(env!("CARGO_BIN_EXE_qiren")).args(&args).env("QIREN_SEED", "42").output().unwrap();
    assert!(out.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["seed"], 42);
}

#[test]
fn image_pipeline_superres_to_64() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["train", "--data", "synthetic:smooth-image", "--epochs", "2", "--out", path(dir.path())];
    args.extend(TINY);
    assert!(qiren(&args).status.success());
    let ck = dir.path().join("model.qirn");
    let out = qiren(&[
        "superres", "--checkpoint", path(&ck), "--factor", "2", "--data", "synthetic:smooth-image", "--out",
        path(dir.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let img = qiren::tasks::read_pgm(dir.path().join("superres_64x64.pgm")).unwrap();
    assert_eq!((img.rows, img.cols), (64, 64));
    assert!(dir.path().join("bilinear_64x64.pgm").exists());
    assert!(dir.path().join("nearest_64x64.pgm").exists());

    // superres of a 1-D model is rejected
    let one_d = dir.path().join("sound");
    let mut args = vec!["train", "--data", "synthetic:two-tone", "--epochs", "1", "--out", path(&one_d)];
    args.extend(TINY);
    assert!(qiren(&args).status.success());
    let out = qiren(&["superres", "--checkpoint", path(&one_d.join("model.qirn")), "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn spectrum_writes_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["train", "--data", "synthetic:two-tone", "--epochs", "2", "--out", path(dir.path())];
    args.extend(TINY);
    assert!(qiren(&args).status.success());
    let out = qiren(&[
        "spectrum", "--checkpoint", path(&dir.path().join("model.qirn")), "--data", "synthetic:two-tone", "--out",
        path(dir.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("target_spectrum.csv")).unwrap();
    assert!(csv.starts_with("frequency,magnitude"));
    assert!(dir.path().join("model_spectrum.csv").exists());
    let bands: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("band_errors.json")).unwrap()).unwrap();
    assert!(bands["total"].as_f64().unwrap() >= 0.0);
}

#[test]
fn ablate_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["ablate", "--data", "synthetic:two-tone", "--epochs", "1", "--out", path(dir.path())];
    args.extend(TINY);
    let out = qiren(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("ablation.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 10);
}

#[test]
fn verify_passes() {
    let out = qiren(&["verify", "--seeds", "5"]);
    assert!(out.status.success());
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.lines().all(|l| l.starts_with("PASS")), "{table}");
    assert!(out.stderr.is_empty() || !String::from_utf8_lossy(&out.stderr).contains("PASS"));
}
