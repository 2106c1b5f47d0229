use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_chiplet-dse"));
    c.env_remove(chiplet_dse_cli::OUT_ENV);
    c
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().arg("--out").arg(dir).args(args).output().expect("binary runs")
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

#[test]
fn missing_deck_is_usage_error() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), &["sim", "missing.cir"]);
    assert_eq!(o.status.code(), Some(1));
    let err = text(&o.stderr);
    assert!(err.contains("missing.cir") && err.contains("No such file"), "{err}");
}

#[test]
fn bad_deck_is_model_error() {
    let d = tempfile::tempdir().unwrap();
    let deck = d.path().join("bad.cir");
    std::fs::write(&deck, "R1 a 0 1k\nQ1 a 0 1\n").unwrap();
    let o = run(d.path(), &["sim", deck.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", text(&o.stderr));
    assert!(text(&o.stderr).contains("line 2"));
}

#[test]
fn unknown_subcommand_and_help() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(run(d.path(), &["frobnicate"]).status.code(), Some(1));
    let o = run(d.path(), &["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(text(&o.stdout).contains("explore"));
}

#[test]
fn sim_transient_and_dc() {
    let d = tempfile::tempdir().unwrap();
    let deck = d.path().join("rc.cir");
    std::fs::write(&deck, "V1 in 0 PWL(0 0 1p 1)\nR1 in out 1k\nC1 out 0 1p\n.tran 10p 5n\n.end\n").unwrap();
    let o = run(d.path(), &["sim", deck.to_str().unwrap(), "--probe", "out"]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    let csv = std::fs::read_to_string(d.path().join("sim.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("time,out"));
    let last: f64 = csv.lines().last().unwrap().split(',').nth(1).unwrap().parse().unwrap();
    // five time constants
    assert!((last - (1.0 - (-5.0f64).exp())).abs() < 1e-3, "{last}");

    let divider = d.path().join("div.cir");
    std::fs::write(&divider, "V1 a 0 PWL(0 3)\nR1 a b 2k\nR2 b 0 1k\n").unwrap();
    let o = run(d.path(), &["sim", divider.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    let dc = std::fs::read_to_string(d.path().join("dc.csv")).unwrap();
    let b: f64 = dc
        .lines()
        .find_map(|l| l.strip_prefix("b,"))
        .unwrap()
        .parse()
        .unwrap();
    assert!((b - 1.0).abs() < 1e-9, "{dc}");
}

#[test]
fn empty_config_gives_default_manifest() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("empty.toml");
    std::fs::write(&cfg, "").unwrap();
    let o = run(d.path(), &["--config", cfg.to_str().unwrap(), "explore"]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    let manifest = std::fs::read_to_string(d.path().join("manifest.toml")).unwrap();
    let body: String = manifest.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n");
    let defaults = chiplet_dse_cli::config::Config::default().to_toml();
    assert_eq!(body.trim(), defaults.trim());
}

#[test]
fn override_shows_in_manifest_and_missing_suffix_is_rejected() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("user.toml");
    std::fs::write(&cfg, "[dsl]\nr_drv_ohm = 120\n").unwrap();
    let o = run(d.path(), &["--config", cfg.to_str().unwrap(), "explore"]);
    assert_eq!(o.status.code(), Some(0));
    let m = std::fs::read_to_string(d.path().join("manifest.toml")).unwrap();
    assert!(m.contains("r_drv_ohm = 120.0"), "{m}");

    let o = run(d.path(), &["--config", cfg.to_str().unwrap(), "--set", "dsl.r_drv_ohm=150", "explore"]);
    assert_eq!(o.status.code(), Some(0));
    let m = std::fs::read_to_string(d.path().join("manifest.toml")).unwrap();
    assert!(m.contains("r_drv_ohm = 150.0"), "{m}");

    std::fs::write(&cfg, "[dsl]\nr_drv = 150\n").unwrap();
    let o = run(d.path(), &["--config", cfg.to_str().unwrap(), "explore"]);
    assert_eq!(o.status.code(), Some(1));
    let err = text(&o.stderr);
    assert!(err.contains("unknown field `r_drv`") && err.contains("line 2"), "{err}");
}

#[test]
fn hybrid_check_passes_without_diode() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), &["esd", "check", "--tech", "hybrid", "--gen", "4", "--target", "10"]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    assert!(text(&o.stdout).contains("PASS, peak < 3.8 V, no diode"), "{}", text(&o.stdout));
    for f in ["esd_check_pos.csv", "esd_check_neg.csv", "esd_check.svg", "manifest.toml"] {
        assert!(d.path().join(f).exists(), "{f}");
    }
}

#[test]
fn extract_writes_six_rows() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), &["extract", "--tech", "ubump", "--all"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(d.path().join("extract.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
    assert!(csv.lines().nth(1).unwrap().starts_with("ubump,0,4000,"));
}

#[test]
fn out_dir_from_environment() {
    let d = tempfile::tempdir().unwrap();
    let o = bin()
        .env(chiplet_dse_cli::OUT_ENV, d.path())
        .args(["--preset", "advanced", "explore", "--edge-mm", "1,2,3"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(d.path().join("explore.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(d.path().join("explore_bandwidth.svg").exists());
}

#[test]
fn unknown_preset_lists_choices() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), &["--preset", "nope", "explore"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(text(&o.stderr).contains("jedec-hybrid"));
}
