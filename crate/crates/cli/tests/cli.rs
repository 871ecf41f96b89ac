use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qhul_cli::config_hash;
use qhul_core::io::ExperimentConfig;

fn qhul(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qhul"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("exp.conf");
    fs::write(&path, body).unwrap();
    path
}

const SMALL: &str = "seed = 9
[scene]
glyph = bars
width = 16
height = 16
[source]
s0 = 134
steps = 4
repeats = 3
[noise]
kind = poisson
mean = 0
[sweep]
ratios = 8, 252
noise_variances = 3000, 30000
noise_means = 100, 1000
[analysis]
noise_frames = 4
trace_repeats = 20
";

fn run_ok(cmd: &str, config: &Path, out: &Path) {
    let o = qhul(&[
        cmd,
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{cmd} failed: {}", stderr(&o));
}

#[test]
fn help_lists_every_command_and_flag() {
    let o = qhul(&["--help"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for cmd in [
        "characterize-noise",
        "resilience-sweep",
        "variance-sweep",
        "predict",
        "signal-trace",
    ] {
        assert!(text.contains(cmd), "missing {cmd} in help");
    }
    let run_help = String::from_utf8(qhul(&["resilience-sweep", "--help"]).stdout).unwrap();
    for flag in ["--config", "--seed", "--out"] {
        assert!(run_help.contains(flag), "missing {flag}");
    }
    let predict_help = String::from_utf8(qhul(&["predict", "--help"]).stdout).unwrap();
    for flag in ["--s0", "--visibility", "--steps", "--repeats", "--noise-var"] {
        assert!(predict_help.contains(flag), "missing {flag}");
    }
}

#[test]
fn predict_prints_nine_significant_digits() {
    let o = qhul(&[
        "predict",
        "--s0",
        "134",
        "--visibility",
        "0.5",
        "--steps",
        "12",
        "--repeats",
        "1",
        "--noise-var",
        "0",
    ]);
    assert!(o.status.success());
    assert_eq!(String::from_utf8(o.stdout).unwrap(), "2.48756219e-3\n");
}

#[test]
fn predict_rejects_invalid_input() {
    let o = qhul(&["predict", "--s0", "134", "--visibility", "0", "--steps", "12"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("error"));
}

#[test]
fn unknown_command_is_a_usage_error() {
    let o = qhul(&["reconstruct-everything"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_config_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "seed = 1\n[source]\ns0 = lots\n");
    let o = qhul(&["resilience-sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn missing_config_file_fails() {
    let o = qhul(&["signal-trace", "--config", "/nonexistent/exp.conf"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unwritable_output_directory_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = blocker.join("sub");
    let o = qhul(&[
        "signal-trace",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("output directory"));
}

#[test]
fn sweep_without_ratios_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "seed = 1\n[scene]\nglyph = bars\nwidth = 8\nheight = 8\n");
    let o = qhul(&[
        "resilience-sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("ratios"));
}

#[test]
fn every_csv_starts_with_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let hash = config_hash(&ExperimentConfig::parse(SMALL).unwrap());
    for cmd in [
        "characterize-noise",
        "resilience-sweep",
        "variance-sweep",
        "signal-trace",
    ] {
        let out = dir.path().join(cmd);
        run_ok(cmd, &cfg, &out);
        let mut csvs = 0;
        for entry in fs::read_dir(&out).unwrap() {
            let path = entry.unwrap().path();
            if matches!(path.extension().and_then(|e| e.to_str()), Some("csv" | "txt")) {
                let text = fs::read_to_string(&path).unwrap();
                let first = text.lines().next().unwrap();
                assert!(first.starts_with("# qhul "), "{}: {first}", path.display());
                assert!(first.contains(&format!("config_hash={hash}")));
                assert!(first.contains("seed=9"));
                assert!(!text.contains('\r'));
                csvs += 1;
            }
        }
        assert!(csvs >= 2, "{cmd} wrote {csvs} text files");
    }
}

#[test]
fn resilience_outputs_rows_maps_and_cuts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    run_ok("resilience-sweep", &cfg, dir.path());
    let summary = fs::read_to_string(dir.path().join("resilience.csv")).unwrap();
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(
        lines[1],
        "r,noise_variance,mean_visibility,phase_rmse,mean_phase_variance"
    );
    assert_eq!(lines.len(), 4);
    assert!(lines[2].starts_with("8.00000000e0,2.14400000e3,"));

    let pfm = fs::read(dir.path().join("point01_phase.pfm")).unwrap();
    let header = b"Pf\n16 16\n-1.0\n";
    assert_eq!(&pfm[..header.len()], header);
    assert_eq!(pfm.len(), header.len() + 16 * 16 * 4);
    let cut = fs::read_to_string(dir.path().join("point00_cut.csv")).unwrap();
    assert_eq!(cut.lines().nth(1), Some("column,phase"));
    assert_eq!(cut.lines().count(), 2 + 16);
    let manifest = fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
    assert!(manifest.contains("point01_phase.pfm"));
}

#[test]
fn seed_override_changes_results_and_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run_ok("signal-trace", &cfg, &a);
    let o = qhul(&[
        "signal-trace",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "10",
        "--out",
        b.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let ta = fs::read_to_string(a.join("trace.csv")).unwrap();
    let tb = fs::read_to_string(b.join("trace.csv")).unwrap();
    assert!(tb.lines().next().unwrap().contains("seed=10"));
    assert_ne!(ta.lines().next(), tb.lines().next());
    assert_ne!(ta.lines().nth(2), tb.lines().nth(2));
}

#[test]
fn output_dir_defaults_relative_to_config() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!("output_dir = results\n{SMALL}");
    let cfg = write_config(dir.path(), &body);
    let o = qhul(&["characterize-noise", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("results/noise_pooled.csv").exists());
}

#[test]
fn config_hash_ignores_output_dir_only() {
    let base = ExperimentConfig::parse(SMALL).unwrap();
    let mut moved = base.clone();
    moved.output_dir = PathBuf::from("elsewhere");
    assert_eq!(config_hash(&base), config_hash(&moved));
    let mut changed = base.clone();
    changed.source.s0 = 135.0;
    assert_ne!(config_hash(&base), config_hash(&changed));
    let mut reseeded = base;
    reseeded.seed += 1;
    assert_ne!(config_hash(&moved), config_hash(&reseeded));
}

#[test]
fn characterize_noise_classifies_models() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    run_ok("characterize-noise", &cfg, dir.path());
    let pooled = fs::read_to_string(dir.path().join("noise_pooled.csv")).unwrap();
    let rows: Vec<&str> = pooled.lines().skip(2).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows
        .iter()
        .all(|r| r.starts_with(|c: char| c.is_ascii_digit()) && r.contains(",poisson,")));
    let pixels = fs::read_to_string(dir.path().join("noise_pixels.csv")).unwrap();
    assert_eq!(pixels.lines().count(), 2 + 2 * 16 * 16);
}
