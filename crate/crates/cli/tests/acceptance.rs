//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any criterion fails.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::{Duration, Instant};

use qhul_cli::{ExperimentRegistry, RunContext};
use qhul_core::holography::wrap_angle;
use qhul_core::io::ExperimentConfig;
use qhul_core::noise::{Constant, GaussianClamped, Off, Poisson, Speckle};
use qhul_core::pipeline::DistillOptions;
use qhul_core::seed::rng;
use qhul_core::stats::{classify_points, Dispersion};
use qhul_core::{
    distill, reconstruct, run_acquisition, sample_noise_frame, sample_quantum_frame, Grid, NoiseField, NoiseModel,
    Sampling, SceneObject, SourceParams,
};
use rand::Rng;

const NOISELESS_TOL: f64 = 1e-12;
const NOISELESS_DRAWS: usize = 1000;
const POISSON_BAND: (f64, f64) = (0.95, 1.05);
const MONTE_CARLO_REL_TOL: f64 = 0.15;
const MONTE_CARLO_REPEATS: usize = 2000;
const OFFSET_TOL: f64 = 1e-12;
const OFFSET_CASES: usize = 100;
// Adding the offset rounds each count by up to ulp(offset); the phase then
// moves by roughly that over the fringe amplitude. Signal levels below these
// bounds are limited by f64 input precision rather than by the estimator.
const OFFSET_S0: (f64, f64) = (50.0, 1e4);
const OFFSET_MAX: f64 = 1e5;
const RESILIENCE_RMSE_LIMIT: f64 = 0.5;
const RESILIENCE_RATIOS: [f64; 5] = [8.0, 252.0, 1000.0, 2500.0, 5000.0];
const RESILIENCE_SEEDS: [u64; 3] = [101, 202, 303];
const RESILIENCE_REPEATS: usize = 8;
const SLOPE_RANGE: (f64, f64) = (0.9, 1.1);
const MIN_R_SQUARED: f64 = 0.95;
const MIN_DECADES: f64 = 2.0;
const MOMENT_REL_TOL: f64 = 0.05;
const DRAWS: (usize, usize) = (400, 250);

struct Verdict {
    pass: bool,
    detail: String,
    notes: Vec<String>,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
            notes: Vec::new(),
        }
    }
}

type Criterion = (u32, &'static str, Duration, fn() -> Verdict);

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn noiseless_recovery() -> Verdict {
    let mut r = rng(1);
    let mut worst: f64 = 0.0;
    for draw in 0..NOISELESS_DRAWS {
        let m = [3, 4, 5, 12][draw % 4];
        let s0 = r.random_range(1.0..1e4);
        let gamma = r.random_range(0.05..=1.0);
        let mag = r.random_range(0.05..=1.0);
        let phase = wrap_angle(r.random_range(-PI..PI));
        let src = SourceParams::new(s0, gamma, m, 1, 0).unwrap();
        let scene = SceneObject::uniform(1, 1, mag, phase).unwrap();
        let stack = run_acquisition(&scene, &src, &NoiseField::off(), 0, Sampling::Expected).unwrap();
        let rec = reconstruct(&stack.frames[0], &src.phase_steps).unwrap();
        let dp = wrap_angle(rec.phase[(0, 0)] - phase).abs();
        let dv = (rec.visibility[(0, 0)] - mag * gamma).abs();
        worst = worst.max(dp).max(dv);
    }
    Verdict::new(
        worst < NOISELESS_TOL,
        format!("max error {worst:.2e} over {NOISELESS_DRAWS} draws, M in 3,4,5,12 (limit {NOISELESS_TOL:e})"),
    )
}

fn poissonianity() -> Verdict {
    let src = SourceParams::new(134.0, 1.0, 4, 1, 0).unwrap();
    let scene = SceneObject::uniform(DRAWS.0, DRAWS.1, 0.0, 0.0).unwrap();
    let frame = sample_quantum_frame(&scene, &src, 0.0, 2024);
    let n = frame.len() as f64;
    let mean = frame.iter().sum::<f64>() / n;
    let var = frame.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let ratio = var / mean;
    Verdict::new(
        (POISSON_BAND.0..=POISSON_BAND.1).contains(&ratio),
        format!("mean {mean:.2}, variance/mean {ratio:.4} over {n} draws"),
    )
}

fn monte_carlo_agreement() -> Verdict {
    let mut notes = Vec::new();
    let mut failed = 0;
    let mut points = 0;
    let mut worst: f64 = 0.0;
    for s0 in [50.0, 134.0] {
        for v in [0.3, 0.8] {
            for m in [4, 12] {
                for noise_factor in [0.0, 2.0, 20.0] {
                    let noise_var = noise_factor * s0;
                    let model: Arc<dyn NoiseModel> = if noise_var == 0.0 {
                        Arc::new(Off)
                    } else {
                        Arc::new(Poisson::new(noise_var).unwrap())
                    };
                    let src = SourceParams::new(s0, 1.0, m, MONTE_CARLO_REPEATS, 0).unwrap();
                    let scene = SceneObject::uniform(4, 4, v, 0.7).unwrap();
                    let seed = (points as u64 + 1) * 7919;
                    let stack = run_acquisition(&scene, &src, &NoiseField::new(model), seed, Sampling::Counts).unwrap();
                    let report = distill(&stack, None, &DistillOptions::default()).unwrap();
                    let empirical = report.mean_phase_variance.unwrap();
                    let predicted = report.predicted_phase_variance.unwrap();
                    let err = rel(empirical, predicted);
                    worst = worst.max(err);
                    points += 1;
                    let ok = err <= MONTE_CARLO_REL_TOL;
                    if !ok {
                        failed += 1;
                    }
                    notes.push(format!(
                        "{} S0={s0} V={v} M={m} noise_var={noise_var}: empirical {empirical:.4e} predicted {predicted:.4e} ratio {:.3}",
                        if ok { "ok  " } else { "FAIL" },
                        empirical / predicted
                    ));
                }
            }
        }
    }
    let mut verdict = Verdict::new(
        failed == 0,
        format!(
            "{failed}/{points} grid points outside {:.0}%, worst {:.1}% ({MONTE_CARLO_REPEATS} repeats x 16 pixels)",
            MONTE_CARLO_REL_TOL * 100.0,
            worst * 100.0
        ),
    );
    verdict.notes = notes;
    verdict
}

fn background_invariance() -> Verdict {
    let mut r = rng(4);
    let mut worst: f64 = 0.0;
    for case in 0..OFFSET_CASES {
        let m = [3, 4, 5, 7, 12][case % 5];
        let src = SourceParams::new(
            r.random_range(OFFSET_S0.0..OFFSET_S0.1),
            r.random_range(0.3..=1.0),
            m,
            1,
            0,
        )
        .unwrap();
        let mag = Grid::from_fn(8, 8, |_, _| r.random_range(0.2..=1.0));
        let phase = Grid::from_fn(8, 8, |_, _| wrap_angle(r.random_range(-PI..PI)));
        let scene = SceneObject::from_maps(mag, phase).unwrap();
        let stack = run_acquisition(&scene, &src, &NoiseField::off(), 0, Sampling::Expected).unwrap();
        let frames = &stack.frames[0];
        let offset = r.random_range(0.0..OFFSET_MAX);
        let shifted: Vec<Grid<f64>> = frames.iter().map(|f| f.map(|c| c + offset)).collect();
        let a = reconstruct(frames, &src.phase_steps).unwrap();
        let b = reconstruct(&shifted, &src.phase_steps).unwrap();
        for (pa, pb) in a.phase.iter().zip(b.phase.iter()) {
            worst = worst.max(wrap_angle(pa - pb).abs());
        }
    }
    Verdict::new(
        worst < OFFSET_TOL,
        format!("max phase change {worst:.2e} over {OFFSET_CASES} cases, offsets up to {OFFSET_MAX:e}"),
    )
}

fn run_experiment(name: &str, config: ExperimentConfig, out: &Path) -> anyhow::Result<()> {
    let ctx = RunContext::new(name, config, out.to_path_buf(), Some(out.to_path_buf()));
    ExperimentRegistry::builtin().run(name, &ctx)?;
    Ok(())
}

/// Data rows of a CSV written by the CLI, as strings.
fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(2)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn resilience() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let mut notes = Vec::new();
    let mut pass = true;
    for seed in RESILIENCE_SEEDS {
        let text = format!(
            "seed = {seed}\n[scene]\nglyph = iof\nwidth = 64\nheight = 64\n\
             [source]\ns0 = 134\ngamma = 1\nsteps = 12\nrepeats = {RESILIENCE_REPEATS}\n\
             [noise]\nkind = poisson\nmean = 0\n[sweep]\nratios = {}\n",
            RESILIENCE_RATIOS.map(|r| r.to_string()).join(", ")
        );
        let out = dir.path().join(seed.to_string());
        run_experiment("resilience-sweep", ExperimentConfig::parse(&text).unwrap(), &out).unwrap();
        let rmse: Vec<f64> = csv_rows(&out.join("resilience.csv"))
            .iter()
            .map(|r| r[3].parse().unwrap())
            .collect();
        let increasing = rmse.windows(2).all(|w| w[1] > w[0]);
        let below = rmse[1] < RESILIENCE_RMSE_LIMIT && rmse[2] < RESILIENCE_RMSE_LIMIT;
        pass &= increasing && below;
        notes.push(format!(
            "seed {seed}: rmse {} increasing={increasing}",
            rmse.iter().map(|e| format!("{e:.3}")).collect::<Vec<_>>().join(" ")
        ));
    }
    let mut v = Verdict::new(
        pass,
        format!(
            "rmse < {RESILIENCE_RMSE_LIMIT} at r=252,1000 and strictly increasing over r=8..5000 for {} seeds",
            RESILIENCE_SEEDS.len()
        ),
    );
    v.notes = notes;
    v
}

fn linearity() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let config = ExperimentConfig::load(&workspace_root().join("configs/variance.conf")).unwrap();
    run_experiment("variance-sweep", config, dir.path()).unwrap();
    let fits = csv_rows(&dir.path().join("fits.csv"));
    let rows = csv_rows(&dir.path().join("variance_sweep.csv"));
    let mut pass = fits.len() == 4;
    let mut notes = Vec::new();
    for fit in &fits {
        let (slope, r2): (f64, f64) = (fit[2].parse().unwrap(), fit[4].parse().unwrap());
        let variances: Vec<f64> = rows
            .iter()
            .filter(|r| r[0] == fit[0])
            .map(|r| r[4].parse::<f64>().unwrap())
            .collect();
        let span = (variances.iter().cloned().fold(f64::MIN, f64::max)
            / variances.iter().cloned().fold(f64::MAX, f64::min))
        .log10();
        let ok = (SLOPE_RANGE.0..=SLOPE_RANGE.1).contains(&slope) && r2 > MIN_R_SQUARED && span >= MIN_DECADES;
        pass &= ok;
        notes.push(format!(
            "{}: slope {slope:.4} R2 {r2:.4} span {span:.2} decades",
            fit[0]
        ));
    }
    let mut v = Verdict::new(
        pass,
        format!(
            "{} fits, slope in [{}, {}], R2 > {MIN_R_SQUARED}, >= {MIN_DECADES} decades",
            fits.len(),
            SLOPE_RANGE.0,
            SLOPE_RANGE.1
        ),
    );
    v.notes = notes;
    v
}

fn noise_moments() -> Verdict {
    let models: Vec<Arc<dyn NoiseModel>> = vec![
        Arc::new(Off),
        Arc::new(Constant::new(50.0).unwrap()),
        Arc::new(Poisson::new(200.0).unwrap()),
        Arc::new(GaussianClamped::new(300.0, 900.0).unwrap()),
        Arc::new(Speckle::new(500.0, 1.0).unwrap()),
        Arc::new(Speckle::new(500.0, 4.0).unwrap()),
        Arc::new(Speckle::new(500.0, 16.0).unwrap()),
    ];
    let mut pass = true;
    let mut notes = Vec::new();
    for (i, model) in models.iter().enumerate() {
        let field = NoiseField::new(model.clone());
        let frame = sample_noise_frame(&field, DRAWS.0, DRAWS.1, 77 + i as u64).unwrap();
        let n = frame.len() as f64;
        let mean = frame.iter().sum::<f64>() / n;
        let var = frame.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let want = model.moments();
        let close = |got: f64, want: f64| {
            if want == 0.0 {
                got == 0.0
            } else {
                rel(got, want) <= MOMENT_REL_TOL
            }
        };
        let mut ok = close(mean, want.mean) && close(var, want.variance);
        let class = classify_points([(mean, var)])[0].class;
        match model.kind() {
            "speckle" => ok &= class == Dispersion::SuperPoissonian && var > mean,
            "constant" => ok &= class == Dispersion::SubPoissonian && var < mean,
            _ => {}
        }
        pass &= ok;
        notes.push(format!(
            "{} {:?}: mean {mean:.2} (want {:.2}) variance {var:.1} (want {:.1}) class {}",
            if ok { "ok  " } else { "FAIL" },
            model.spec().params,
            want.mean,
            want.variance,
            class.as_str()
        ));
    }
    let mut v = Verdict::new(
        pass,
        format!(
            "{} variants within {:.0}% over {} draws; speckle super, constant sub",
            models.len(),
            MOMENT_REL_TOL * 100.0,
            DRAWS.0 * DRAWS.1
        ),
    );
    v.notes = notes;
    v
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let config = workspace_root().join("configs/resilience.conf");
    let mut outs = Vec::new();
    for (run, threads) in [(0, "1"), (1, "4")] {
        let out = dir.path().join(format!("run{run}"));
        let status = Command::new(env!("CARGO_BIN_EXE_qhul"))
            .args(["resilience-sweep", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .env("RAYON_NUM_THREADS", threads)
            .status()
            .unwrap();
        if !status.success() {
            return Verdict::new(false, format!("run {run} exited with {status}"));
        }
        outs.push(out);
    }
    let mut names: Vec<_> = fs::read_dir(&outs[0])
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    let csvs = names.iter().filter(|n| n.to_string_lossy().ends_with(".csv")).count();
    let differing: Vec<_> = names
        .iter()
        .filter(|n| fs::read(outs[0].join(n)).ok() != fs::read(outs[1].join(n)).ok())
        .map(|n| n.to_string_lossy().into_owned())
        .collect();
    Verdict::new(
        differing.is_empty() && csvs > 0,
        format!(
            "{} files ({csvs} CSV) compared across 1 and 4 threads, {} differ {:?}",
            names.len(),
            differing.len(),
            differing
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        (
            1,
            "exact noiseless recovery",
            Duration::from_secs(5),
            noiseless_recovery,
        ),
        (
            2,
            "quantum counts are Poissonian",
            Duration::from_secs(10),
            poissonianity,
        ),
        (
            3,
            "phase variance law matches Monte Carlo",
            Duration::from_secs(120),
            monte_carlo_agreement,
        ),
        (
            4,
            "background invariance",
            Duration::from_secs(60),
            background_invariance,
        ),
        (5, "resilience to classical noise", Duration::from_secs(120), resilience),
        (
            6,
            "phase variance linear in noise variance",
            Duration::from_secs(120),
            linearity,
        ),
        (7, "noise model moments", Duration::from_secs(60), noise_moments),
        (
            8,
            "deterministic resilience sweep",
            Duration::from_secs(300),
            determinism,
        ),
    ];
    let mut failures = 0;
    for (id, name, budget, check) in criteria {
        let start = Instant::now();
        let verdict = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= budget;
        let pass = verdict.pass && in_time;
        if !pass {
            failures += 1;
        }
        println!(
            "criterion {id} {name}: {} | {} | {:.2}s of {}s{}",
            if pass { "PASS" } else { "FAIL" },
            verdict.detail,
            elapsed.as_secs_f64(),
            budget.as_secs(),
            if in_time { "" } else { " (over time)" }
        );
        for note in verdict.notes {
            println!("    {note}");
        }
    }
    println!("acceptance: {} of 8 criteria passed", 8 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
