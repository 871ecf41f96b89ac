use std::fmt::Write as _;
use std::sync::Arc;

use anyhow::{bail, Context as _, Result};
use qhul_core::io::csv::fmt_f64;
use qhul_core::io::CsvTable;
use qhul_core::noise::Speckle;
use qhul_core::seed::{derive, frame_seed, Stream};
use qhul_core::{characterize_noise, distill, loglog_fit, run_acquisition, sample_noise_frame, NoiseModel};

use super::{distill_options, opt, Setup};
use crate::output::write_csv;
use crate::{Experiment, RunContext, RunOutput};

const DEFAULT_REPEATS: usize = 50;

/// Phase variance against measured noise variance, with a log-log fit per series.
pub struct VarianceSweep;

struct Series {
    label: String,
    modes: Option<f64>,
    model: Arc<dyn NoiseModel>,
}

impl Experiment for VarianceSweep {
    fn name(&self) -> &'static str {
        "variance-sweep"
    }

    fn about(&self) -> &'static str {
        "Measure phase variance over [sweep] noise_variances and fit the log-log slope"
    }

    fn run(&self, ctx: &RunContext) -> Result<RunOutput> {
        let cfg = &ctx.config;
        if cfg.sweep.noise_variances.is_empty() {
            bail!("variance-sweep needs `noise_variances` in [sweep]");
        }
        let setup = Setup::load(ctx)?;
        let src = cfg.source_params(DEFAULT_REPEATS)?;
        if src.repeats < 2 {
            bail!("variance-sweep needs repeats >= 2 to measure phase variance");
        }
        let (w, h) = setup.scene.dims();
        let opts = distill_options(ctx);
        let prov = ctx.provenance.to_string();

        let series: Vec<Series> = if cfg.sweep.mode_counts.is_empty() {
            let model = setup.noise.model().clone();
            vec![Series {
                label: model.kind().to_string(),
                modes: None,
                model,
            }]
        } else {
            cfg.sweep
                .mode_counts
                .iter()
                .map(|&k| {
                    Ok(Series {
                        label: format!("speckle_k{k}"),
                        modes: Some(k),
                        model: Arc::new(Speckle::new(0.0, k)?),
                    })
                })
                .collect::<Result<_>>()?
        };

        let mut files = Vec::new();
        let mut table = CsvTable::new(
            &prov,
            &[
                "series",
                "mode_count",
                "target_variance",
                "noise_mean",
                "noise_variance",
                "r",
                "mean_visibility",
                "phase_rmse",
                "mean_phase_variance",
                "predicted_phase_variance",
            ],
        );
        let mut fits = CsvTable::new(
            &prov,
            &[
                "series",
                "mode_count",
                "slope",
                "intercept",
                "r_squared",
                "points",
                "slope_stderr",
            ],
        );
        let mut summary = format!("# {prov}\n{{\n  \"fits\": [\n");

        for (s_idx, s) in series.iter().enumerate() {
            let mut points = Vec::new();
            for &target in &cfg.sweep.noise_variances {
                let model = s
                    .model
                    .with_variance(target)
                    .with_context(|| format!("series {}: variance {target}", s.label))?;
                let noise = setup.noise.with_model(model.clone());
                let seed = derive(
                    cfg.seed,
                    &[Stream::Sweep as u64, opt(s.modes).to_bits(), target.to_bits()],
                );
                let stack = run_acquisition(&setup.scene, &src, &noise, seed, cfg.analysis.sampling)?;
                let report = distill(&stack, Some(src.gamma), &opts)?;

                let noise_frames = (0..cfg.analysis.noise_frames)
                    .map(|f| sample_noise_frame(&noise, w, h, frame_seed(seed, Stream::Characterize, f, 0)))
                    .collect::<qhul_core::Result<Vec<_>>>()?;
                let measured = characterize_noise(&noise_frames)?.pooled();

                let phase_var = opt(report.mean_phase_variance);
                if measured.variance > 0.0 && phase_var > 0.0 {
                    points.push((measured.variance, phase_var));
                }
                table.row(&[
                    s.label.clone(),
                    fmt_f64(opt(s.modes)),
                    fmt_f64(target),
                    fmt_f64(measured.mean),
                    fmt_f64(measured.variance),
                    fmt_f64(report.snr_ratio),
                    fmt_f64(report.mean_visibility),
                    fmt_f64(report.phase_rmse),
                    fmt_f64(phase_var),
                    fmt_f64(opt(report.predicted_phase_variance)),
                ]);
            }
            let fit = loglog_fit(&points)
                .with_context(|| format!("fitting series {} ({} usable points)", s.label, points.len()))?;
            fits.row(&[
                s.label.clone(),
                fmt_f64(opt(s.modes)),
                fmt_f64(fit.slope),
                fmt_f64(fit.intercept),
                fmt_f64(fit.r_squared),
                fit.points.to_string(),
                fmt_f64(fit.slope_stderr),
            ]);
            let sep = if s_idx + 1 < series.len() { "," } else { "" };
            let _ = writeln!(
                summary,
                "    {{\"series\": \"{}\", \"slope\": {}, \"intercept\": {}, \"r_squared\": {}, \"points\": {}, \"slope_stderr\": {}}}{sep}",
                s.label,
                fmt_f64(fit.slope),
                fmt_f64(fit.intercept),
                fmt_f64(fit.r_squared),
                fit.points,
                fmt_f64(fit.slope_stderr),
            );
        }
        summary.push_str("  ]\n}\n");

        write_csv(ctx.out("variance_sweep.csv"), &table, &mut files)?;
        write_csv(ctx.out("fits.csv"), &fits, &mut files)?;
        let path = ctx.out("fit_summary.txt");
        std::fs::write(&path, summary).with_context(|| format!("writing {}", path.display()))?;
        files.push(path);
        Ok(RunOutput { files })
    }
}
