use anyhow::{Context as _, Result};
use qhul_core::io::csv::fmt_f64;
use qhul_core::io::CsvTable;
use qhul_core::seed::{derive, frame_seed, Stream};
use qhul_core::stats::classify_points;
use qhul_core::{characterize_noise, sample_noise_frame, NoiseField, NoiseSpec};

use super::Setup;
use crate::output::write_csv;
use crate::{Experiment, RunContext, RunOutput};

/// Per-pixel mean and variance of noise-only frames.
pub struct CharacterizeNoise;

impl Experiment for CharacterizeNoise {
    fn name(&self) -> &'static str {
        "characterize-noise"
    }

    fn about(&self) -> &'static str {
        "Sample noise-only frames and report per-pixel and pooled mean and variance"
    }

    fn run(&self, ctx: &RunContext) -> Result<RunOutput> {
        let cfg = &ctx.config;
        let setup = Setup::load(ctx)?;
        let (w, h) = setup.scene.dims();
        let prov = ctx.provenance.to_string();

        // The configured model, or one variant per requested mean (and mode count).
        let mut fields: Vec<NoiseField> = Vec::new();
        if cfg.sweep.noise_means.is_empty() {
            fields.push(setup.noise.clone());
        } else {
            let base = setup.noise.model();
            for &mean in &cfg.sweep.noise_means {
                if base.kind() == "speckle" && !cfg.sweep.mode_counts.is_empty() {
                    for &k in &cfg.sweep.mode_counts {
                        let spec = NoiseSpec::new("speckle").with("mean", mean).with("modes", k);
                        let model = qhul_core::NoiseRegistry::builtin().build(&spec)?;
                        fields.push(setup.noise.with_model(model));
                    }
                } else {
                    let model = base.with_mean(mean).with_context(|| format!("noise mean {mean}"))?;
                    fields.push(setup.noise.with_model(model));
                }
            }
        }

        let mut files = Vec::new();
        let mut pixels = CsvTable::new(&prov, &["config", "pixel_x", "pixel_y", "mean", "variance"]);
        let mut pooled = CsvTable::new(
            &prov,
            &[
                "config",
                "kind",
                "modes",
                "nominal_mean",
                "nominal_variance",
                "mean",
                "variance",
                "variance_spread",
                "ratio",
                "class",
            ],
        );
        for (c, field) in fields.iter().enumerate() {
            let model = field.model();
            let spec = model.spec();
            let seed = derive(cfg.seed, &[Stream::Characterize as u64, c as u64]);
            let frames = (0..cfg.analysis.noise_frames)
                .map(|f| sample_noise_frame(field, w, h, frame_seed(seed, Stream::Noise, f, 0)))
                .collect::<qhul_core::Result<Vec<_>>>()?;
            let stats = characterize_noise(&frames)?;
            for (x, y, mean, var) in stats.points() {
                pixels.row(&[c.to_string(), x.to_string(), y.to_string(), fmt_f64(mean), fmt_f64(var)]);
            }
            let p = stats.pooled();
            let class = &classify_points([(p.mean, p.variance)])[0];
            let nominal = model.moments();
            pooled.row(&[
                c.to_string(),
                model.kind().to_string(),
                fmt_f64(spec.get("modes").unwrap_or(f64::NAN)),
                fmt_f64(nominal.mean),
                fmt_f64(nominal.variance),
                fmt_f64(p.mean),
                fmt_f64(p.variance),
                fmt_f64(stats.variance_spread()),
                fmt_f64(class.ratio),
                class.class.as_str().to_string(),
            ]);
        }
        write_csv(ctx.out("noise_pixels.csv"), &pixels, &mut files)?;
        write_csv(ctx.out("noise_pooled.csv"), &pooled, &mut files)?;
        Ok(RunOutput { files })
    }
}
