use anyhow::{bail, Result};
use qhul_core::io::csv::fmt_f64;
use qhul_core::io::CsvTable;
use qhul_core::seed::{derive, Stream};
use qhul_core::{distill, run_acquisition};

use super::{distill_options, opt, Setup};
use crate::output::{write_csv, write_pfm};
use crate::{Experiment, RunContext, RunOutput};

/// Phase recovery against growing background, one row per noise-to-signal ratio.
pub struct ResilienceSweep;

impl Experiment for ResilienceSweep {
    fn name(&self) -> &'static str {
        "resilience-sweep"
    }

    fn about(&self) -> &'static str {
        "Reconstruct the scene at each noise-to-signal ratio in [sweep] ratios"
    }

    fn run(&self, ctx: &RunContext) -> Result<RunOutput> {
        let cfg = &ctx.config;
        if cfg.sweep.ratios.is_empty() {
            bail!("resilience-sweep needs `ratios` in [sweep]");
        }
        let setup = Setup::load(ctx)?;
        let src = cfg.source_params(1)?;
        let model = setup.sweep_model();
        let opts = distill_options(ctx);
        let prov = ctx.provenance.to_string();

        let mut files = Vec::new();
        let mut summary = CsvTable::new(
            &prov,
            &[
                "r",
                "noise_variance",
                "mean_visibility",
                "phase_rmse",
                "mean_phase_variance",
            ],
        );
        for (k, &ratio) in cfg.sweep.ratios.iter().enumerate() {
            let noise = setup.field_at_ratio(&model, ratio, src.s0)?;
            let seed = derive(cfg.seed, &[Stream::Sweep as u64, ratio.to_bits()]);
            let stack = run_acquisition(&setup.scene, &src, &noise, seed, cfg.analysis.sampling)?;
            let report = distill(&stack, Some(src.gamma), &opts)?;
            summary.row(&[
                fmt_f64(report.snr_ratio),
                fmt_f64(report.noise_variance),
                fmt_f64(report.mean_visibility),
                fmt_f64(report.phase_rmse),
                fmt_f64(opt(report.mean_phase_variance)),
            ]);

            let tag = format!("point{k:02}");
            write_pfm(ctx.out(&format!("{tag}_phase.pfm")), &report.mean_phase, &mut files)?;
            write_pfm(
                ctx.out(&format!("{tag}_visibility.pfm")),
                &report.mean_visibility_map,
                &mut files,
            )?;
            if let Some(mag) = &report.magnitude {
                write_pfm(ctx.out(&format!("{tag}_magnitude.pfm")), mag, &mut files)?;
            }
            if let Some(var) = &report.phase_variance {
                write_pfm(ctx.out(&format!("{tag}_variance.pfm")), var, &mut files)?;
            }
            let mut cut = CsvTable::new(
                &format!("{prov} r={} row={}", fmt_f64(ratio), report.cut.row),
                &["column", "phase"],
            );
            for (x, p) in report.cut.phase.iter().enumerate() {
                cut.row(&[x.to_string(), fmt_f64(*p)]);
            }
            write_csv(ctx.out(&format!("{tag}_cut.csv")), &cut, &mut files)?;
        }
        write_csv(ctx.out("resilience.csv"), &summary, &mut files)?;
        Ok(RunOutput { files })
    }
}
