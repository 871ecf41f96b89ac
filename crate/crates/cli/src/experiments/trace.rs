use anyhow::Result;
use qhul_core::io::csv::fmt_f64;
use qhul_core::io::CsvTable;
use qhul_core::seed::{derive, Stream};
use qhul_core::{signal_trace, snr_ratio};

use super::Setup;
use crate::output::write_csv;
use crate::{Experiment, RunContext, RunOutput};

/// Count statistics of one pixel across the phase steps.
pub struct SignalTrace;

impl Experiment for SignalTrace {
    fn name(&self) -> &'static str {
        "signal-trace"
    }

    fn about(&self) -> &'static str {
        "Mean and spread of one pixel's counts versus phase step, per noise ratio"
    }

    fn run(&self, ctx: &RunContext) -> Result<RunOutput> {
        let cfg = &ctx.config;
        let setup = Setup::load(ctx)?;
        let src = cfg.source_params(1)?;
        let (w, h) = setup.scene.dims();
        let pixel = cfg.analysis.trace_pixel.unwrap_or((w / 2, h / 2));

        let series = if cfg.sweep.ratios.is_empty() {
            vec![(snr_ratio(&setup.scene, &src, &setup.noise)?, setup.noise.clone())]
        } else {
            let model = setup.sweep_model();
            cfg.sweep
                .ratios
                .iter()
                .map(|&r| Ok((r, setup.field_at_ratio(&model, r, src.s0)?)))
                .collect::<Result<_>>()?
        };

        let mut table = CsvTable::new(
            &format!("{} pixel={},{}", ctx.provenance, pixel.0, pixel.1),
            &["r", "delta", "mean", "std_dev", "expected"],
        );
        for (r, noise) in &series {
            let seed = derive(cfg.seed, &[Stream::Sweep as u64, r.to_bits()]);
            for p in signal_trace(&setup.scene, pixel, &src, noise, cfg.analysis.trace_repeats, seed)? {
                table.row(&[
                    fmt_f64(*r),
                    fmt_f64(p.delta),
                    fmt_f64(p.mean),
                    fmt_f64(p.std_dev),
                    fmt_f64(p.expected),
                ]);
            }
        }
        let mut files = Vec::new();
        write_csv(ctx.out("trace.csv"), &table, &mut files)?;
        Ok(RunOutput { files })
    }
}
