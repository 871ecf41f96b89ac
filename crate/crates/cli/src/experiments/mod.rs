//! The config-driven subcommands.

mod characterize;
mod resilience;
mod trace;
mod variance;

use std::sync::Arc;

use anyhow::{bail, Context as _, Result};
use qhul_core::io::scene::load_mask;
use qhul_core::io::{load_scene, SceneSource};
use qhul_core::noise::Poisson;
use qhul_core::pipeline::DistillOptions;
use qhul_core::{NoiseField, NoiseModel, NoiseRegistry, SceneObject};

pub use characterize::CharacterizeNoise;
pub use resilience::ResilienceSweep;
pub use trace::SignalTrace;
pub use variance::VarianceSweep;

use crate::RunContext;

/// Scene and configured noise field, with relative paths resolved.
struct Setup {
    scene: SceneObject,
    noise: NoiseField,
}

impl Setup {
    fn load(ctx: &RunContext) -> Result<Self> {
        let cfg = &ctx.config;
        let scene = load_scene(&cfg.scene, &ctx.base_dir).context(match &cfg.scene {
            SceneSource::Glyph { name, .. } => format!("rendering glyph `{name}`"),
            SceneSource::Images { magnitude, .. } => format!("loading scene {}", magnitude.display()),
        })?;
        let model = NoiseRegistry::builtin()
            .build(&cfg.noise.spec)
            .context("building noise model")?;
        let mut noise = NoiseField::new(model);
        if let Some(mask) = &cfg.noise.mask {
            let path = ctx.base_dir.join(mask);
            let mask = load_mask(&path).with_context(|| format!("loading noise mask {}", path.display()))?;
            noise = noise.with_mask(mask)?;
        }
        let (w, h) = scene.dims();
        noise.check_dims(w, h).context("noise mask does not match the scene")?;
        Ok(Self { scene, noise })
    }

    /// Mean mask value over the object support; 1 without a mask.
    fn mask_mean(&self) -> f64 {
        match self.noise.mask() {
            None => 1.0,
            Some(mask) => {
                let support = self.scene.support();
                let (sum, n) = mask
                    .iter()
                    .zip(support.iter())
                    .filter(|(_, &s)| s)
                    .fold((0.0, 0usize), |(sum, n), (m, _)| (sum + m, n + 1));
                if n == 0 {
                    0.0
                } else {
                    sum / n as f64
                }
            }
        }
    }

    /// Model family swept by ratio. An `off` config falls back to Poisson.
    fn sweep_model(&self) -> Arc<dyn NoiseModel> {
        if self.noise.is_off() {
            Arc::new(Poisson::new(0.0).expect("zero mean is valid"))
        } else {
            self.noise.model().clone()
        }
    }

    /// Noise field whose mean over the support is `ratio * 2 * s0`.
    fn field_at_ratio(&self, model: &Arc<dyn NoiseModel>, ratio: f64, s0: f64) -> Result<NoiseField> {
        if !(ratio.is_finite() && ratio >= 0.0) {
            bail!("ratio {ratio} must be finite and >= 0");
        }
        let scale = self.mask_mean();
        let nominal = if ratio == 0.0 {
            0.0
        } else if scale > 0.0 {
            ratio * 2.0 * s0 / scale
        } else {
            bail!("noise mask is zero over the object support, ratio {ratio} is unreachable");
        };
        Ok(self.noise.with_model(model.with_mean(nominal)?))
    }
}

fn distill_options(ctx: &RunContext) -> DistillOptions {
    DistillOptions {
        cut_row: ctx.config.analysis.cut_row,
        visibility_floor: ctx.config.analysis.visibility_floor,
    }
}

fn opt(v: Option<f64>) -> f64 {
    v.unwrap_or(f64::NAN)
}
