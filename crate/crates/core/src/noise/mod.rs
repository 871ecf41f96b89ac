//! Classical background noise.
//!
//! Each noise variant implements [`NoiseModel`] and is registered by name in a
//! [`NoiseRegistry`], so configs and the CLI pick a model with `kind = <name>`.
//! A [`NoiseField`] pairs a model with an optional spatial mask that scales the
//! mean pixel by pixel (the "noise image" laid over the quantum image).

mod models;
mod registry;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

pub use models::{Constant, GaussianClamped, Off, Poisson, Speckle};
pub use registry::{NoiseFactory, NoiseRegistry};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::seed::{self, FrameRng};

/// Mean and variance of per-pixel counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
}

impl Moments {
    pub const fn new(mean: f64, variance: f64) -> Self {
        Self { mean, variance }
    }
}

/// Name plus numeric parameters; the serializable face of a noise model.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NoiseSpec {
    pub kind: String,
    pub params: BTreeMap<String, f64>,
}

impl NoiseSpec {
    pub fn new(kind: impl Into<String>) -> Self {
        Self {
            kind: kind.into(),
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.params.get(key).copied()
    }

    pub fn require(&self, key: &'static str) -> Result<f64> {
        self.get(key).ok_or_else(|| Error::InvalidParameter {
            name: key,
            reason: format!("noise model `{}` needs `{key}`", self.kind),
        })
    }
}

/// A per-pixel background count distribution.
///
/// `scale` is the local mask value; each model decides how its variance
/// follows the scaled mean.
pub trait NoiseModel: fmt::Debug + Send + Sync {
    fn kind(&self) -> &'static str;

    fn spec(&self) -> NoiseSpec;

    fn moments_scaled(&self, scale: f64) -> Moments;

    fn moments(&self) -> Moments {
        self.moments_scaled(1.0)
    }

    fn sample(&self, scale: f64, rng: &mut FrameRng) -> f64;

    /// Same model family with a different nominal mean.
    fn with_mean(&self, mean: f64) -> Result<Arc<dyn NoiseModel>>;

    /// Same model family tuned to the requested variance, if the family allows it.
    fn with_variance(&self, variance: f64) -> Result<Arc<dyn NoiseModel>> {
        let _ = variance;
        Err(Error::invalid(
            "variance",
            format!("noise model `{}` has no free variance", self.kind()),
        ))
    }
}

/// Noise model together with its optional spatial mask.
#[derive(Debug, Clone)]
pub struct NoiseField {
    model: Arc<dyn NoiseModel>,
    mask: Option<Grid<f64>>,
}

impl NoiseField {
    pub fn new(model: Arc<dyn NoiseModel>) -> Self {
        Self { model, mask: None }
    }

    pub fn off() -> Self {
        Self::new(Arc::new(Off))
    }

    pub fn with_mask(mut self, mask: Grid<f64>) -> Result<Self> {
        if let Some(v) = mask.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::invalid("mask", format!("mask value {v} must be >= 0")));
        }
        self.mask = Some(mask);
        Ok(self)
    }

    pub fn model(&self) -> &Arc<dyn NoiseModel> {
        &self.model
    }

    pub fn mask(&self) -> Option<&Grid<f64>> {
        self.mask.as_ref()
    }

    /// Replaces the model, keeping the mask.
    pub fn with_model(&self, model: Arc<dyn NoiseModel>) -> Self {
        Self {
            model,
            mask: self.mask.clone(),
        }
    }

    pub fn is_off(&self) -> bool {
        self.model.kind() == Off::KIND
    }

    fn scale_at(&self, x: usize, y: usize) -> f64 {
        self.mask.as_ref().map_or(1.0, |m| m[(x, y)])
    }

    pub fn moments_at(&self, x: usize, y: usize) -> Moments {
        self.model.moments_scaled(self.scale_at(x, y))
    }

    pub fn check_dims(&self, width: usize, height: usize) -> Result<()> {
        match &self.mask {
            Some(m) => m.ensure_dims((width, height)),
            None => Ok(()),
        }
    }

    /// Mean of the masked noise mean over the selected pixels, or the nominal
    /// mean when nothing is selected.
    pub fn mean_over(&self, select: &Grid<bool>) -> f64 {
        let (mut sum, mut count) = (0.0, 0usize);
        for (x, y, on) in select.indexed() {
            if *on {
                sum += self.moments_at(x, y).mean;
                count += 1;
            }
        }
        if count == 0 {
            self.model.moments().mean
        } else {
            sum / count as f64
        }
    }

    /// Single-pixel field carrying the local mask value at `(x, y)`.
    pub fn pixel(&self, x: usize, y: usize) -> Self {
        Self {
            model: self.model.clone(),
            mask: self.mask.as_ref().map(|m| Grid::filled(1, 1, m[(x, y)])),
        }
    }

    /// Per-pixel mean image.
    pub fn mean_frame(&self, width: usize, height: usize) -> Grid<f64> {
        Grid::from_fn(width, height, |x, y| self.moments_at(x, y).mean)
    }
}

/// One noise frame with independent per-pixel draws.
pub fn sample_noise_frame(field: &NoiseField, width: usize, height: usize, frame_seed: u64) -> Result<Grid<f64>> {
    field.check_dims(width, height)?;
    let mut rng = seed::rng(frame_seed);
    Ok(Grid::from_fn(width, height, |x, y| {
        field.model.sample(field.scale_at(x, y), &mut rng)
    }))
}

/// Per-pixel moments estimated from a frame series.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseStats {
    pub frames: usize,
    pub mean: Grid<f64>,
    /// Unbiased sample variance.
    pub variance: Grid<f64>,
}

impl NoiseStats {
    /// `(mean, variance)` per pixel in row-major order.
    pub fn points(&self) -> impl Iterator<Item = (usize, usize, f64, f64)> + '_ {
        self.mean
            .indexed()
            .zip(self.variance.iter())
            .map(|((x, y, m), v)| (x, y, *m, *v))
    }

    /// Pixel-averaged mean and variance.
    pub fn pooled(&self) -> Moments {
        let n = self.mean.len().max(1) as f64;
        Moments::new(self.mean.iter().sum::<f64>() / n, self.variance.iter().sum::<f64>() / n)
    }

    /// Standard deviation of the per-pixel variance across pixels.
    pub fn variance_spread(&self) -> f64 {
        let n = self.variance.len();
        if n < 2 {
            return 0.0;
        }
        let m = self.pooled().variance;
        (self.variance.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    }
}

pub fn characterize_noise(frames: &[Grid<f64>]) -> Result<NoiseStats> {
    if frames.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "noise characterization needs at least 2 frames, got {}",
            frames.len()
        )));
    }
    let dims = frames[0].dims();
    for f in frames {
        f.ensure_dims(dims)?;
    }
    let n = frames.len() as f64;
    let len = frames[0].len();
    let mut mean = vec![0.0; len];
    let mut var = vec![0.0; len];
    for i in 0..len {
        let m = frames.iter().map(|f| f.as_slice()[i]).sum::<f64>() / n;
        mean[i] = m;
        var[i] = frames.iter().map(|f| (f.as_slice()[i] - m).powi(2)).sum::<f64>() / (n - 1.0);
    }
    Ok(NoiseStats {
        frames: frames.len(),
        mean: Grid::from_vec(dims.0, dims.1, mean)?,
        variance: Grid::from_vec(dims.0, dims.1, var)?,
    })
}
