use std::sync::Arc;

use rand_distr::{Distribution, Gamma, StandardNormal};

use super::{Moments, NoiseModel, NoiseSpec};
use crate::error::{Error, Result};
use crate::model::poisson_draw;
use crate::seed::FrameRng;

fn check_mean(mean: f64) -> Result<f64> {
    if mean.is_finite() && mean >= 0.0 {
        Ok(mean)
    } else {
        Err(Error::invalid("mean", format!("{mean} must be >= 0")))
    }
}

/// No background.
#[derive(Debug, Clone, Copy, Default)]
pub struct Off;

impl Off {
    pub const KIND: &'static str = "off";
}

impl NoiseModel for Off {
    fn kind(&self) -> &'static str {
        Self::KIND
    }

    fn spec(&self) -> NoiseSpec {
        NoiseSpec::new(Self::KIND)
    }

    fn moments_scaled(&self, _scale: f64) -> Moments {
        Moments::new(0.0, 0.0)
    }

    fn sample(&self, _scale: f64, _rng: &mut FrameRng) -> f64 {
        0.0
    }

    fn with_mean(&self, mean: f64) -> Result<Arc<dyn NoiseModel>> {
        if mean == 0.0 {
            Ok(Arc::new(Off))
        } else {
            Err(Error::invalid("mean", "`off` noise has zero mean"))
        }
    }
}

/// Fixed offset with no fluctuation.
#[derive(Debug, Clone, Copy)]
pub struct Constant {
    mean: f64,
}

impl Constant {
    pub const KIND: &'static str = "constant";

    pub fn new(mean: f64) -> Result<Self> {
        Ok(Self {
            mean: check_mean(mean)?,
        })
    }
}

impl NoiseModel for Constant {
    fn kind(&self) -> &'static str {
        Self::KIND
    }

    fn spec(&self) -> NoiseSpec {
        NoiseSpec::new(Self::KIND).with("mean", self.mean)
    }

    fn moments_scaled(&self, scale: f64) -> Moments {
        Moments::new(self.mean * scale, 0.0)
    }

    fn sample(&self, scale: f64, _rng: &mut FrameRng) -> f64 {
        self.mean * scale
    }

    fn with_mean(&self, mean: f64) -> Result<Arc<dyn NoiseModel>> {
        Ok(Arc::new(Self::new(mean)?))
    }
}

/// Shot-noise-limited classical light.
#[derive(Debug, Clone, Copy)]
pub struct Poisson {
    mean: f64,
}

impl Poisson {
    pub const KIND: &'static str = "poisson";

    pub fn new(mean: f64) -> Result<Self> {
        Ok(Self {
            mean: check_mean(mean)?,
        })
    }
}

impl NoiseModel for Poisson {
    fn kind(&self) -> &'static str {
        Self::KIND
    }

    fn spec(&self) -> NoiseSpec {
        NoiseSpec::new(Self::KIND).with("mean", self.mean)
    }

    fn moments_scaled(&self, scale: f64) -> Moments {
        let m = self.mean * scale;
        Moments::new(m, m)
    }

    fn sample(&self, scale: f64, rng: &mut FrameRng) -> f64 {
        poisson_draw(self.mean * scale, rng)
    }

    fn with_mean(&self, mean: f64) -> Result<Arc<dyn NoiseModel>> {
        Ok(Arc::new(Self::new(mean)?))
    }

    fn with_variance(&self, variance: f64) -> Result<Arc<dyn NoiseModel>> {
        self.with_mean(variance)
    }
}

/// Normal counts with independent mean and variance; negative draws clamp to
/// zero before rounding. Nominal moments ignore the clamp and rounding.
#[derive(Debug, Clone, Copy)]
pub struct GaussianClamped {
    mean: f64,
    variance: f64,
}

impl GaussianClamped {
    pub const KIND: &'static str = "gaussian";

    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        if !(variance.is_finite() && variance >= 0.0) {
            return Err(Error::invalid("variance", format!("{variance} must be >= 0")));
        }
        Ok(Self {
            mean: check_mean(mean)?,
            variance,
        })
    }
}

impl NoiseModel for GaussianClamped {
    fn kind(&self) -> &'static str {
        Self::KIND
    }

    fn spec(&self) -> NoiseSpec {
        NoiseSpec::new(Self::KIND)
            .with("mean", self.mean)
            .with("variance", self.variance)
    }

    // The mask scales the whole field, so the standard deviation scales with it.
    fn moments_scaled(&self, scale: f64) -> Moments {
        Moments::new(self.mean * scale, self.variance * scale * scale)
    }

    fn sample(&self, scale: f64, rng: &mut FrameRng) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        (scale * (self.mean + self.variance.sqrt() * z)).max(0.0).round()
    }

    fn with_mean(&self, mean: f64) -> Result<Arc<dyn NoiseModel>> {
        Ok(Arc::new(Self::new(mean, self.variance)?))
    }

    fn with_variance(&self, variance: f64) -> Result<Arc<dyn NoiseModel>> {
        Ok(Arc::new(Self::new(self.mean, variance)?))
    }
}

/// Fully developed speckle integrated over `modes` independent grains:
/// gamma-distributed intensity (shape `K`, scale `mean / K`) seen through
/// photon counting. Variance is `mean + mean^2 / K`.
#[derive(Debug, Clone, Copy)]
pub struct Speckle {
    mean: f64,
    modes: f64,
}

impl Speckle {
    pub const KIND: &'static str = "speckle";

    pub fn new(mean: f64, modes: f64) -> Result<Self> {
        if !(modes.is_finite() && modes >= 1.0 && modes.fract() == 0.0) {
            return Err(Error::invalid("modes", format!("{modes} must be an integer >= 1")));
        }
        Ok(Self {
            mean: check_mean(mean)?,
            modes,
        })
    }

    /// Mean that yields `variance` for this mode count: the positive root of
    /// `m^2 / K + m - variance = 0`.
    pub fn mean_for_variance(modes: f64, variance: f64) -> f64 {
        let k = modes;
        (-k + (k * k + 4.0 * k * variance).sqrt()) / 2.0
    }

    pub fn modes(&self) -> f64 {
        self.modes
    }
}

impl NoiseModel for Speckle {
    fn kind(&self) -> &'static str {
        Self::KIND
    }

    fn spec(&self) -> NoiseSpec {
        NoiseSpec::new(Self::KIND)
            .with("mean", self.mean)
            .with("modes", self.modes)
    }

    fn moments_scaled(&self, scale: f64) -> Moments {
        let m = self.mean * scale;
        Moments::new(m, m + m * m / self.modes)
    }

    fn sample(&self, scale: f64, rng: &mut FrameRng) -> f64 {
        let m = self.mean * scale;
        if m <= 0.0 {
            return 0.0;
        }
        let intensity = Gamma::new(self.modes, m / self.modes)
            .map(|g| g.sample(rng))
            .unwrap_or(m);
        poisson_draw(intensity, rng)
    }

    fn with_mean(&self, mean: f64) -> Result<Arc<dyn NoiseModel>> {
        Ok(Arc::new(Self::new(mean, self.modes)?))
    }

    fn with_variance(&self, variance: f64) -> Result<Arc<dyn NoiseModel>> {
        if !(variance.is_finite() && variance >= 0.0) {
            return Err(Error::invalid("variance", format!("{variance} must be >= 0")));
        }
        self.with_mean(Self::mean_for_variance(self.modes, variance))
    }
}
