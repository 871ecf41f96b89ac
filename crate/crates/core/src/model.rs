//! Physical parameters and the signal-arm count model.
//!
//! The mean number of signal photons recorded by one pixel when the
//! interferometer phase is `delta` is
//!
//! ```text
//! <N_S>(delta) = 2 s0 [1 + |R| gamma cos(delta + phi_R)]
//! ```
//!
//! and individual frames are Poisson draws around that mean.

use std::f64::consts::PI;

use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::seed::{self, FrameRng};

/// Complex reflectance of the imaged object, one value per pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneObject {
    magnitude: Grid<f64>,
    phase: Grid<f64>,
    support: Grid<bool>,
}

impl SceneObject {
    pub fn new(magnitude: Grid<f64>, phase: Grid<f64>, support: Grid<bool>) -> Result<Self> {
        phase.ensure_dims(magnitude.dims())?;
        support.ensure_dims(magnitude.dims())?;
        if let Some(m) = magnitude.iter().find(|m| !(0.0..=1.0).contains(*m)) {
            return Err(Error::invalid("magnitude", format!("{m} outside [0, 1]")));
        }
        if let Some(p) = phase.iter().find(|p| !(**p > -PI && **p <= PI)) {
            return Err(Error::invalid("phase", format!("{p} outside (-pi, pi]")));
        }
        Ok(Self {
            magnitude,
            phase,
            support,
        })
    }

    /// Scene whose support is every pixel with non-zero magnitude.
    pub fn from_maps(magnitude: Grid<f64>, phase: Grid<f64>) -> Result<Self> {
        let support = magnitude.map(|&m| m > 0.0);
        Self::new(magnitude, phase, support)
    }

    pub fn uniform(width: usize, height: usize, magnitude: f64, phase: f64) -> Result<Self> {
        Self::from_maps(
            Grid::filled(width, height, magnitude),
            Grid::filled(width, height, phase),
        )
    }

    pub fn width(&self) -> usize {
        self.magnitude.width()
    }

    pub fn height(&self) -> usize {
        self.magnitude.height()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.magnitude.dims()
    }

    pub fn magnitude(&self) -> &Grid<f64> {
        &self.magnitude
    }

    pub fn phase(&self) -> &Grid<f64> {
        &self.phase
    }

    pub fn support(&self) -> &Grid<bool> {
        &self.support
    }

    pub fn support_fraction(&self) -> f64 {
        if self.support.is_empty() {
            return 0.0;
        }
        self.support.iter().filter(|s| **s).count() as f64 / self.support.len() as f64
    }
}

/// Uniformly spaced phase steps `j * 2pi / M`, `j = 0..M`.
pub fn uniform_phase_steps(m: usize) -> Vec<f64> {
    (0..m).map(|j| j as f64 * 2.0 * PI / m as f64).collect()
}

/// Photon-pair source and acquisition parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceParams {
    /// Mean single-pass signal photons per pixel per frame.
    pub s0: f64,
    /// Coherence factor.
    pub gamma: f64,
    pub phase_steps: Vec<f64>,
    pub repeats: usize,
    pub seed: u64,
}

impl SourceParams {
    /// Source with `m` uniformly spaced steps.
    pub fn new(s0: f64, gamma: f64, m: usize, repeats: usize, seed: u64) -> Result<Self> {
        let params = Self {
            s0,
            gamma,
            phase_steps: uniform_phase_steps(m),
            repeats,
            seed,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s0.is_finite() && self.s0 > 0.0) {
            return Err(Error::invalid("s0", format!("{} must be > 0", self.s0)));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::invalid("gamma", format!("{} outside [0, 1]", self.gamma)));
        }
        if self.phase_steps.len() < 3 {
            return Err(Error::invalid(
                "phase_steps",
                format!("need at least 3 steps, got {}", self.phase_steps.len()),
            ));
        }
        if self.phase_steps.iter().any(|d| !d.is_finite()) {
            return Err(Error::invalid("phase_steps", "non-finite step"));
        }
        if self.repeats == 0 {
            return Err(Error::invalid("repeats", "must be >= 1"));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        self.phase_steps.len()
    }
}

/// Mean signal counts at one pixel for interferometer phase `delta`.
pub fn expected_counts(src: &SourceParams, magnitude: f64, phase: f64, delta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&magnitude) {
        return Err(Error::invalid("magnitude", format!("{magnitude} outside [0, 1]")));
    }
    if !phase.is_finite() || !delta.is_finite() {
        return Err(Error::invalid("phase", "non-finite phase or step"));
    }
    Ok(expected_counts_unchecked(src.s0, src.gamma, magnitude, phase, delta))
}

#[inline]
pub(crate) fn expected_counts_unchecked(s0: f64, gamma: f64, magnitude: f64, phase: f64, delta: f64) -> f64 {
    2.0 * s0 * (1.0 + magnitude * gamma * (delta + phase).cos())
}

/// One Poisson draw; a zero mean yields zero.
#[inline]
pub fn poisson_draw(mean: f64, rng: &mut FrameRng) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    // Only fails for non-finite or non-positive means, excluded above.
    Poisson::new(mean).map(|d| d.sample(rng)).unwrap_or(0.0)
}

/// Noise-free mean count image at step `delta`.
pub fn expected_frame(scene: &SceneObject, src: &SourceParams, delta: f64) -> Grid<f64> {
    let (w, h) = scene.dims();
    Grid::from_fn(w, h, |x, y| {
        expected_counts_unchecked(src.s0, src.gamma, scene.magnitude[(x, y)], scene.phase[(x, y)], delta)
    })
}

/// Poisson-sampled signal frame. Deterministic in `frame_seed`.
pub fn sample_quantum_frame(scene: &SceneObject, src: &SourceParams, delta: f64, frame_seed: u64) -> Grid<f64> {
    let mut rng = seed::rng(frame_seed);
    let (w, h) = scene.dims();
    Grid::from_fn(w, h, |x, y| {
        let mean = expected_counts_unchecked(src.s0, src.gamma, scene.magnitude[(x, y)], scene.phase[(x, y)], delta);
        poisson_draw(mean, &mut rng)
    })
}

/// Optical setup from which `s0` and `gamma` follow in closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct SetupParams {
    /// Pump beam area, m^2.
    pub pump_area: f64,
    /// Detector pixel area, m^2.
    pub pixel_area: f64,
    /// Detection time, s.
    pub detection_time: f64,
    /// Signal wavelength, m.
    pub signal_wavelength: f64,
    /// Focal length of the detection 2f system, m.
    pub focal_length: f64,
    /// Down-conversion bandwidth, rad/s.
    pub bandwidth: f64,
    /// `D L + (L_s - L_i) / c`, s.
    pub group_delay_mismatch: f64,
    /// Parametric gain `sigma L`.
    pub gain: f64,
}

/// Returns `(s0, gamma)` for a setup.
pub fn derive_source_params(setup: &SetupParams) -> Result<(f64, f64)> {
    let positive = [
        ("pump_area", setup.pump_area),
        ("pixel_area", setup.pixel_area),
        ("detection_time", setup.detection_time),
        ("signal_wavelength", setup.signal_wavelength),
        ("focal_length", setup.focal_length),
        ("gain", setup.gain),
    ];
    for (name, v) in positive {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::invalid(name, format!("{v} must be > 0")));
        }
    }
    if !(setup.bandwidth.is_finite() && setup.bandwidth >= 0.0) {
        return Err(Error::invalid("bandwidth", "must be >= 0"));
    }
    if !setup.group_delay_mismatch.is_finite() {
        return Err(Error::invalid("group_delay_mismatch", "must be finite"));
    }
    let lf = setup.signal_wavelength * setup.focal_length;
    let s0 = setup.pump_area * setup.pixel_area / (lf * lf)
        * (setup.detection_time * setup.bandwidth / (2.0 * PI))
        * setup.gain
        * setup.gain;
    let gamma = (-setup.bandwidth * setup.bandwidth / (4.0 * PI) * setup.group_delay_mismatch.powi(2)).exp();
    Ok((s0, gamma))
}
