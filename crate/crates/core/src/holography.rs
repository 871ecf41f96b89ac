//! M-step phase-shifting reconstruction and its phase-variance law.
//!
//! For frames `N_j` recorded at steps `delta_j`, with
//! `C = sum N_j cos delta_j`, `S = sum N_j sin delta_j`, `T = sum N_j`:
//!
//! ```text
//! phase      = atan2(-S, C)
//! visibility = 2 sqrt(S^2 + C^2) / T
//! background = T / M
//! ```
//!
//! With four steps at `0, pi/2, pi, 3pi/2` this is the familiar four-bucket
//! formula. Any constant added to every frame cancels out of `S` and `C`, which
//! is what lets the modulated quantum signal be pulled out of a bright
//! unmodulated background.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Visibility below which a pixel is reported as low-confidence.
pub const DEFAULT_VISIBILITY_FLOOR: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionResult {
    /// Fringe visibility `|R| gamma`. Not clamped; noise can push it past 1.
    pub visibility: Grid<f64>,
    /// Phase in `(-pi, pi]`, 0 where undefined.
    pub phase: Grid<f64>,
    /// Mean count per frame.
    pub background: Grid<f64>,
    /// False where `T = 0` or `S = C = 0`, i.e. the phase is undefined.
    pub valid: Grid<bool>,
    pub m_steps: usize,
    /// Single-shot phase variance predicted from the model, rad^2.
    pub predicted_phase_variance: Option<Grid<f64>>,
}

impl ReconstructionResult {
    pub fn dims(&self) -> (usize, usize) {
        self.phase.dims()
    }

    /// Invalid pixels and pixels whose visibility falls below `floor`.
    pub fn low_confidence(&self, floor: f64) -> Grid<bool> {
        let (w, h) = self.dims();
        Grid::from_fn(w, h, |x, y| !self.valid[(x, y)] || self.visibility[(x, y)] < floor)
    }

    /// Pixels where noise pushed the visibility estimate above 1.
    pub fn over_unity(&self) -> Grid<bool> {
        self.visibility.map(|v| *v > 1.0)
    }

    /// Object magnitude `V / gamma`, available only when `gamma` is known.
    pub fn magnitude(&self, gamma: Option<f64>) -> Option<Grid<f64>> {
        let g = gamma.filter(|g| *g > 0.0)?;
        Some(self.visibility.map(|v| v / g))
    }
}

/// Maps any angle into `(-pi, pi]`.
pub fn wrap_angle(angle: f64) -> f64 {
    let r = (angle + PI).rem_euclid(TAU) - PI;
    if r <= -PI {
        r + TAU
    } else {
        r
    }
}

/// Signed minimal angular difference `estimate - truth`, in `(-pi, pi]`.
pub fn wrap_phase_error(estimate: f64, truth: f64) -> f64 {
    wrap_angle(estimate - truth)
}

/// Circular mean of a set of angles, `None` when the resultant vanishes.
pub fn circular_mean(angles: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (s, c, n) = angles
        .into_iter()
        .fold((0.0, 0.0, 0usize), |(s, c, n), a| (s + a.sin(), c + a.cos(), n + 1));
    if n == 0 || (s * s + c * c).sqrt() < 1e-12 * n as f64 {
        return None;
    }
    Some(wrap_angle(s.atan2(c)))
}

fn check_steps(phase_steps: &[f64]) -> Result<()> {
    if phase_steps.len() < 3 {
        return Err(Error::invalid(
            "phase_steps",
            format!("need at least 3 steps, got {}", phase_steps.len()),
        ));
    }
    for (i, a) in phase_steps.iter().enumerate() {
        if !a.is_finite() {
            return Err(Error::invalid("phase_steps", "non-finite step"));
        }
        for b in &phase_steps[i + 1..] {
            if wrap_angle(a - b).abs() < 1e-9 {
                return Err(Error::invalid(
                    "phase_steps",
                    format!("steps {a} and {b} coincide modulo 2pi"),
                ));
            }
        }
    }
    Ok(())
}

/// Per-pixel visibility, phase and background from `M` phase-stepped frames.
pub fn reconstruct(frames: &[Grid<f64>], phase_steps: &[f64]) -> Result<ReconstructionResult> {
    check_steps(phase_steps)?;
    if frames.len() != phase_steps.len() {
        return Err(Error::InsufficientData(format!(
            "{} frames for {} phase steps",
            frames.len(),
            phase_steps.len()
        )));
    }
    let dims = frames[0].dims();
    for f in frames {
        f.ensure_dims(dims)?;
    }
    let m = phase_steps.len();
    let trig: Vec<(f64, f64)> = phase_steps.iter().map(|d| d.sin_cos()).collect();

    let len = frames[0].len();
    let mut visibility = Vec::with_capacity(len);
    let mut phase = Vec::with_capacity(len);
    let mut background = Vec::with_capacity(len);
    let mut valid = Vec::with_capacity(len);
    for i in 0..len {
        let t: f64 = frames.iter().map(|f| f.as_slice()[i]).sum();
        let mean = t / m as f64;
        // Centered sums: equal to the raw sums for uniform steps, and the
        // background cancels exactly for any step set.
        let (mut s, mut c) = (0.0, 0.0);
        for (f, (sin, cos)) in frames.iter().zip(&trig) {
            let n = f.as_slice()[i] - mean;
            s += n * sin;
            c += n * cos;
        }
        let amplitude = s.hypot(c);
        let ok = t > 0.0 && amplitude > 0.0;
        visibility.push(if t > 0.0 { 2.0 * amplitude / t } else { 0.0 });
        phase.push(if ok { wrap_angle((-s).atan2(c)) } else { 0.0 });
        background.push(t / m as f64);
        valid.push(ok);
    }
    let (w, h) = dims;
    Ok(ReconstructionResult {
        visibility: Grid::from_vec(w, h, visibility)?,
        phase: Grid::from_vec(w, h, phase)?,
        background: Grid::from_vec(w, h, background)?,
        valid: Grid::from_vec(w, h, valid)?,
        m_steps: m,
        predicted_phase_variance: None,
    })
}

/// First-order phase variance of the estimator, rad^2:
///
/// ```text
/// 1 / (n s0 M V^2) * (1 + noise_variance / (2 s0))
/// ```
pub fn predict_phase_variance(
    s0: f64,
    visibility: f64,
    m_steps: usize,
    repeats: usize,
    noise_variance: f64,
) -> Result<f64> {
    if !(s0.is_finite() && s0 > 0.0) {
        return Err(Error::invalid("s0", format!("{s0} must be > 0")));
    }
    if !(visibility > 0.0 && visibility <= 1.0) {
        return Err(Error::invalid("visibility", format!("{visibility} outside (0, 1]")));
    }
    if m_steps < 3 {
        return Err(Error::invalid("m_steps", "need at least 3 steps"));
    }
    if repeats == 0 {
        return Err(Error::invalid("repeats", "must be >= 1"));
    }
    if !(noise_variance.is_finite() && noise_variance >= 0.0) {
        return Err(Error::invalid(
            "noise_variance",
            format!("{noise_variance} must be >= 0"),
        ));
    }
    let quantum = 1.0 / (repeats as f64 * s0 * m_steps as f64 * visibility * visibility);
    Ok(quantum * (1.0 + noise_variance / (2.0 * s0)))
}
