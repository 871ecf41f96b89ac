//! Acquisition, distillation and scoring against ground truth.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::holography::{
    circular_mean, predict_phase_variance, reconstruct, wrap_phase_error, ReconstructionResult,
    DEFAULT_VISIBILITY_FLOOR,
};
use crate::model::{expected_frame, sample_quantum_frame, SceneObject, SourceParams};
use crate::noise::{sample_noise_frame, NoiseField};
use crate::seed::{frame_seed, Stream};

/// How frames are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sampling {
    /// Poisson signal plus sampled noise.
    #[default]
    Counts,
    /// Expected values only, no randomness. For debugging and exactness checks.
    Expected,
}

#[derive(Debug, Clone)]
pub struct Provenance {
    pub scene: SceneObject,
    pub source: SourceParams,
    pub noise: NoiseField,
    pub seed: u64,
    pub sampling: Sampling,
}

/// `repeats x steps` frames of superposed signal and noise counts.
#[derive(Debug, Clone)]
pub struct FrameStack {
    pub frames: Vec<Vec<Grid<f64>>>,
    pub provenance: Provenance,
}

impl FrameStack {
    pub fn repeats(&self) -> usize {
        self.frames.len()
    }

    pub fn steps(&self) -> usize {
        self.provenance.source.phase_steps.len()
    }

    pub fn phase_steps(&self) -> &[f64] {
        &self.provenance.source.phase_steps
    }

    pub fn dims(&self) -> (usize, usize) {
        self.provenance.scene.dims()
    }
}

/// Mean noise over mean signal. Signal mean is the step-averaged `2 s0`.
pub fn snr_ratio(scene: &SceneObject, src: &SourceParams, noise: &NoiseField) -> Result<f64> {
    if src.s0.is_nan() || src.s0 <= 0.0 {
        return Err(Error::invalid("s0", "must be > 0"));
    }
    if noise.is_off() {
        return Ok(0.0);
    }
    Ok(noise.mean_over(scene.support()) / (2.0 * src.s0))
}

/// Samples every frame of an `n x M` acquisition.
///
/// Frame `(i, j)` is the signal at step `delta_j` plus an independent noise
/// frame, each drawn from its own counter-derived seed, so the result does not
/// depend on thread count.
pub fn run_acquisition(
    scene: &SceneObject,
    src: &SourceParams,
    noise: &NoiseField,
    seed: u64,
    sampling: Sampling,
) -> Result<FrameStack> {
    src.validate()?;
    let (w, h) = scene.dims();
    noise.check_dims(w, h)?;
    let m = src.steps();
    let noise_mean = matches!(sampling, Sampling::Expected).then(|| noise.mean_frame(w, h));

    let flat: Vec<Grid<f64>> = (0..src.repeats * m)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / m, k % m);
            let delta = src.phase_steps[j];
            let (mut frame, background) = match &noise_mean {
                Some(mean) => (expected_frame(scene, src, delta), mean.clone()),
                None => (
                    sample_quantum_frame(scene, src, delta, frame_seed(seed, Stream::Quantum, i, j)),
                    sample_noise_frame(noise, w, h, frame_seed(seed, Stream::Noise, i, j))?,
                ),
            };
            for (f, b) in frame.as_mut_slice().iter_mut().zip(background.iter()) {
                *f += b;
            }
            Ok(frame)
        })
        .collect::<Result<_>>()?;

    let mut it = flat.into_iter();
    let frames = (0..src.repeats).map(|_| it.by_ref().take(m).collect()).collect();
    Ok(FrameStack {
        frames,
        provenance: Provenance {
            scene: scene.clone(),
            source: src.clone(),
            noise: noise.clone(),
            seed,
            sampling,
        },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistillOptions {
    /// Row of the transverse cut; defaults to the vertical midline.
    pub cut_row: Option<usize>,
    pub visibility_floor: f64,
}

impl Default for DistillOptions {
    fn default() -> Self {
        Self {
            cut_row: None,
            visibility_floor: DEFAULT_VISIBILITY_FLOOR,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TransverseCut {
    pub row: usize,
    pub phase: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub repeats: Vec<ReconstructionResult>,
    /// Circular mean of the per-repeat phase maps.
    pub mean_phase: Grid<f64>,
    /// Per-repeat mean visibility.
    pub mean_visibility_map: Grid<f64>,
    /// Unbiased variance of wrapped phase errors across repeats; `None` for a
    /// single repeat.
    pub phase_variance: Option<Grid<f64>>,
    /// Mean-map error against ground truth over the support, rad.
    pub phase_rmse: f64,
    pub mean_visibility: f64,
    /// `phase_variance` averaged over the support.
    pub mean_phase_variance: Option<f64>,
    /// Single-shot prediction averaged over the support pixels where it exists.
    pub predicted_phase_variance: Option<f64>,
    pub snr_ratio: f64,
    pub noise_variance: f64,
    pub low_confidence: Grid<bool>,
    pub magnitude: Option<Grid<f64>>,
    pub cut: TransverseCut,
    pub support_pixels: usize,
}

fn predicted_map(stack: &FrameStack) -> Grid<f64> {
    let p = &stack.provenance;
    let (w, h) = p.scene.dims();
    Grid::from_fn(w, h, |x, y| {
        let v = p.scene.magnitude()[(x, y)] * p.source.gamma;
        let noise_var = p.noise.moments_at(x, y).variance;
        predict_phase_variance(p.source.s0, v, stack.steps(), 1, noise_var).unwrap_or(f64::NAN)
    })
}

/// Reconstructs every repeat and scores the result against the scene.
pub fn distill(stack: &FrameStack, gamma: Option<f64>, opts: &DistillOptions) -> Result<ExperimentReport> {
    if stack.frames.is_empty() {
        return Err(Error::InsufficientData("empty frame stack".into()));
    }
    let p = &stack.provenance;
    let scene = &p.scene;
    let (w, h) = scene.dims();
    let predicted = predicted_map(stack);

    let repeats: Vec<ReconstructionResult> = stack
        .frames
        .par_iter()
        .map(|frames| {
            let mut r = reconstruct(frames, stack.phase_steps())?;
            r.predicted_phase_variance = Some(predicted.clone());
            Ok(r)
        })
        .collect::<Result<_>>()?;
    let n = repeats.len();

    let mut mean_phase = Grid::filled(w, h, 0.0);
    let mut mean_vis = Grid::filled(w, h, 0.0);
    let mut phase_defined = Grid::filled(w, h, false);
    let mut variance = Grid::filled(w, h, f64::NAN);
    for y in 0..h {
        for x in 0..w {
            let valid: Vec<f64> = repeats
                .iter()
                .filter(|r| r.valid[(x, y)])
                .map(|r| r.phase[(x, y)])
                .collect();
            if let Some(m) = circular_mean(valid.iter().copied()) {
                mean_phase[(x, y)] = m;
                phase_defined[(x, y)] = true;
            }
            mean_vis[(x, y)] = repeats.iter().map(|r| r.visibility[(x, y)]).sum::<f64>() / n as f64;
            if n >= 2 {
                let truth = scene.phase()[(x, y)];
                let errs: Vec<f64> = repeats
                    .iter()
                    .map(|r| wrap_phase_error(r.phase[(x, y)], truth))
                    .collect();
                let mu = errs.iter().sum::<f64>() / n as f64;
                variance[(x, y)] = errs.iter().map(|e| (e - mu).powi(2)).sum::<f64>() / (n - 1) as f64;
            }
        }
    }

    let support: Vec<(usize, usize)> = scene
        .support()
        .indexed()
        .filter(|(_, _, s)| **s)
        .map(|(x, y, _)| (x, y))
        .collect();
    let avg = |f: &dyn Fn(usize, usize) -> f64| -> f64 {
        if support.is_empty() {
            0.0
        } else {
            support.iter().map(|&(x, y)| f(x, y)).sum::<f64>() / support.len() as f64
        }
    };
    let phase_rmse = avg(&|x, y| wrap_phase_error(mean_phase[(x, y)], scene.phase()[(x, y)]).powi(2)).sqrt();
    let mean_visibility = avg(&|x, y| mean_vis[(x, y)]);
    let mean_phase_variance = (n >= 2 && !support.is_empty()).then(|| avg(&|x, y| variance[(x, y)]));
    let finite_pred: Vec<f64> = support
        .iter()
        .map(|&(x, y)| predicted[(x, y)])
        .filter(|v| v.is_finite())
        .collect();
    let predicted_phase_variance =
        (!finite_pred.is_empty()).then(|| finite_pred.iter().sum::<f64>() / finite_pred.len() as f64);

    let low_confidence = Grid::from_fn(w, h, |x, y| {
        !phase_defined[(x, y)] || mean_vis[(x, y)] < opts.visibility_floor
    });
    let row = opts.cut_row.unwrap_or(h / 2);
    if h > 0 && row >= h {
        return Err(Error::invalid(
            "cut_row",
            format!("row {row} outside image of height {h}"),
        ));
    }
    let cut = TransverseCut {
        row,
        phase: if h > 0 {
            mean_phase.row(row).to_vec()
        } else {
            Vec::new()
        },
    };
    let noise_variance = p.noise.model().moments().variance;

    Ok(ExperimentReport {
        magnitude: gamma.filter(|g| *g > 0.0).map(|g| mean_vis.map(|v| v / g)),
        repeats,
        mean_phase,
        mean_visibility_map: mean_vis,
        phase_variance: (n >= 2).then_some(variance),
        phase_rmse,
        mean_visibility,
        mean_phase_variance,
        predicted_phase_variance,
        snr_ratio: snr_ratio(scene, &p.source, &p.noise)?,
        noise_variance,
        low_confidence,
        cut,
        support_pixels: support.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub delta: f64,
    pub mean: f64,
    pub std_dev: f64,
    /// Noise-free signal mean plus noise mean.
    pub expected: f64,
}

/// Count statistics of one pixel over repeated acquisitions, per phase step.
pub fn signal_trace(
    scene: &SceneObject,
    pixel: (usize, usize),
    src: &SourceParams,
    noise: &NoiseField,
    repeats: usize,
    seed: u64,
) -> Result<Vec<TracePoint>> {
    if repeats < 2 {
        return Err(Error::invalid("repeats", "signal trace needs at least 2 repeats"));
    }
    let (x, y) = pixel;
    let (w, h) = scene.dims();
    if x >= w || y >= h {
        return Err(Error::invalid("pixel", format!("({x}, {y}) outside {w}x{h} scene")));
    }
    noise.check_dims(w, h)?;
    let single = SceneObject::new(
        Grid::filled(1, 1, scene.magnitude()[(x, y)]),
        Grid::filled(1, 1, scene.phase()[(x, y)]),
        Grid::filled(1, 1, true),
    )?;
    let local_noise = noise.pixel(x, y);
    let src = SourceParams { repeats, ..src.clone() };
    let stack = run_acquisition(&single, &src, &local_noise, seed, Sampling::Counts)?;
    let expected = run_acquisition(&single, &src, &local_noise, seed, Sampling::Expected)?;

    Ok(src
        .phase_steps
        .iter()
        .enumerate()
        .map(|(j, &delta)| {
            let counts: Vec<f64> = stack.frames.iter().map(|f| f[j][(0, 0)]).collect();
            let mean = counts.iter().sum::<f64>() / repeats as f64;
            let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (repeats - 1) as f64;
            TracePoint {
                delta,
                mean,
                std_dev: var.sqrt(),
                expected: expected.frames[0][j][(0, 0)],
            }
        })
        .collect())
}
