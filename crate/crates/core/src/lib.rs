//! Simulation and analysis of phase-shifting holography with undetected
//! photons, under classical background noise.
//!
//! The crate generates synthetic signal-photon frame stacks from the
//! count-rate model ([`model`]), adds a configurable classical background
//! ([`noise`]), recovers visibility and phase with M-step phase shifting
//! ([`holography`]), scores recovery against ground truth ([`pipeline`]), and
//! fits the phase-variance scaling law ([`stats`]). [`io`] holds the config and
//! file formats used by the `qhul` command-line tool.

pub mod error;
pub mod grid;
pub mod holography;
pub mod io;
pub mod model;
pub mod noise;
pub mod pipeline;
pub mod seed;
pub mod stats;

pub use error::{Error, Result};
pub use grid::Grid;
pub use holography::{predict_phase_variance, reconstruct, wrap_phase_error, ReconstructionResult};
pub use model::{expected_counts, sample_quantum_frame, SceneObject, SetupParams, SourceParams};
pub use noise::{characterize_noise, sample_noise_frame, NoiseField, NoiseModel, NoiseRegistry, NoiseSpec, NoiseStats};
pub use pipeline::{distill, run_acquisition, signal_trace, snr_ratio, ExperimentReport, FrameStack, Sampling};
pub use stats::{loglog_fit, poisson_check, FitResult};
