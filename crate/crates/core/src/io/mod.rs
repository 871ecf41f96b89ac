//! File formats and experiment configuration.

pub mod config;
pub mod csv;
pub mod glyph;
pub mod pfm;
pub mod scene;

pub use config::{ExperimentConfig, SceneSource};
pub use csv::CsvTable;
pub use scene::{load_scene, save_scene};
