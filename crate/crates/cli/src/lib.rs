//! Experiment harness behind the `qhul` binary.
//!
//! Each subcommand that reads a config is an [`Experiment`] registered by name
//! in an [`ExperimentRegistry`]; the binary looks the subcommand up at runtime.

pub mod experiments;
pub mod output;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context as _, Result};
use qhul_core::io::ExperimentConfig;

pub use output::{config_hash, Provenance};

/// Everything an experiment needs to run.
#[derive(Debug, Clone)]
pub struct RunContext {
    pub config: ExperimentConfig,
    /// Directory that relative paths in the config resolve against.
    pub base_dir: PathBuf,
    pub out_dir: PathBuf,
    pub provenance: Provenance,
}

impl RunContext {
    pub fn new(command: &str, config: ExperimentConfig, base_dir: PathBuf, out_dir: Option<PathBuf>) -> Self {
        let out_dir = out_dir.unwrap_or_else(|| base_dir.join(&config.output_dir));
        let provenance = Provenance::new(command, &config);
        Self {
            config,
            base_dir,
            out_dir,
            provenance,
        }
    }

    /// Loads `path`, applying an optional seed override.
    pub fn from_file(command: &str, path: &Path, seed: Option<u64>, out_dir: Option<PathBuf>) -> Result<Self> {
        let mut config = ExperimentConfig::load(path).with_context(|| format!("reading config {}", path.display()))?;
        if let Some(seed) = seed {
            config.seed = seed;
        }
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Self::new(command, config, base_dir, out_dir))
    }

    pub fn out(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }
}

/// Files written by one run.
#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    pub files: Vec<PathBuf>,
}

pub trait Experiment: Send + Sync {
    fn name(&self) -> &'static str;

    fn about(&self) -> &'static str;

    fn run(&self, ctx: &RunContext) -> Result<RunOutput>;
}

#[derive(Default)]
pub struct ExperimentRegistry {
    entries: BTreeMap<&'static str, Box<dyn Experiment>>,
}

impl ExperimentRegistry {
    pub fn builtin() -> Self {
        let mut reg = Self::default();
        reg.register(Box::new(experiments::CharacterizeNoise));
        reg.register(Box::new(experiments::ResilienceSweep));
        reg.register(Box::new(experiments::VarianceSweep));
        reg.register(Box::new(experiments::SignalTrace));
        reg
    }

    pub fn register(&mut self, experiment: Box<dyn Experiment>) {
        self.entries.insert(experiment.name(), experiment);
    }

    pub fn get(&self, name: &str) -> Option<&dyn Experiment> {
        self.entries.get(name).map(|e| e.as_ref())
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }

    /// Runs `name`, creating the output directory and a manifest listing
    /// every file written.
    pub fn run(&self, name: &str, ctx: &RunContext) -> Result<RunOutput> {
        let experiment = self.get(name).with_context(|| format!("unknown experiment `{name}`"))?;
        std::fs::create_dir_all(&ctx.out_dir)
            .with_context(|| format!("creating output directory {}", ctx.out_dir.display()))?;
        let mut output = experiment.run(ctx)?;
        let manifest = ctx.out("manifest.txt");
        output::write_manifest(&manifest, &ctx.provenance, &output.files)?;
        output.files.push(manifest);
        Ok(output)
    }
}
