//! Line-oriented experiment configuration.
//!
//! ```text
//! # comment
//! seed = 42
//! output_dir = out
//!
//! [scene]
//! glyph = iof
//! width = 64
//! height = 64
//!
//! [source]
//! s0 = 134
//! gamma = 1
//! steps = 12
//! repeats = 8
//!
//! [noise]
//! kind = poisson
//! mean = 0
//!
//! [sweep]
//! ratios = 8, 37, 50, 104, 252
//! ```
//!
//! Every key in `[noise]` other than `kind` and `mask` is passed to the noise
//! model as a numeric parameter. Serialization writes keys in a fixed order, so
//! `serialize` output is canonical.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{uniform_phase_steps, SourceParams};
use crate::noise::NoiseSpec;
use crate::pipeline::Sampling;

#[derive(Debug, Clone, PartialEq)]
pub enum SceneSource {
    Glyph { name: String, width: usize, height: usize },
    Images { magnitude: PathBuf, phase: Option<PathBuf> },
}

impl Default for SceneSource {
    fn default() -> Self {
        SceneSource::Glyph {
            name: "iof".into(),
            width: 64,
            height: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StepSpec {
    Uniform(usize),
    Explicit(Vec<f64>),
}

impl StepSpec {
    pub fn steps(&self) -> Vec<f64> {
        match self {
            StepSpec::Uniform(m) => uniform_phase_steps(*m),
            StepSpec::Explicit(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceConfig {
    pub s0: f64,
    pub gamma: f64,
    pub steps: StepSpec,
    /// Unset means the command's own default.
    pub repeats: Option<usize>,
}

impl Default for SourceConfig {
    fn default() -> Self {
        Self {
            s0: 134.0,
            gamma: 1.0,
            steps: StepSpec::Uniform(12),
            repeats: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseConfig {
    pub spec: NoiseSpec,
    pub mask: Option<PathBuf>,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            spec: NoiseSpec::new("off"),
            mask: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepConfig {
    pub ratios: Vec<f64>,
    pub noise_variances: Vec<f64>,
    pub mode_counts: Vec<f64>,
    pub noise_means: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    pub cut_row: Option<usize>,
    pub visibility_floor: f64,
    pub trace_pixel: Option<(usize, usize)>,
    pub trace_repeats: usize,
    /// Frames per noise characterization.
    pub noise_frames: usize,
    pub sampling: Sampling,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            cut_row: None,
            visibility_floor: crate::holography::DEFAULT_VISIBILITY_FLOOR,
            trace_pixel: None,
            trace_repeats: 50,
            noise_frames: 12,
            sampling: Sampling::Counts,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub scene: SceneSource,
    pub source: SourceConfig,
    pub noise: NoiseConfig,
    pub sweep: SweepConfig,
    pub analysis: AnalysisConfig,
}

impl ExperimentConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            output_dir: PathBuf::from("out"),
            scene: SceneSource::default(),
            source: SourceConfig::default(),
            noise: NoiseConfig::default(),
            sweep: SweepConfig::default(),
            analysis: AnalysisConfig::default(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Source parameters with `repeats` falling back to `default_repeats`.
    pub fn source_params(&self, default_repeats: usize) -> Result<SourceParams> {
        let src = SourceParams {
            s0: self.source.s0,
            gamma: self.source.gamma,
            phase_steps: self.source.steps.steps(),
            repeats: self.source.repeats.unwrap_or(default_repeats),
            seed: self.seed,
        };
        src.validate()?;
        Ok(src)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut seed = None;
        let mut cfg = Self::new(0);
        let mut section = String::new();
        let mut seen = std::collections::HashSet::new();
        let mut scene_keys: Vec<(usize, String, String)> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |reason: String| Error::Config { line: line_no, reason };
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim();
                if !["scene", "source", "noise", "sweep", "analysis"].contains(&name) {
                    return Err(err(format!("unknown section [{name}]")));
                }
                section = name.to_string();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            if !seen.insert(format!("{section}.{key}")) {
                return Err(err(format!("duplicate key `{key}`")));
            }
            let unknown = || err(format!("unknown key `{key}` in [{section}]"));
            match (section.as_str(), key) {
                ("", "seed") => seed = Some(parse_value(value, line_no)?),
                ("", "output_dir") => cfg.output_dir = PathBuf::from(value),
                ("", _) => return Err(unknown()),
                ("scene", "glyph" | "width" | "height" | "magnitude" | "phase") => {
                    scene_keys.push((line_no, key.to_string(), value.to_string()))
                }
                ("scene", _) => return Err(unknown()),
                ("source", "s0") => cfg.source.s0 = parse_value(value, line_no)?,
                ("source", "gamma") => cfg.source.gamma = parse_value(value, line_no)?,
                ("source", "steps") => cfg.source.steps = StepSpec::Uniform(parse_value(value, line_no)?),
                ("source", "phase_steps") => cfg.source.steps = StepSpec::Explicit(parse_list(value, line_no)?),
                ("source", "repeats") => cfg.source.repeats = Some(parse_value(value, line_no)?),
                ("source", _) => return Err(unknown()),
                ("noise", "kind") => cfg.noise.spec.kind = value.to_string(),
                ("noise", "mask") => cfg.noise.mask = Some(PathBuf::from(value)),
                ("noise", _) => {
                    cfg.noise
                        .spec
                        .params
                        .insert(key.to_string(), parse_value(value, line_no)?);
                }
                ("sweep", "ratios") => cfg.sweep.ratios = parse_list(value, line_no)?,
                ("sweep", "noise_variances") => cfg.sweep.noise_variances = parse_list(value, line_no)?,
                ("sweep", "mode_counts") => cfg.sweep.mode_counts = parse_list(value, line_no)?,
                ("sweep", "noise_means") => cfg.sweep.noise_means = parse_list(value, line_no)?,
                ("sweep", _) => return Err(unknown()),
                ("analysis", "cut_row") => cfg.analysis.cut_row = Some(parse_value(value, line_no)?),
                ("analysis", "visibility_floor") => cfg.analysis.visibility_floor = parse_value(value, line_no)?,
                ("analysis", "trace_pixel") => {
                    let xy: Vec<usize> = parse_list(value, line_no)?;
                    if xy.len() != 2 {
                        return Err(err("trace_pixel needs `x, y`".into()));
                    }
                    cfg.analysis.trace_pixel = Some((xy[0], xy[1]));
                }
                ("analysis", "trace_repeats") => cfg.analysis.trace_repeats = parse_value(value, line_no)?,
                ("analysis", "noise_frames") => cfg.analysis.noise_frames = parse_value(value, line_no)?,
                ("analysis", "sampling") => {
                    cfg.analysis.sampling = match value {
                        "counts" => Sampling::Counts,
                        "expected" => Sampling::Expected,
                        other => return Err(err(format!("sampling must be `counts` or `expected`, got `{other}`"))),
                    }
                }
                ("analysis", _) => return Err(unknown()),
                _ => unreachable!("sections are validated above"),
            }
        }

        cfg.seed = seed.ok_or_else(|| Error::Config {
            line: 0,
            reason: "`seed` is mandatory".into(),
        })?;
        if !scene_keys.is_empty() {
            cfg.scene = scene_from_keys(&scene_keys)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        let check = |reason: String| Err(Error::Config { line: 0, reason });
        if self.analysis.noise_frames < 2 {
            return check("noise_frames must be >= 2".into());
        }
        if self.analysis.trace_repeats < 2 {
            return check("trace_repeats must be >= 2".into());
        }
        if self.source.repeats == Some(0) {
            return check("repeats must be >= 1".into());
        }
        if self.noise.spec.kind.is_empty() {
            return check("noise kind must not be empty".into());
        }
        Ok(())
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "output_dir = {}", self.output_dir.display());
        out.push_str(&self.serialize_experiment());
        out
    }

    /// Every setting that influences results, i.e. everything but `output_dir`.
    pub fn serialize_experiment(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "\n[scene]");
        match &self.scene {
            SceneSource::Glyph { name, width, height } => {
                let _ = writeln!(out, "glyph = {name}\nwidth = {width}\nheight = {height}");
            }
            SceneSource::Images { magnitude, phase } => {
                let _ = writeln!(out, "magnitude = {}", magnitude.display());
                if let Some(p) = phase {
                    let _ = writeln!(out, "phase = {}", p.display());
                }
            }
        }

        let _ = writeln!(out, "\n[source]");
        let _ = writeln!(out, "s0 = {}\ngamma = {}", self.source.s0, self.source.gamma);
        match &self.source.steps {
            StepSpec::Uniform(m) => {
                let _ = writeln!(out, "steps = {m}");
            }
            StepSpec::Explicit(v) => {
                let _ = writeln!(out, "phase_steps = {}", join(v));
            }
        }
        if let Some(n) = self.source.repeats {
            let _ = writeln!(out, "repeats = {n}");
        }

        let _ = writeln!(out, "\n[noise]");
        let _ = writeln!(out, "kind = {}", self.noise.spec.kind);
        for (k, v) in &self.noise.spec.params {
            let _ = writeln!(out, "{k} = {v}");
        }
        if let Some(m) = &self.noise.mask {
            let _ = writeln!(out, "mask = {}", m.display());
        }

        let _ = writeln!(out, "\n[sweep]");
        for (key, list) in [
            ("ratios", &self.sweep.ratios),
            ("noise_variances", &self.sweep.noise_variances),
            ("mode_counts", &self.sweep.mode_counts),
            ("noise_means", &self.sweep.noise_means),
        ] {
            if !list.is_empty() {
                let _ = writeln!(out, "{key} = {}", join(list));
            }
        }

        let a = &self.analysis;
        let _ = writeln!(out, "\n[analysis]");
        if let Some(r) = a.cut_row {
            let _ = writeln!(out, "cut_row = {r}");
        }
        let _ = writeln!(out, "visibility_floor = {}", a.visibility_floor);
        if let Some((x, y)) = a.trace_pixel {
            let _ = writeln!(out, "trace_pixel = {x}, {y}");
        }
        let _ = writeln!(out, "trace_repeats = {}", a.trace_repeats);
        let _ = writeln!(out, "noise_frames = {}", a.noise_frames);
        let sampling = match a.sampling {
            Sampling::Counts => "counts",
            Sampling::Expected => "expected",
        };
        let _ = writeln!(out, "sampling = {sampling}");
        out
    }
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
}

fn parse_value<T: FromStr>(value: &str, line: usize) -> Result<T> {
    value.parse().map_err(|_| Error::Config {
        line,
        reason: format!("cannot parse `{value}`"),
    })
}

fn parse_list<T: FromStr>(value: &str, line: usize) -> Result<Vec<T>> {
    let items: Vec<T> = value
        .split(',')
        .map(|s| parse_value(s.trim(), line))
        .collect::<Result<_>>()?;
    if value.trim().is_empty() || items.is_empty() {
        return Err(Error::Config {
            line,
            reason: "list must not be empty".into(),
        });
    }
    Ok(items)
}

fn scene_from_keys(keys: &[(usize, String, String)]) -> Result<SceneSource> {
    let get = |k: &str| keys.iter().find(|(_, key, _)| key == k);
    match (get("glyph"), get("magnitude")) {
        (Some(_), Some((line, _, _))) => Err(Error::Config {
            line: *line,
            reason: "scene takes either `glyph` or `magnitude`, not both".into(),
        }),
        (Some((_, _, name)), None) => {
            let dim = |k: &str| -> Result<usize> { get(k).map_or(Ok(64), |(line, _, v)| parse_value(v, *line)) };
            if let Some((line, _, _)) = get("phase") {
                return Err(Error::Config {
                    line: *line,
                    reason: "`phase` only applies to image scenes".into(),
                });
            }
            Ok(SceneSource::Glyph {
                name: name.clone(),
                width: dim("width")?,
                height: dim("height")?,
            })
        }
        (None, Some((_, _, mag))) => {
            if let Some((line, _, _)) = get("width").or_else(|| get("height")) {
                return Err(Error::Config {
                    line: *line,
                    reason: "image scenes take their size from the files".into(),
                });
            }
            Ok(SceneSource::Images {
                magnitude: PathBuf::from(mag),
                phase: get("phase").map(|(_, _, p)| PathBuf::from(p)),
            })
        }
        (None, None) => Err(Error::Config {
            line: keys[0].0,
            reason: "scene needs `glyph` or `magnitude`".into(),
        }),
    }
}
