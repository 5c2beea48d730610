//! Run configuration: a TOML file plus command line overrides.
//!
//! ```toml
//! output_dir = "results"
//! time_grid = "steps_to_final"
//!
//! [[study]]
//! preset = "a"
//! scheme = "corrected"
//! alphas = [0.5]
//! ```
//!
//! Every study field except `preset` and `scheme` defaults to the standard
//! setup of its preset (see [`StudySpec::defaults`]).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{Preset, StudySpec, TimeGrid};
use crate::stepper::Scheme;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStudy {
    preset: Option<Preset>,
    scheme: Option<Scheme>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alphas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t_finals: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    steps: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cells: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reference_steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reference_scheme: Option<Scheme>,
    #[serde(skip_serializing_if = "Option::is_none")]
    time_grid: Option<TimeGrid>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    output_dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    time_grid: Option<TimeGrid>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verbosity: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    jobs: Option<usize>,
    #[serde(default)]
    study: Vec<RawStudy>,
}

/// Validated configuration of a `study` invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub studies: Vec<StudySpec>,
    pub output_dir: PathBuf,
    /// Default grid for studies that do not set their own.
    pub time_grid: TimeGrid,
    pub verbosity: u8,
    /// Worker threads; `None` uses the available parallelism.
    pub jobs: Option<usize>,
}

/// Command line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub preset: Option<Preset>,
    pub scheme: Option<Scheme>,
    pub alphas: Option<Vec<f64>>,
    pub t_finals: Option<Vec<f64>>,
    pub steps: Option<Vec<usize>>,
    pub cells: Option<usize>,
    pub reference_steps: Option<usize>,
    pub reference_scheme: Option<Scheme>,
    pub time_grid: Option<TimeGrid>,
    pub output_dir: Option<PathBuf>,
    pub verbosity: Option<u8>,
    pub jobs: Option<usize>,
}

impl RawStudy {
    fn apply(&mut self, o: &Overrides) {
        macro_rules! set {
            ($($f:ident),*) => {$( if o.$f.is_some() { self.$f = o.$f.clone(); } )*};
        }
        set!(preset, scheme, alphas, t_finals, steps, cells, reference_steps, reference_scheme, time_grid);
    }

    fn resolve(self, index: usize, grid: TimeGrid) -> Result<StudySpec> {
        let ctx = |m: &str| Error::Config(format!("study #{}: {m}", index + 1));
        let preset = self.preset.ok_or_else(|| ctx("missing `preset` (a, b or c)"))?;
        let scheme = self.scheme.ok_or_else(|| ctx("missing `scheme` (vanilla, corrected or backward_euler)"))?;
        let base = StudySpec::defaults(preset, scheme);
        let spec = StudySpec {
            preset,
            scheme,
            alphas: self.alphas.unwrap_or(base.alphas),
            t_finals: self.t_finals.unwrap_or(base.t_finals),
            steps: self.steps.unwrap_or(base.steps),
            cells: self.cells.unwrap_or(base.cells),
            reference_steps: self.reference_steps.unwrap_or(base.reference_steps),
            reference_scheme: self.reference_scheme.unwrap_or(base.reference_scheme),
            time_grid: self.time_grid.unwrap_or(grid),
        };
        spec.validate()
            .map_err(|e| e.context(format!("study #{} (preset {preset}, {scheme})", index + 1)))?;
        Ok(spec)
    }
}

impl RunConfig {
    /// Parse and validate TOML text, then apply `overrides`. A study given only
    /// on the command line (no `[[study]]` table) is built from the overrides.
    pub fn parse(text: &str, overrides: &Overrides) -> Result<RunConfig> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        Self::from_raw(raw, overrides)
    }

    pub fn load(path: &Path, overrides: &Overrides) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text, overrides).map_err(|e| e.context(path.display().to_string()))
    }

    fn from_raw(mut raw: RawConfig, o: &Overrides) -> Result<RunConfig> {
        if raw.study.is_empty() && o.preset.is_some() {
            raw.study.push(RawStudy::default());
        }
        if raw.study.is_empty() {
            return Err(Error::Config("no study specified".into()));
        }
        let time_grid = o.time_grid.or(raw.time_grid).unwrap_or_default();
        let studies = raw
            .study
            .into_iter()
            .enumerate()
            .map(|(i, mut s)| {
                s.apply(o);
                s.resolve(i, time_grid)
            })
            .collect::<Result<Vec<_>>>()?;
        let jobs = o.jobs.or(raw.jobs);
        if jobs == Some(0) {
            return Err(Error::Config("jobs must be at least 1".into()));
        }
        Ok(RunConfig {
            studies,
            output_dir: o.output_dir.clone().or(raw.output_dir).unwrap_or_else(|| "results".into()),
            time_grid,
            verbosity: o.verbosity.or(raw.verbosity).unwrap_or(1),
            jobs,
        })
    }

    /// The configuration with every default spelled out; parses back to `self`.
    pub fn to_toml(&self) -> String {
        let raw = RawConfig {
            output_dir: Some(self.output_dir.clone()),
            time_grid: Some(self.time_grid),
            verbosity: Some(self.verbosity),
            jobs: self.jobs,
            study: self
                .studies
                .iter()
                .map(|s| RawStudy {
                    preset: Some(s.preset),
                    scheme: Some(s.scheme),
                    alphas: Some(s.alphas.clone()),
                    t_finals: Some(s.t_finals.clone()),
                    steps: Some(s.steps.clone()),
                    cells: Some(s.cells),
                    reference_steps: Some(s.reference_steps),
                    reference_scheme: Some(s.reference_scheme),
                    time_grid: Some(s.time_grid),
                })
                .collect(),
        };
        toml::to_string(&raw).expect("configuration serializes")
    }
}
