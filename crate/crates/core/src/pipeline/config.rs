//! Experiment configuration: a flat TOML table.
//!
//! Relative paths are resolved against the directory holding the file.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::latent_index::Metric;
use crate::ridge::default_lambda_grid;
use crate::taxonomy::{parse_edge_list, parse_wordnet_noun, Taxonomy, WupFormula};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaxonomyFormat {
    /// `child<TAB>parent` rows with an optional `id<TAB>lemma…` file.
    #[default]
    Edges,
    /// A WordNet `data.noun` file, or a directory holding `data.noun` and
    /// optionally `index.noun`.
    Wordnet,
}

/// Which moments predicted features are mapped onto.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AdaptTarget {
    /// Moments of the true training features.
    #[default]
    TrueTrain,
    /// Moments of the model's predictions on its own training trials.
    PredTrain,
}

impl FromStr for AdaptTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "true-train" => Ok(AdaptTarget::TrueTrain),
            "pred-train" => Ok(AdaptTarget::PredTrain),
            other => Err(Error::InvalidParameter(format!(
                "unknown adaptation target {other:?} (expected true-train or pred-train)"
            ))),
        }
    }
}

impl fmt::Display for AdaptTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AdaptTarget::TrueTrain => "true-train",
            AdaptTarget::PredTrain => "pred-train",
        })
    }
}

/// How predicted classes are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Baseline {
    /// Ridge prediction followed by the neighbour vote.
    #[default]
    None,
    /// A class drawn uniformly from the index labels, ignoring the brain data.
    Random,
}

impl FromStr for Baseline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Baseline::None),
            "random" => Ok(Baseline::Random),
            other => Err(Error::InvalidParameter(format!(
                "unknown baseline {other:?} (expected none or random)"
            ))),
        }
    }
}

/// Which trials are decoded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    #[default]
    Test,
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            other => Err(Error::InvalidParameter(format!(
                "unknown split {other:?} (expected train or test)"
            ))),
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Test => "test",
        })
    }
}

fn default_subject() -> String {
    "sub-01".into()
}
fn default_shift() -> usize {
    1
}
fn default_split_fraction() -> f64 {
    0.9
}
fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_subject")]
    pub subject: String,

    pub train_trials: PathBuf,
    pub train_features: PathBuf,
    pub test_trials: PathBuf,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_events: Option<PathBuf>,
    /// Directory of FMX1 volume series.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_runs: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_events: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_runs: Option<PathBuf>,
    #[serde(default = "default_shift")]
    pub hrf_shift_volumes: usize,

    pub index: PathBuf,
    pub taxonomy: PathBuf,
    #[serde(default)]
    pub taxonomy_format: TaxonomyFormat,
    /// Lemma TSV for edge lists, `index.noun` for WordNet.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lemmas: Option<PathBuf>,

    pub model: PathBuf,
    pub out_dir: PathBuf,

    #[serde(default = "default_lambda_grid")]
    pub lambda_grid: Vec<f64>,
    #[serde(default = "default_split_fraction")]
    pub split_fraction: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "yes")]
    pub with_intercept: bool,

    /// Falls back to the index sidecar, then to 5.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Falls back to the index sidecar, then to euclidean.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<Metric>,

    #[serde(default = "yes")]
    pub adapt: bool,
    #[serde(default)]
    pub adapt_target: AdaptTarget,
    #[serde(default)]
    pub wup_formula: WupFormula,
    #[serde(default = "yes")]
    pub average_repetitions: bool,
    #[serde(default)]
    pub baseline: Baseline,
}

impl ExperimentConfig {
    /// Parses, validates and resolves relative paths against the file's
    /// directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config: ExperimentConfig = toml::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {}", path.display(), e.message())))?;
        config.validate()?;
        let base = path.parent().unwrap_or(Path::new(""));
        config.resolve_paths(base);
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises to TOML")
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == Some(0) {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if !(self.split_fraction > 0.0 && self.split_fraction < 1.0) {
            return Err(Error::Config(format!(
                "split_fraction must lie in (0, 1), got {}",
                self.split_fraction
            )));
        }
        if self.lambda_grid.len() < 2 {
            return Err(Error::Config("lambda_grid needs at least two values".into()));
        }
        if let Some(l) = self.lambda_grid.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
            return Err(Error::Config(format!("lambda_grid holds invalid value {l}")));
        }
        Ok(())
    }

    fn resolve_paths(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for p in [
            &mut self.train_trials,
            &mut self.train_features,
            &mut self.test_trials,
            &mut self.index,
            &mut self.taxonomy,
            &mut self.model,
            &mut self.out_dir,
        ] {
            join(p);
        }
        for p in [
            &mut self.train_events,
            &mut self.train_runs,
            &mut self.test_events,
            &mut self.test_runs,
            &mut self.lemmas,
        ]
        .into_iter()
        .flatten()
        {
            join(p);
        }
    }

    pub fn trials(&self, split: Split) -> &Path {
        match split {
            Split::Train => &self.train_trials,
            Split::Test => &self.test_trials,
        }
    }

    /// Events file and run directory for a split.
    pub fn raw_inputs(&self, split: Split) -> Result<(&Path, &Path)> {
        let (events, runs) = match split {
            Split::Train => (&self.train_events, &self.train_runs),
            Split::Test => (&self.test_events, &self.test_runs),
        };
        match (events, runs) {
            (Some(e), Some(r)) => Ok((e, r)),
            _ => Err(Error::Config(format!(
                "{split}_events and {split}_runs must both be set to preprocess the {split} split"
            ))),
        }
    }

    pub fn load_taxonomy(&self) -> Result<Taxonomy> {
        load_taxonomy(&self.taxonomy, self.taxonomy_format, self.lemmas.as_deref())
    }
}

/// Reads a taxonomy in either supported format.
pub fn load_taxonomy(path: &Path, format: TaxonomyFormat, lemmas: Option<&Path>) -> Result<Taxonomy> {
    match format {
        TaxonomyFormat::Edges => parse_edge_list(path, lemmas),
        TaxonomyFormat::Wordnet if path.is_dir() => {
            let index = path.join("index.noun");
            let index = lemmas
                .map(Path::to_path_buf)
                .or_else(|| index.is_file().then_some(index));
            parse_wordnet_noun(&path.join("data.noun"), index.as_deref())
        }
        TaxonomyFormat::Wordnet => parse_wordnet_noun(path, lemmas),
    }
}
