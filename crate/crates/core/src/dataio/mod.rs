//! On-disk formats and voxel preprocessing.

use std::path::Path;

use nalgebra::DMatrix;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::taxonomy::SynsetRef;

mod csv_matrix;
mod events;
mod fmx;
mod preprocess;

pub use events::{load_events, write_events, StimulusEvent};
pub use fmx::{FmxFile, MAGIC};
pub use preprocess::{preprocess_runs, window_average, zscore_runwise, ZERO_VARIANCE_EPS};

fn ensure_finite(m: &DMatrix<f64>, what: &str) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

fn parse_labels(labels: Vec<String>, path: &Path) -> Result<Vec<SynsetRef>> {
    labels
        .into_iter()
        .map(|l| {
            SynsetRef::new(l.as_str()).map_err(|_| Error::Header {
                path: path.to_path_buf(),
                msg: format!("invalid synset label {l:?}"),
            })
        })
        .collect()
}

fn label_strings(labels: &[SynsetRef]) -> Vec<String> {
    labels.iter().map(ToString::to_string).collect()
}

/// One fMRI run: voxels × volumes.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeSeries {
    pub run_id: String,
    pub data: DMatrix<f64>,
    pub voxel_ids: Vec<String>,
    pub tr_seconds: f64,
}

impl VolumeSeries {
    pub fn new(run_id: impl Into<String>, data: DMatrix<f64>, tr_seconds: f64) -> Result<Self> {
        let voxel_ids = (0..data.nrows()).map(|i| format!("v{i:05}")).collect();
        let run = VolumeSeries {
            run_id: run_id.into(),
            data,
            voxel_ids,
            tr_seconds,
        };
        run.validate()?;
        Ok(run)
    }

    fn validate(&self) -> Result<()> {
        if self.data.nrows() == 0 || self.data.ncols() == 0 {
            return Err(Error::Shape(format!(
                "run {} is {}x{}; needs at least one voxel and one volume",
                self.run_id,
                self.data.nrows(),
                self.data.ncols()
            )));
        }
        if !(self.tr_seconds.is_finite() && self.tr_seconds > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tr_seconds must be positive, got {}",
                self.tr_seconds
            )));
        }
        if self.voxel_ids.len() != self.data.nrows() {
            return Err(Error::Shape("voxel id count differs from voxel rows".into()));
        }
        ensure_finite(&self.data, &format!("run {}", self.run_id))
    }

    pub fn voxels(&self) -> usize {
        self.data.nrows()
    }

    pub fn volumes(&self) -> usize {
        self.data.ncols()
    }

    /// Reads an FMX1 file with `tr_seconds` in the header. The run id comes
    /// from a `run_id` header field, else from the file stem.
    pub fn load(path: &Path) -> Result<Self> {
        let f = FmxFile::read(path)?;
        let tr_seconds = f.extra_f64("tr_seconds", path)?;
        let run_id = match f.extra.get("run_id") {
            Some(Value::String(s)) => s.clone(),
            _ => path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default(),
        };
        let run = VolumeSeries {
            run_id,
            data: f.matrix(),
            voxel_ids: f.ids,
            tr_seconds,
        };
        run.validate()?;
        Ok(run)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = FmxFile::from_matrix(&self.data, self.voxel_ids.clone(), None);
        f.extra.insert("tr_seconds".into(), self.tr_seconds.into());
        f.extra.insert("run_id".into(), self.run_id.clone().into());
        f.write(path)
    }
}

/// Trials × voxels after preprocessing, row-aligned with labels.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialMatrix {
    pub data: DMatrix<f64>,
    pub labels: Vec<SynsetRef>,
    pub image_ids: Vec<String>,
}

impl TrialMatrix {
    pub fn new(data: DMatrix<f64>, labels: Vec<SynsetRef>, image_ids: Vec<String>) -> Result<Self> {
        if data.nrows() != labels.len() || data.nrows() != image_ids.len() {
            return Err(Error::Shape(format!(
                "{} trial rows, {} labels, {} image ids",
                data.nrows(),
                labels.len(),
                image_ids.len()
            )));
        }
        ensure_finite(&data, "trial matrix")?;
        Ok(TrialMatrix {
            data,
            labels,
            image_ids,
        })
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn voxels(&self) -> usize {
        self.data.ncols()
    }

    /// FMX1 with `ids` = image ids and `labels` = synsets.
    pub fn load(path: &Path) -> Result<Self> {
        let f = FmxFile::read(path)?;
        let labels = f.labels.clone().ok_or_else(|| Error::Header {
            path: path.to_path_buf(),
            msg: "trial matrix needs labels".into(),
        })?;
        let labels = parse_labels(labels, path)?;
        TrialMatrix::new(f.matrix(), labels, f.ids)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        FmxFile::from_matrix(
            &self.data,
            self.image_ids.clone(),
            Some(label_strings(&self.labels)),
        )
        .write(path)
    }
}

/// Items × latent features, optionally labelled.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub data: DMatrix<f64>,
    pub item_ids: Vec<String>,
    pub labels: Option<Vec<SynsetRef>>,
}

impl FeatureMatrix {
    pub fn new(
        data: DMatrix<f64>,
        item_ids: Vec<String>,
        labels: Option<Vec<SynsetRef>>,
    ) -> Result<Self> {
        if data.nrows() != item_ids.len() {
            return Err(Error::Shape(format!(
                "{} feature rows but {} item ids",
                data.nrows(),
                item_ids.len()
            )));
        }
        if let Some(l) = &labels {
            if l.len() != data.nrows() {
                return Err(Error::Shape(format!(
                    "{} feature rows but {} labels",
                    data.nrows(),
                    l.len()
                )));
            }
        }
        ensure_finite(&data, "feature matrix")?;
        Ok(FeatureMatrix {
            data,
            item_ids,
            labels,
        })
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn dim(&self) -> usize {
        self.data.ncols()
    }

    /// FMX1, or the CSV fallback when the extension is `.csv`.
    pub fn load(path: &Path) -> Result<Self> {
        if is_csv(path) {
            return csv_matrix::read(path);
        }
        let f = FmxFile::read(path)?;
        let labels = f.labels.clone().map(|l| parse_labels(l, path)).transpose()?;
        FeatureMatrix::new(f.matrix(), f.ids, labels)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if is_csv(path) {
            return csv_matrix::write(self, path);
        }
        FmxFile::from_matrix(
            &self.data,
            self.item_ids.clone(),
            self.labels.as_deref().map(label_strings),
        )
        .write(path)
    }
}

fn is_csv(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

pub fn load_feature_matrix(path: &Path) -> Result<FeatureMatrix> {
    FeatureMatrix::load(path)
}

pub fn save_feature_matrix(m: &FeatureMatrix, path: &Path) -> Result<()> {
    m.save(path)
}
