//! Evaluation reports: per-item records plus aggregates.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{AdaptTarget, Baseline, Split};
use crate::error::{Error, Result};
use crate::latent_index::Metric;
use crate::taxonomy::{SynsetRef, WupFormula};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborRecord {
    /// Row in the index feature file.
    pub index: usize,
    pub item_id: String,
    pub synset: SynsetRef,
    pub name: String,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub synset: SynsetRef,
    pub name: String,
    pub votes: usize,
    pub best_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemRecord {
    pub image_id: String,
    pub true_synset: SynsetRef,
    pub true_name: String,
    pub predicted_synset: SynsetRef,
    pub predicted_name: String,
    pub wup: f64,
    pub neighbors: Vec<NeighborRecord>,
    pub candidates: Vec<CandidateRecord>,
}

impl ItemRecord {
    pub fn correct(&self) -> bool {
        self.predicted_synset == self.true_synset
    }

    /// Whether any retrieved neighbour carries the true label.
    pub fn label_hit(&self) -> bool {
        self.neighbors.iter().any(|n| n.synset == self.true_synset) || self.correct()
    }
}

/// An item left out of scoring because its true synset is not in the taxonomy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedItem {
    pub image_id: String,
    pub synset: SynsetRef,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub mean_wup: f64,
    /// Sample standard deviation; 0 with fewer than two items.
    pub std_wup: f64,
    pub top1_accuracy: f64,
    /// Fraction of items whose true class is among the retrieved neighbours.
    pub top5_label_hit_rate: f64,
    pub n_items: usize,
    pub n_skipped: usize,
}

impl Aggregates {
    pub fn from_records(records: &[ItemRecord], n_skipped: usize) -> Self {
        let n = records.len();
        if n == 0 {
            return Aggregates {
                mean_wup: 0.0,
                std_wup: 0.0,
                top1_accuracy: 0.0,
                top5_label_hit_rate: 0.0,
                n_items: 0,
                n_skipped,
            };
        }
        let nf = n as f64;
        let mean = records.iter().map(|r| r.wup).sum::<f64>() / nf;
        let std = if n > 1 {
            (records.iter().map(|r| (r.wup - mean).powi(2)).sum::<f64>() / (nf - 1.0)).sqrt()
        } else {
            0.0
        };
        let frac = |pred: fn(&ItemRecord) -> bool| records.iter().filter(|r| pred(r)).count() as f64 / nf;
        Aggregates {
            mean_wup: mean,
            std_wup: std,
            top1_accuracy: frac(ItemRecord::correct),
            top5_label_hit_rate: frac(ItemRecord::label_hit),
            n_items: n,
            n_skipped,
        }
    }
}

/// The decoding settings a report was produced with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSettings {
    pub k: usize,
    pub metric: Metric,
    pub adapt: bool,
    pub adapt_target: AdaptTarget,
    pub wup_formula: WupFormula,
    pub average_repetitions: bool,
    pub baseline: Baseline,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub subject: String,
    pub split: Split,
    pub settings: ReportSettings,
    /// Sorted by image id.
    pub records: Vec<ItemRecord>,
    pub skipped: Vec<SkippedItem>,
    pub aggregates: Aggregates,
}

const CSV_HEADER: [&str; 10] = [
    "image_id",
    "true_synset",
    "true_name",
    "predicted_synset",
    "predicted_name",
    "wup",
    "correct",
    "label_hit",
    "neighbor_synsets",
    "neighbor_distances",
];

impl EvaluationReport {
    pub fn new(subject: String, split: Split, settings: ReportSettings, mut records: Vec<ItemRecord>, skipped: Vec<SkippedItem>) -> Self {
        records.sort_by(|a, b| a.image_id.cmp(&b.image_id));
        let aggregates = Aggregates::from_records(&records, skipped.len());
        EvaluationReport {
            subject,
            split,
            settings,
            records,
            skipped,
            aggregates,
        }
    }

    /// Whether the stored aggregates equal a fresh recomputation.
    pub fn aggregates_consistent(&self) -> bool {
        Aggregates::from_records(&self.records, self.skipped.len()) == self.aggregates
    }

    /// Pretty JSON with object keys in sorted order.
    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("report serialises");
        let mut text = serde_json::to_string_pretty(&value).expect("report serialises");
        text.push('\n');
        text
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            msg: e.to_string(),
        })
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let err = |e: csv::Error| Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            msg: e.to_string(),
        };
        let mut w = csv::Writer::from_path(path).map_err(err)?;
        w.write_record(CSV_HEADER).map_err(err)?;
        for r in &self.records {
            let synsets: Vec<&str> = r.neighbors.iter().map(|n| n.synset.as_str()).collect();
            let distances: Vec<String> = r.neighbors.iter().map(|n| n.distance.to_string()).collect();
            w.write_record([
                r.image_id.as_str(),
                r.true_synset.as_str(),
                &r.true_name,
                r.predicted_synset.as_str(),
                &r.predicted_name,
                &r.wup.to_string(),
                &u8::from(r.correct()).to_string(),
                &u8::from(r.label_hit()).to_string(),
                &synsets.join(";"),
                &distances.join(";"),
            ])
            .map_err(err)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn record(id: &str, truth: &str, pred: &str, wup: f64) -> ItemRecord {
        let s = |x: &str| SynsetRef::new(x).unwrap();
        ItemRecord {
            image_id: id.into(),
            true_synset: s(truth),
            true_name: truth.into(),
            predicted_synset: s(pred),
            predicted_name: pred.into(),
            wup,
            neighbors: vec![NeighborRecord {
                index: 0,
                item_id: "x".into(),
                synset: s(pred),
                name: pred.into(),
                distance: 0.5,
            }],
            candidates: vec![CandidateRecord {
                synset: s(pred),
                name: pred.into(),
                votes: 1,
                best_distance: 0.5,
            }],
        }
    }

    pub(crate) fn settings() -> ReportSettings {
        ReportSettings {
            k: 1,
            metric: Metric::Euclidean,
            adapt: true,
            adapt_target: AdaptTarget::TrueTrain,
            wup_formula: WupFormula::Standard,
            average_repetitions: true,
            baseline: Baseline::None,
        }
    }

    #[test]
    fn aggregates_by_hand() {
        let recs = vec![record("b", "x", "x", 1.0), record("a", "x", "y", 0.5)];
        let r = EvaluationReport::new("s".into(), Split::Test, settings(), recs, vec![]);
        assert_eq!(r.records[0].image_id, "a");
        assert_eq!(r.aggregates.mean_wup, 0.75);
        assert!((r.aggregates.std_wup - 0.125f64.sqrt()).abs() < 1e-15);
        assert_eq!(r.aggregates.top1_accuracy, 0.5);
        assert!(r.aggregates_consistent());
    }

    #[test]
    fn json_round_trip_and_sorted_keys() {
        let r = EvaluationReport::new("s".into(), Split::Test, settings(), vec![record("a", "x", "y", 0.25)], vec![]);
        let text = r.to_json();
        assert!(text.find("\"aggregates\"").unwrap() < text.find("\"records\"").unwrap());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        r.write_json(&path).unwrap();
        assert_eq!(EvaluationReport::load(&path).unwrap(), r);
    }

    #[test]
    fn csv_lines() {
        let r = EvaluationReport::new("s".into(), Split::Test, settings(), vec![record("a", "x", "y", 0.25)], vec![]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        r.write_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.lines().nth(1).unwrap().starts_with("a,x,x,y,y,0.25,0,0,y,0.5"));
    }
}
