//! Exact nearest-neighbour retrieval over a labelled feature database.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataio::FeatureMatrix;
use crate::error::{Error, Result};
use crate::taxonomy::{SynsetRef, Taxonomy};

/// Candidate count used when none is given.
pub const DEFAULT_K: usize = 5;

/// Indexes at least this large are scanned in parallel.
const PARALLEL_ITEMS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Euclidean,
    /// `1 − cos(q, x)`.
    Cosine,
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(Metric::Euclidean),
            "cosine" => Ok(Metric::Cosine),
            other => Err(Error::InvalidParameter(format!(
                "unknown metric {other:?} (expected euclidean or cosine)"
            ))),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Euclidean => "euclidean",
            Metric::Cosine => "cosine",
        })
    }
}

/// Search settings stored next to the feature file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexSidecar {
    pub metric: Metric,
    pub k_default: usize,
}

impl Default for IndexSidecar {
    fn default() -> Self {
        IndexSidecar {
            metric: Metric::Euclidean,
            k_default: DEFAULT_K,
        }
    }
}

impl IndexSidecar {
    /// `<features>.json`, e.g. `index.fmx` → `index.fmx.json`.
    pub fn path_for(features: &Path) -> PathBuf {
        let mut name = features.as_os_str().to_owned();
        name.push(".json");
        PathBuf::from(name)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let sidecar: IndexSidecar = serde_json::from_str(&text).map_err(|e| Error::Header {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })?;
        if sidecar.k_default == 0 {
            return Err(Error::Header {
                path: path.to_path_buf(),
                msg: "k_default must be positive".into(),
            });
        }
        Ok(sidecar)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).expect("sidecar serialises");
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatentIndex {
    dim: usize,
    /// Row-major, one item per `dim` values.
    vectors: Vec<f64>,
    norms: Vec<f64>,
    labels: Vec<SynsetRef>,
    item_ids: Vec<String>,
    metric: Metric,
}

/// The `k` nearest items, closest first.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborSet {
    pub indices: Vec<usize>,
    pub distances: Vec<f64>,
    pub labels: Vec<SynsetRef>,
}

impl NeighborSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// A class proposed by the neighbours.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub synset: SynsetRef,
    pub votes: usize,
    pub best_distance: f64,
}

impl LatentIndex {
    pub fn build(features: &FeatureMatrix, metric: Metric) -> Result<Self> {
        let labels = features.labels.clone().ok_or(Error::MissingLabels)?;
        if features.rows() == 0 {
            return Err(Error::TooFewRows { needed: 1, found: 0 });
        }
        let dim = features.dim();
        let mut vectors = Vec::with_capacity(features.rows() * dim);
        let mut norms = Vec::with_capacity(features.rows());
        for (i, row) in features.data.row_iter().enumerate() {
            let norm = row.norm();
            if metric == Metric::Cosine && norm == 0.0 {
                return Err(Error::ZeroVector {
                    item: features.item_ids[i].clone(),
                    index: i,
                });
            }
            vectors.extend(row.iter());
            norms.push(norm);
        }
        Ok(LatentIndex {
            dim,
            vectors,
            norms,
            labels,
            item_ids: features.item_ids.clone(),
            metric,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn labels(&self) -> &[SynsetRef] {
        &self.labels
    }

    pub fn item_ids(&self) -> &[String] {
        &self.item_ids
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    /// Labels absent from `taxonomy`, each listed once in index order.
    pub fn unresolved_labels(&self, taxonomy: &Taxonomy) -> Vec<SynsetRef> {
        let mut seen = std::collections::HashSet::new();
        self.labels
            .iter()
            .filter(|l| !taxonomy.contains(l) && seen.insert(*l))
            .cloned()
            .collect()
    }

    /// Fails on the first label the taxonomy does not know.
    pub fn check_labels(&self, taxonomy: &Taxonomy) -> Result<()> {
        match self.unresolved_labels(taxonomy).into_iter().next() {
            Some(l) => Err(Error::UnknownSynset(l.to_string())),
            None => Ok(()),
        }
    }

    fn distance(&self, i: usize, q: &[f64], q_norm: f64) -> f64 {
        let x = self.vector(i);
        match self.metric {
            Metric::Euclidean => x
                .iter()
                .zip(q)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt(),
            Metric::Cosine => {
                let dot: f64 = x.iter().zip(q).map(|(a, b)| a * b).sum();
                1.0 - dot / (self.norms[i] * q_norm)
            }
        }
    }

    /// Distance from `q` to every item, in index order.
    pub fn distances(&self, q: &[f64]) -> Result<Vec<f64>> {
        if q.len() != self.dim {
            return Err(Error::Shape(format!(
                "query has {} features, index has {}",
                q.len(),
                self.dim
            )));
        }
        if q.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("query vector".into()));
        }
        let q_norm = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        if self.metric == Metric::Cosine && q_norm == 0.0 {
            return Err(Error::ZeroVector {
                item: "query".into(),
                index: 0,
            });
        }
        let n = self.len();
        Ok(if n >= PARALLEL_ITEMS {
            (0..n)
                .into_par_iter()
                .map(|i| self.distance(i, q, q_norm))
                .collect()
        } else {
            (0..n).map(|i| self.distance(i, q, q_norm)).collect()
        })
    }

    /// Exact `k` nearest items; equal distances go to the smaller index.
    pub fn query_knn(&self, q: &[f64], k: usize) -> Result<NeighborSet> {
        if k == 0 {
            return Err(Error::InvalidParameter("k must be positive".into()));
        }
        if k > self.len() {
            return Err(Error::KTooLarge { k, size: self.len() });
        }
        let dist = self.distances(q)?;
        let cmp = |a: &usize, b: &usize| dist[*a].total_cmp(&dist[*b]).then(a.cmp(b));
        let mut order: Vec<usize> = (0..dist.len()).collect();
        if k < order.len() {
            order.select_nth_unstable_by(k - 1, cmp);
            order.truncate(k);
        }
        order.sort_unstable_by(cmp);
        Ok(NeighborSet {
            distances: order.iter().map(|&i| dist[i]).collect(),
            labels: order.iter().map(|&i| self.labels[i].clone()).collect(),
            indices: order,
        })
    }

    /// Neighbour labels ranked by votes, then closest member, then synset id.
    /// The first entry is the predicted class.
    pub fn candidate_classes(&self, q: &[f64], k: usize) -> Result<Vec<Candidate>> {
        Ok(rank_candidates(&self.query_knn(q, k)?))
    }
}

/// Plurality vote over a neighbour set.
pub fn rank_candidates(neighbors: &NeighborSet) -> Vec<Candidate> {
    let mut by_label: HashMap<&SynsetRef, Candidate> = HashMap::new();
    for (label, &d) in neighbors.labels.iter().zip(&neighbors.distances) {
        let c = by_label.entry(label).or_insert_with(|| Candidate {
            synset: label.clone(),
            votes: 0,
            best_distance: d,
        });
        c.votes += 1;
        c.best_distance = c.best_distance.min(d);
    }
    let mut out: Vec<Candidate> = by_label.into_values().collect();
    out.sort_by(|a, b| {
        b.votes
            .cmp(&a.votes)
            .then(a.best_distance.total_cmp(&b.best_distance))
            .then_with(|| a.synset.as_str().cmp(b.synset.as_str()))
    });
    out
}
