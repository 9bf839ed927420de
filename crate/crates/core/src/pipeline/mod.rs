//! Experiment orchestration: training, decoding, scoring and reporting.

use std::collections::{BTreeSet, HashMap};
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::adapt::{compute_moments, moment_match};
use crate::dataio::{load_events, preprocess_runs, FeatureMatrix, TrialMatrix, VolumeSeries};
use crate::error::{Error, Result};
use crate::latent_index::{rank_candidates, IndexSidecar, LatentIndex, Metric, DEFAULT_K};
use crate::ridge::{self, GridSearchOptions, GridSearchReport, RidgeModel};
use crate::taxonomy::{SynsetRef, Taxonomy, WupFormula};

pub mod chance;
pub mod chart;
pub mod config;
pub mod prompts;
pub mod report;
pub mod synth;

pub use chance::{chance_wup, ChanceLevel};
pub use chart::{emit_report_chart, render_chart};
pub use config::{load_taxonomy, AdaptTarget, Baseline, ExperimentConfig, Split, TaxonomyFormat};
pub use prompts::{emit_prompts, render_prompts};
pub use report::{Aggregates, CandidateRecord, EvaluationReport, ItemRecord, NeighborRecord, ReportSettings, SkippedItem};
pub use synth::{SynthParams, SyntheticWorld, WorldSummary};

/// Averages all rows sharing an image id. Output rows follow the first
/// occurrence of each id.
pub fn average_by_image_id(trials: &TrialMatrix) -> Result<TrialMatrix> {
    let mut slot: HashMap<&str, usize> = HashMap::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    for (i, id) in trials.image_ids.iter().enumerate() {
        match slot.get(id.as_str()) {
            Some(&s) => {
                let first = members[s][0];
                if trials.labels[first] != trials.labels[i] {
                    return Err(Error::ConflictingLabels {
                        image_id: id.clone(),
                        first: trials.labels[first].to_string(),
                        second: trials.labels[i].to_string(),
                    });
                }
                members[s].push(i);
            }
            None => {
                slot.insert(id, members.len());
                members.push(vec![i]);
            }
        }
    }
    let mut data = DMatrix::zeros(members.len(), trials.voxels());
    for (r, rows) in members.iter().enumerate() {
        for &i in rows {
            let mut row = data.row_mut(r);
            row += trials.data.row(i);
        }
        data.row_mut(r).unscale_mut(rows.len() as f64);
    }
    TrialMatrix::new(
        data,
        members.iter().map(|m| trials.labels[m[0]].clone()).collect(),
        members.iter().map(|m| trials.image_ids[m[0]].clone()).collect(),
    )
}

/// Feature rows reordered (and repeated) to follow the trial rows.
pub fn align_features(trials: &TrialMatrix, features: &FeatureMatrix) -> Result<FeatureMatrix> {
    let mut by_id: HashMap<&str, usize> = HashMap::with_capacity(features.rows());
    for (i, id) in features.item_ids.iter().enumerate() {
        if by_id.insert(id, i).is_some() {
            return Err(Error::Shape(format!("feature id {id} appears more than once")));
        }
    }
    let mut missing = Vec::new();
    let mut seen = BTreeSet::new();
    let mut rows = Vec::with_capacity(trials.rows());
    for (i, id) in trials.image_ids.iter().enumerate() {
        match by_id.get(id.as_str()) {
            Some(&r) => {
                if let Some(labels) = &features.labels {
                    if labels[r] != trials.labels[i] {
                        return Err(Error::ConflictingLabels {
                            image_id: id.clone(),
                            first: trials.labels[i].to_string(),
                            second: labels[r].to_string(),
                        });
                    }
                }
                rows.push(r);
            }
            None => {
                if seen.insert(id.clone()) {
                    missing.push(id.clone());
                }
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::Alignment(missing));
    }
    let data = DMatrix::from_fn(rows.len(), features.dim(), |i, j| features.data[(rows[i], j)]);
    FeatureMatrix::new(data, trials.image_ids.clone(), Some(trials.labels.clone()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainSettings {
    pub lambda_grid: Vec<f64>,
    pub split_fraction: f64,
    pub seed: u64,
    pub with_intercept: bool,
}

impl Default for TrainSettings {
    fn default() -> Self {
        TrainSettings {
            lambda_grid: ridge::default_lambda_grid(),
            split_fraction: 0.9,
            seed: 0,
            with_intercept: true,
        }
    }
}

impl TrainSettings {
    pub fn from_config(c: &ExperimentConfig) -> Self {
        TrainSettings {
            lambda_grid: c.lambda_grid.clone(),
            split_fraction: c.split_fraction,
            seed: c.seed,
            with_intercept: c.with_intercept,
        }
    }
}

/// Grid-searches λ on trials aligned to their features by image id.
pub fn train(trials: &TrialMatrix, features: &FeatureMatrix, s: &TrainSettings) -> Result<(RidgeModel, GridSearchReport)> {
    let aligned = align_features(trials, features)?;
    let opts = GridSearchOptions {
        split_fraction: s.split_fraction,
        seed: s.seed,
        with_intercept: s.with_intercept,
    };
    ridge::grid_search(trials, &aligned, &s.lambda_grid, opts)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeSettings {
    pub subject: String,
    pub split: Split,
    pub k: usize,
    pub adapt: bool,
    pub adapt_target: AdaptTarget,
    pub wup_formula: WupFormula,
    pub average_repetitions: bool,
    pub baseline: Baseline,
    /// Drives the random baseline.
    pub seed: u64,
}

impl Default for DecodeSettings {
    fn default() -> Self {
        DecodeSettings {
            subject: "sub-01".into(),
            split: Split::Test,
            k: DEFAULT_K,
            adapt: true,
            adapt_target: AdaptTarget::TrueTrain,
            wup_formula: WupFormula::Standard,
            average_repetitions: true,
            baseline: Baseline::None,
            seed: 0,
        }
    }
}

/// Maps predictions onto the chosen training moments.
pub fn adapt_predictions(predicted: &FeatureMatrix, model: &RidgeModel, target: AdaptTarget) -> Result<FeatureMatrix> {
    let source = compute_moments(predicted)?;
    let target = match target {
        AdaptTarget::TrueTrain => &model.train_features,
        AdaptTarget::PredTrain => model.train_predictions.as_ref().ok_or_else(|| {
            Error::InvalidParameter("model carries no training-prediction moments".into())
        })?,
    };
    moment_match(predicted, &source, target)
}

fn neighbor_records(index: &LatentIndex, taxonomy: &Taxonomy, q: &[f64], k: usize) -> Result<(Vec<NeighborRecord>, Vec<CandidateRecord>)> {
    let neighbors = index.query_knn(q, k)?;
    let candidates = rank_candidates(&neighbors)
        .into_iter()
        .map(|c| {
            Ok(CandidateRecord {
                name: taxonomy.display_name(&c.synset)?,
                synset: c.synset,
                votes: c.votes,
                best_distance: c.best_distance,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let records = neighbors
        .indices
        .iter()
        .zip(&neighbors.distances)
        .zip(&neighbors.labels)
        .map(|((&i, &d), l)| {
            Ok(NeighborRecord {
                index: i,
                item_id: index.item_ids()[i].clone(),
                synset: l.clone(),
                name: taxonomy.display_name(l)?,
                distance: d,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((records, candidates))
}

fn item_record(
    taxonomy: &Taxonomy,
    image_id: &str,
    truth: &SynsetRef,
    predicted: &SynsetRef,
    formula: WupFormula,
    neighbors: Vec<NeighborRecord>,
    candidates: Vec<CandidateRecord>,
) -> Result<ItemRecord> {
    Ok(ItemRecord {
        image_id: image_id.to_string(),
        true_synset: truth.clone(),
        true_name: taxonomy.display_name(truth)?,
        predicted_synset: predicted.clone(),
        predicted_name: taxonomy.display_name(predicted)?,
        wup: taxonomy.wup_similarity(truth, predicted, formula)?,
        neighbors,
        candidates,
    })
}

/// Predict, adapt, retrieve, vote and score every trial. Items whose true
/// synset is not in the taxonomy are skipped and listed.
pub fn decode(
    model: &RidgeModel,
    trials: &TrialMatrix,
    index: &LatentIndex,
    taxonomy: &Taxonomy,
    s: &DecodeSettings,
) -> Result<EvaluationReport> {
    index.check_labels(taxonomy)?;
    if s.k == 0 {
        return Err(Error::InvalidParameter("k must be positive".into()));
    }
    if s.k > index.len() {
        return Err(Error::KTooLarge { k: s.k, size: index.len() });
    }
    let trials = if s.average_repetitions {
        average_by_image_id(trials)?
    } else {
        trials.clone()
    };
    let mut keep = Vec::new();
    let mut skipped = Vec::new();
    for (i, label) in trials.labels.iter().enumerate() {
        if taxonomy.contains(label) {
            keep.push(i);
        } else {
            skipped.push(SkippedItem {
                image_id: trials.image_ids[i].clone(),
                synset: label.clone(),
            });
        }
    }
    keep.sort_by(|&a, &b| trials.image_ids[a].cmp(&trials.image_ids[b]).then(a.cmp(&b)));

    let records = match s.baseline {
        Baseline::Random => {
            let classes: Vec<&SynsetRef> = index.labels().iter().collect::<BTreeSet<_>>().into_iter().collect();
            let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
            keep.iter()
                .map(|&i| {
                    let guess = classes[rng.random_range(0..classes.len())];
                    item_record(taxonomy, &trials.image_ids[i], &trials.labels[i], guess, s.wup_formula, vec![], vec![])
                })
                .collect::<Result<Vec<_>>>()?
        }
        Baseline::None => {
            let mut predicted = ridge::predict(model, &trials)?;
            if s.adapt {
                predicted = adapt_predictions(&predicted, model, s.adapt_target)?;
            }
            let outcomes: Vec<Result<ItemRecord>> = keep
                .par_iter()
                .map(|&i| {
                    let q: Vec<f64> = predicted.data.row(i).iter().copied().collect();
                    let (neighbors, candidates) = neighbor_records(index, taxonomy, &q, s.k)?;
                    let guess = candidates[0].synset.clone();
                    item_record(taxonomy, &trials.image_ids[i], &trials.labels[i], &guess, s.wup_formula, neighbors, candidates)
                })
                .collect();
            outcomes.into_iter().collect::<Result<Vec<_>>>()?
        }
    };
    let settings = ReportSettings {
        k: s.k,
        metric: index.metric(),
        adapt: s.adapt && s.baseline == Baseline::None,
        adapt_target: s.adapt_target,
        wup_formula: s.wup_formula,
        average_repetitions: s.average_repetitions,
        baseline: s.baseline,
    };
    Ok(EvaluationReport::new(s.subject.clone(), s.split, settings, records, skipped))
}

fn create_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e)),
        _ => Ok(()),
    }
}

/// Every `*.fmx` volume series in `dir`, in file-name order.
pub fn load_runs(dir: &Path) -> Result<Vec<VolumeSeries>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "fmx"))
        .collect();
    paths.sort();
    paths.iter().map(|p| VolumeSeries::load(p)).collect()
}

/// Normalises and window-averages the raw runs of a split and writes the
/// trial matrix to the configured path.
pub fn run_preprocess(config: &ExperimentConfig, split: Split) -> Result<TrialMatrix> {
    let (events, runs) = config.raw_inputs(split)?;
    let trials = preprocess_runs(&load_runs(runs)?, &load_events(events)?, config.hrf_shift_volumes)?;
    let out = config.trials(split);
    create_parent(out)?;
    trials.save(out)?;
    Ok(trials)
}

pub fn grid_report_path(config: &ExperimentConfig) -> PathBuf {
    config.out_dir.join("grid_report.json")
}

/// `report_<split>[_random].<ext>` inside the output directory.
pub fn report_path(config: &ExperimentConfig, split: Split, baseline: Baseline, ext: &str) -> PathBuf {
    let suffix = match baseline {
        Baseline::None => "",
        Baseline::Random => "_random",
    };
    config.out_dir.join(format!("report_{split}{suffix}.{ext}"))
}

fn write_json<T: serde::Serialize>(value: &T, path: &Path) -> Result<()> {
    let value = serde_json::to_value(value).expect("serialisable");
    let mut text = serde_json::to_string_pretty(&value).expect("serialisable");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Fits the model and writes it together with `grid_report.json`.
pub fn run_train(config: &ExperimentConfig) -> Result<(RidgeModel, GridSearchReport)> {
    let trials = TrialMatrix::load(&config.train_trials)?;
    let features = FeatureMatrix::load(&config.train_features)?;
    let (model, report) = train(&trials, &features, &TrainSettings::from_config(config))?;
    create_parent(&config.model)?;
    model.save(&config.model)?;
    std::fs::create_dir_all(&config.out_dir).map_err(|e| Error::io(&config.out_dir, e))?;
    write_json(&report, &grid_report_path(config))?;
    Ok((model, report))
}

/// Validates the index against the taxonomy and writes its sidecar.
pub fn run_build_index(config: &ExperimentConfig) -> Result<(LatentIndex, IndexSidecar)> {
    let features = FeatureMatrix::load(&config.index)?;
    let sidecar = IndexSidecar {
        metric: config.metric.unwrap_or_default(),
        k_default: config.k.unwrap_or(DEFAULT_K),
    };
    let index = LatentIndex::build(&features, sidecar.metric)?;
    index.check_labels(&config.load_taxonomy()?)?;
    if sidecar.k_default > index.len() {
        return Err(Error::KTooLarge {
            k: sidecar.k_default,
            size: index.len(),
        });
    }
    sidecar.write(&IndexSidecar::path_for(&config.index))?;
    Ok((index, sidecar))
}

/// Settings for decoding: config values first, then the index sidecar.
pub fn decode_settings(config: &ExperimentConfig, split: Split) -> Result<(DecodeSettings, Metric)> {
    let sidecar_path = IndexSidecar::path_for(&config.index);
    let sidecar = if sidecar_path.is_file() {
        IndexSidecar::read(&sidecar_path)?
    } else {
        IndexSidecar::default()
    };
    let settings = DecodeSettings {
        subject: config.subject.clone(),
        split,
        k: config.k.unwrap_or(sidecar.k_default),
        adapt: config.adapt,
        adapt_target: config.adapt_target,
        wup_formula: config.wup_formula,
        average_repetitions: config.average_repetitions,
        baseline: config.baseline,
        seed: config.seed,
    };
    Ok((settings, config.metric.unwrap_or(sidecar.metric)))
}

/// Decodes one split and writes its JSON and CSV reports.
pub fn run_decode(config: &ExperimentConfig, split: Split) -> Result<EvaluationReport> {
    let (settings, metric) = decode_settings(config, split)?;
    let taxonomy = config.load_taxonomy()?;
    let index = LatentIndex::build(&FeatureMatrix::load(&config.index)?, metric)?;
    let trials = TrialMatrix::load(config.trials(split))?;
    let model = RidgeModel::load(&config.model)?;
    let report = decode(&model, &trials, &index, &taxonomy, &settings)?;
    std::fs::create_dir_all(&config.out_dir).map_err(|e| Error::io(&config.out_dir, e))?;
    report.write_json(&report_path(config, split, settings.baseline, "json"))?;
    report.write_csv(&report_path(config, split, settings.baseline, "csv"))?;
    Ok(report)
}

/// Everything produced by an in-memory synthetic experiment.
#[derive(Debug, Clone)]
pub struct SyntheticRun {
    pub world: SyntheticWorld,
    pub model: RidgeModel,
    pub grid: GridSearchReport,
    pub report: EvaluationReport,
    pub chance: ChanceLevel,
}

/// Generates a world, preprocesses its runs, trains, builds the index and
/// decodes the test split without touching the file system.
pub fn run_synthetic(params: &SynthParams, train_settings: &TrainSettings, decode_settings: &DecodeSettings, metric: Metric) -> Result<SyntheticRun> {
    let world = SyntheticWorld::generate(params)?;
    let (model, grid) = train(&world.train_trials()?, &world.train_features, train_settings)?;
    let index = LatentIndex::build(&world.index_features, metric)?;
    let trials = match decode_settings.split {
        Split::Test => world.test_trials()?,
        Split::Train => world.train_trials()?,
    };
    let report = decode(&model, &trials, &index, &world.taxonomy, decode_settings)?;
    let chance = world.chance_level(decode_settings.wup_formula)?;
    Ok(SyntheticRun {
        world,
        model,
        grid,
        report,
        chance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: &str) -> SynsetRef {
        SynsetRef::new(x).unwrap()
    }

    fn trials(values: &[f64], ids: &[&str], labels: &[&str]) -> TrialMatrix {
        TrialMatrix::new(
            DMatrix::from_row_slice(ids.len(), values.len() / ids.len(), values),
            labels.iter().map(|l| s(l)).collect(),
            ids.iter().map(|i| i.to_string()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn averages_repeated_ids() {
        let t = trials(&[1.0, 3.0, 9.0, 9.0, 3.0, 5.0], &["a", "b", "a"], &["x", "y", "x"]);
        let avg = average_by_image_id(&t).unwrap();
        assert_eq!(avg.image_ids, vec!["a", "b"]);
        assert_eq!(avg.data.row(0).iter().copied().collect::<Vec<_>>(), vec![2.0, 4.0]);
        assert_eq!(avg.data.row(1).iter().copied().collect::<Vec<_>>(), vec![9.0, 9.0]);
    }

    #[test]
    fn distinct_ids_unchanged() {
        let t = trials(&[1.0, 2.0, 3.0], &["a", "b", "c"], &["x", "y", "z"]);
        assert_eq!(average_by_image_id(&t).unwrap(), t);
    }

    #[test]
    fn conflicting_labels_name_id() {
        let t = trials(&[1.0, 2.0], &["a", "a"], &["x", "y"]);
        let err = average_by_image_id(&t).unwrap_err();
        assert!(matches!(err, Error::ConflictingLabels { ref image_id, .. } if image_id == "a"));
    }

    #[test]
    fn alignment_lists_missing_ids() {
        let t = trials(&[1.0, 2.0, 3.0], &["a", "b", "c"], &["x", "y", "z"]);
        let f = FeatureMatrix::new(DMatrix::from_row_slice(1, 1, &[0.0]), vec!["b".into()], None).unwrap();
        let err = align_features(&t, &f).unwrap_err();
        assert!(matches!(err, Error::Alignment(ref ids) if ids == &vec!["a".to_string(), "c".to_string()]));
    }

    #[test]
    fn alignment_repeats_rows() {
        let t = trials(&[1.0, 2.0, 3.0], &["b", "a", "b"], &["y", "x", "y"]);
        let f = FeatureMatrix::new(DMatrix::from_row_slice(2, 1, &[10.0, 20.0]), vec!["a".into(), "b".into()], None).unwrap();
        let aligned = align_features(&t, &f).unwrap();
        assert_eq!(aligned.data.as_slice(), &[20.0, 10.0, 20.0]);
    }
}
