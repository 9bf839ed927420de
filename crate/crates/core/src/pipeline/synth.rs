//! Synthetic decoding experiments with a planted brain-to-feature map.
//!
//! Classes are leaves of a three-level tree (`entity` → groups → classes).
//! Each group holds some training classes and exactly one of the held-out
//! test classes per round, so the two class sets are disjoint. Class
//! prototypes are a group centre plus a class offset, and item features add
//! independent noise to their prototype.
//!
//! A presentation of item `s` evokes the voxel pattern `κ·(A f(s) + σ_v ε)`
//! with a planted V×D map `A`. Patterns are laid into fMRI-like runs: each
//! event fills the `n_volumes` volumes of its HRF-shifted window, and the
//! remaining rest volumes are chosen so that every voxel timeseries has zero
//! mean and unit sample variance. Each run is then scaled and offset per
//! voxel. Runwise z-scoring therefore undoes the run distortion exactly and
//! window averaging returns the pattern itself, so the preprocessing chain is
//! exercised without corrupting the planted linear relation. `κ` is a global
//! factor that keeps the rest-volume construction feasible. It is fixed by
//! the training runs and reused for the test runs whenever they allow it, so
//! the test distortion never changes the training data.
//!
//! Every random component draws from its own ChaCha stream, so changing one
//! parameter (say the voxel noise) leaves all other draws unchanged.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::chance::{chance_wup, ChanceLevel};
use super::config::{ExperimentConfig, TaxonomyFormat};
use crate::dataio::{preprocess_runs, write_events, FeatureMatrix, FmxFile, StimulusEvent, TrialMatrix, VolumeSeries};
use crate::error::{Error, Result};
use crate::ridge::default_lambda_grid;
use crate::taxonomy::{write_edge_list, SynsetRef, Taxonomy, TaxonomyBuilder, WupFormula};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthParams {
    /// Classes with training items.
    pub train_classes: usize,
    /// Held-out classes; also the number of groups under the root.
    pub test_classes: usize,
    pub items_per_class: usize,
    pub test_items_per_class: usize,
    /// Exemplars of every class in the retrieval index.
    pub index_items_per_class: usize,
    pub features: usize,
    pub voxels: usize,
    /// Std of group centres around the origin.
    pub group_spread: f64,
    /// Std of class prototypes around their group centre.
    pub class_spread: f64,
    /// σ_f: std of item features around their prototype.
    pub feature_noise: f64,
    /// σ_v: std of presentation noise in voxel space, before scaling by κ.
    pub voxel_noise: f64,
    /// Presentations of every test item, one run each.
    pub test_repetitions: usize,
    pub events_per_run: usize,
    pub n_volumes: usize,
    pub rest_volumes: usize,
    pub hrf_shift_volumes: usize,
    pub tr_seconds: f64,
    /// Log-gain and offset std of a per-feature distortion applied to test
    /// items before they reach the voxels.
    pub test_shift: f64,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            train_classes: 20,
            test_classes: 5,
            items_per_class: 8,
            test_items_per_class: 8,
            index_items_per_class: 10,
            features: 64,
            voxels: 256,
            group_spread: 1.0,
            class_spread: 1.0,
            feature_noise: 0.15,
            voxel_noise: 0.0,
            test_repetitions: 5,
            events_per_run: 20,
            n_volumes: 3,
            rest_volumes: 1,
            hrf_shift_volumes: 1,
            tr_seconds: 3.0,
            test_shift: 0.0,
            seed: 0,
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.to_string()));
        if self.train_classes < 2 {
            return bad("at least 2 training classes are required");
        }
        if self.test_classes < 1 {
            return bad("at least 1 test class is required");
        }
        if self.features < 2 {
            return bad("at least 2 feature dimensions are required");
        }
        if self.voxels < 1 {
            return bad("at least 1 voxel is required");
        }
        if self.items_per_class < 1 || self.test_items_per_class < 1 || self.index_items_per_class < 1 {
            return bad("every item count must be positive");
        }
        if self.test_repetitions < 1 || self.events_per_run < 1 || self.n_volumes < 1 {
            return bad("repetitions, events per run and window length must be positive");
        }
        if self.rest_volumes + self.hrf_shift_volumes < 2 {
            return bad("runs need at least 2 rest volumes (raise rest_volumes or hrf_shift_volumes)");
        }
        let noise = [self.group_spread, self.class_spread, self.feature_noise, self.voxel_noise, self.test_shift];
        if noise.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return bad("spreads and noise levels must be finite and non-negative");
        }
        if !(self.tr_seconds.is_finite() && self.tr_seconds > 0.0) {
            return bad("tr_seconds must be positive");
        }
        Ok(())
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn sid(s: &str) -> SynsetRef {
    SynsetRef::new(s).expect("generated ids are valid")
}

#[derive(Debug, Clone)]
pub struct SyntheticWorld {
    pub params: SynthParams,
    pub taxonomy: Taxonomy,
    pub edges: Vec<(SynsetRef, SynsetRef)>,
    pub lemmas: Vec<(SynsetRef, Vec<String>)>,
    pub train_classes: Vec<SynsetRef>,
    pub test_classes: Vec<SynsetRef>,
    /// One row per class, training classes first.
    pub prototypes: DMatrix<f64>,
    /// V × D.
    pub planted_map: DMatrix<f64>,
    pub train_features: FeatureMatrix,
    /// True (undistorted) features of the test items.
    pub test_features: FeatureMatrix,
    pub index_features: FeatureMatrix,
    pub train_runs: Vec<VolumeSeries>,
    pub train_events: Vec<StimulusEvent>,
    pub test_runs: Vec<VolumeSeries>,
    pub test_events: Vec<StimulusEvent>,
    /// κ of the training runs.
    pub response_scale: f64,
    /// κ of the test runs: the training κ unless the (shifted) test
    /// responses are too large for it.
    pub test_response_scale: f64,
}

/// Summary written as `world.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldSummary {
    pub params: SynthParams,
    pub response_scale: f64,
    pub test_response_scale: f64,
    pub voxel_signal_std: f64,
    /// `voxel_signal_std / voxel_noise`; absent without noise.
    pub voxel_snr: Option<f64>,
    pub chance_wup: ChanceLevel,
    pub train_classes: Vec<SynsetRef>,
    pub test_classes: Vec<SynsetRef>,
}

struct Presentation {
    image_id: String,
    synset: SynsetRef,
    /// Unscaled voxel response.
    response: DVector<f64>,
}

struct RunPlan {
    run_id: String,
    presentations: Vec<Presentation>,
}

impl SyntheticWorld {
    pub fn generate(params: &SynthParams) -> Result<Self> {
        params.validate()?;
        let p = params;
        let groups = p.test_classes;
        let total = p.train_classes + p.test_classes;
        let d = p.features;
        let width = total.saturating_sub(1).to_string().len().max(2);

        let mut builder = TaxonomyBuilder::new();
        let mut edges = Vec::new();
        let mut lemmas = vec![(sid("entity"), vec!["entity".to_string()])];
        for g in 0..groups {
            edges.push((sid(&format!("g{g}")), sid("entity")));
            lemmas.push((sid(&format!("g{g}")), vec![format!("group_{g}")]));
        }
        let group_of = |c: usize| if c < p.train_classes { c % groups } else { (c - p.train_classes) % groups };
        let classes: Vec<SynsetRef> = (0..total).map(|c| sid(&format!("c{c:0width$}"))).collect();
        for (c, id) in classes.iter().enumerate() {
            edges.push((id.clone(), sid(&format!("g{}", group_of(c)))));
            lemmas.push((id.clone(), vec![format!("class_{c:0width$}")]));
        }
        for (c, parent) in &edges {
            builder.add_hypernym(c.clone(), parent.clone())?;
        }
        for (id, ls) in &lemmas {
            for l in ls {
                builder.add_lemma(id.clone(), l.clone());
            }
        }
        let taxonomy = builder.build()?;

        let mut rng = stream(p.seed, 1);
        let centers = DMatrix::from_fn(groups, d, |_, _| p.group_spread * normal(&mut rng));
        let prototypes =
            DMatrix::from_fn(total, d, |c, j| centers[(group_of(c), j)] + p.class_spread * normal(&mut rng));

        let mut rng = stream(p.seed, 2);
        let mut items = |prefix: &str, range: std::ops::Range<usize>, per_class: usize| -> Result<FeatureMatrix> {
            let mut ids = Vec::new();
            let mut labels = Vec::new();
            let mut values = Vec::new();
            for c in range {
                for j in 0..per_class {
                    ids.push(format!("{prefix}_{}_{j:02}", classes[c]));
                    labels.push(classes[c].clone());
                    values.extend((0..d).map(|k| prototypes[(c, k)] + p.feature_noise * normal(&mut rng)));
                }
            }
            FeatureMatrix::new(DMatrix::from_row_slice(ids.len(), d, &values), ids, Some(labels))
        };
        let train_features = items("train", 0..p.train_classes, p.items_per_class)?;
        let test_features = items("test", p.train_classes..total, p.test_items_per_class)?;
        let index_features = items("index", 0..total, p.index_items_per_class)?;

        let mut rng = stream(p.seed, 3);
        let scale = 1.0 / (d as f64).sqrt();
        let planted_map = DMatrix::from_fn(p.voxels, d, |_, _| scale * normal(&mut rng));

        let mut rng = stream(p.seed, 4);
        let gains: Vec<f64> = (0..d).map(|_| (p.test_shift * normal(&mut rng)).exp()).collect();
        let offsets: Vec<f64> = (0..d).map(|_| p.test_shift * normal(&mut rng)).collect();

        let mut order_rng = stream(p.seed, 5);
        let mut noise_rng = stream(p.seed, 6);
        let mut respond = |f: DVector<f64>| -> DVector<f64> {
            let noise = DVector::from_fn(p.voxels, |_, _| normal(&mut noise_rng));
            &planted_map * f + noise * p.voxel_noise
        };
        let row = |m: &FeatureMatrix, i: usize| m.data.row(i).transpose();

        let mut train_order: Vec<usize> = (0..train_features.rows()).collect();
        train_order.shuffle(&mut order_rng);
        let mut plans = Vec::new();
        for (r, chunk) in train_order.chunks(p.events_per_run).enumerate() {
            let presentations = chunk
                .iter()
                .map(|&i| Presentation {
                    image_id: train_features.item_ids[i].clone(),
                    synset: train_features.labels.as_ref().unwrap()[i].clone(),
                    response: respond(row(&train_features, i)),
                })
                .collect();
            plans.push(RunPlan {
                run_id: format!("train-{:02}", r + 1),
                presentations,
            });
        }
        let n_train_runs = plans.len();
        for rep in 0..p.test_repetitions {
            let mut order: Vec<usize> = (0..test_features.rows()).collect();
            order.shuffle(&mut order_rng);
            let presentations = order
                .iter()
                .map(|&i| {
                    let f = row(&test_features, i);
                    let shifted = DVector::from_fn(d, |j, _| gains[j] * f[j] + offsets[j]);
                    Presentation {
                        image_id: test_features.item_ids[i].clone(),
                        synset: test_features.labels.as_ref().unwrap()[i].clone(),
                        response: respond(shifted),
                    }
                })
                .collect();
            plans.push(RunPlan {
                run_id: format!("test-{:02}", rep + 1),
                presentations,
            });
        }

        let response_scale = (0.5 / worst_ratio(p, &plans[..n_train_runs])).sqrt();
        let test_response_scale = response_scale.min((0.99 / worst_ratio(p, &plans[n_train_runs..])).sqrt());
        let mut layout_rng = stream(p.seed, 7);
        let mut runs = Vec::new();
        let mut events = Vec::new();
        for (r, plan) in plans.iter().enumerate() {
            let kappa = if r < n_train_runs { response_scale } else { test_response_scale };
            let (run, evs) = lay_out_run(p, plan, kappa, &mut layout_rng)?;
            runs.push(run);
            events.push(evs);
        }
        let test_runs = runs.split_off(n_train_runs);
        let test_events = events.split_off(n_train_runs).concat();

        Ok(SyntheticWorld {
            params: p.clone(),
            taxonomy,
            edges,
            lemmas,
            train_classes: classes[..p.train_classes].to_vec(),
            test_classes: classes[p.train_classes..].to_vec(),
            prototypes,
            planted_map,
            train_features,
            test_features,
            index_features,
            train_runs: runs,
            train_events: events.concat(),
            test_runs,
            test_events,
            response_scale,
            test_response_scale,
        })
    }

    /// Std over all entries of `A f` for the training items.
    pub fn voxel_signal_std(&self) -> f64 {
        let signal = &self.train_features.data * self.planted_map.transpose();
        let n = signal.len() as f64;
        let mean = signal.sum() / n;
        (signal.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
    }

    /// Chance similarity of guessing uniformly among the index classes for
    /// every test item.
    pub fn chance_level(&self, formula: WupFormula) -> Result<ChanceLevel> {
        chance_wup(
            &self.taxonomy,
            self.test_features.labels.as_ref().unwrap(),
            self.index_features.labels.as_ref().unwrap(),
            formula,
        )
    }

    pub fn train_trials(&self) -> Result<TrialMatrix> {
        preprocess_runs(&self.train_runs, &self.train_events, self.params.hrf_shift_volumes)
    }

    pub fn test_trials(&self) -> Result<TrialMatrix> {
        preprocess_runs(&self.test_runs, &self.test_events, self.params.hrf_shift_volumes)
    }

    pub fn summary(&self) -> Result<WorldSummary> {
        let signal = self.voxel_signal_std();
        Ok(WorldSummary {
            params: self.params.clone(),
            response_scale: self.response_scale,
            test_response_scale: self.test_response_scale,
            voxel_signal_std: signal,
            voxel_snr: (self.params.voxel_noise > 0.0).then(|| signal / self.params.voxel_noise),
            chance_wup: self.chance_level(WupFormula::Standard)?,
            train_classes: self.train_classes.clone(),
            test_classes: self.test_classes.clone(),
        })
    }

    /// The configuration matching [`write_to_dir`](Self::write_to_dir).
    pub fn config(&self) -> ExperimentConfig {
        ExperimentConfig {
            subject: "synthetic".into(),
            train_trials: "trials/train.fmx".into(),
            train_features: "train_features.fmx".into(),
            test_trials: "trials/test.fmx".into(),
            train_events: Some("train_events.tsv".into()),
            train_runs: Some("runs/train".into()),
            test_events: Some("test_events.tsv".into()),
            test_runs: Some("runs/test".into()),
            hrf_shift_volumes: self.params.hrf_shift_volumes,
            index: "index.fmx".into(),
            taxonomy: "taxonomy.tsv".into(),
            taxonomy_format: TaxonomyFormat::Edges,
            lemmas: Some("lemmas.tsv".into()),
            model: "out/model.fmx".into(),
            out_dir: "out".into(),
            lambda_grid: default_lambda_grid(),
            split_fraction: 0.9,
            seed: self.params.seed,
            with_intercept: true,
            k: None,
            metric: None,
            adapt: true,
            adapt_target: Default::default(),
            wup_formula: WupFormula::Standard,
            average_repetitions: true,
            baseline: Default::default(),
        }
    }

    /// Writes every artifact in its on-disk format:
    /// `config.toml`, `world.json`, `taxonomy.tsv`, `lemmas.tsv`,
    /// `train_features.fmx`, `test_features.fmx`, `index.fmx`,
    /// `planted_map.fmx`, `train_events.tsv`, `test_events.tsv` and one FMX1
    /// volume series per run under `runs/train/` and `runs/test/`.
    pub fn write_to_dir(&self, dir: &Path) -> Result<()> {
        let mkdir = |p: &Path| std::fs::create_dir_all(p).map_err(|e| Error::io(p, e));
        mkdir(dir)?;
        let write_text = |name: &str, text: String| {
            let path = dir.join(name);
            std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
        };
        write_text("config.toml", self.config().to_toml())?;
        let mut summary = serde_json::to_string_pretty(&serde_json::to_value(self.summary()?).unwrap()).unwrap();
        summary.push('\n');
        write_text("world.json", summary)?;
        write_edge_list(
            &dir.join("taxonomy.tsv"),
            &self.edges,
            Some((&dir.join("lemmas.tsv"), &self.lemmas)),
        )?;
        self.train_features.save(&dir.join("train_features.fmx"))?;
        self.test_features.save(&dir.join("test_features.fmx"))?;
        self.index_features.save(&dir.join("index.fmx"))?;
        let ids = (0..self.planted_map.nrows()).map(|v| format!("v{v:05}")).collect();
        FmxFile::from_matrix(&self.planted_map, ids, None).write(&dir.join("planted_map.fmx"))?;
        write_events(&dir.join("train_events.tsv"), &self.train_events)?;
        write_events(&dir.join("test_events.tsv"), &self.test_events)?;
        for (sub, runs) in [("train", &self.train_runs), ("test", &self.test_runs)] {
            let run_dir = dir.join("runs").join(sub);
            mkdir(&run_dir)?;
            for run in runs {
                run.save(&run_dir.join(format!("{}.fmx", run.run_id)))?;
            }
        }
        Ok(())
    }
}

fn run_length(p: &SynthParams, events: usize) -> (usize, usize) {
    let volumes = events * (p.n_volumes + p.rest_volumes) + p.hrf_shift_volumes;
    let rest = volumes - events * p.n_volumes;
    (volumes, rest)
}

/// Largest per-voxel ratio of window energy to the unit-variance budget at
/// κ = 1. Any κ with `κ² · ratio ≤ 1` leaves room for the rest volumes.
fn worst_ratio(p: &SynthParams, plans: &[RunPlan]) -> f64 {
    let mut worst: f64 = 0.0;
    for plan in plans {
        let (t, m) = run_length(p, plan.presentations.len());
        for v in 0..p.voxels {
            let (s, q) = window_sums(p, plan, v, 1.0);
            worst = worst.max((q + s * s / m as f64) / (t - 1) as f64);
        }
    }
    if worst > 0.0 {
        worst
    } else {
        0.5
    }
}

/// Sum and sum of squares of voxel `v` over all window volumes.
fn window_sums(p: &SynthParams, plan: &RunPlan, v: usize, kappa: f64) -> (f64, f64) {
    let n = p.n_volumes as f64;
    plan.presentations.iter().fold((0.0, 0.0), |(s, q), e| {
        let x = kappa * e.response[v];
        (s + n * x, q + n * x * x)
    })
}

fn lay_out_run(
    p: &SynthParams,
    plan: &RunPlan,
    kappa: f64,
    rng: &mut ChaCha8Rng,
) -> Result<(VolumeSeries, Vec<StimulusEvent>)> {
    let events_n = plan.presentations.len();
    let (t, m) = run_length(p, events_n);
    let stride = p.n_volumes + p.rest_volumes;
    let mut in_window = vec![false; t];
    let events: Vec<StimulusEvent> = plan
        .presentations
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let start = i * stride + p.hrf_shift_volumes;
            in_window[start..start + p.n_volumes].fill(true);
            StimulusEvent {
                run_id: plan.run_id.clone(),
                onset_volume: i * stride,
                n_volumes: p.n_volumes,
                image_id: e.image_id.clone(),
                synset_id: e.synset.clone(),
            }
        })
        .collect();
    let rest: Vec<usize> = (0..t).filter(|&c| !in_window[c]).collect();
    debug_assert_eq!(rest.len(), m);

    let mut data = DMatrix::zeros(p.voxels, t);
    for v in 0..p.voxels {
        for (i, e) in plan.presentations.iter().enumerate() {
            let start = i * stride + p.hrf_shift_volumes;
            for c in start..start + p.n_volumes {
                data[(v, c)] = kappa * e.response[v];
            }
        }
        let (s, q) = window_sums(p, plan, v, kappa);
        let mf = m as f64;
        let spread = ((t - 1) as f64 - q - s * s / mf).max(0.0).sqrt();
        let mut dir: Vec<f64> = (0..m).map(|_| normal(rng)).collect();
        let mean = dir.iter().sum::<f64>() / mf;
        dir.iter_mut().for_each(|x| *x -= mean);
        let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        for (k, &c) in rest.iter().enumerate() {
            data[(v, c)] = -s / mf + spread * dir[k] / norm;
        }
        let gain = (0.25 * normal(rng)).exp();
        let offset = 2.0 * normal(rng);
        data.row_mut(v).apply(|x| *x = gain * *x + offset);
    }
    Ok((VolumeSeries::new(plan.run_id.clone(), data, p.tr_seconds)?, events))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::zscore_runwise;

    fn small() -> SynthParams {
        SynthParams {
            train_classes: 4,
            test_classes: 2,
            items_per_class: 3,
            test_items_per_class: 2,
            index_items_per_class: 2,
            features: 6,
            voxels: 10,
            test_repetitions: 2,
            events_per_run: 5,
            ..SynthParams::default()
        }
    }

    #[test]
    fn taxonomy_shape_and_disjoint_classes() {
        let w = SyntheticWorld::generate(&SynthParams::default()).unwrap();
        assert_eq!(w.taxonomy.len(), 1 + 5 + 25);
        assert_eq!(w.train_classes.len(), 20);
        assert!(w.test_classes.iter().all(|c| !w.train_classes.contains(c)));
        assert_eq!(w.train_features.rows(), 160);
        assert_eq!(w.index_features.rows(), 250);
        // one test class per group
        let parents: std::collections::BTreeSet<_> =
            w.test_classes.iter().map(|c| w.taxonomy.hypernyms(c).unwrap()[0].clone()).collect();
        assert_eq!(parents.len(), 5);
    }

    #[test]
    fn chance_of_default_tree() {
        let w = SyntheticWorld::generate(&SynthParams::default()).unwrap();
        // per test class: 1 exact, 4 siblings at 2/3, 20 others at 1/3, over 25
        let c = w.chance_level(WupFormula::Standard).unwrap();
        assert!((c.mean - 31.0 / 75.0).abs() < 1e-12);
    }

    #[test]
    fn runs_are_exactly_standardised_after_distortion() {
        let w = SyntheticWorld::generate(&small()).unwrap();
        for run in w.train_runs.iter().chain(&w.test_runs) {
            let z = zscore_runwise(run).unwrap();
            for row in z.data.row_iter() {
                assert!(row.iter().all(|v| v.is_finite()));
            }
        }
    }

    #[test]
    fn noiseless_trials_equal_scaled_responses() {
        let w = SyntheticWorld::generate(&small()).unwrap();
        let trials = w.train_trials().unwrap();
        let ids = &w.train_features.item_ids;
        for (i, id) in trials.image_ids.iter().enumerate() {
            let r = ids.iter().position(|x| x == id).unwrap();
            let expect = &w.planted_map * w.train_features.data.row(r).transpose() * w.response_scale;
            let got = trials.data.row(i).transpose();
            assert!((got - expect).amax() < 1e-9);
        }
    }

    #[test]
    fn streams_are_independent_of_noise() {
        let a = SyntheticWorld::generate(&small()).unwrap();
        let b = SyntheticWorld::generate(&SynthParams {
            voxel_noise: 1.0,
            ..small()
        })
        .unwrap();
        assert_eq!(a.train_features, b.train_features);
        assert_eq!(a.planted_map, b.planted_map);
        assert_eq!(a.train_events, b.train_events);
    }

    #[test]
    fn rejects_bad_parameters() {
        for p in [
            SynthParams { train_classes: 1, ..small() },
            SynthParams { features: 1, ..small() },
            SynthParams { voxel_noise: -1.0, ..small() },
        ] {
            assert!(matches!(SyntheticWorld::generate(&p), Err(Error::InvalidParameter(_))));
        }
    }
}
