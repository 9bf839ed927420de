//! Runwise normalisation and HRF-shifted window averaging.

use std::collections::HashMap;

use nalgebra::DMatrix;

use super::{StimulusEvent, TrialMatrix, VolumeSeries};
use crate::error::{Error, Result};

/// Voxels whose sample std is at or below this are zeroed by
/// [`zscore_runwise`].
pub const ZERO_VARIANCE_EPS: f64 = 1e-12;

/// Standardises every voxel timeseries of the run to zero mean and unit
/// sample (N−1) standard deviation. Flat voxels become all zeros.
pub fn zscore_runwise(run: &VolumeSeries) -> Result<VolumeSeries> {
    let t = run.volumes();
    if t < 2 {
        return Err(Error::DegenerateRun {
            run_id: run.run_id.clone(),
            volumes: t,
        });
    }
    let mut data = run.data.clone();
    for mut row in data.row_iter_mut() {
        let mean = row.iter().sum::<f64>() / t as f64;
        let var = row.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (t - 1) as f64;
        let std = var.sqrt();
        if std <= ZERO_VARIANCE_EPS {
            row.fill(0.0);
        } else {
            row.apply(|v| *v = (*v - mean) / std);
        }
    }
    Ok(VolumeSeries {
        data,
        ..run.clone()
    })
}

fn window_mean(
    run: &VolumeSeries,
    event: &StimulusEvent,
    index: usize,
    hrf_shift_volumes: usize,
) -> Result<Vec<f64>> {
    let start = event.onset_volume + hrf_shift_volumes;
    let end = start + event.n_volumes;
    if end > run.volumes() {
        return Err(Error::WindowOutOfBounds {
            event: index,
            image_id: event.image_id.clone(),
            run_id: event.run_id.clone(),
            end,
            volumes: run.volumes(),
        });
    }
    let n = event.n_volumes as f64;
    Ok(run
        .data
        .row_iter()
        .map(|row| row.columns_range(start..end).iter().sum::<f64>() / n)
        .collect())
}

/// One trial row per event: the mean of volumes
/// `[onset + shift, onset + shift + n_volumes)`. The run is used as given;
/// normalise it first with [`zscore_runwise`].
pub fn window_average(
    run: &VolumeSeries,
    events: &[StimulusEvent],
    hrf_shift_volumes: usize,
) -> Result<TrialMatrix> {
    let mut rows = Vec::with_capacity(events.len());
    for (i, ev) in events.iter().enumerate() {
        if ev.run_id != run.run_id {
            return Err(Error::UnknownRun {
                event: i,
                run_id: ev.run_id.clone(),
            });
        }
        rows.push(window_mean(run, ev, i, hrf_shift_volumes)?);
    }
    assemble(rows, events, run.voxels())
}

/// Normalises every run and averages each event against its own run, keeping
/// the event order of `events`.
pub fn preprocess_runs(
    runs: &[VolumeSeries],
    events: &[StimulusEvent],
    hrf_shift_volumes: usize,
) -> Result<TrialMatrix> {
    let voxels = runs.first().map_or(0, VolumeSeries::voxels);
    if let Some(r) = runs.iter().find(|r| r.voxels() != voxels) {
        return Err(Error::Shape(format!(
            "run {} has {} voxels, expected {voxels}",
            r.run_id,
            r.voxels()
        )));
    }
    let normalised = runs
        .iter()
        .map(|r| Ok((r.run_id.as_str(), zscore_runwise(r)?)))
        .collect::<Result<HashMap<_, _>>>()?;
    let mut rows = Vec::with_capacity(events.len());
    for (i, ev) in events.iter().enumerate() {
        let run = normalised
            .get(ev.run_id.as_str())
            .ok_or_else(|| Error::UnknownRun {
                event: i,
                run_id: ev.run_id.clone(),
            })?;
        rows.push(window_mean(run, ev, i, hrf_shift_volumes)?);
    }
    assemble(rows, events, voxels)
}

fn assemble(rows: Vec<Vec<f64>>, events: &[StimulusEvent], voxels: usize) -> Result<TrialMatrix> {
    let data = DMatrix::from_row_iterator(rows.len(), voxels, rows.into_iter().flatten());
    TrialMatrix::new(
        data,
        events.iter().map(|e| e.synset_id.clone()).collect(),
        events.iter().map(|e| e.image_id.clone()).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::SynsetRef;

    fn run(rows: usize, cols: usize, values: &[f64]) -> VolumeSeries {
        VolumeSeries::new("r1", DMatrix::from_row_slice(rows, cols, values), 3.0).unwrap()
    }

    fn event(onset: usize, n: usize) -> StimulusEvent {
        StimulusEvent {
            run_id: "r1".into(),
            onset_volume: onset,
            n_volumes: n,
            image_id: format!("img{onset}"),
            synset_id: SynsetRef::new("c1").unwrap(),
        }
    }

    #[test]
    fn zscore_small_rows() {
        let z = zscore_runwise(&run(2, 3, &[1.0, 2.0, 3.0, 5.0, 5.0, 5.0])).unwrap();
        let expect = [-1.0, 0.0, 1.0, 0.0, 0.0, 0.0];
        for (a, b) in z.data.transpose().iter().zip(expect) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn zscore_needs_two_volumes() {
        assert!(matches!(
            zscore_runwise(&run(1, 1, &[1.0])),
            Err(Error::DegenerateRun { volumes: 1, .. })
        ));
    }

    #[test]
    fn zscore_is_idempotent() {
        let r = run(2, 5, &[0.3, 1.7, -2.0, 4.0, 0.0, 9.0, 8.0, 7.5, 1.0, 2.0]);
        let once = zscore_runwise(&r).unwrap();
        let twice = zscore_runwise(&once).unwrap();
        assert!((once.data - twice.data).amax() < 1e-9);
    }

    #[test]
    fn shifted_window_mean() {
        let r = run(1, 4, &[0.0, 3.0, 6.0, 9.0]);
        let t = window_average(&r, &[event(0, 3)], 1).unwrap();
        assert_eq!(t.data[(0, 0)], 6.0);
    }

    #[test]
    fn identity_window() {
        let r = run(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let t = window_average(&r, &[event(1, 1)], 0).unwrap();
        assert_eq!(t.data.row(0).iter().copied().collect::<Vec<_>>(), vec![2.0, 5.0]);
    }

    #[test]
    fn window_mean_of_columns_one_to_three() {
        let r = run(1, 5, &[10.0, 1.0, 2.0, 6.0, 100.0]);
        let t = window_average(&r, &[event(0, 3)], 1).unwrap();
        assert_eq!(t.data[(0, 0)], 3.0);
    }

    #[test]
    fn window_past_end_names_event() {
        let r = run(1, 4, &[0.0; 4]);
        let err = window_average(&r, &[event(0, 1), event(2, 3)], 0).unwrap_err();
        assert!(matches!(
            err,
            Error::WindowOutOfBounds { event: 1, end: 5, volumes: 4, .. }
        ));
    }

    #[test]
    fn preprocess_routes_events_to_runs() {
        let a = VolumeSeries::new("a", DMatrix::from_row_slice(1, 3, &[1.0, 2.0, 3.0]), 3.0).unwrap();
        let b = VolumeSeries::new("b", DMatrix::from_row_slice(1, 3, &[3.0, 2.0, 1.0]), 3.0).unwrap();
        let mut e1 = event(2, 1);
        e1.run_id = "b".into();
        let mut e2 = event(2, 1);
        e2.run_id = "a".into();
        let t = preprocess_runs(&[a, b], &[e1, e2.clone()], 0).unwrap();
        assert!((t.data[(0, 0)] + 1.0).abs() < 1e-12);
        assert!((t.data[(1, 0)] - 1.0).abs() < 1e-12);

        let mut e3 = e2;
        e3.run_id = "zz".into();
        assert!(matches!(
            preprocess_runs(&[], &[e3], 0),
            Err(Error::UnknownRun { .. })
        ));
    }
}
