//! CSV fallback for feature matrices: `id[,label],f0,f1,…`.
//!
//! A header row is optional and recognised by a non-numeric last field. The
//! label column is present when the second field of the first data row is
//! not a number.

use std::path::Path;

use nalgebra::DMatrix;

use super::FeatureMatrix;
use crate::error::{Error, Result};
use crate::taxonomy::SynsetRef;

pub(super) fn read(path: &Path) -> Result<FeatureMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(false)
        .from_path(path)
        .map_err(|e| csv_error(path, 0, e))?;

    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            csv_error(path, line, e)
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        records.push((line, rec));
    }
    let numeric = |s: &str| s.trim().parse::<f64>().is_ok();
    if let Some((_, first)) = records.first() {
        if first.len() >= 2 && !numeric(&first[first.len() - 1]) {
            records.remove(0);
        }
    }
    let Some((_, first)) = records.first() else {
        return FeatureMatrix::new(DMatrix::zeros(0, 0), Vec::new(), None);
    };
    if first.len() < 2 {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            msg: "need an id column and at least one value".into(),
        });
    }
    let has_label = !numeric(&first[1]);
    let skip = if has_label { 2 } else { 1 };
    let cols = first.len() - skip;

    let mut ids = Vec::with_capacity(records.len());
    let mut labels = Vec::new();
    let mut values = Vec::with_capacity(records.len() * cols);
    for (line, rec) in &records {
        let bad = |msg: String| Error::Parse {
            path: path.to_path_buf(),
            line: *line,
            msg,
        };
        ids.push(rec[0].to_string());
        if has_label {
            labels.push(
                SynsetRef::new(rec[1].trim())
                    .map_err(|_| bad(format!("invalid synset label {:?}", &rec[1])))?,
            );
        }
        for field in rec.iter().skip(skip) {
            values.push(
                field
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| bad(format!("not a number: {field:?}")))?,
            );
        }
    }
    FeatureMatrix::new(
        DMatrix::from_row_slice(ids.len(), cols, &values),
        ids,
        has_label.then_some(labels),
    )
}

pub(super) fn write(m: &FeatureMatrix, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, 0, e))?;
    let mut header = vec!["id".to_string()];
    if m.labels.is_some() {
        header.push("label".into());
    }
    header.extend((0..m.dim()).map(|j| format!("f{j}")));
    w.write_record(&header).map_err(|e| csv_error(path, 0, e))?;
    for i in 0..m.rows() {
        let mut rec = vec![m.item_ids[i].clone()];
        if let Some(l) = &m.labels {
            rec.push(l[i].to_string());
        }
        rec.extend(m.data.row(i).iter().map(|v| v.to_string()));
        w.write_record(&rec).map_err(|e| csv_error(path, i + 2, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn csv_error(path: &Path, line: usize, e: csv::Error) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: e.to_string(),
    }
}
