use std::path::Path;

use crate::error::{Error, Result};
use crate::taxonomy::SynsetRef;

pub const EVENT_COLUMNS: [&str; 5] = ["run_id", "onset_volume", "n_volumes", "image_id", "synset_id"];

/// One stimulus presentation inside a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StimulusEvent {
    pub run_id: String,
    pub onset_volume: usize,
    pub n_volumes: usize,
    pub image_id: String,
    pub synset_id: SynsetRef,
}

/// Reads the tab-separated events table. Columns are matched by header name,
/// so their order is free and extra columns are ignored.
pub fn load_events(path: &Path) -> Result<Vec<StimulusEvent>> {
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .has_headers(true)
        .from_reader(file);
    let headers = reader.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    let mut col = [0usize; 5];
    for (slot, name) in col.iter_mut().zip(EVENT_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| parse_err(1, format!("missing column {name:?}")))?;
    }

    let mut events = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let field = |i: usize| rec.get(col[i]).unwrap_or("").trim();
        let int = |i: usize| -> Result<usize> {
            field(i).parse().map_err(|_| {
                parse_err(line, format!("{} is not a non-negative integer: {:?}", EVENT_COLUMNS[i], field(i)))
            })
        };
        let onset_volume = int(1)?;
        let n_volumes = int(2)?;
        if n_volumes == 0 {
            return Err(parse_err(line, "n_volumes must be positive".into()));
        }
        let synset_id = SynsetRef::new(field(4))
            .map_err(|_| parse_err(line, format!("malformed synset id {:?}", field(4))))?;
        events.push(StimulusEvent {
            run_id: field(0).to_string(),
            onset_volume,
            n_volumes,
            image_id: field(3).to_string(),
            synset_id,
        });
    }
    Ok(events)
}

pub fn write_events(path: &Path, events: &[StimulusEvent]) -> Result<()> {
    let mut out = EVENT_COLUMNS.join("\t");
    out.push('\n');
    for e in events {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            e.run_id, e.onset_volume, e.n_volumes, e.image_id, e.synset_id
        ));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(text: &str) -> Result<Vec<StimulusEvent>> {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.tsv");
        std::fs::write(&path, text).unwrap();
        load_events(&path)
    }

    const HEADER: &str = "run_id\tonset_volume\tn_volumes\timage_id\tsynset_id\n";

    #[test]
    fn one_row() {
        let ev = load(&format!("{HEADER}run-01\t0\t3\timg1\tn01443537\n")).unwrap();
        assert_eq!(ev.len(), 1);
        assert_eq!(ev[0].onset_volume, 0);
        assert_eq!(ev[0].synset_id.as_str(), "n01443537");
    }

    #[test]
    fn header_only() {
        assert!(load(HEADER).unwrap().is_empty());
    }

    #[test]
    fn non_integer_onset_names_line() {
        let err = load(&format!("{HEADER}run-01\t0\t3\timg1\tn01443537\nrun-01\tabc\t3\timg2\tn01443537\n"))
            .unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn missing_column() {
        let err = load("run_id\tonset_volume\tn_volumes\timage_id\n").unwrap_err();
        assert!(err.to_string().contains("synset_id"));
    }

    #[test]
    fn malformed_synset() {
        let err = load(&format!("{HEADER}run-01\t0\t3\timg1\tn0144\n")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn columns_by_name_and_round_trip() {
        let ev = load("image_id\tsynset_id\trun_id\tn_volumes\tonset_volume\nx\tc1\tr\t3\t6\n").unwrap();
        assert_eq!(ev[0].onset_volume, 6);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.tsv");
        write_events(&path, &ev).unwrap();
        assert_eq!(load_events(&path).unwrap(), ev);
    }
}
