//! Plain TSV taxonomies: `child<TAB>parent` rows, plus an optional lemma
//! file of `id<TAB>lemma[<TAB>lemma…]` rows. Blank lines and `#` comments are
//! ignored.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::{SynsetRef, Taxonomy, TaxonomyBuilder};
use crate::error::{Error, Result};

fn rows(path: &Path) -> Result<Vec<(usize, Vec<String>)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|(i, l)| {
            (
                i + 1,
                l.trim_end_matches('\r')
                    .split('\t')
                    .map(str::to_string)
                    .collect(),
            )
        })
        .collect())
}

fn synset(path: &Path, line: usize, raw: &str) -> Result<SynsetRef> {
    SynsetRef::new(raw.trim()).map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: format!("invalid synset id {raw:?}"),
    })
}

pub fn parse_edge_list(edges: &Path, lemmas: Option<&Path>) -> Result<Taxonomy> {
    let mut builder = TaxonomyBuilder::new();
    for (line, fields) in rows(edges)? {
        if fields.len() != 2 {
            return Err(Error::Parse {
                path: edges.to_path_buf(),
                line,
                msg: format!("expected child<TAB>parent, got {} field(s)", fields.len()),
            });
        }
        let child = synset(edges, line, &fields[0])?;
        let parent = synset(edges, line, &fields[1])?;
        builder.node(parent.clone());
        builder.add_hypernym(child, parent)?;
    }
    if let Some(lemma_path) = lemmas {
        for (line, fields) in rows(lemma_path)? {
            let id = synset(lemma_path, line, &fields[0])?;
            if !builder.contains(&id) {
                return Err(Error::UnknownSynset(id.to_string()));
            }
            for lemma in &fields[1..] {
                builder.add_lemma(id.clone(), lemma.trim());
            }
        }
    }
    builder.build()
}

/// Writes `edges` as `child<TAB>parent` lines and, when given, the lemma
/// table next to it.
pub fn write_edge_list(
    edges_path: &Path,
    edges: &[(SynsetRef, SynsetRef)],
    lemmas: Option<(&Path, &[(SynsetRef, Vec<String>)])>,
) -> Result<()> {
    let mut out = Vec::new();
    for (c, p) in edges {
        writeln!(out, "{c}\t{p}").unwrap();
    }
    fs::write(edges_path, out).map_err(|e| Error::io(edges_path, e))?;
    if let Some((path, table)) = lemmas {
        let mut out = Vec::new();
        for (id, ls) in table {
            writeln!(out, "{id}\t{}", ls.join("\t")).unwrap();
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}
