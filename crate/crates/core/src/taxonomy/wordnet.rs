//! Reader for the WordNet 3.x noun database (`data.noun`, `index.noun`).
//!
//! A `data.noun` record is one line:
//!
//! ```text
//! offset lex_filenum ss_type w_cnt (word lex_id){w_cnt} p_cnt (ptr offset pos src_tgt){p_cnt} | gloss
//! ```
//!
//! `w_cnt` is two hex digits, `p_cnt` three decimal digits. Lines starting
//! with two spaces are the license header. Only `@` (hypernym) and `@i`
//! (instance hypernym) pointers to nouns become edges; every other pointer is
//! checked for shape and otherwise ignored.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use super::{SynsetRef, Taxonomy, TaxonomyBuilder};
use crate::error::{Error, Result};

pub fn parse_wordnet_noun(data_noun: &Path, index_noun: Option<&Path>) -> Result<Taxonomy> {
    let mut parser = WordNetParser::new();
    let file = File::open(data_noun).map_err(|e| Error::io(data_noun, e))?;
    parser.read_data(BufReader::new(file), data_noun)?;
    if let Some(index) = index_noun {
        let file = File::open(index).map_err(|e| Error::io(index, e))?;
        parser.read_index(BufReader::new(file), index)?;
    }
    parser.finish()
}

#[derive(Default)]
pub struct WordNetParser {
    builder: TaxonomyBuilder,
    /// hypernym edges in file order, validated once all records are known
    edges: Vec<(SynsetRef, SynsetRef)>,
    senses: HashMap<String, Vec<u64>>,
}

impl WordNetParser {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn read_data<R: BufRead>(&mut self, reader: R, source: &Path) -> Result<()> {
        for (lineno, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(source, e))?;
            let line = line.trim_end_matches('\r');
            if line.starts_with("  ") || line.trim().is_empty() {
                continue;
            }
            self.record(line, source, lineno + 1)?;
        }
        Ok(())
    }

    fn record(&mut self, line: &str, source: &Path, lineno: usize) -> Result<()> {
        let malformed = |msg: String| Error::MalformedRecord {
            path: source.to_path_buf(),
            line: lineno,
            msg,
        };
        let fields_part = line.split_once('|').map_or(line, |(head, _)| head);
        let mut fields = fields_part.split_ascii_whitespace();
        let mut next = |what: &str| {
            fields
                .next()
                .ok_or_else(|| malformed(format!("missing {what}")))
        };

        let offset_s = next("synset offset")?;
        if offset_s.len() != 8 || !offset_s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(malformed(format!("bad synset offset {offset_s:?}")));
        }
        let offset: u64 = offset_s.parse().unwrap();
        next("lex_filenum")?;
        let ss_type = next("ss_type")?;
        if ss_type != "n" {
            return Err(malformed(format!("ss_type {ss_type:?} is not a noun")));
        }
        let w_cnt_s = next("w_cnt")?;
        let w_cnt = usize::from_str_radix(w_cnt_s, 16)
            .map_err(|_| malformed(format!("bad w_cnt {w_cnt_s:?}")))?;
        if w_cnt == 0 {
            return Err(malformed("w_cnt is zero".into()));
        }
        let id = SynsetRef::from_noun_offset(offset);
        if self.builder.contains(&id) {
            return Err(malformed(format!("duplicate synset {id}")));
        }
        self.builder.node(id.clone());
        for _ in 0..w_cnt {
            let word = next("word")?;
            next("lex_id")?;
            self.builder.add_lemma(id.clone(), word);
        }
        let p_cnt_s = next("p_cnt")?;
        let p_cnt: usize = p_cnt_s
            .parse()
            .map_err(|_| malformed(format!("bad p_cnt {p_cnt_s:?}")))?;
        for _ in 0..p_cnt {
            let symbol = next("pointer symbol")?;
            let target = next("pointer offset")?;
            let pos = next("pointer pos")?;
            next("pointer source/target")?;
            if !matches!(symbol, "@" | "@i") || pos != "n" {
                continue;
            }
            let target: u64 = target
                .parse()
                .map_err(|_| malformed(format!("bad pointer offset {target:?}")))?;
            self.edges
                .push((id.clone(), SynsetRef::from_noun_offset(target)));
        }
        if let Some(extra) = fields.next() {
            return Err(malformed(format!(
                "unexpected field {extra:?} after {p_cnt} pointer(s)"
            )));
        }
        Ok(())
    }

    /// `lemma pos synset_cnt p_cnt ptr_symbol{p_cnt} sense_cnt tagsense_cnt offset{synset_cnt}`
    pub fn read_index<R: BufRead>(&mut self, reader: R, source: &Path) -> Result<()> {
        for (lineno, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(source, e))?;
            let line = line.trim_end_matches('\r');
            if line.starts_with("  ") || line.trim().is_empty() {
                continue;
            }
            let bad = |msg: &str| Error::Parse {
                path: PathBuf::from(source),
                line: lineno + 1,
                msg: msg.to_string(),
            };
            let f: Vec<&str> = line.split_ascii_whitespace().collect();
            if f.len() < 6 {
                return Err(bad("too few fields"));
            }
            let synset_cnt: usize = f[2].parse().map_err(|_| bad("bad synset_cnt"))?;
            let p_cnt: usize = f[3].parse().map_err(|_| bad("bad p_cnt"))?;
            let first = 4 + p_cnt + 2;
            if f.len() != first + synset_cnt {
                return Err(bad("field count does not match synset_cnt"));
            }
            let offsets = f[first..]
                .iter()
                .map(|o| o.parse::<u64>().map_err(|_| bad("bad synset offset")))
                .collect::<Result<Vec<_>>>()?;
            self.senses.insert(f[0].to_lowercase(), offsets);
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<Taxonomy> {
        for (child, parent) in std::mem::take(&mut self.edges) {
            if !self.builder.contains(&parent) {
                return Err(Error::DanglingPointer {
                    from: child.to_string(),
                    to: parent.to_string(),
                });
            }
            self.builder.add_hypernym(child, parent)?;
        }
        let senses = self
            .senses
            .into_iter()
            .map(|(lemma, offsets)| {
                let ids = offsets
                    .into_iter()
                    .map(SynsetRef::from_noun_offset)
                    .map(|id| self.builder.contains(&id).then_some(id))
                    .collect();
                (lemma, ids)
            })
            .collect();
        self.builder.set_senses(senses);
        self.builder.build()
    }
}
