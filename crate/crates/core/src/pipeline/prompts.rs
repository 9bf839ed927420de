//! Class-name prompts for an external image generator.

use std::path::Path;

use super::report::EvaluationReport;
use crate::error::{Error, Result};

pub const PROMPT_HEADER: &str = "image_id\tsynset_id\tprompt";

/// One line per item with the predicted class, or with `all_candidates` one
/// line per retrieved neighbour in distance order.
pub fn render_prompts(report: &EvaluationReport, all_candidates: bool) -> String {
    let mut out = String::from(PROMPT_HEADER);
    out.push('\n');
    let mut line = |id: &str, synset: &str, name: &str| {
        out.push_str(&format!("{id}\t{synset}\t{}\n", name.replace(['\t', '\n'], " ")));
    };
    for r in &report.records {
        if all_candidates && !r.neighbors.is_empty() {
            for n in &r.neighbors {
                line(&r.image_id, n.synset.as_str(), &n.name);
            }
        } else {
            line(&r.image_id, r.predicted_synset.as_str(), &r.predicted_name);
        }
    }
    out
}

pub fn emit_prompts(report: &EvaluationReport, out_path: &Path, all_candidates: bool) -> Result<()> {
    std::fs::write(out_path, render_prompts(report, all_candidates)).map_err(|e| Error::io(out_path, e))
}
