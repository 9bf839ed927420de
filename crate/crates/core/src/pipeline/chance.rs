//! Exact chance-level Wu-Palmer similarity by enumerating class pairs.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::taxonomy::{SynsetRef, Taxonomy, WupFormula};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChanceLevel {
    /// Expected similarity of a uniformly random guess.
    pub mean: f64,
    /// Population standard deviation over all (truth, guess) pairs.
    pub std: f64,
    pub pairs: usize,
}

/// Averages `wup(t, g)` over every truth (with multiplicity) and every
/// distinct guess class.
pub fn chance_wup(
    taxonomy: &Taxonomy,
    truths: &[SynsetRef],
    guesses: &[SynsetRef],
    formula: WupFormula,
) -> Result<ChanceLevel> {
    let guesses: BTreeSet<&SynsetRef> = guesses.iter().collect();
    if truths.is_empty() || guesses.is_empty() {
        return Err(Error::InvalidParameter(
            "chance level needs at least one truth and one guess class".into(),
        ));
    }
    let mut values = Vec::with_capacity(truths.len() * guesses.len());
    for t in truths {
        for g in &guesses {
            values.push(taxonomy.wup_similarity(t, g, formula)?);
        }
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Ok(ChanceLevel {
        mean,
        std: var.sqrt(),
        pairs: values.len(),
    })
}
