//! Hypernym taxonomies and Wu-Palmer similarity.
//!
//! A [`Taxonomy`] is an immutable DAG of synsets whose edges point from a
//! synset to its hypernyms. Depths are precomputed at build time so that all
//! queries are read-only.
//!
//! Two depth notions are kept per node, both anchored at 1 for roots:
//! the longest hypernym path ([`Taxonomy::depth`]) and the shortest one
//! ([`Taxonomy::min_depth`]). Wu-Palmer similarity uses both, the same way
//! NLTK's WordNet reader does: the subsumer is the common ancestor with the
//! greatest shortest-path depth, its longest-path depth is the numerator, and
//! each synset contributes the subsumer depth plus the length of the shortest
//! connecting path to the subsumer. On trees this reduces to
//! `2·depth(lcs) / (depth(s1) + depth(s2))`.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

mod edges;
mod synset;
mod wordnet;

pub use edges::{parse_edge_list, write_edge_list};
pub use synset::SynsetRef;
pub use wordnet::{parse_wordnet_noun, WordNetParser};

/// Which Wu-Palmer normalisation to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WupFormula {
    /// `2·depth(lcs) / (depth(s1) + depth(s2))`, in (0, 1].
    #[default]
    Standard,
    /// `depth(lcs) / (depth(s1) + depth(s2))`, in (0, 0.5].
    #[serde(rename = "paper")]
    PaperLiteral,
}

impl FromStr for WupFormula {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(WupFormula::Standard),
            "paper" | "paper-literal" | "paper_literal" => Ok(WupFormula::PaperLiteral),
            other => Err(Error::InvalidParameter(format!(
                "unknown wup formula {other:?} (expected standard or paper)"
            ))),
        }
    }
}

impl fmt::Display for WupFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WupFormula::Standard => "standard",
            WupFormula::PaperLiteral => "paper",
        })
    }
}

#[derive(Debug, Clone)]
struct Node {
    id: SynsetRef,
    lemmas: Vec<String>,
    hypernyms: Vec<usize>,
}

#[derive(Debug, Clone, Default)]
pub struct Taxonomy {
    nodes: Vec<Node>,
    lookup: HashMap<SynsetRef, usize>,
    roots: Vec<usize>,
    depth: Vec<u32>,
    min_depth: Vec<u32>,
    /// lemma (lower case) -> synsets in sense order; `None` for senses that
    /// are not part of this taxonomy.
    senses: HashMap<String, Vec<Option<SynsetRef>>>,
}

/// Collects nodes and hypernym edges, then validates them into a [`Taxonomy`].
#[derive(Debug, Default)]
pub struct TaxonomyBuilder {
    nodes: Vec<(SynsetRef, Vec<String>, Vec<SynsetRef>)>,
    lookup: HashMap<SynsetRef, usize>,
    senses: HashMap<String, Vec<Option<SynsetRef>>>,
}

impl TaxonomyBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds the node if missing and returns its insertion index.
    pub fn node(&mut self, id: SynsetRef) -> usize {
        if let Some(&i) = self.lookup.get(&id) {
            return i;
        }
        let i = self.nodes.len();
        self.lookup.insert(id.clone(), i);
        self.nodes.push((id, Vec::new(), Vec::new()));
        i
    }

    pub fn contains(&self, id: &SynsetRef) -> bool {
        self.lookup.contains_key(id)
    }

    pub fn add_lemma(&mut self, id: SynsetRef, lemma: impl Into<String>) {
        let i = self.node(id);
        self.nodes[i].1.push(lemma.into());
    }

    /// Records `child -> parent`. The parent does not have to exist yet;
    /// [`build`](Self::build) rejects edges whose target never appears.
    pub fn add_hypernym(&mut self, child: SynsetRef, parent: SynsetRef) -> Result<()> {
        if child == parent {
            return Err(Error::SelfEdge(child.to_string()));
        }
        let i = self.node(child);
        if !self.nodes[i].2.contains(&parent) {
            self.nodes[i].2.push(parent);
        }
        Ok(())
    }

    pub(crate) fn set_senses(&mut self, senses: HashMap<String, Vec<Option<SynsetRef>>>) {
        self.senses = senses;
    }

    pub fn build(self) -> Result<Taxonomy> {
        let TaxonomyBuilder {
            nodes: raw,
            lookup,
            senses,
        } = self;

        let mut nodes = Vec::with_capacity(raw.len());
        for (id, lemmas, parents) in raw {
            let mut hypernyms = Vec::with_capacity(parents.len());
            for p in parents {
                match lookup.get(&p) {
                    Some(&j) => hypernyms.push(j),
                    None => {
                        return Err(Error::DanglingPointer {
                            from: id.to_string(),
                            to: p.to_string(),
                        })
                    }
                }
            }
            nodes.push(Node {
                id,
                lemmas,
                hypernyms,
            });
        }

        // Kahn's algorithm from the roots downwards; parents are finalised
        // before any of their children.
        let n = nodes.len();
        let mut children = vec![Vec::new(); n];
        let mut pending = vec![0usize; n];
        for (i, node) in nodes.iter().enumerate() {
            pending[i] = node.hypernyms.len();
            for &p in &node.hypernyms {
                children[p].push(i);
            }
        }
        let mut roots: Vec<usize> = (0..n).filter(|&i| pending[i] == 0).collect();
        roots.sort_by(|&a, &b| nodes[a].id.cmp(&nodes[b].id));

        let mut depth = vec![0u32; n];
        let mut min_depth = vec![0u32; n];
        let mut queue: VecDeque<usize> = roots.iter().copied().collect();
        let mut done = 0usize;
        while let Some(i) = queue.pop_front() {
            done += 1;
            let node = &nodes[i];
            if node.hypernyms.is_empty() {
                depth[i] = 1;
                min_depth[i] = 1;
            } else {
                depth[i] = 1 + node.hypernyms.iter().map(|&p| depth[p]).max().unwrap();
                min_depth[i] = 1 + node.hypernyms.iter().map(|&p| min_depth[p]).min().unwrap();
            }
            for &c in &children[i] {
                pending[c] -= 1;
                if pending[c] == 0 {
                    queue.push_back(c);
                }
            }
        }
        if done < n {
            return Err(Error::Cycle(cycle_witness(&nodes, &pending)));
        }

        let lookup = nodes
            .iter()
            .enumerate()
            .map(|(i, node)| (node.id.clone(), i))
            .collect();
        Ok(Taxonomy {
            nodes,
            lookup,
            roots,
            depth,
            min_depth,
            senses,
        })
    }
}

/// Smallest id on a cycle among the nodes Kahn's algorithm could not finish.
fn cycle_witness(nodes: &[Node], pending: &[usize]) -> String {
    let stuck = |i: usize| pending[i] > 0;
    let start = (0..nodes.len()).find(|&i| stuck(i)).unwrap();
    // Every stuck node has a stuck parent, so walking parents must revisit.
    let mut seen = HashMap::new();
    let mut cur = start;
    let mut step = 0usize;
    while !seen.contains_key(&cur) {
        seen.insert(cur, step);
        step += 1;
        cur = *nodes[cur].hypernyms.iter().find(|&&p| stuck(p)).unwrap();
    }
    let first = seen[&cur];
    let mut on_cycle: Vec<&SynsetRef> = seen
        .iter()
        .filter(|&(_, &s)| s >= first)
        .map(|(&i, _)| &nodes[i].id)
        .collect();
    on_cycle.sort();
    on_cycle[0].to_string()
}

impl Taxonomy {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, id: &SynsetRef) -> bool {
        self.lookup.contains_key(id)
    }

    pub fn edge_count(&self) -> usize {
        self.nodes.iter().map(|n| n.hypernyms.len()).sum()
    }

    pub fn roots(&self) -> Vec<&SynsetRef> {
        self.roots.iter().map(|&i| &self.nodes[i].id).collect()
    }

    /// All synset ids in insertion (file) order.
    pub fn ids(&self) -> impl Iterator<Item = &SynsetRef> {
        self.nodes.iter().map(|n| &n.id)
    }

    fn index(&self, id: &SynsetRef) -> Result<usize> {
        self.lookup
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownSynset(id.to_string()))
    }

    pub fn lemmas(&self, id: &SynsetRef) -> Result<&[String]> {
        Ok(&self.nodes[self.index(id)?].lemmas)
    }

    /// First lemma with underscores turned into spaces; the id when the
    /// synset has no lemma.
    pub fn display_name(&self, id: &SynsetRef) -> Result<String> {
        let lemmas = self.lemmas(id)?;
        Ok(match lemmas.first() {
            Some(l) => l.replace('_', " "),
            None => id.to_string(),
        })
    }

    pub fn hypernyms(&self, id: &SynsetRef) -> Result<Vec<&SynsetRef>> {
        let i = self.index(id)?;
        Ok(self.nodes[i]
            .hypernyms
            .iter()
            .map(|&p| &self.nodes[p].id)
            .collect())
    }

    /// `1 +` length of the longest hypernym path to a root.
    pub fn depth(&self, id: &SynsetRef) -> Result<u32> {
        Ok(self.depth[self.index(id)?])
    }

    /// `1 +` length of the shortest hypernym path to a root.
    pub fn min_depth(&self, id: &SynsetRef) -> Result<u32> {
        Ok(self.min_depth[self.index(id)?])
    }

    /// Ancestors of `i` (itself included) with their shortest upward distance.
    fn ancestor_distances(&self, i: usize) -> HashMap<usize, u32> {
        let mut dist = HashMap::new();
        dist.insert(i, 0u32);
        let mut queue = VecDeque::from([i]);
        while let Some(cur) = queue.pop_front() {
            let d = dist[&cur];
            for &p in &self.nodes[cur].hypernyms {
                if !dist.contains_key(&p) {
                    dist.insert(p, d + 1);
                    queue.push_back(p);
                }
            }
        }
        dist
    }

    /// Deepest common ancestor (each node is its own ancestor) by
    /// longest-path depth; ties go to the lexicographically smallest id.
    pub fn lcs(&self, s1: &SynsetRef, s2: &SynsetRef) -> Result<SynsetRef> {
        let (a, b) = (self.index(s1)?, self.index(s2)?);
        let da = self.ancestor_distances(a);
        let db = self.ancestor_distances(b);
        da.keys()
            .filter(|c| db.contains_key(c))
            .map(|&c| (self.depth[c], &self.nodes[c].id))
            .max_by(|x, y| x.0.cmp(&y.0).then_with(|| y.1.cmp(x.1)))
            .map(|(_, id)| id.clone())
            .ok_or_else(|| Error::NoCommonAncestor(s1.to_string(), s2.to_string()))
    }

    pub fn wup_similarity(
        &self,
        s1: &SynsetRef,
        s2: &SynsetRef,
        formula: WupFormula,
    ) -> Result<f64> {
        let (a, b) = (self.index(s1)?, self.index(s2)?);
        if a == b {
            return Ok(match formula {
                WupFormula::Standard => 1.0,
                WupFormula::PaperLiteral => 0.5,
            });
        }
        let da = self.ancestor_distances(a);
        let db = self.ancestor_distances(b);
        let common: Vec<usize> = da.keys().copied().filter(|c| db.contains_key(c)).collect();
        let best = common
            .iter()
            .map(|&c| self.min_depth[c])
            .max()
            .ok_or_else(|| Error::NoCommonAncestor(s1.to_string(), s2.to_string()))?;
        let tied: Vec<usize> = common
            .iter()
            .copied()
            .filter(|&c| self.min_depth[c] == best)
            .collect();
        let subsumer = if tied.contains(&a) {
            a
        } else if tied.contains(&b) {
            b
        } else {
            *tied
                .iter()
                .min_by(|&&x, &&y| self.name_key(x).cmp(&self.name_key(y)))
                .unwrap()
        };

        let ds = self.ancestor_distances(subsumer);
        let link = |d: &HashMap<usize, u32>| {
            d.iter()
                .filter_map(|(c, &x)| ds.get(c).map(|&y| x + y))
                .min()
                .unwrap()
        };
        let lcs_depth = f64::from(self.depth[subsumer]);
        let len1 = lcs_depth + f64::from(link(&da));
        let len2 = lcs_depth + f64::from(link(&db));
        let standard = 2.0 * lcs_depth / (len1 + len2);
        Ok(match formula {
            WupFormula::Standard => standard,
            WupFormula::PaperLiteral => lcs_depth / (len1 + len2),
        })
    }

    /// Ordering key among equally deep subsumers: lower-cased first lemma,
    /// then id.
    fn name_key(&self, i: usize) -> (String, &SynsetRef) {
        let node = &self.nodes[i];
        let name = node
            .lemmas
            .first()
            .map(|l| l.to_lowercase())
            .unwrap_or_else(|| node.id.to_string());
        (name, &node.id)
    }

    /// Resolves a synset id, or a `lemma.n.NN` sense name when sense lists
    /// were loaded from `index.noun`.
    pub fn resolve(&self, name: &str) -> Result<SynsetRef> {
        if let Ok(id) = SynsetRef::new(name) {
            if self.contains(&id) {
                return Ok(id);
            }
        }
        if let Some((lemma, sense)) = split_sense_name(name) {
            if let Some(Some(id)) = self
                .senses
                .get(&lemma.to_lowercase())
                .and_then(|s| s.get(sense - 1))
            {
                return Ok(id.clone());
            }
        }
        Err(Error::UnknownSynset(name.to_string()))
    }
}

fn split_sense_name(name: &str) -> Option<(&str, usize)> {
    let (rest, num) = name.rsplit_once('.')?;
    let (lemma, pos) = rest.rsplit_once('.')?;
    if pos != "n" || lemma.is_empty() {
        return None;
    }
    let sense: usize = num.parse().ok()?;
    (sense >= 1).then_some((lemma, sense))
}
