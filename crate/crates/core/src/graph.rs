//! The TERRIDOC term graph: every authority term found in the notices is a
//! low-level node, enriched upward with broader, used-for and associated
//! material from the thesaurus.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::notice::Notice;
use crate::slug::{slugify, IdAllocator};
use crate::thesaurus::{normalize_label, Thesaurus};

pub const THESAURUS_PROVENANCE: &str = "thesaurus";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermOrigin {
    Corpus,
    Enrichment,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationType {
    Generic,
    Associated,
    UsedFor,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermNode {
    pub id: String,
    pub label: String,
    pub origin: TermOrigin,
    pub temporal_flag: bool,
    pub docs: BTreeSet<String>,
    /// Thesaurus record whose preferred label this node carries.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Directed relation; generic edges point from narrower to broader.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TypedEdge {
    pub src: String,
    pub dst: String,
    #[serde(rename = "type")]
    pub relation: RelationType,
    pub provenance: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct TerridocGraph {
    pub nodes: BTreeMap<String, TermNode>,
    pub edges: BTreeSet<TypedEdge>,
    /// Number of notices the corpus terms were drawn from.
    pub notices: usize,
    /// Ids of nodes used at the head of at least one heading.
    pub heads: BTreeSet<String>,
    /// Corpus labels with no thesaurus record, sorted.
    pub unmatched: Vec<String>,
    #[serde(skip)]
    by_label: BTreeMap<String, String>,
}

impl TerridocGraph {
    pub fn node(&self, id: &str) -> Option<&TermNode> {
        self.nodes.get(id)
    }

    pub fn node_by_label(&self, label: &str) -> Option<&TermNode> {
        self.by_label
            .get(&normalize_label(label))
            .and_then(|id| self.nodes.get(id))
    }

    pub fn edges_of_type(&self, relation: RelationType) -> impl Iterator<Item = &TypedEdge> {
        self.edges.iter().filter(move |e| e.relation == relation)
    }
}

/// A term as found in the corpus, with the notices that use it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusTerm {
    pub label: String,
    pub docs: BTreeSet<String>,
    /// Notices where this term heads a heading.
    pub head_in: BTreeSet<String>,
}

fn temporal_pattern() -> &'static Regex {
    static PATTERN: OnceLock<Regex> = OnceLock::new();
    PATTERN.get_or_init(|| Regex::new(r"^[0-9]{1,2}e( |-)siècle").expect("valid regex"))
}

/// Century subdivisions such as "18e siècle".
pub fn is_temporal(label: &str) -> bool {
    temporal_pattern().is_match(&normalize_label(label))
}

/// Every term at every heading position, deduplicated by normalized label and
/// sorted by it. The first surface form met in document order is kept.
pub fn extract_corpus_terms(notices: &[Notice]) -> Vec<CorpusTerm> {
    let mut terms: BTreeMap<String, CorpusTerm> = BTreeMap::new();
    for notice in notices {
        for heading in &notice.headings {
            for (pos, label) in heading.terms().iter().enumerate() {
                let entry = terms.entry(normalize_label(label)).or_insert_with(|| CorpusTerm {
                    label: label.clone(),
                    docs: BTreeSet::new(),
                    head_in: BTreeSet::new(),
                });
                entry.docs.insert(notice.id.clone());
                if pos == 0 {
                    entry.head_in.insert(notice.id.clone());
                }
            }
        }
    }
    terms.into_values().collect()
}

#[derive(Debug)]
struct NodeDraft {
    label: String,
    corpus: bool,
    docs: BTreeSet<String>,
    heads: bool,
    record: Option<String>,
}

/// Ancestors of `start` under the broader relation, `start` excluded.
fn ancestors<'t>(thesaurus: &'t Thesaurus, start: &str, into: &mut BTreeSet<&'t str>) {
    let mut stack: Vec<&str> = vec![start];
    while let Some(id) = stack.pop() {
        let Some(rec) = thesaurus.get(id) else { continue };
        for parent in &rec.generic {
            if into.insert(parent.as_str()) {
                stack.push(parent.as_str());
            }
        }
    }
}

/// Builds the term graph from corpus terms and the thesaurus.
pub fn enrich(corpus_terms: &[CorpusTerm], thesaurus: &Thesaurus) -> TerridocGraph {
    let mut drafts: BTreeMap<String, NodeDraft> = BTreeMap::new();
    let mut matched: BTreeSet<&str> = BTreeSet::new();
    let mut unmatched = Vec::new();

    for term in corpus_terms {
        let key = normalize_label(&term.label);
        let draft = drafts.entry(key).or_insert_with(|| NodeDraft {
            label: term.label.clone(),
            corpus: true,
            docs: BTreeSet::new(),
            heads: false,
            record: None,
        });
        draft.docs.extend(term.docs.iter().cloned());
        draft.heads |= !term.head_in.is_empty();
        match thesaurus.lookup(&term.label) {
            Some(id) => {
                matched.insert(id);
            }
            None => unmatched.push(term.label.clone()),
        }
    }

    let mut closure: BTreeSet<&str> = matched.clone();
    for id in &matched {
        ancestors(thesaurus, id, &mut closure);
    }

    let mut raw_edges: BTreeSet<(String, String, RelationType)> = BTreeSet::new();
    let pref_key = |id: &str| normalize_label(&thesaurus.get(id).expect("closed over store").pref_label);

    for id in &closure {
        let rec = thesaurus.get(id).expect("closed over store");
        let key = pref_key(id);
        drafts
            .entry(key.clone())
            .or_insert_with(|| NodeDraft {
                label: rec.pref_label.clone(),
                corpus: false,
                docs: BTreeSet::new(),
                heads: false,
                record: None,
            })
            .record = Some(rec.id.clone());
        for parent in &rec.generic {
            raw_edges.insert((key.clone(), pref_key(parent), RelationType::Generic));
        }
    }

    for id in &matched {
        let rec = thesaurus.get(id).expect("closed over store");
        let key = pref_key(id);
        for alt in &rec.used_for {
            let alt_key = normalize_label(alt);
            if alt_key == key {
                continue;
            }
            drafts.entry(alt_key.clone()).or_insert_with(|| NodeDraft {
                label: alt.clone(),
                corpus: false,
                docs: BTreeSet::new(),
                heads: false,
                record: None,
            });
            raw_edges.insert((key.clone(), alt_key, RelationType::UsedFor));
        }
    }

    for id in &closure {
        let rec = thesaurus.get(id).expect("closed over store");
        for other in &rec.associated {
            if !closure.contains(other.as_str()) {
                continue;
            }
            let (a, b) = (pref_key(id), pref_key(other));
            if !raw_edges.contains(&(b.clone(), a.clone(), RelationType::Associated)) {
                raw_edges.insert((a, b, RelationType::Associated));
            }
        }
    }

    let mut ids = IdAllocator::default();
    let mut by_label = BTreeMap::new();
    let mut nodes = BTreeMap::new();
    let mut heads = BTreeSet::new();
    for (key, draft) in drafts {
        let id = ids.allocate(&slugify(&key));
        let note = draft
            .record
            .as_deref()
            .and_then(|r| thesaurus.get(r))
            .and_then(|r| r.note.clone());
        if draft.heads {
            heads.insert(id.clone());
        }
        nodes.insert(
            id.clone(),
            TermNode {
                id: id.clone(),
                temporal_flag: is_temporal(&draft.label),
                label: draft.label,
                origin: if draft.corpus {
                    TermOrigin::Corpus
                } else {
                    TermOrigin::Enrichment
                },
                docs: draft.docs,
                record: draft.record,
                note,
            },
        );
        by_label.insert(key, id);
    }

    let edges = raw_edges
        .into_iter()
        .map(|(src, dst, relation)| TypedEdge {
            src: by_label[&src].clone(),
            dst: by_label[&dst].clone(),
            relation,
            provenance: THESAURUS_PROVENANCE.to_string(),
        })
        .collect();

    let notices: BTreeSet<&String> = corpus_terms.iter().flat_map(|t| t.docs.iter()).collect();
    unmatched.sort_by_key(|l| normalize_label(l));
    TerridocGraph {
        nodes,
        edges,
        notices: notices.len(),
        heads,
        unmatched,
        by_label,
    }
}

/// Extracts corpus terms from the notices and enriches them.
pub fn build_graph(notices: &[Notice], thesaurus: &Thesaurus) -> TerridocGraph {
    let mut graph = enrich(&extract_corpus_terms(notices), thesaurus);
    graph.notices = notices.len();
    graph
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphStats {
    pub notices: usize,
    pub corpus_nodes: usize,
    pub enrichment_nodes: usize,
    pub head_terms: usize,
    pub generic_edges: usize,
    pub associated_edges: usize,
    pub used_for_edges: usize,
    pub unmatched_corpus_labels: usize,
    pub temporal_nodes: usize,
}

pub fn graph_stats(graph: &TerridocGraph) -> GraphStats {
    let count_origin = |o| graph.nodes.values().filter(|n| n.origin == o).count();
    GraphStats {
        notices: graph.notices,
        corpus_nodes: count_origin(TermOrigin::Corpus),
        enrichment_nodes: count_origin(TermOrigin::Enrichment),
        head_terms: graph.heads.len(),
        generic_edges: graph.edges_of_type(RelationType::Generic).count(),
        associated_edges: graph.edges_of_type(RelationType::Associated).count(),
        used_for_edges: graph.edges_of_type(RelationType::UsedFor).count(),
        unmatched_corpus_labels: graph.unmatched.len(),
        temporal_nodes: graph.nodes.values().filter(|n| n.temporal_flag).count(),
    }
}
