//! Lightweight territory ontology derived from the term graph.
//!
//! Terms that resolve to exactly one gazetteer entry become instances typed
//! by the root concept "Entité spatiale"; everything else becomes a concept.
//! Broader relations from a place to a concept turn into `instance_of`, and
//! place names mined from notice text are attached to the concept their
//! qualifier names.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{RelationType, TermOrigin, TerridocGraph};
use crate::patterns::{LinkedCandidate, PatternId};
use crate::slug::{slugify, IdAllocator};
use crate::spatial::{parse_label_qualifier, GazetteerEntry, MatchStatus, Resolve};
use crate::thesaurus::normalize_label;

pub const ROOT_ID: &str = "entite_spatiale";
pub const ROOT_LABEL: &str = "Entité spatiale";
pub const DEFAULT_NEAR_KM: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityOrigin {
    Corpus,
    Enrichment,
    Text,
    System,
}

impl From<TermOrigin> for EntityOrigin {
    fn from(o: TermOrigin) -> Self {
        match o {
            TermOrigin::Corpus => EntityOrigin::Corpus,
            TermOrigin::Enrichment => EntityOrigin::Enrichment,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
/// Variants are in the lexicographic order of their names, so edges sort
/// the same way by variant and by serialized type.
pub enum OntoEdgeType {
    Associated,
    InstanceOf,
    SpatialNear,
    SpatialWithin,
    SubclassGeneric,
    UsedFor,
}

impl OntoEdgeType {
    pub fn as_str(self) -> &'static str {
        match self {
            OntoEdgeType::SubclassGeneric => "subclass_generic",
            OntoEdgeType::Associated => "associated",
            OntoEdgeType::UsedFor => "used_for",
            OntoEdgeType::InstanceOf => "instance_of",
            OntoEdgeType::SpatialWithin => "spatial_within",
            OntoEdgeType::SpatialNear => "spatial_near",
        }
    }

    pub fn is_spatial(self) -> bool {
        matches!(self, OntoEdgeType::SpatialWithin | OntoEdgeType::SpatialNear)
    }
}

impl fmt::Display for OntoEdgeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Provenance {
    Thesaurus,
    Gazetteer,
    /// Mined from the text of the given notice.
    Text(String),
    Geometry,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Thesaurus => f.write_str("thesaurus"),
            Provenance::Gazetteer => f.write_str("gazetteer"),
            Provenance::Text(id) => write!(f, "text:{id}"),
            Provenance::Geometry => f.write_str("geometry"),
        }
    }
}

impl FromStr for Provenance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "thesaurus" => Ok(Provenance::Thesaurus),
            "gazetteer" => Ok(Provenance::Gazetteer),
            "geometry" => Ok(Provenance::Geometry),
            _ => match s.strip_prefix("text:") {
                Some(id) if !id.is_empty() => Ok(Provenance::Text(id.to_string())),
                _ => Err(Error::validation(format!("unknown provenance {s:?}"))),
            },
        }
    }
}

impl Serialize for Provenance {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Provenance {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OntoConcept {
    pub id: String,
    pub label: String,
    pub note: Option<String>,
    pub origin: EntityOrigin,
    pub temporal: bool,
    /// Notices indexed with this concept.
    pub docs: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OntoInstance {
    pub id: String,
    pub label: String,
    pub entry: GazetteerEntry,
    pub docs: BTreeSet<String>,
    pub origin: EntityOrigin,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OntoEdge {
    pub src: String,
    pub dst: String,
    pub edge_type: OntoEdgeType,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntityKind {
    Concept,
    Instance,
}

type EdgeKey = (String, String, OntoEdgeType);

/// Concepts, instances and typed edges. At most one edge per
/// `(src, dst, type)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Ontology {
    concepts: BTreeMap<String, OntoConcept>,
    instances: BTreeMap<String, OntoInstance>,
    edges: BTreeMap<EdgeKey, Provenance>,
}

impl Ontology {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn concepts(&self) -> impl Iterator<Item = &OntoConcept> {
        self.concepts.values()
    }

    pub fn instances(&self) -> impl Iterator<Item = &OntoInstance> {
        self.instances.values()
    }

    pub fn concept(&self, id: &str) -> Option<&OntoConcept> {
        self.concepts.get(id)
    }

    pub fn instance(&self, id: &str) -> Option<&OntoInstance> {
        self.instances.get(id)
    }

    pub fn kind(&self, id: &str) -> Option<EntityKind> {
        if self.concepts.contains_key(id) {
            Some(EntityKind::Concept)
        } else if self.instances.contains_key(id) {
            Some(EntityKind::Instance)
        } else {
            None
        }
    }

    /// Edges sorted by `(src, dst, type)`.
    pub fn edges(&self) -> impl Iterator<Item = OntoEdge> + '_ {
        self.edges.iter().map(|((src, dst, edge_type), prov)| OntoEdge {
            src: src.clone(),
            dst: dst.clone(),
            edge_type: *edge_type,
            provenance: prov.clone(),
        })
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, src: &str, dst: &str, edge_type: OntoEdgeType) -> bool {
        self.edges.contains_key(&(src.to_string(), dst.to_string(), edge_type))
    }

    pub fn edge_provenance(&self, src: &str, dst: &str, edge_type: OntoEdgeType) -> Option<&Provenance> {
        self.edges.get(&(src.to_string(), dst.to_string(), edge_type))
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty() && self.instances.is_empty() && self.edges.is_empty()
    }

    pub fn insert_concept(&mut self, concept: OntoConcept) -> Result<()> {
        if self.kind(&concept.id).is_some() {
            return Err(Error::validation(format!("duplicate entity id {:?}", concept.id)));
        }
        self.concepts.insert(concept.id.clone(), concept);
        Ok(())
    }

    pub fn insert_instance(&mut self, instance: OntoInstance) -> Result<()> {
        if self.kind(&instance.id).is_some() {
            return Err(Error::validation(format!("duplicate entity id {:?}", instance.id)));
        }
        self.instances.insert(instance.id.clone(), instance);
        Ok(())
    }

    /// Adds an edge unless one with the same `(src, dst, type)` exists.
    /// Returns whether it was added.
    pub fn insert_edge(&mut self, edge: OntoEdge) -> bool {
        let key = (edge.src, edge.dst, edge.edge_type);
        if self.edges.contains_key(&key) {
            return false;
        }
        self.edges.insert(key, edge.provenance);
        true
    }

    /// Checks the structural invariants: endpoints exist and are distinct,
    /// `instance_of` joins exactly one instance, spatial edges join
    /// instances, gazetteer typing targets the root, and the root exists
    /// whenever instances do.
    pub fn validate(&self) -> Result<()> {
        if !self.instances.is_empty() && !self.concepts.contains_key(ROOT_ID) {
            return Err(Error::validation(format!(
                "instances present but root concept {ROOT_ID:?} missing"
            )));
        }
        for edge in self.edges() {
            let (Some(sk), Some(dk)) = (self.kind(&edge.src), self.kind(&edge.dst)) else {
                return Err(Error::validation(format!(
                    "edge {} -> {} ({}) has a missing endpoint",
                    edge.src, edge.dst, edge.edge_type
                )));
            };
            if edge.src == edge.dst {
                return Err(Error::validation(format!("self-loop on {:?}", edge.src)));
            }
            let instances = [sk, dk].iter().filter(|k| **k == EntityKind::Instance).count();
            let ok = match edge.edge_type {
                OntoEdgeType::InstanceOf => {
                    instances == 1
                        && match &edge.provenance {
                            Provenance::Gazetteer => sk == EntityKind::Instance && edge.dst == ROOT_ID,
                            Provenance::Text(_) => sk == EntityKind::Concept,
                            _ => true,
                        }
                }
                t if t.is_spatial() => instances == 2,
                _ => true,
            };
            if !ok {
                return Err(Error::validation(format!(
                    "edge {} -> {} ({}, {}) joins the wrong kinds of entity",
                    edge.src, edge.dst, edge.edge_type, edge.provenance
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkPolicy {
    /// Only link qualifiers to concepts that already exist.
    #[default]
    Existing,
    /// Create a text-origin concept for an unmatched qualifier.
    Create,
}

impl FromStr for LinkPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "existing" => Ok(LinkPolicy::Existing),
            "create" => Ok(LinkPolicy::Create),
            _ => Err(Error::validation(format!("unknown link policy {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmbiguousLabel {
    pub label: String,
    pub candidates: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeNote {
    pub src: String,
    pub dst: String,
    #[serde(rename = "type")]
    pub relation: RelationType,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateNote {
    pub notice_id: String,
    pub proper_name: String,
    pub qualifier: Option<String>,
    pub pattern: PatternId,
    pub reason: String,
}

/// What the builder could not place, and why.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct OntologyReport {
    pub ambiguous_terms: Vec<AmbiguousLabel>,
    pub warnings: Vec<String>,
    pub dropped_generic_edges: Vec<EdgeNote>,
    pub collapsed_edges: Vec<EdgeNote>,
    pub text_resolved_candidates: usize,
    pub text_links: usize,
    pub dropped_candidates: Vec<CandidateNote>,
    pub unlinked_qualifiers: Vec<CandidateNote>,
    pub spatial_within_edges: usize,
    pub spatial_near_edges: usize,
}

/// Identity of a gazetteer entry, coordinates compared bitwise.
type PlaceKey = (String, String, String, u64, u64);

fn place_key(e: &GazetteerEntry) -> PlaceKey {
    (
        e.name.clone(),
        e.admin.clone(),
        e.feature_class.as_str().to_string(),
        e.lon.to_bits(),
        e.lat.to_bits(),
    )
}

/// An ontology under construction, with the bookkeeping needed to map term
/// nodes and text candidates onto entities.
#[derive(Debug, Clone)]
pub struct OntologyDraft {
    pub ontology: Ontology,
    /// Term-graph node id → entity id.
    pub term_map: BTreeMap<String, String>,
    pub report: OntologyReport,
    ids: IdAllocator,
    places: BTreeMap<PlaceKey, String>,
    text_concepts: BTreeMap<String, String>,
}

impl Default for OntologyDraft {
    fn default() -> Self {
        let mut ids = IdAllocator::default();
        ids.reserve(ROOT_ID);
        OntologyDraft {
            ontology: Ontology::new(),
            term_map: BTreeMap::new(),
            report: OntologyReport::default(),
            ids,
            places: BTreeMap::new(),
            text_concepts: BTreeMap::new(),
        }
    }
}

impl OntologyDraft {
    fn ensure_root(&mut self, note: Option<String>) {
        if self.ontology.concept(ROOT_ID).is_none() {
            self.ontology
                .insert_concept(OntoConcept {
                    id: ROOT_ID.to_string(),
                    label: ROOT_LABEL.to_string(),
                    note: None,
                    origin: EntityOrigin::System,
                    temporal: false,
                    docs: BTreeSet::new(),
                })
                .expect("root id is reserved");
        }
        if let Some(note) = note {
            let root = self.ontology.concepts.get_mut(ROOT_ID).expect("just ensured");
            root.note.get_or_insert(note);
        }
    }

    fn add_concept(
        &mut self,
        base_id: &str,
        label: &str,
        note: Option<String>,
        origin: EntityOrigin,
        temporal: bool,
    ) -> String {
        let id = self.ids.allocate(base_id);
        self.ontology
            .insert_concept(OntoConcept {
                id: id.clone(),
                label: label.to_string(),
                note,
                origin,
                temporal,
                docs: BTreeSet::new(),
            })
            .expect("allocator hands out unique ids");
        id
    }

    /// Instance for `entry`, created with its root typing edge on first use.
    fn place(&mut self, entry: &GazetteerEntry, origin: EntityOrigin) -> String {
        let key = place_key(entry);
        if let Some(id) = self.places.get(&key) {
            let inst = self.ontology.instances.get_mut(id).expect("tracked place");
            if origin < inst.origin {
                inst.origin = origin;
            }
            return id.clone();
        }
        let id = self.ids.allocate(&slugify(&entry.name));
        self.ontology
            .insert_instance(OntoInstance {
                id: id.clone(),
                label: entry.name.clone(),
                entry: entry.clone(),
                docs: BTreeSet::new(),
                origin,
            })
            .expect("allocator hands out unique ids");
        self.places.insert(key, id.clone());
        self.ensure_root(None);
        self.ontology.insert_edge(OntoEdge {
            src: id.clone(),
            dst: ROOT_ID.to_string(),
            edge_type: OntoEdgeType::InstanceOf,
            provenance: Provenance::Gazetteer,
        });
        id
    }

    fn add_docs<'a>(&mut self, entity: &str, docs: impl IntoIterator<Item = &'a String>) {
        let docs = docs.into_iter().cloned();
        if let Some(inst) = self.ontology.instances.get_mut(entity) {
            inst.docs.extend(docs);
        } else if let Some(concept) = self.ontology.concepts.get_mut(entity) {
            concept.docs.extend(docs);
        }
    }

    pub fn finish(self) -> (Ontology, OntologyReport) {
        (self.ontology, self.report)
    }
}

fn entry_desc(e: &GazetteerEntry) -> String {
    if e.admin.is_empty() {
        format!("{} [{}]", e.name, e.feature_class)
    } else {
        format!("{} ({}) [{}]", e.name, e.admin, e.feature_class)
    }
}

/// Splits graph nodes into instances and concepts. Temporal nodes are never
/// handed to the resolver.
pub fn classify_terms(graph: &TerridocGraph, resolver: &dyn Resolve) -> OntologyDraft {
    let mut draft = OntologyDraft::default();
    let root_key = normalize_label(ROOT_LABEL);
    for node in graph.nodes.values() {
        let target = if node.temporal_flag {
            draft.add_concept(&node.id, &node.label, node.note.clone(), node.origin.into(), true)
        } else if normalize_label(&node.label) == root_key {
            draft.ensure_root(node.note.clone());
            ROOT_ID.to_string()
        } else {
            let m = resolver.resolve(&node.label);
            match m.status() {
                MatchStatus::Matched => {
                    let entry = m.matched().expect("matched has one entry");
                    draft.place(entry, node.origin.into())
                }
                status => {
                    if status == MatchStatus::Ambiguous {
                        draft.report.ambiguous_terms.push(AmbiguousLabel {
                            label: node.label.clone(),
                            candidates: m.entries().iter().map(entry_desc).collect(),
                        });
                    }
                    if parse_label_qualifier(&node.label).is_err() {
                        draft
                            .report
                            .warnings
                            .push(format!("label {:?} has malformed parentheses", node.label));
                    }
                    draft.add_concept(&node.id, &node.label, node.note.clone(), node.origin.into(), false)
                }
            }
        };
        draft.add_docs(&target, &node.docs);
        draft.term_map.insert(node.id.clone(), target);
    }
    draft
}

/// Containment by naming: `inner`'s admin area is `outer`'s name.
fn named_within(inner: &OntoInstance, outer: &OntoInstance) -> bool {
    let admin = normalize_label(&inner.entry.admin);
    if admin.is_empty() {
        return false;
    }
    let outer_base = parse_label_qualifier(&outer.entry.name)
        .map(|p| p.base)
        .unwrap_or_else(|_| outer.entry.name.clone());
    admin == normalize_label(&outer_base)
}

/// Carries every graph edge over to the ontology with thesaurus provenance,
/// retyping broader relations that start at an instance.
pub fn retype_edges(graph: &TerridocGraph, mut draft: OntologyDraft) -> OntologyDraft {
    for edge in &graph.edges {
        let (Some(src), Some(dst)) = (draft.term_map.get(&edge.src), draft.term_map.get(&edge.dst)) else {
            draft.report.collapsed_edges.push(EdgeNote {
                src: edge.src.clone(),
                dst: edge.dst.clone(),
                relation: edge.relation,
                reason: "endpoint was not classified".into(),
            });
            continue;
        };
        let (src, dst) = (src.clone(), dst.clone());
        let note = |reason: &str| EdgeNote {
            src: edge.src.clone(),
            dst: edge.dst.clone(),
            relation: edge.relation,
            reason: reason.to_string(),
        };
        if src == dst {
            draft
                .report
                .collapsed_edges
                .push(note("both terms map to the same entity"));
            continue;
        }
        let onto = &draft.ontology;
        let edge_type = match edge.relation {
            RelationType::Associated => OntoEdgeType::Associated,
            RelationType::UsedFor => OntoEdgeType::UsedFor,
            RelationType::Generic => match (onto.instance(&src), onto.instance(&dst)) {
                (Some(inner), Some(outer)) => {
                    if named_within(inner, outer) {
                        draft.report.warnings.push(format!(
                            "generic edge between places {src} -> {dst} kept as spatial_within"
                        ));
                        OntoEdgeType::SpatialWithin
                    } else {
                        draft
                            .report
                            .dropped_generic_edges
                            .push(note("generic edge between two places without containment"));
                        continue;
                    }
                }
                (Some(_), None) => OntoEdgeType::InstanceOf,
                _ => OntoEdgeType::SubclassGeneric,
            },
        };
        let added = draft.ontology.insert_edge(OntoEdge {
            src,
            dst,
            edge_type,
            provenance: Provenance::Thesaurus,
        });
        if !added {
            draft
                .report
                .collapsed_edges
                .push(note("duplicate after mapping terms to entities"));
        }
    }
    draft
}

/// Adds places found in notice text and links them to the concept their
/// qualifier named.
pub fn inject_text_links(
    linked: &[LinkedCandidate],
    resolver: &dyn Resolve,
    mut draft: OntologyDraft,
    policy: LinkPolicy,
) -> OntologyDraft {
    for lc in linked {
        let cand = &lc.candidate;
        let note = |reason: &str| CandidateNote {
            notice_id: cand.notice_id.clone(),
            proper_name: cand.proper_name.clone(),
            qualifier: cand.qualifier_np.clone(),
            pattern: cand.pattern_id,
            reason: reason.to_string(),
        };
        let m = resolver.resolve(&cand.proper_name);
        let entry = match m.status() {
            MatchStatus::Matched => m.matched().expect("matched has one entry"),
            MatchStatus::Ambiguous => {
                draft.report.dropped_candidates.push(note("ambiguous in gazetteer"));
                continue;
            }
            MatchStatus::Unmatched => {
                draft.report.dropped_candidates.push(note("not found in gazetteer"));
                continue;
            }
        };
        let instance = draft.place(entry, EntityOrigin::Text);
        draft.add_docs(&instance, [&cand.notice_id]);
        draft.report.text_resolved_candidates += 1;

        let Some(qualifier) = &cand.qualifier_np else { continue };
        let concept = match &lc.concept {
            Some(node) => match draft.term_map.get(node) {
                Some(id) if draft.ontology.kind(id) == Some(EntityKind::Concept) => Some(id.clone()),
                Some(_) => {
                    draft.report.unlinked_qualifiers.push(note("qualifier names a place"));
                    continue;
                }
                None => None,
            },
            None => None,
        };
        let concept = match (concept, policy) {
            (Some(id), _) => id,
            (None, LinkPolicy::Create) => {
                let key = normalize_label(qualifier);
                match draft.text_concepts.get(&key) {
                    Some(id) => id.clone(),
                    None => {
                        let id = draft.add_concept(&slugify(qualifier), qualifier, None, EntityOrigin::Text, false);
                        draft.text_concepts.insert(key, id.clone());
                        id
                    }
                }
            }
            (None, LinkPolicy::Existing) => {
                draft
                    .report
                    .unlinked_qualifiers
                    .push(note("no concept matches the qualifier"));
                continue;
            }
        };
        if draft.ontology.insert_edge(OntoEdge {
            src: concept,
            dst: instance,
            edge_type: OntoEdgeType::InstanceOf,
            provenance: Provenance::Text(cand.notice_id.clone()),
        }) {
            draft.report.text_links += 1;
        }
    }
    draft
}

/// Adds `spatial_within` (containment by admin naming) and `spatial_near`
/// (great-circle distance at most `near_km`, no containment either way)
/// between instances. Returns the number of edges of each kind added.
pub fn derive_spatial_relations(mut ontology: Ontology, near_km: f64) -> (Ontology, usize, usize) {
    let instances: Vec<OntoInstance> = ontology.instances().cloned().collect();
    let mut within = 0;
    for a in &instances {
        for b in &instances {
            if a.id != b.id && named_within(a, b) {
                within += usize::from(ontology.insert_edge(OntoEdge {
                    src: a.id.clone(),
                    dst: b.id.clone(),
                    edge_type: OntoEdgeType::SpatialWithin,
                    provenance: Provenance::Geometry,
                }));
            }
        }
    }
    let mut near = 0;
    for (i, a) in instances.iter().enumerate() {
        for b in &instances[i + 1..] {
            let contained = ontology.has_edge(&a.id, &b.id, OntoEdgeType::SpatialWithin)
                || ontology.has_edge(&b.id, &a.id, OntoEdgeType::SpatialWithin);
            if contained || a.entry.distance_km(&b.entry) > near_km {
                continue;
            }
            // Symmetric: stored once, lower id first.
            near += usize::from(ontology.insert_edge(OntoEdge {
                src: a.id.clone(),
                dst: b.id.clone(),
                edge_type: OntoEdgeType::SpatialNear,
                provenance: Provenance::Geometry,
            }));
        }
    }
    (ontology, within, near)
}
