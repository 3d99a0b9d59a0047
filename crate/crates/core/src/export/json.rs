use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ontology::{EntityOrigin, OntoConcept, OntoEdge, OntoEdgeType, OntoInstance, Ontology, Provenance};
use crate::spatial::GazetteerEntry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Concept,
    Instance,
    Temporal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonNode {
    pub id: String,
    pub label: String,
    pub kind: NodeKind,
    pub origin: EntityOrigin,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(default)]
    pub docs: Vec<String>,
    /// Gazetteer entry; present exactly for instances.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entry: Option<GazetteerEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JsonEdge {
    pub src: String,
    pub dst: String,
    #[serde(rename = "type")]
    pub edge_type: OntoEdgeType,
    pub prov: Provenance,
}

/// The navigation payload: nodes sorted by id, edges by `(src, dst, type)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonGraphDocument {
    pub nodes: Vec<JsonNode>,
    pub edges: Vec<JsonEdge>,
}

impl From<&Ontology> for JsonGraphDocument {
    fn from(o: &Ontology) -> Self {
        let mut nodes: Vec<JsonNode> = o
            .concepts()
            .map(|c| JsonNode {
                id: c.id.clone(),
                label: c.label.clone(),
                kind: if c.temporal {
                    NodeKind::Temporal
                } else {
                    NodeKind::Concept
                },
                origin: c.origin,
                note: c.note.clone(),
                docs: c.docs.iter().cloned().collect(),
                entry: None,
            })
            .chain(o.instances().map(|i| JsonNode {
                id: i.id.clone(),
                label: i.label.clone(),
                kind: NodeKind::Instance,
                origin: i.origin,
                note: None,
                docs: i.docs.iter().cloned().collect(),
                entry: Some(i.entry.clone()),
            }))
            .collect();
        nodes.sort_by(|a, b| a.id.cmp(&b.id));
        let edges = o
            .edges()
            .map(|e| JsonEdge {
                src: e.src,
                dst: e.dst,
                edge_type: e.edge_type,
                prov: e.provenance,
            })
            .collect();
        JsonGraphDocument { nodes, edges }
    }
}

pub fn export_json(o: &Ontology) -> String {
    let doc = JsonGraphDocument::from(o);
    let mut out = serde_json::to_string_pretty(&doc).expect("document serializes");
    out.push('\n');
    out
}

fn schema(path: String, message: impl Into<String>) -> Error {
    Error::Schema {
        path,
        message: message.into(),
    }
}

pub fn import_json(text: &str) -> Result<Ontology> {
    let mut de = serde_json::Deserializer::from_str(text);
    let doc: JsonGraphDocument = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        schema(path, e.into_inner().to_string())
    })?;
    de.end().map_err(|e| schema(".".into(), e.to_string()))?;

    let mut o = Ontology::new();
    for (i, node) in doc.nodes.into_iter().enumerate() {
        let docs: BTreeSet<String> = node.docs.into_iter().collect();
        let dup = |id: &str| Error::validation(format!("nodes[{i}].id: duplicate id {id:?}"));
        match (node.kind, node.entry) {
            (NodeKind::Instance, Some(entry)) => {
                if node.note.is_some() {
                    return Err(schema(format!("nodes[{i}].note"), "instances carry no note"));
                }
                let entry = GazetteerEntry::new(&entry.name, &entry.admin, entry.feature_class, entry.lon, entry.lat)
                    .map_err(|e| schema(format!("nodes[{i}].entry"), e.to_string()))?;
                o.insert_instance(OntoInstance {
                    id: node.id.clone(),
                    label: node.label,
                    entry,
                    docs,
                    origin: node.origin,
                })
                .map_err(|_| dup(&node.id))?;
            }
            (NodeKind::Instance, None) => {
                return Err(schema(format!("nodes[{i}].entry"), "instance without gazetteer entry"));
            }
            (_, Some(_)) => {
                return Err(schema(format!("nodes[{i}].entry"), "only instances carry an entry"));
            }
            (kind, None) => {
                o.insert_concept(OntoConcept {
                    id: node.id.clone(),
                    label: node.label,
                    note: node.note,
                    origin: node.origin,
                    temporal: kind == NodeKind::Temporal,
                    docs,
                })
                .map_err(|_| dup(&node.id))?;
            }
        }
    }
    for (i, edge) in doc.edges.into_iter().enumerate() {
        for (field, id) in [("src", &edge.src), ("dst", &edge.dst)] {
            if o.kind(id).is_none() {
                return Err(Error::validation(format!("edges[{i}].{field}: unknown node {id:?}")));
            }
        }
        let added = o.insert_edge(OntoEdge {
            src: edge.src,
            dst: edge.dst,
            edge_type: edge.edge_type,
            provenance: edge.prov,
        });
        if !added {
            return Err(Error::validation(format!("edges[{i}]: duplicate (src, dst, type)")));
        }
    }
    o.validate()?;
    Ok(o)
}
