use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use crate::ontology::{OntoEdgeType, Ontology, Provenance, ROOT_ID};

pub const NAMESPACE: &str = "http://example.org/terridoc#";

/// Class of gazetteer-validated places.
const CLASS: &str = "EntiteSpatiale";

/// `trd:<id>` when the id is a plain local name, a full IRI otherwise.
fn term(id: &str) -> String {
    let plain = !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') && !id.ends_with('_');
    if plain {
        return format!("trd:{id}");
    }
    let mut iri = String::from(NAMESPACE);
    for b in id.bytes() {
        if b.is_ascii_alphanumeric() || b"-._~".contains(&b) {
            iri.push(b as char);
        } else {
            let _ = write!(iri, "%{b:02X}");
        }
    }
    format!("<{iri}>")
}

fn literal(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn fr(s: &str) -> String {
    format!("{}@fr", literal(s))
}

/// SKOS rendering: concepts are `skos:Concept`, gazetteer typing is
/// `rdf:type trd:EntiteSpatiale`, other `instance_of` edges are the plain
/// property `trd:instance_of`, spatial relations use `trd:within` and
/// `trd:near`.
pub fn export_turtle(o: &Ontology) -> String {
    let mut subjects: BTreeMap<String, BTreeSet<(String, String)>> = BTreeMap::new();
    let mut add = |s: &str, p: &str, obj: String| {
        subjects.entry(term(s)).or_default().insert((p.to_string(), obj));
    };
    for c in o.concepts() {
        add(&c.id, "a", "skos:Concept".into());
        add(&c.id, "skos:prefLabel", fr(&c.label));
        if let Some(note) = &c.note {
            add(&c.id, "skos:note", fr(note));
        }
        if c.temporal {
            add(&c.id, "a", "trd:Temporal".into());
        }
    }
    for i in o.instances() {
        add(&i.id, "rdfs:label", fr(&i.label));
    }
    if o.instances().next().is_some() {
        add(CLASS, "a", "rdfs:Class".into());
        if let Some(root) = o.concept(ROOT_ID) {
            add(CLASS, "rdfs:label", fr(&root.label));
        }
    }
    for e in o.edges() {
        match e.edge_type {
            OntoEdgeType::SubclassGeneric => add(&e.src, "skos:broader", term(&e.dst)),
            OntoEdgeType::Associated => add(&e.src, "skos:related", term(&e.dst)),
            OntoEdgeType::UsedFor => {
                let label = o.concept(&e.dst).map(|c| c.label.as_str()).unwrap_or(&e.dst);
                add(&e.src, "skos:altLabel", fr(label));
            }
            OntoEdgeType::InstanceOf => {
                // Always stated on the instance, whichever way the edge points.
                let (inst, class) = if o.instance(&e.src).is_some() {
                    (&e.src, &e.dst)
                } else {
                    (&e.dst, &e.src)
                };
                if e.provenance == Provenance::Gazetteer && class == ROOT_ID {
                    add(inst, "a", term(CLASS));
                } else {
                    add(inst, "trd:instance_of", term(class));
                }
            }
            OntoEdgeType::SpatialWithin => add(&e.src, "trd:within", term(&e.dst)),
            OntoEdgeType::SpatialNear => add(&e.src, "trd:near", term(&e.dst)),
        }
    }

    let mut out = String::new();
    out.push_str("@prefix rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#> .\n");
    out.push_str("@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .\n");
    out.push_str("@prefix skos: <http://www.w3.org/2004/02/skos/core#> .\n");
    let _ = writeln!(out, "@prefix trd: <{NAMESPACE}> .");
    for (subject, pairs) in &subjects {
        out.push('\n');
        out.push_str(subject);
        let n = pairs.len();
        for (k, (p, obj)) in pairs.iter().enumerate() {
            let sep = if k + 1 == n { " ." } else { " ;" };
            if k == 0 {
                let _ = writeln!(out, " {p} {obj}{sep}");
            } else {
                let _ = writeln!(out, "    {p} {obj}{sep}");
            }
        }
    }
    out
}
