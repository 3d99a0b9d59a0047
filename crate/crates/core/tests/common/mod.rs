#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::Rng;
use terridoc::ontology::{
    EntityOrigin, OntoConcept, OntoEdge, OntoEdgeType, OntoInstance, Ontology, Provenance, ROOT_ID, ROOT_LABEL,
};
use terridoc::spatial::{FeatureClass, GazetteerEntry};

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(rel)
}

pub fn read_fixture(rel: &str) -> String {
    std::fs::read_to_string(fixture(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

pub fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// `<NOTICES>` document with one notice per heading list.
pub fn notices_xml(notices: &[(String, Vec<Vec<String>>)]) -> String {
    let mut xml = String::from("<NOTICES>\n");
    for (id, headings) in notices {
        xml.push_str(&format!("<NOTICE id=\"{id}\">\n"));
        for h in headings {
            xml.push_str(&format!("<DEE>{}</DEE>\n", xml_escape(&h.join(" -- "))));
        }
        xml.push_str("</NOTICE>\n");
    }
    xml.push_str("</NOTICES>\n");
    xml
}

#[derive(Debug, Clone)]
pub struct GenRecord {
    pub id: String,
    pub pref: String,
    pub uf: Vec<String>,
    pub tg: Vec<usize>,
    pub ta: Vec<usize>,
}

/// Random acyclic thesaurus: broader links only point to lower indices.
/// Labels are unique after normalization.
pub fn random_thesaurus(rng: &mut impl Rng, n: usize) -> Vec<GenRecord> {
    let mut numbers: Vec<usize> = (0..n).collect();
    numbers.shuffle(rng);
    (0..n)
        .map(|i| {
            let tg: BTreeSet<usize> = if i == 0 {
                BTreeSet::new()
            } else {
                (0..rng.random_range(0..=3usize))
                    .map(|_| rng.random_range(0..i))
                    .collect()
            };
            let ta: BTreeSet<usize> = (0..rng.random_range(0..=2usize))
                .map(|_| rng.random_range(0..n))
                .filter(|&j| j != i)
                .collect();
            let uf = (0..rng.random_range(0..=2usize))
                .map(|k| format!("Variante {i}-{k}"))
                .collect();
            GenRecord {
                id: format!("r{i:03}"),
                pref: format!("Terme {}", numbers[i]),
                uf,
                tg: tg.into_iter().collect(),
                ta: ta.into_iter().collect(),
            }
        })
        .collect()
}

pub fn thesaurus_jsonl(records: &[GenRecord]) -> String {
    let mut lines: Vec<String> = records
        .iter()
        .map(|r| {
            serde_json::json!({
                "id": r.id,
                "pref": r.pref,
                "uf": r.uf,
                "tg": r.tg.iter().map(|&j| records[j].id.clone()).collect::<Vec<_>>(),
                "ta": r.ta.iter().map(|&j| records[j].id.clone()).collect::<Vec<_>>(),
            })
            .to_string()
        })
        .collect();
    lines.reverse();
    lines.join("\n")
}

const CLASSES: [&str; 7] = ["commune", "lieu-dit", "route", "pic", "vallée", "région", "autre"];
const LABEL_BITS: [&str; 8] = [
    "Eaux",
    "minérales",
    "Barèges",
    "\"cité\"",
    "l'Adour",
    "a\\b",
    "Œuvre",
    "x\ny",
];

fn random_label(rng: &mut impl Rng) -> String {
    let n = rng.random_range(1..=3);
    (0..n)
        .map(|_| LABEL_BITS[rng.random_range(0..LABEL_BITS.len())])
        .collect::<Vec<_>>()
        .join(" ")
}

fn random_origin(rng: &mut impl Rng) -> EntityOrigin {
    [EntityOrigin::Corpus, EntityOrigin::Enrichment, EntityOrigin::Text][rng.random_range(0..3)]
}

fn random_docs(rng: &mut impl Rng) -> BTreeSet<String> {
    (0..rng.random_range(0..=3))
        .map(|_| format!("n{}", rng.random_range(0..5)))
        .collect()
}

/// Random ontology satisfying the structural invariants.
pub fn random_ontology(rng: &mut impl Rng) -> Ontology {
    let mut o = Ontology::new();
    let nc = rng.random_range(0..=8);
    let ni = rng.random_range(0..=5);
    let mut concepts = Vec::new();
    let mut instances = Vec::new();
    if ni > 0 || rng.random_bool(0.5) {
        o.insert_concept(OntoConcept {
            id: ROOT_ID.into(),
            label: ROOT_LABEL.into(),
            note: None,
            origin: EntityOrigin::System,
            temporal: false,
            docs: BTreeSet::new(),
        })
        .unwrap();
        concepts.push(ROOT_ID.to_string());
    }
    for i in 0..nc {
        let id = format!("c{i}");
        o.insert_concept(OntoConcept {
            id: id.clone(),
            label: random_label(rng),
            note: rng.random_bool(0.3).then(|| random_label(rng)),
            origin: random_origin(rng),
            temporal: rng.random_bool(0.2),
            docs: random_docs(rng),
        })
        .unwrap();
        concepts.push(id);
    }
    for i in 0..ni {
        let id = format!("i{i}");
        let class: FeatureClass = CLASSES[rng.random_range(0..CLASSES.len())].parse().unwrap();
        let admin = if rng.random_bool(0.5) {
            String::new()
        } else {
            random_label(rng).replace('\n', " ")
        };
        let entry = GazetteerEntry::new(
            &random_label(rng).replace('\n', " "),
            &admin,
            class,
            rng.random_range(-180.0..=180.0),
            rng.random_range(-90.0..=90.0),
        )
        .unwrap();
        o.insert_instance(OntoInstance {
            id: id.clone(),
            label: entry.name.clone(),
            entry,
            docs: random_docs(rng),
            origin: random_origin(rng),
        })
        .unwrap();
        o.insert_edge(OntoEdge {
            src: id.clone(),
            dst: ROOT_ID.into(),
            edge_type: OntoEdgeType::InstanceOf,
            provenance: Provenance::Gazetteer,
        });
        instances.push(id);
    }
    let pick = |rng: &mut dyn rand::RngCore, v: &[String]| v[rng.random_range(0..v.len())].clone();
    for _ in 0..rng.random_range(0..=15) {
        let edge = match rng.random_range(0..5) {
            0..=2 if concepts.len() >= 2 => {
                let (s, d) = (pick(rng, &concepts), pick(rng, &concepts));
                let t = [
                    OntoEdgeType::SubclassGeneric,
                    OntoEdgeType::Associated,
                    OntoEdgeType::UsedFor,
                ][rng.random_range(0..3)];
                (s, d, t, Provenance::Thesaurus)
            }
            3 if !concepts.is_empty() && !instances.is_empty() => {
                let (c, i) = (pick(rng, &concepts), pick(rng, &instances));
                if rng.random_bool(0.5) {
                    (i, c, OntoEdgeType::InstanceOf, Provenance::Thesaurus)
                } else {
                    (
                        c,
                        i,
                        OntoEdgeType::InstanceOf,
                        Provenance::Text(format!("n{}", rng.random_range(0..5))),
                    )
                }
            }
            4 if instances.len() >= 2 => {
                let (a, b) = (pick(rng, &instances), pick(rng, &instances));
                let t = if rng.random_bool(0.5) {
                    OntoEdgeType::SpatialWithin
                } else {
                    OntoEdgeType::SpatialNear
                };
                (a, b, t, Provenance::Geometry)
            }
            _ => continue,
        };
        let (src, dst, edge_type, provenance) = edge;
        if src != dst {
            o.insert_edge(OntoEdge {
                src,
                dst,
                edge_type,
                provenance,
            });
        }
    }
    o.validate().expect("generator keeps invariants");
    o
}
