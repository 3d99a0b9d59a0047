//! End-to-end build from input files, plus the helpers behind the `export`
//! and `stats` commands.
//!
//! [`build`] is pure: it takes file contents and returns the four output
//! documents. [`run_build`] adds reading and writing.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::export::{export_dot, export_json, export_turtle, import_json};
use crate::graph::{build_graph, graph_stats, GraphStats, TerridocGraph};
use crate::notice::{parse_notices, Notice};
use crate::ontology::{
    classify_terms, derive_spatial_relations, inject_text_links, retype_edges, LinkPolicy, OntoEdgeType, Ontology,
    OntologyReport, Provenance, DEFAULT_NEAR_KM,
};
use crate::patterns::{extract_all, link_qualifiers, Lexicon};
use crate::spatial::{load_gazetteer, SpatialResolver};
use crate::thesaurus::load_thesaurus;

pub const JSON_FILE: &str = "terridoc.json";
pub const TURTLE_FILE: &str = "ontology.ttl";
pub const DOT_FILE: &str = "graph.dot";
pub const REPORT_FILE: &str = "report.json";

/// Flags that shape the build, independent of where inputs come from.
#[derive(Debug, Clone, PartialEq)]
pub struct BuildOptions {
    pub spatial_relations: bool,
    pub near_km: f64,
    pub link_policy: LinkPolicy,
    /// Qualifiers accepted for gazetteer rows with an empty admin field.
    pub countries: Vec<String>,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            spatial_relations: false,
            near_km: DEFAULT_NEAR_KM,
            link_policy: LinkPolicy::Existing,
            countries: vec!["France".to_string()],
        }
    }
}

impl BuildOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.near_km.is_finite() && self.near_km > 0.0) {
            return Err(Error::validation(format!(
                "near-km must be positive, got {}",
                self.near_km
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// One or more notice files, concatenated in the given order.
    pub notices_paths: Vec<PathBuf>,
    pub thesaurus_path: PathBuf,
    pub gazetteer_path: PathBuf,
    pub out_dir: PathBuf,
    /// Directory holding `det.txt`, `prep.txt` and `cc.txt`; built-in lists when absent.
    pub lexicon_dir: Option<PathBuf>,
    pub options: BuildOptions,
}

impl PipelineConfig {
    pub fn new(
        notices_path: impl Into<PathBuf>,
        thesaurus_path: impl Into<PathBuf>,
        gazetteer_path: impl Into<PathBuf>,
        out_dir: impl Into<PathBuf>,
    ) -> Self {
        PipelineConfig {
            notices_paths: vec![notices_path.into()],
            thesaurus_path: thesaurus_path.into(),
            gazetteer_path: gazetteer_path.into(),
            out_dir: out_dir.into(),
            lexicon_dir: None,
            options: BuildOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let empty = |p: &Path| p.as_os_str().is_empty();
        if self.notices_paths.is_empty() || self.notices_paths.iter().any(|p| empty(p)) {
            return Err(Error::validation("notices path is empty"));
        }
        for (name, p) in [
            ("thesaurus", &self.thesaurus_path),
            ("gazetteer", &self.gazetteer_path),
            ("output directory", &self.out_dir),
        ] {
            if empty(p) {
                return Err(Error::validation(format!("{name} path is empty")));
            }
        }
        if self.lexicon_dir.as_deref().is_some_and(empty) {
            return Err(Error::validation("lexicon directory path is empty"));
        }
        self.options.validate()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OntologyCounts {
    pub concepts: usize,
    pub temporal_concepts: usize,
    pub instances: usize,
    pub edges: usize,
    pub edges_by_type: BTreeMap<OntoEdgeType, usize>,
    pub thesaurus_edges: usize,
}

impl OntologyCounts {
    pub fn of(o: &Ontology) -> Self {
        let mut counts = OntologyCounts {
            concepts: o.concepts().count(),
            temporal_concepts: o.concepts().filter(|c| c.temporal).count(),
            instances: o.instances().count(),
            ..Default::default()
        };
        for e in o.edges() {
            counts.edges += 1;
            *counts.edges_by_type.entry(e.edge_type).or_default() += 1;
            if e.provenance == Provenance::Thesaurus {
                counts.thesaurus_edges += 1;
            }
        }
        counts
    }
}

/// Contents of `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildReport {
    pub graph: GraphStats,
    pub graph_edges: usize,
    pub ontology: OntologyCounts,
    /// Corpus labels with no thesaurus record.
    pub unmatched_terms: Vec<String>,
    pub candidates: usize,
    pub details: OntologyReport,
}

#[derive(Debug, Clone)]
pub struct BuildOutput {
    pub notices: Vec<Notice>,
    pub graph: TerridocGraph,
    pub ontology: Ontology,
    pub report: BuildReport,
}

impl BuildOutput {
    /// The four output documents as `(file name, contents)`.
    pub fn documents(&self) -> [(&'static str, String); 4] {
        let mut report = serde_json::to_string_pretty(&self.report).expect("report serializes");
        report.push('\n');
        [
            (JSON_FILE, export_json(&self.ontology)),
            (TURTLE_FILE, export_turtle(&self.ontology)),
            (DOT_FILE, export_dot(&self.ontology)),
            (REPORT_FILE, report),
        ]
    }
}

/// An input document and the name used in error messages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Source {
    pub name: String,
    pub text: String,
}

impl Source {
    pub fn new(name: impl Into<String>, text: impl Into<String>) -> Self {
        Source {
            name: name.into(),
            text: text.into(),
        }
    }

    fn context(&self) -> impl Fn(Error) -> Error + '_ {
        |e| e.in_file(Path::new(&self.name))
    }
}

/// Runs every stage on in-memory inputs. Notice ids must be unique across
/// all notice sources.
pub fn build(
    notice_sources: &[Source],
    thesaurus: &Source,
    gazetteer: &Source,
    lexicon: &Lexicon,
    options: &BuildOptions,
) -> Result<BuildOutput> {
    options.validate()?;
    let mut notices = Vec::new();
    let mut seen = BTreeSet::new();
    for source in notice_sources {
        let in_file = source.context();
        for notice in parse_notices(&source.text).map_err(&in_file)? {
            if !seen.insert(notice.id.clone()) {
                return Err(in_file(Error::validation(format!(
                    "duplicate notice id {:?}",
                    notice.id
                ))));
            }
            notices.push(notice);
        }
    }
    let thesaurus = load_thesaurus(&thesaurus.text).map_err(thesaurus.context())?;
    let gazetteer = load_gazetteer(&gazetteer.text).map_err(gazetteer.context())?;
    let resolver = SpatialResolver::with_countries(gazetteer, &options.countries);

    let graph = build_graph(&notices, &thesaurus);
    let candidates = extract_all(&notices, lexicon);
    let linked = link_qualifiers(&candidates, &graph);

    let draft = classify_terms(&graph, &resolver);
    let draft = retype_edges(&graph, draft);
    let draft = inject_text_links(&linked, &resolver, draft, options.link_policy);
    let (mut ontology, mut details) = draft.finish();
    if options.spatial_relations {
        let (o, within, near) = derive_spatial_relations(ontology, options.near_km);
        ontology = o;
        details.spatial_within_edges = within;
        details.spatial_near_edges = near;
    }
    ontology.validate()?;

    let report = BuildReport {
        graph: graph_stats(&graph),
        graph_edges: graph.edges.len(),
        ontology: OntologyCounts::of(&ontology),
        unmatched_terms: graph.unmatched.clone(),
        candidates: candidates.len(),
        details,
    };
    Ok(BuildOutput {
        notices,
        graph,
        ontology,
        report,
    })
}

/// Reads an input file. A missing file is an input problem, not an
/// environment one.
fn read_input(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => Error::validation(format!("input file not found: {}", path.display())),
        io::ErrorKind::InvalidData => Error::validation(format!("input file is not UTF-8: {}", path.display())),
        _ => Error::Io {
            path: path.display().to_string(),
            source: e,
        },
    })
}

fn write_output(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.display().to_string(),
        source: e,
    })
}

/// Reads the inputs, builds, and writes the four output files into
/// `out_dir` (created if needed).
pub fn run_build(cfg: &PipelineConfig) -> Result<BuildOutput> {
    cfg.validate()?;
    let read = |p: &Path| Ok::<_, Error>(Source::new(p.display().to_string(), read_input(p)?));
    let notices = cfg.notices_paths.iter().map(|p| read(p)).collect::<Result<Vec<_>>>()?;
    let thesaurus = read(&cfg.thesaurus_path)?;
    let gazetteer = read(&cfg.gazetteer_path)?;
    let lexicon = match &cfg.lexicon_dir {
        Some(dir) => Lexicon::from_dir(dir)?,
        None => Lexicon::default(),
    };
    let out = build(&notices, &thesaurus, &gazetteer, &lexicon, &cfg.options)?;
    create_dir(&cfg.out_dir)?;
    for (name, contents) in out.documents() {
        write_output(&cfg.out_dir.join(name), &contents)?;
    }
    Ok(out)
}

/// Loads a `terridoc.json` and checks it.
pub fn load_ontology(path: &Path) -> Result<Ontology> {
    import_json(&read_input(path)?).map_err(|e| e.in_file(path))
}

/// Re-serializes an existing JSON graph as Turtle and DOT into `out_dir`.
/// Returns the paths written.
pub fn run_export(json_path: &Path, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let ontology = load_ontology(json_path)?;
    create_dir(out_dir)?;
    let mut written = Vec::new();
    for (name, contents) in [
        (TURTLE_FILE, export_turtle(&ontology)),
        (DOT_FILE, export_dot(&ontology)),
    ] {
        let path = out_dir.join(name);
        write_output(&path, &contents)?;
        written.push(path);
    }
    Ok(written)
}

pub fn run_stats(json_path: &Path) -> Result<OntologyCounts> {
    Ok(OntologyCounts::of(&load_ontology(json_path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    const NOTICES: &str = r#"<NOTICES><NOTICE id="n1">
<DEE>Eaux minérales -- Bigorre</DEE>
<TITRE>Traité des eaux minérales de Bigorre</TITRE>
</NOTICE></NOTICES>"#;
    const THESAURUS: &str = r#"{"id": "t1", "pref": "Eaux minérales"}"#;
    const GAZETTEER: &str = "name,admin,class,lon,lat\nBigorre,,région,0.15,43.1\n";

    fn run(notices: &[(&str, &str)], options: &BuildOptions) -> Result<BuildOutput> {
        let sources: Vec<Source> = notices.iter().map(|(a, b)| Source::new(*a, *b)).collect();
        build(
            &sources,
            &Source::new("t.jsonl", THESAURUS),
            &Source::new("g.csv", GAZETTEER),
            &Lexicon::default(),
            options,
        )
    }

    #[test]
    fn small_build() {
        let out = run(&[("a.xml", NOTICES)], &BuildOptions::default()).unwrap();
        assert!(out.ontology.instance("bigorre").is_some());
        assert!(out
            .ontology
            .has_edge("eaux_minerales", "bigorre", OntoEdgeType::InstanceOf));
        assert_eq!(out.report.graph.corpus_nodes, 2);
        assert_eq!(out.report.unmatched_terms, ["Bigorre"]);
        assert_eq!(out.report.details.text_links, 1);
        assert_eq!(out.report.ontology.instances, 1);
    }

    #[test]
    fn duplicate_notice_ids_across_files() {
        let err = run(&[("a.xml", NOTICES), ("b.xml", NOTICES)], &BuildOptions::default()).unwrap_err();
        let msg = err.to_string();
        assert!(
            msg.starts_with("b.xml: ") && msg.contains("duplicate notice id"),
            "{msg}"
        );
        assert!(err.is_input_error());
    }

    #[test]
    fn near_km_must_be_positive() {
        for bad in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            let options = BuildOptions {
                near_km: bad,
                ..Default::default()
            };
            assert!(matches!(
                run(&[("a.xml", NOTICES)], &options),
                Err(Error::Validation(_))
            ));
        }
    }

    #[test]
    fn config_rejects_empty_paths() {
        let cfg = PipelineConfig::new("n.xml", "", "g.csv", "out");
        assert!(cfg.validate().is_err());
        assert!(PipelineConfig::new("n.xml", "t.jsonl", "g.csv", "out")
            .validate()
            .is_ok());
    }

    #[test]
    fn counts() {
        let out = run(&[("a.xml", NOTICES)], &BuildOptions::default()).unwrap();
        let c = &out.report.ontology;
        assert_eq!(c.edges, c.edges_by_type.values().sum::<usize>());
        assert_eq!(c.edges_by_type[&OntoEdgeType::InstanceOf], 2);
    }
}
