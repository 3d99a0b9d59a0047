//! Reconstructs a library's subject indexing as a typed term graph and turns
//! it into a lightweight territory ontology.
//!
//! The stages, in pipeline order:
//!
//! 1. [`notice`] parses descriptive records and splits their subject headings.
//! 2. [`thesaurus`] loads the authority thesaurus used for enrichment.
//! 3. [`graph`] builds the term graph from corpus terms and thesaurus relations.
//! 4. [`spatial`] resolves labels against a gazetteer.
//! 5. [`patterns`] mines titles and legends for qualified place names.
//! 6. [`ontology`] types places as instances, the rest as concepts.
//! 7. [`export`] writes JSON, Turtle and DOT.
//!
//! [`pipeline`] runs all of the above from files.

pub mod error;
pub mod graph;
pub mod notice;
mod slug;
pub mod thesaurus;

pub use error::{Error, Result};
pub use graph::{build_graph, enrich, extract_corpus_terms, graph_stats, TerridocGraph};
pub use notice::{parse_notices, split_heading, Notice, SubjectHeading};
pub use slug::slugify;
pub use thesaurus::{load_thesaurus, normalize_label, Thesaurus, ThesaurusRecord};
pub mod export;
pub mod ontology;
pub mod patterns;
pub mod pipeline;
pub mod spatial;

pub use export::{export_dot, export_json, export_turtle, import_json, JsonGraphDocument};
pub use ontology::{LinkPolicy, OntoEdgeType, Ontology, Provenance};
pub use pipeline::{build, run_build, BuildOptions, BuildOutput, PipelineConfig, Source};
pub use spatial::{load_gazetteer, Gazetteer, GazetteerEntry, SpatialResolver};
