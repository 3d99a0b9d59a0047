//! Serializers for the ontology: canonical JSON (with import), Turtle, DOT.
//!
//! All three are pure functions of the ontology value: UTF-8, LF line
//! endings, entities sorted by id and edges by `(src, dst, type)`.

mod dot;
mod json;
mod turtle;

pub use dot::export_dot;
pub use json::{export_json, import_json, JsonEdge, JsonGraphDocument, JsonNode, NodeKind};
pub use turtle::{export_turtle, NAMESPACE};
