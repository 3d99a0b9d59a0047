use std::fmt::Write;

use crate::ontology::Ontology;

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Graphviz digraph: concepts are boxes, instances ellipses, temporal
/// concepts dashed. Edges are labelled with their type.
pub fn export_dot(o: &Ontology) -> String {
    let mut out = String::from("digraph terridoc {\n");
    let mut nodes: Vec<(&str, String)> = o
        .concepts()
        .map(|c| {
            let style = if c.temporal { ", style=dashed" } else { "" };
            (c.id.as_str(), format!("label={}, shape=box{style}", quote(&c.label)))
        })
        .chain(
            o.instances()
                .map(|i| (i.id.as_str(), format!("label={}, shape=ellipse", quote(&i.label)))),
        )
        .collect();
    nodes.sort();
    for (id, attrs) in nodes {
        let _ = writeln!(out, "  {} [{attrs}];", quote(id));
    }
    for e in o.edges() {
        let _ = writeln!(
            out,
            "  {} -> {} [label={}];",
            quote(&e.src),
            quote(&e.dst),
            quote(e.edge_type.as_str())
        );
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty() {
        assert_eq!(export_dot(&Ontology::new()), "digraph terridoc {\n}\n");
    }

    #[test]
    fn quoting() {
        assert_eq!(quote(r#"a "b" \c"#), r#""a \"b\" \\c""#);
    }
}
