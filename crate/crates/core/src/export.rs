//! Result graphs as JSON, Graphviz DOT or plain text tables.

use std::fmt::Write;
use std::str::FromStr;

use crate::graph::{Id, PathPropertyGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Dot,
    Table,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "dot" => Ok(Format::Dot),
            "table" => Ok(Format::Table),
            other => Err(format!("unknown format {other}; expected json, dot or table")),
        }
    }
}

pub fn export(g: &PathPropertyGraph, format: Format) -> String {
    match format {
        Format::Json => crate::catalog::json::encode(g),
        Format::Dot => to_dot(g),
        Format::Table => to_table(g),
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\"").replace('\n', "\\n"))
}

fn labels(g: &PathPropertyGraph, id: &Id) -> String {
    g.labels(id).iter().map(|l| format!(":{l}")).collect()
}

fn props(g: &PathPropertyGraph, id: &Id) -> Vec<String> {
    g.properties(id)
        .map(|(k, vs)| {
            let shown: Vec<String> = vs.iter().map(ToString::to_string).collect();
            if shown.len() == 1 {
                format!("{k}={}", shown[0])
            } else {
                format!("{k}={{{}}}", shown.join(", "))
            }
        })
        .collect()
}

fn caption(g: &PathPropertyGraph, id: &Id) -> String {
    let mut lines = vec![format!("{}{}", id.name(), labels(g, id))];
    lines.extend(props(g, id));
    lines.join("\n")
}

/// Nodes and edges as a digraph; every stored path becomes a cluster of
/// its nodes with the path's caption.
pub fn to_dot(g: &PathPropertyGraph) -> String {
    let mut out = String::from("digraph G {\n  node [shape=box];\n");
    for n in g.nodes() {
        let _ = writeln!(out, "  {} [label={}];", quote(n.name()), quote(&caption(g, n)));
    }
    for (e, s, t) in g.edges() {
        let _ = writeln!(out, "  {} -> {} [label={}];", quote(s.name()), quote(t.name()), quote(&caption(g, e)));
    }
    for (i, (p, body)) in g.paths().enumerate() {
        let _ = writeln!(out, "  subgraph cluster_{i} {{");
        let hops: Vec<&str> = body.iter().skip(1).step_by(2).map(Id::name).collect();
        let label = format!("@{}\nedges: {}", caption(g, p), hops.join(" "));
        let _ = writeln!(out, "    label={};\n    style=dashed;", quote(&label));
        for n in body.iter().step_by(2) {
            let _ = writeln!(out, "    {};", quote(n.name()));
        }
        out.push_str("  }\n");
    }
    out.push_str("}\n");
    out
}

fn table(header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in &rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        padded.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(header.to_vec());
    for r in &rows {
        out += &line(r.iter().map(String::as_str).collect());
    }
    out
}

/// One aligned table per kind of object.
pub fn to_table(g: &PathPropertyGraph) -> String {
    let nodes = g.nodes().map(|n| vec![n.name().to_string(), labels(g, n), props(g, n).join(", ")]).collect();
    let edges = g
        .edges()
        .map(|(e, s, t)| {
            vec![e.name().to_string(), s.name().into(), t.name().into(), labels(g, e), props(g, e).join(", ")]
        })
        .collect();
    let paths = g
        .paths()
        .map(|(p, body)| {
            let b: Vec<&str> = body.iter().map(Id::name).collect();
            vec![p.name().to_string(), b.join(" "), labels(g, p), props(g, p).join(", ")]
        })
        .collect();
    let mut out = format!("nodes ({})\n", g.node_count());
    out += &table(&["id", "labels", "properties"], nodes);
    out += &format!("\nedges ({})\n", g.edge_count());
    out += &table(&["id", "from", "to", "labels", "properties"], edges);
    out += &format!("\npaths ({})\n", g.path_count());
    out += &table(&["id", "body", "labels", "properties"], paths);
    out
}
