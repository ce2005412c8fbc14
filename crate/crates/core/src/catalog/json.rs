//! The JSON graph file format.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value as J;

use crate::graph::{Id, Kind, PathPropertyGraph, Violation};
use crate::values::Value;

type Props = BTreeMap<String, Vec<J>>;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeRec {
    id: String,
    #[serde(default)]
    labels: Vec<String>,
    #[serde(default)]
    properties: Props,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeRec {
    id: String,
    from: String,
    to: String,
    #[serde(default)]
    labels: Vec<String>,
    #[serde(default)]
    properties: Props,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PathRec {
    id: String,
    body: Vec<String>,
    #[serde(default)]
    labels: Vec<String>,
    #[serde(default)]
    properties: Props,
}

#[derive(Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct GraphDoc {
    #[serde(default)]
    nodes: Vec<NodeRec>,
    #[serde(default)]
    edges: Vec<EdgeRec>,
    #[serde(default)]
    paths: Vec<PathRec>,
}

/// Why a document could not be turned into a graph.
#[derive(Debug, Clone, PartialEq)]
pub enum DecodeError {
    Format(String),
    Invalid(Vec<Violation>),
}

pub fn decode(text: &str) -> Result<PathPropertyGraph, DecodeError> {
    let doc: GraphDoc = serde_json::from_str(text).map_err(|e| DecodeError::Format(e.to_string()))?;
    let mut b = PathPropertyGraph::builder();
    let annotate = |b: &mut crate::graph::GraphBuilder, id: &Id, labels: Vec<String>, props: Props| {
        for l in labels {
            b.label(id, l);
        }
        for (k, vs) in props {
            for v in vs {
                let v = Value::from_json(&v).map_err(|m| DecodeError::Format(format!("{id:?}.{k}: {m}")))?;
                if v.is_null() {
                    return Err(DecodeError::Format(format!("{id:?}.{k}: null is not a property value")));
                }
                b.property(id, k.as_str(), v);
            }
        }
        Ok(())
    };
    for n in doc.nodes {
        let id = Id::node(n.id);
        b.node(id.clone());
        annotate(&mut b, &id, n.labels, n.properties)?;
    }
    for e in doc.edges {
        let id = Id::edge(e.id);
        b.edge(id.clone(), Id::node(e.from), Id::node(e.to));
        annotate(&mut b, &id, e.labels, e.properties)?;
    }
    for p in doc.paths {
        let id = Id::path(p.id);
        let body = p
            .body
            .into_iter()
            .enumerate()
            .map(|(i, x)| Id::new(if i % 2 == 0 { Kind::Node } else { Kind::Edge }, x))
            .collect();
        b.path(id.clone(), body);
        annotate(&mut b, &id, p.labels, p.properties)?;
    }
    let mut violations: Vec<Violation> =
        b.duplicates().iter().map(|id| Violation::DuplicateId { id: id.clone() }).collect();
    let g = b.build();
    violations.extend(g.validate());
    if violations.is_empty() {
        Ok(g)
    } else {
        Err(DecodeError::Invalid(violations))
    }
}

fn props(g: &PathPropertyGraph, id: &Id) -> Props {
    g.properties(id)
        .map(|(k, vs)| (k.to_string(), vs.iter().map(Value::to_json).collect()))
        .collect()
}

fn labels(g: &PathPropertyGraph, id: &Id) -> Vec<String> {
    g.labels(id).iter().map(|l| l.to_string()).collect()
}

/// Serializes a graph; elements come out in identifier order.
pub fn encode(g: &PathPropertyGraph) -> String {
    let doc = GraphDoc {
        nodes: g
            .nodes()
            .map(|n| NodeRec { id: n.name().into(), labels: labels(g, n), properties: props(g, n) })
            .collect(),
        edges: g
            .edges()
            .map(|(e, s, t)| EdgeRec {
                id: e.name().into(),
                from: s.name().into(),
                to: t.name().into(),
                labels: labels(g, e),
                properties: props(g, e),
            })
            .collect(),
        paths: g
            .paths()
            .map(|(p, body)| PathRec {
                id: p.name().into(),
                body: body.iter().map(|x| x.name().to_string()).collect(),
                labels: labels(g, p),
                properties: props(g, p),
            })
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("graph documents always serialize");
    out.push('\n');
    out
}
