//! Path property graphs: nodes, edges and stored paths with labels and
//! multi-valued properties, plus the full-graph set operators.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::Serialize;
use thiserror::Error;

use crate::values::Value;

/// Object sort of an identifier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Node,
    Edge,
    Path,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Node => "node",
            Kind::Edge => "edge",
            Kind::Path => "path",
        })
    }
}

/// Identity of a node, edge or path. Ordered by kind, then by name.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Id {
    kind: Kind,
    name: Arc<str>,
}

impl Id {
    pub fn new(kind: Kind, name: impl Into<Arc<str>>) -> Self {
        Id { kind, name: name.into() }
    }

    pub fn node(name: impl Into<Arc<str>>) -> Self {
        Id::new(Kind::Node, name)
    }

    pub fn edge(name: impl Into<Arc<str>>) -> Self {
        Id::new(Kind::Edge, name)
    }

    pub fn path(name: impl Into<Arc<str>>) -> Self {
        Id::new(Kind::Path, name)
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl fmt::Debug for Id {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.kind, self.name)
    }
}

impl fmt::Display for Id {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

pub type Label = Arc<str>;
pub type Key = Arc<str>;
pub type ValueSet = BTreeSet<Value>;

static NO_LABELS: BTreeSet<Label> = BTreeSet::new();
static NO_VALUES: ValueSet = BTreeSet::new();

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("unknown path {0}")]
    UnknownPath(String),
}

/// One broken invariant found by [`PathPropertyGraph::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    DanglingEndpoint { edge: Id, node: Id },
    MalformedBody { path: Id, reason: String },
    SharedName { name: String },
    WrongKind { id: Id, expected: Kind },
    DuplicateId { id: Id },
    OrphanAnnotation { id: Id },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DanglingEndpoint { edge, node } => {
                write!(f, "dangling endpoint {edge} (node {node} is not in the graph)")
            }
            Violation::MalformedBody { path, reason } => {
                write!(f, "malformed body of path {path}: {reason}")
            }
            Violation::SharedName { name } => {
                write!(f, "identifier {name} is used by objects of different kinds")
            }
            Violation::WrongKind { id, expected } => {
                write!(f, "identifier {id} is a {} but is stored as a {expected}", id.kind())
            }
            Violation::DuplicateId { id } => write!(f, "duplicate {} id {id}", id.kind()),
            Violation::OrphanAnnotation { id } => {
                write!(f, "labels or properties attached to unknown object {id}")
            }
        }
    }
}

#[derive(Default)]
struct Adjacency {
    out: HashMap<Id, Vec<Id>>,
    inc: HashMap<Id, Vec<Id>>,
}

/// An immutable path property graph.
#[derive(Default)]
pub struct PathPropertyGraph {
    nodes: BTreeSet<Id>,
    edges: BTreeMap<Id, (Id, Id)>,
    paths: BTreeMap<Id, Vec<Id>>,
    labels: BTreeMap<Id, BTreeSet<Label>>,
    props: BTreeMap<Id, BTreeMap<Key, ValueSet>>,
    adjacency: OnceLock<Adjacency>,
}

impl Clone for PathPropertyGraph {
    fn clone(&self) -> Self {
        PathPropertyGraph {
            nodes: self.nodes.clone(),
            edges: self.edges.clone(),
            paths: self.paths.clone(),
            labels: self.labels.clone(),
            props: self.props.clone(),
            adjacency: OnceLock::new(),
        }
    }
}

impl PartialEq for PathPropertyGraph {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes
            && self.edges == other.edges
            && self.paths == other.paths
            && self.labels == other.labels
            && self.props == other.props
    }
}

impl Eq for PathPropertyGraph {}

impl fmt::Debug for PathPropertyGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PathPropertyGraph")
            .field("nodes", &self.nodes)
            .field("edges", &self.edges)
            .field("paths", &self.paths)
            .field("labels", &self.labels)
            .field("properties", &self.props)
            .finish()
    }
}

impl PathPropertyGraph {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn builder() -> GraphBuilder {
        GraphBuilder::default()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty() && self.edges.is_empty() && self.paths.is_empty()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn path_count(&self) -> usize {
        self.paths.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = &Id> + '_ {
        self.nodes.iter()
    }

    pub fn edges(&self) -> impl Iterator<Item = (&Id, &Id, &Id)> + '_ {
        self.edges.iter().map(|(e, (s, t))| (e, s, t))
    }

    pub fn paths(&self) -> impl Iterator<Item = (&Id, &[Id])> + '_ {
        self.paths.iter().map(|(p, b)| (p, b.as_slice()))
    }

    pub fn contains(&self, id: &Id) -> bool {
        match id.kind() {
            Kind::Node => self.nodes.contains(id),
            Kind::Edge => self.edges.contains_key(id),
            Kind::Path => self.paths.contains_key(id),
        }
    }

    pub fn has_node(&self, id: &Id) -> bool {
        self.nodes.contains(id)
    }

    pub fn endpoints(&self, edge: &Id) -> Option<(&Id, &Id)> {
        self.edges.get(edge).map(|(s, t)| (s, t))
    }

    pub fn path_body(&self, path: &Id) -> Option<&[Id]> {
        self.paths.get(path).map(Vec::as_slice)
    }

    /// Nodes of a stored path in traversal order.
    pub fn path_nodes(&self, path: &Id) -> Result<Vec<Id>, GraphError> {
        let body = self
            .path_body(path)
            .ok_or_else(|| GraphError::UnknownPath(path.to_string()))?;
        Ok(body.iter().step_by(2).cloned().collect())
    }

    /// Edges of a stored path in traversal order.
    pub fn path_edges(&self, path: &Id) -> Result<Vec<Id>, GraphError> {
        let body = self
            .path_body(path)
            .ok_or_else(|| GraphError::UnknownPath(path.to_string()))?;
        Ok(body.iter().skip(1).step_by(2).cloned().collect())
    }

    pub fn labels(&self, id: &Id) -> &BTreeSet<Label> {
        self.labels.get(id).unwrap_or(&NO_LABELS)
    }

    pub fn has_label(&self, id: &Id, label: &str) -> bool {
        self.labels.get(id).is_some_and(|ls| ls.contains(label))
    }

    /// Values stored under `(id, key)`; absent entries read as the empty set.
    pub fn property(&self, id: &Id, key: &str) -> &ValueSet {
        self.props
            .get(id)
            .and_then(|m| m.get(key))
            .unwrap_or(&NO_VALUES)
    }

    pub fn properties(&self, id: &Id) -> impl Iterator<Item = (&Key, &ValueSet)> + '_ {
        self.props.get(id).into_iter().flat_map(|m| m.iter())
    }

    fn adjacency(&self) -> &Adjacency {
        self.adjacency.get_or_init(|| {
            let mut adj = Adjacency::default();
            for (e, (s, t)) in &self.edges {
                adj.out.entry(s.clone()).or_default().push(e.clone());
                adj.inc.entry(t.clone()).or_default().push(e.clone());
            }
            adj
        })
    }

    /// Edges leaving `node`, in identifier order.
    pub fn out_edges(&self, node: &Id) -> &[Id] {
        self.adjacency().out.get(node).map_or(&[], Vec::as_slice)
    }

    /// Edges entering `node`, in identifier order.
    pub fn in_edges(&self, node: &Id) -> &[Id] {
        self.adjacency().inc.get(node).map_or(&[], Vec::as_slice)
    }

    /// Every broken invariant, or an empty list for a well-formed graph.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut kinds: BTreeMap<&str, Kind> = BTreeMap::new();
        for id in self.nodes.iter().chain(self.edges.keys()).chain(self.paths.keys()) {
            if let Some(k) = kinds.insert(id.name(), id.kind()) {
                if k != id.kind() {
                    out.push(Violation::SharedName { name: id.name().to_string() });
                }
            }
        }
        for n in &self.nodes {
            if n.kind() != Kind::Node {
                out.push(Violation::WrongKind { id: n.clone(), expected: Kind::Node });
            }
        }
        for (e, (s, t)) in &self.edges {
            if e.kind() != Kind::Edge {
                out.push(Violation::WrongKind { id: e.clone(), expected: Kind::Edge });
            }
            for end in [s, t] {
                if !self.nodes.contains(end) {
                    out.push(Violation::DanglingEndpoint { edge: e.clone(), node: end.clone() });
                }
            }
        }
        for (p, body) in &self.paths {
            if p.kind() != Kind::Path {
                out.push(Violation::WrongKind { id: p.clone(), expected: Kind::Path });
            }
            if let Err(reason) = self.check_body(body) {
                out.push(Violation::MalformedBody { path: p.clone(), reason });
            }
        }
        for id in self.labels.keys().chain(self.props.keys()) {
            if !self.contains(id) {
                out.push(Violation::OrphanAnnotation { id: id.clone() });
            }
        }
        out.dedup();
        out
    }

    /// Checks that `body` alternates nodes and edges and that each edge joins
    /// its neighbours in one direction or the other.
    pub fn check_body(&self, body: &[Id]) -> Result<(), String> {
        if body.len().is_multiple_of(2) {
            return Err(format!("body has even length {}", body.len()));
        }
        for (i, id) in body.iter().enumerate() {
            if i % 2 == 0 {
                if !self.nodes.contains(id) {
                    return Err(format!("position {i}: {id} is not a node of the graph"));
                }
            } else {
                let Some((s, t)) = self.endpoints(id) else {
                    return Err(format!("position {i}: {id} is not an edge of the graph"));
                };
                let (a, b) = (&body[i - 1], &body[i + 1]);
                if !((s == a && t == b) || (s == b && t == a)) {
                    return Err(format!("edge {id} does not connect {a} and {b}"));
                }
            }
        }
        Ok(())
    }

    /// Shared edges agree on endpoints and shared paths agree on bodies.
    pub fn consistent(&self, other: &Self) -> bool {
        let (small, large) = if self.edges.len() <= other.edges.len() {
            (self, other)
        } else {
            (other, self)
        };
        let edges_ok = small
            .edges
            .iter()
            .all(|(e, ends)| large.edges.get(e).is_none_or(|o| o == ends));
        edges_ok
            && self
                .paths
                .iter()
                .all(|(p, body)| other.paths.get(p).is_none_or(|o| o == body))
    }

    pub fn union(&self, other: &Self) -> Self {
        if !self.consistent(other) {
            return Self::empty();
        }
        let mut g = self.clone();
        g.nodes.extend(other.nodes.iter().cloned());
        for (e, ends) in &other.edges {
            g.edges.entry(e.clone()).or_insert_with(|| ends.clone());
        }
        for (p, body) in &other.paths {
            g.paths.entry(p.clone()).or_insert_with(|| body.clone());
        }
        for (id, ls) in &other.labels {
            g.labels.entry(id.clone()).or_default().extend(ls.iter().cloned());
        }
        for (id, kv) in &other.props {
            let slot = g.props.entry(id.clone()).or_default();
            for (k, vs) in kv {
                slot.entry(k.clone()).or_default().extend(vs.iter().cloned());
            }
        }
        g
    }

    pub fn intersect(&self, other: &Self) -> Self {
        if !self.consistent(other) {
            return Self::empty();
        }
        let mut g = Self::empty();
        g.nodes = self.nodes.intersection(&other.nodes).cloned().collect();
        g.edges = self
            .edges
            .iter()
            .filter(|(e, _)| other.edges.contains_key(*e))
            .map(|(e, ends)| (e.clone(), ends.clone()))
            .collect();
        g.paths = self
            .paths
            .iter()
            .filter(|(p, _)| other.paths.contains_key(*p))
            .map(|(p, b)| (p.clone(), b.clone()))
            .collect();
        for (id, ls) in &self.labels {
            if !g.contains(id) {
                continue;
            }
            let common: BTreeSet<Label> = ls.intersection(other.labels(id)).cloned().collect();
            if !common.is_empty() {
                g.labels.insert(id.clone(), common);
            }
        }
        for (id, kv) in &self.props {
            if !g.contains(id) {
                continue;
            }
            for (k, vs) in kv {
                let common: ValueSet = vs.intersection(other.property(id, k)).cloned().collect();
                if !common.is_empty() {
                    g.props.entry(id.clone()).or_default().insert(k.clone(), common);
                }
            }
        }
        g
    }

    pub fn difference(&self, other: &Self) -> Self {
        let mut g = Self::empty();
        g.nodes = self.nodes.difference(&other.nodes).cloned().collect();
        g.edges = self
            .edges
            .iter()
            .filter(|(e, (s, t))| {
                !other.edges.contains_key(*e) && g.nodes.contains(s) && g.nodes.contains(t)
            })
            .map(|(e, ends)| (e.clone(), ends.clone()))
            .collect();
        let paths: BTreeMap<Id, Vec<Id>> = self
            .paths
            .iter()
            .filter(|(p, body)| {
                !other.paths.contains_key(*p)
                    && body.iter().enumerate().all(|(i, x)| {
                        if i % 2 == 0 {
                            g.nodes.contains(x)
                        } else {
                            g.edges.contains_key(x)
                        }
                    })
            })
            .map(|(p, b)| (p.clone(), b.clone()))
            .collect();
        g.paths = paths;
        g.labels = self
            .labels
            .iter()
            .filter(|(id, _)| g.contains(id))
            .map(|(id, ls)| (id.clone(), ls.clone()))
            .collect();
        g.props = self
            .props
            .iter()
            .filter(|(id, _)| g.contains(id))
            .map(|(id, kv)| (id.clone(), kv.clone()))
            .collect();
        g
    }

    /// Restriction to the given objects, keeping their annotations. Edges and
    /// paths whose elements are missing are dropped.
    pub fn restrict(&self, keep: &BTreeSet<Id>) -> Self {
        let mut b = GraphBuilder::default();
        for n in self.nodes.iter().filter(|n| keep.contains(*n)) {
            b.copy_node(self, n);
        }
        for (e, (s, t)) in &self.edges {
            if keep.contains(e) && keep.contains(s) && keep.contains(t) {
                b.copy_edge(self, e);
            }
        }
        for (p, body) in &self.paths {
            if keep.contains(p) && body.iter().all(|x| keep.contains(x)) {
                b.copy_path(self, p);
            }
        }
        b.build()
    }
}

/// Mutable staging area for assembling a graph.
#[derive(Default, Clone, Debug)]
pub struct GraphBuilder {
    g: PathPropertyGraphData,
    duplicates: Vec<Id>,
}

#[derive(Default, Clone, Debug)]
struct PathPropertyGraphData {
    nodes: BTreeSet<Id>,
    edges: BTreeMap<Id, (Id, Id)>,
    paths: BTreeMap<Id, Vec<Id>>,
    labels: BTreeMap<Id, BTreeSet<Label>>,
    props: BTreeMap<Id, BTreeMap<Key, ValueSet>>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node(&mut self, id: Id) -> &mut Self {
        if !self.g.nodes.insert(id.clone()) {
            self.duplicates.push(id);
        }
        self
    }

    pub fn edge(&mut self, id: Id, from: Id, to: Id) -> &mut Self {
        if self.g.edges.insert(id.clone(), (from, to)).is_some() {
            self.duplicates.push(id);
        }
        self
    }

    pub fn path(&mut self, id: Id, body: Vec<Id>) -> &mut Self {
        if self.g.paths.insert(id.clone(), body).is_some() {
            self.duplicates.push(id);
        }
        self
    }

    pub fn label(&mut self, id: &Id, label: impl Into<Label>) -> &mut Self {
        self.g.labels.entry(id.clone()).or_default().insert(label.into());
        self
    }

    pub fn remove_label(&mut self, id: &Id, label: &str) -> &mut Self {
        if let Some(ls) = self.g.labels.get_mut(id) {
            ls.remove(label);
            if ls.is_empty() {
                self.g.labels.remove(id);
            }
        }
        self
    }

    pub fn property(&mut self, id: &Id, key: impl Into<Key>, value: Value) -> &mut Self {
        self.g
            .props
            .entry(id.clone())
            .or_default()
            .entry(key.into())
            .or_default()
            .insert(value);
        self
    }

    /// Replaces every value stored under `(id, key)`.
    pub fn set_property(&mut self, id: &Id, key: impl Into<Key>, values: ValueSet) -> &mut Self {
        let key = key.into();
        if values.is_empty() {
            return self.remove_property(id, &key);
        }
        self.g.props.entry(id.clone()).or_default().insert(key, values);
        self
    }

    pub fn remove_property(&mut self, id: &Id, key: &str) -> &mut Self {
        if let Some(kv) = self.g.props.get_mut(id) {
            kv.remove(key);
            if kv.is_empty() {
                self.g.props.remove(id);
            }
        }
        self
    }

    fn copy_annotations(&mut self, src: &PathPropertyGraph, id: &Id) {
        for l in src.labels(id) {
            self.label(id, l.clone());
        }
        for (k, vs) in src.properties(id) {
            for v in vs {
                self.property(id, k.clone(), v.clone());
            }
        }
    }

    /// Adds a node of `src` with its labels and properties.
    pub fn copy_node(&mut self, src: &PathPropertyGraph, id: &Id) -> &mut Self {
        self.g.nodes.insert(id.clone());
        self.copy_annotations(src, id);
        self
    }

    /// Adds an edge of `src` (endpoints included) with its annotations.
    pub fn copy_edge(&mut self, src: &PathPropertyGraph, id: &Id) -> &mut Self {
        if let Some((s, t)) = src.endpoints(id) {
            let (s, t) = (s.clone(), t.clone());
            self.copy_node(src, &s);
            self.copy_node(src, &t);
            self.g.edges.insert(id.clone(), (s, t));
            self.copy_annotations(src, id);
        }
        self
    }

    /// Adds a stored path of `src`, its elements and all their annotations.
    pub fn copy_path(&mut self, src: &PathPropertyGraph, id: &Id) -> &mut Self {
        if let Some(body) = src.path_body(id) {
            let body = body.to_vec();
            self.copy_elements(src, &body);
            self.g.paths.insert(id.clone(), body);
            self.copy_annotations(src, id);
        }
        self
    }

    /// Adds the nodes and edges of a path body taken from `src`.
    pub fn copy_elements(&mut self, src: &PathPropertyGraph, body: &[Id]) -> &mut Self {
        for (i, x) in body.iter().enumerate() {
            if i % 2 == 0 {
                self.copy_node(src, x);
            } else {
                self.copy_edge(src, x);
            }
        }
        self
    }

    pub fn duplicates(&self) -> &[Id] {
        &self.duplicates
    }

    pub fn build(self) -> PathPropertyGraph {
        let d = self.g;
        PathPropertyGraph {
            nodes: d.nodes,
            edges: d.edges,
            paths: d.paths,
            labels: d.labels.into_iter().filter(|(_, l)| !l.is_empty()).collect(),
            props: d
                .props
                .into_iter()
                .map(|(id, kv)| (id, kv.into_iter().filter(|(_, v)| !v.is_empty()).collect()))
                .filter(|(_, kv): &(Id, BTreeMap<Key, ValueSet>)| !kv.is_empty())
                .collect(),
            adjacency: OnceLock::new(),
        }
    }
}

impl From<PathPropertyGraph> for GraphBuilder {
    fn from(g: PathPropertyGraph) -> Self {
        GraphBuilder {
            g: PathPropertyGraphData {
                nodes: g.nodes,
                edges: g.edges,
                paths: g.paths,
                labels: g.labels,
                props: g.props,
            },
            duplicates: Vec::new(),
        }
    }
}
