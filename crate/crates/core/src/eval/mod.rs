//! Query evaluation over a catalog.

mod construct;
mod matching;
mod path_clause;

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::rc::Rc;
use std::sync::Arc;

use sha2::{Digest, Sha256};

use crate::bindings::{Binding, BindingSet};
use crate::catalog::Catalog;
use crate::error::EvalError;
use crate::graph::{Id, Kind, Label, PathPropertyGraph, ValueSet};
use crate::parser::ast::{FullQuery, HeadClause, PathClause, Query, SetOp};
use crate::path::PathViewRelation;
use crate::values::{Env, Value};

pub use matching::explain;

type Graph = Arc<PathPropertyGraph>;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Options {
    /// Mixed into every generated identifier.
    pub seed: u64,
    /// Keep materialized GRAPH VIEW results in the catalog between queries.
    pub memoize_views: bool,
}

/// The result of running one query.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub graph: PathPropertyGraph,
    /// Bindings of the last top-level MATCH, if the query had one.
    pub bindings: Option<BindingSet>,
    /// GRAPH VIEW definitions the query asks to persist.
    pub views: Vec<(String, Query)>,
}

/// A path variable's value that is not a stored path.
#[derive(Clone, Debug)]
enum Virtual {
    Walk { body: Vec<Id>, graph: Graph },
    /// The subgraph of all conforming walks (ALL paths).
    Projection { graph: Graph },
}

/// PATH view relations already computed, keyed by view name and graph.
type RelationCache = HashMap<(String, usize), (Graph, Arc<PathViewRelation>)>;

/// Names introduced by the head clauses of a query, chained to the
/// enclosing query.
#[derive(Default)]
struct Scope {
    parent: Option<Rc<Scope>>,
    graphs: RefCell<BTreeMap<String, Graph>>,
    paths: RefCell<BTreeMap<String, Rc<PathClause>>>,
    relations: RefCell<RelationCache>,
}

impl Scope {
    fn child(parent: &Rc<Scope>) -> Rc<Scope> {
        Rc::new(Scope { parent: Some(parent.clone()), ..Scope::default() })
    }

    fn graph(&self, name: &str) -> Option<Graph> {
        match self.graphs.borrow().get(name) {
            Some(g) => Some(g.clone()),
            None => self.parent.as_ref().and_then(|p| p.graph(name)),
        }
    }

    /// The clause defining a path view and the scope it lives in.
    fn path_view(self: &Rc<Self>, name: &str) -> Option<(Rc<Scope>, Rc<PathClause>)> {
        match self.paths.borrow().get(name) {
            Some(c) => Some((self.clone(), c.clone())),
            None => self.parent.as_ref().and_then(|p| p.path_view(name)),
        }
    }
}

#[derive(Clone)]
enum DefaultGraph {
    Catalog,
    Fixed(Graph),
}

/// Evaluation state of one (sub)query.
#[derive(Clone)]
struct Frame {
    scope: Rc<Scope>,
    default: DefaultGraph,
    /// Ω′: the binding a correlated subquery runs under.
    outer: Binding,
    /// Position of the query in the whole text; part of generated ids.
    site: String,
    top: bool,
}

pub struct Evaluator<'c> {
    catalog: &'c Catalog,
    options: Options,
    views_in_progress: RefCell<Vec<String>>,
    relations_in_progress: RefCell<HashSet<(String, usize)>>,
    view_cache: RefCell<HashMap<String, Graph>>,
    virtuals: RefCell<HashMap<Id, Virtual>>,
    last_bindings: RefCell<Option<BindingSet>>,
    new_views: RefCell<Vec<(String, Query)>>,
}

fn hex_digest(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    h.finalize().iter().take(6).map(|b| format!("{b:02x}")).collect()
}

impl<'c> Evaluator<'c> {
    pub fn new(catalog: &'c Catalog, options: Options) -> Self {
        Evaluator {
            catalog,
            options,
            views_in_progress: RefCell::default(),
            relations_in_progress: RefCell::default(),
            view_cache: RefCell::default(),
            virtuals: RefCell::default(),
            last_bindings: RefCell::default(),
            new_views: RefCell::default(),
        }
    }

    pub fn run(&self, q: &Query) -> Result<Outcome, EvalError> {
        let frame = Frame {
            scope: Rc::new(Scope::default()),
            default: DefaultGraph::Catalog,
            outer: Binding::new(),
            site: "q".into(),
            top: true,
        };
        let g = self.query(q, &frame)?;
        Ok(Outcome {
            graph: Arc::unwrap_or_clone(g),
            bindings: self.last_bindings.take(),
            views: self.new_views.take(),
        })
    }

    /// Resolves a catalog graph or view by name.
    pub fn resolve_graph(&self, name: &str) -> Result<PathPropertyGraph, EvalError> {
        self.resolve(name, &Rc::new(Scope::default())).map(Arc::unwrap_or_clone)
    }

    fn query(&self, q: &Query, frame: &Frame) -> Result<Graph, EvalError> {
        let scope = Scope::child(&frame.scope);
        let inner = Frame { scope: scope.clone(), ..frame.clone() };
        for (i, h) in q.heads.iter().enumerate() {
            match h {
                HeadClause::Path(p) => {
                    scope.paths.borrow_mut().insert(p.name.clone(), Rc::new(p.clone()));
                }
                HeadClause::Graph(gc) => {
                    let sub = Frame {
                        outer: Binding::new(),
                        site: format!("{}.g{i}", frame.site),
                        top: false,
                        ..inner.clone()
                    };
                    let g = self.query(&gc.query, &sub)?;
                    scope.graphs.borrow_mut().insert(gc.name.clone(), g);
                    if gc.view && frame.top {
                        self.new_views.borrow_mut().push((gc.name.clone(), (*gc.query).clone()));
                    }
                }
            }
        }
        match &q.body {
            Some(body) => self.full(body, &inner),
            None => Ok(Arc::new(PathPropertyGraph::empty())),
        }
    }

    fn full(&self, f: &FullQuery, frame: &Frame) -> Result<Graph, EvalError> {
        match f {
            FullQuery::Basic(b) => {
                let (omega, sources) = matching::eval_match(self, &b.match_, frame)?;
                if frame.top {
                    *self.last_bindings.borrow_mut() = Some(omega.clone());
                }
                construct::construct(self, &b.construct, &omega, frame, &sources).map(Arc::new)
            }
            FullQuery::Graph { name } => self.resolve(name, &frame.scope),
            FullQuery::Nested { query } => self.query(query, frame),
            FullQuery::SetOp { op, left, right } => {
                let l = self.full(left, &Frame { site: format!("{}.l", frame.site), ..frame.clone() })?;
                let r = self.full(right, &Frame { site: format!("{}.r", frame.site), ..frame.clone() })?;
                Ok(Arc::new(match op {
                    SetOp::Union => l.union(&r),
                    SetOp::Intersect => l.intersect(&r),
                    SetOp::Minus => l.difference(&r),
                }))
            }
        }
    }

    fn default_graph(&self, frame: &Frame) -> Result<Graph, EvalError> {
        match &frame.default {
            DefaultGraph::Fixed(g) => Ok(g.clone()),
            DefaultGraph::Catalog => {
                let name = self.catalog.default_name().ok_or(EvalError::NoDefaultGraph)?;
                self.resolve(name, &Rc::new(Scope::default()))
            }
        }
    }

    fn resolve(&self, name: &str, scope: &Rc<Scope>) -> Result<Graph, EvalError> {
        if let Some(g) = scope.graph(name) {
            return Ok(g);
        }
        if let Some(g) = self.catalog.graph(name) {
            return Ok(g);
        }
        let Some(view) = self.catalog.view(name) else {
            return Err(EvalError::UnknownGraph(name.to_string()));
        };
        if let Some(g) = self.view_cache.borrow().get(name) {
            return Ok(g.clone());
        }
        if self.options.memoize_views {
            if let Some(g) = self.catalog.memoized(name) {
                return Ok(g);
            }
        }
        if self.views_in_progress.borrow().iter().any(|v| v == name) {
            return Err(EvalError::Cycle(name.to_string()));
        }
        self.views_in_progress.borrow_mut().push(name.to_string());
        let frame = Frame {
            scope: Rc::new(Scope::default()),
            default: DefaultGraph::Catalog,
            outer: Binding::new(),
            site: format!("view:{name}"),
            top: false,
        };
        let result = self.query(&view, &frame);
        self.views_in_progress.borrow_mut().pop();
        let g = result?;
        self.view_cache.borrow_mut().insert(name.to_string(), g.clone());
        if self.options.memoize_views {
            self.catalog.memoize(name, g.clone());
        }
        Ok(g)
    }

    /// The relation of a PATH view over `g`, computed once per graph.
    fn path_relation(&self, name: &str, scope: &Rc<Scope>, g: &Graph) -> Result<Arc<PathViewRelation>, EvalError> {
        let (home, clause) = scope.path_view(name).ok_or_else(|| EvalError::UnknownView(name.to_string()))?;
        let key = (name.to_string(), Arc::as_ptr(g) as usize);
        if let Some((_, rel)) = home.relations.borrow().get(&key) {
            return Ok(rel.clone());
        }
        if !self.relations_in_progress.borrow_mut().insert(key.clone()) {
            return Err(EvalError::Cycle(name.to_string()));
        }
        let rel = path_clause::relation(self, &clause, &home, g);
        self.relations_in_progress.borrow_mut().remove(&key);
        let rel = Arc::new(rel?);
        home.relations.borrow_mut().insert(key, (g.clone(), rel.clone()));
        Ok(rel)
    }

    fn skolem(&self, site: &str, kind: Kind, var: &str, key: &[Option<Value>]) -> Id {
        let key: Vec<String> = key
            .iter()
            .map(|v| v.as_ref().map_or("unbound".into(), |v| v.to_json().to_string()))
            .collect();
        let kind_tag = kind.to_string();
        let digest = hex_digest(&[
            &self.options.seed.to_le_bytes(),
            site.as_bytes(),
            kind_tag.as_bytes(),
            var.as_bytes(),
            key.join("\u{1f}").as_bytes(),
        ]);
        let stem = if var.starts_with(crate::parser::ast::ANON_PREFIX) {
            match kind {
                Kind::Node => "n",
                Kind::Edge => "e",
                Kind::Path => "p",
            }
        } else {
            var
        };
        Id::new(kind, format!("{stem}_{digest}"))
    }

    fn register_walk(&self, body: Vec<Id>, graph: &Graph) -> Id {
        let names: Vec<&str> = body.iter().map(Id::name).collect();
        let digest = hex_digest(&[&self.options.seed.to_le_bytes(), b"walk", names.join("\u{1f}").as_bytes()]);
        let id = Id::path(format!("walk_{digest}"));
        self.virtuals
            .borrow_mut()
            .entry(id.clone())
            .or_insert_with(|| Virtual::Walk { body, graph: graph.clone() });
        id
    }

    fn register_projection(&self, src: &Id, dst: &Id, graph: PathPropertyGraph) -> Id {
        let digest = hex_digest(&[
            &self.options.seed.to_le_bytes(),
            b"all",
            src.name().as_bytes(),
            dst.name().as_bytes(),
            crate::catalog::json::encode(&graph).as_bytes(),
        ]);
        let id = Id::path(format!("all_{digest}"));
        self.virtuals
            .borrow_mut()
            .entry(id.clone())
            .or_insert_with(|| Virtual::Projection { graph: Arc::new(graph) });
        id
    }

    fn virtual_path(&self, id: &Id) -> Option<Virtual> {
        self.virtuals.borrow().get(id).cloned()
    }
}

/// Label, property and subquery lookups for expressions: a union over the
/// graphs a MATCH read from, optionally preceded by a graph under
/// construction.
struct Lookup<'a, 'c> {
    ev: &'a Evaluator<'c>,
    frame: &'a Frame,
    graphs: &'a [Graph],
    first: Option<&'a PathPropertyGraph>,
    /// Default graph for subqueries.
    inherit: Option<Graph>,
}

impl Env for Lookup<'_, '_> {
    fn labels(&self, id: &Id) -> BTreeSet<Label> {
        if let Some(f) = self.first.filter(|f| f.contains(id)) {
            return f.labels(id).clone();
        }
        self.graphs.iter().flat_map(|g| g.labels(id).iter().cloned()).collect()
    }

    fn property(&self, id: &Id, key: &str) -> ValueSet {
        if let Some(f) = self.first.filter(|f| f.contains(id)) {
            return f.property(id, key).clone();
        }
        self.graphs.iter().flat_map(|g| g.property(id, key).iter().cloned()).collect()
    }

    fn path_body(&self, id: &Id) -> Option<Vec<Id>> {
        let stored = self.first.into_iter().chain(self.graphs.iter().map(|g| &**g));
        for g in stored {
            if let Some(b) = g.path_body(id) {
                return Some(b.to_vec());
            }
        }
        match self.ev.virtual_path(id)? {
            Virtual::Walk { body, .. } => Some(body),
            Virtual::Projection { .. } => None,
        }
    }

    fn exists(&self, query: &Query, row: &Binding) -> Result<bool, EvalError> {
        let frame = Frame {
            default: self.inherit.clone().map_or(self.frame.default.clone(), DefaultGraph::Fixed),
            outer: row.clone(),
            site: format!("{}.x", self.frame.site),
            top: false,
            ..self.frame.clone()
        };
        Ok(self.ev.query(query, &frame)?.node_count() > 0)
    }
}
