//! Named graphs and views, their files, and query execution against them.

pub mod csv;
pub mod json;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::Path;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{Error, StorageError};
use crate::eval::{Evaluator, Options, Outcome};
use crate::graph::PathPropertyGraph;
use crate::parser::ast::{ConstructTarget, Expr, FullQuery, HeadClause, Location, Query};
use crate::parser::{parse, render};

pub use self::csv::{ColumnType, ImportOptions};
pub use self::json::DecodeError;

/// The `gr` function: graph names to graphs, view names to definitions.
#[derive(Default)]
pub struct Catalog {
    graphs: BTreeMap<String, Arc<PathPropertyGraph>>,
    views: BTreeMap<String, Arc<Query>>,
    default: Option<String>,
    memo: Mutex<HashMap<String, Arc<PathPropertyGraph>>>,
}

#[derive(Serialize, Deserialize, Default)]
struct Manifest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    default: Option<String>,
}

const GRAPH_EXT: &str = ".graph.json";
const VIEW_EXT: &str = ".view.gcore";
const MANIFEST: &str = "catalog.json";

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StorageError + '_ {
    move |source| StorageError::Io { path: path.display().to_string(), source }
}

/// Decodes a graph document, attributing errors to `origin`.
pub fn graph_from_json(origin: &str, text: &str) -> Result<PathPropertyGraph, StorageError> {
    json::decode(text).map_err(|e| match e {
        DecodeError::Format(message) => StorageError::Format { path: origin.into(), message },
        DecodeError::Invalid(v) => StorageError::Invalid {
            path: origin.into(),
            violations: v.iter().map(ToString::to_string).collect(),
        },
    })
}

impl Catalog {
    pub fn new() -> Self {
        Self::default()
    }

    fn invalidate(&self) {
        self.memo.lock().expect("memo lock").clear();
    }

    /// Registers or replaces a graph. The name must not belong to a view.
    pub fn insert_graph(&mut self, name: &str, g: PathPropertyGraph) -> Result<(), StorageError> {
        if self.views.contains_key(name) {
            return Err(StorageError::Duplicate(name.into()));
        }
        self.graphs.insert(name.into(), Arc::new(g));
        self.invalidate();
        Ok(())
    }

    /// Registers or replaces a view, refusing definitions that would make
    /// views depend on themselves.
    pub fn register_view(&mut self, name: &str, q: Query) -> Result<(), StorageError> {
        if self.graphs.contains_key(name) {
            return Err(StorageError::Duplicate(name.into()));
        }
        let mut stack: Vec<String> = references(&q).into_iter().collect();
        let mut seen = BTreeSet::new();
        while let Some(n) = stack.pop() {
            if n == name {
                return Err(StorageError::Cycle(name.into()));
            }
            if seen.insert(n.clone()) {
                if let Some(v) = self.views.get(&n) {
                    stack.extend(references(v));
                }
            }
        }
        self.views.insert(name.into(), Arc::new(q));
        self.invalidate();
        Ok(())
    }

    pub fn register_view_text(&mut self, name: &str, text: &str) -> Result<(), StorageError> {
        self.register_view(name, parse(text)?)
    }

    pub fn remove(&mut self, name: &str) -> Result<(), StorageError> {
        if self.graphs.remove(name).is_none() && self.views.remove(name).is_none() {
            return Err(StorageError::Unknown(name.into()));
        }
        if self.default.as_deref() == Some(name) {
            self.default = None;
        }
        self.invalidate();
        Ok(())
    }

    pub fn graph(&self, name: &str) -> Option<Arc<PathPropertyGraph>> {
        self.graphs.get(name).cloned()
    }

    pub fn view(&self, name: &str) -> Option<Arc<Query>> {
        self.views.get(name).cloned()
    }

    pub fn graph_names(&self) -> impl Iterator<Item = &str> + '_ {
        self.graphs.keys().map(String::as_str)
    }

    pub fn view_names(&self) -> impl Iterator<Item = &str> + '_ {
        self.views.keys().map(String::as_str)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.graphs.contains_key(name) || self.views.contains_key(name)
    }

    pub fn set_default(&mut self, name: Option<&str>) -> Result<(), StorageError> {
        if let Some(n) = name.filter(|n| !self.contains(n)) {
            return Err(StorageError::Unknown(n.into()));
        }
        self.default = name.map(Into::into);
        self.invalidate();
        Ok(())
    }

    /// The explicit default, else the only graph when exactly one is loaded.
    pub fn default_name(&self) -> Option<&str> {
        match &self.default {
            Some(d) => Some(d),
            None if self.graphs.len() == 1 => self.graphs.keys().next().map(String::as_str),
            None => None,
        }
    }

    pub(crate) fn memoized(&self, name: &str) -> Option<Arc<PathPropertyGraph>> {
        self.memo.lock().expect("memo lock").get(name).cloned()
    }

    pub(crate) fn memoize(&self, name: &str, g: Arc<PathPropertyGraph>) {
        self.memo.lock().expect("memo lock").insert(name.into(), g);
    }

    pub fn load_graph(&mut self, name: &str, path: impl AsRef<Path>) -> Result<(), StorageError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let g = graph_from_json(&path.display().to_string(), &text)?;
        self.insert_graph(name, g)
    }

    pub fn import_csv(&mut self, name: &str, path: impl AsRef<Path>, options: &ImportOptions) -> Result<(), StorageError> {
        let path = path.as_ref();
        let file = fs::File::open(path).map_err(io_err(path))?;
        let g = csv::import(name, file, options)
            .map_err(|message| StorageError::Csv { path: path.display().to_string(), message })?;
        self.insert_graph(name, g)
    }

    pub fn save_graph(&self, name: &str, path: impl AsRef<Path>) -> Result<(), StorageError> {
        let path = path.as_ref();
        let g = self.graph(name).ok_or_else(|| StorageError::Unknown(name.into()))?;
        fs::write(path, json::encode(&g)).map_err(io_err(path))
    }

    /// Reads a catalog directory: `<name>.graph.json`, `<name>.view.gcore`
    /// and an optional `catalog.json` naming the default graph.
    pub fn open(dir: impl AsRef<Path>) -> Result<Self, StorageError> {
        let dir = dir.as_ref();
        let mut cat = Catalog::new();
        let mut entries: Vec<_> = fs::read_dir(dir)
            .map_err(io_err(dir))?
            .map(|e| e.map(|e| e.path()))
            .collect::<Result<_, _>>()
            .map_err(io_err(dir))?;
        entries.sort();
        let file_name = |p: &Path| p.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
        for p in &entries {
            if let Some(name) = file_name(p).strip_suffix(GRAPH_EXT) {
                cat.load_graph(name, p)?;
            }
        }
        let mut views = Vec::new();
        for p in &entries {
            if let Some(name) = file_name(p).strip_suffix(VIEW_EXT) {
                let text = fs::read_to_string(p).map_err(io_err(p))?;
                views.push((name.to_string(), parse(&text)?));
            }
        }
        for (name, q) in views {
            cat.register_view(&name, q)?;
        }
        let manifest = dir.join(MANIFEST);
        if manifest.exists() {
            let text = fs::read_to_string(&manifest).map_err(io_err(&manifest))?;
            let m: Manifest = serde_json::from_str(&text).map_err(|e| StorageError::Format {
                path: manifest.display().to_string(),
                message: e.to_string(),
            })?;
            cat.set_default(m.default.as_deref())?;
        }
        Ok(cat)
    }

    /// Writes every graph and view into `dir` (created if missing).
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<(), StorageError> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        for name in self.graphs.keys() {
            self.save_graph(name, dir.join(format!("{name}{GRAPH_EXT}")))?;
        }
        for (name, q) in &self.views {
            let p = dir.join(format!("{name}{VIEW_EXT}"));
            fs::write(&p, render(q) + "\n").map_err(io_err(&p))?;
        }
        let p = dir.join(MANIFEST);
        let m = Manifest { default: self.default.clone() };
        let text = serde_json::to_string_pretty(&m).expect("manifest serializes") + "\n";
        fs::write(&p, text).map_err(io_err(&p))
    }

    /// Resolves a graph or view name to a graph.
    pub fn resolve(&self, name: &str, options: Options) -> Result<PathPropertyGraph, Error> {
        Ok(Evaluator::new(self, options).resolve_graph(name)?)
    }

    /// Parses and runs a query; GRAPH VIEW definitions are registered.
    pub fn execute(&mut self, text: &str, options: Options) -> Result<Outcome, Error> {
        let q = parse(text)?;
        self.run(&q, options)
    }

    pub fn run(&mut self, q: &Query, options: Options) -> Result<Outcome, Error> {
        let outcome = Evaluator::new(self, options).run(q)?;
        for (name, view) in &outcome.views {
            self.register_view(name, view.clone())?;
        }
        Ok(outcome)
    }
}

/// Catalog names a query may read, minus names it defines itself.
fn references(q: &Query) -> BTreeSet<String> {
    let mut found = BTreeSet::new();
    let mut local = BTreeSet::new();
    query_refs(q, &mut found, &mut local);
    found.retain(|n| !local.contains(n));
    found
}

fn query_refs(q: &Query, found: &mut BTreeSet<String>, local: &mut BTreeSet<String>) {
    for h in &q.heads {
        match h {
            HeadClause::Graph(g) => {
                local.insert(g.name.clone());
                query_refs(&g.query, found, local);
            }
            HeadClause::Path(p) => {
                for e in p.where_.iter().chain(&p.cost) {
                    expr_refs(e, found, local);
                }
            }
        }
    }
    if let Some(b) = &q.body {
        full_refs(b, found, local);
    }
}

fn full_refs(f: &FullQuery, found: &mut BTreeSet<String>, local: &mut BTreeSet<String>) {
    match f {
        FullQuery::Graph { name } => {
            found.insert(name.clone());
        }
        FullQuery::Nested { query } => query_refs(query, found, local),
        FullQuery::SetOp { left, right, .. } => {
            full_refs(left, found, local);
            full_refs(right, found, local);
        }
        FullQuery::Basic(b) => {
            for item in &b.construct.items {
                if let ConstructTarget::Graph { name } = &item.target {
                    found.insert(name.clone());
                }
                for e in item.when.iter() {
                    expr_refs(e, found, local);
                }
            }
            for block in std::iter::once(&b.match_.block).chain(&b.match_.optionals) {
                for loc in &block.patterns {
                    match &loc.on {
                        Some(Location::Name { name }) => {
                            found.insert(name.clone());
                        }
                        Some(Location::Query { query }) => query_refs(query, found, local),
                        None => {}
                    }
                }
                for e in block.where_.iter() {
                    expr_refs(e, found, local);
                }
            }
        }
    }
}

fn expr_refs(e: &Expr, found: &mut BTreeSet<String>, local: &mut BTreeSet<String>) {
    e.walk(&mut |x| {
        if let Expr::Exists { query, .. } = x {
            query_refs(query, found, local);
        }
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn views_may_not_reach_themselves() {
        let mut c = Catalog::new();
        c.insert_graph("g", PathPropertyGraph::empty()).unwrap();
        c.register_view_text("a", "CONSTRUCT (n) MATCH (n) ON g").unwrap();
        c.register_view_text("b", "CONSTRUCT (n) MATCH (n) ON a").unwrap();
        assert!(matches!(c.register_view_text("a", "CONSTRUCT (n) MATCH (n) ON b"), Err(StorageError::Cycle(_))));
        assert!(matches!(c.register_view_text("s", "s"), Err(StorageError::Cycle(_))));
        assert!(matches!(c.register_view_text("g", "a"), Err(StorageError::Duplicate(_))));
    }

    #[test]
    fn default_is_the_only_graph() {
        let mut c = Catalog::new();
        assert_eq!(c.default_name(), None);
        c.insert_graph("g", PathPropertyGraph::empty()).unwrap();
        assert_eq!(c.default_name(), Some("g"));
        c.insert_graph("h", PathPropertyGraph::empty()).unwrap();
        assert_eq!(c.default_name(), None);
        c.set_default(Some("h")).unwrap();
        assert_eq!(c.default_name(), Some("h"));
        assert!(c.set_default(Some("nope")).is_err());
    }
}
