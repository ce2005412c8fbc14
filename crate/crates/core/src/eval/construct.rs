//! CONSTRUCT: building a result graph from a binding table.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::bindings::{Binding, BindingSet};
use crate::error::EvalError;
use crate::graph::{GraphBuilder, Id, Kind, PathPropertyGraph};
use crate::parser::ast::{
    Chain, Connector, Construct, ConstructItem, ConstructTarget, Direction, Element, Expr, PropOp, RemoveItem,
    SetItem, Var,
};
use crate::values::{eval, eval_grouped, Value};

use super::{Evaluator, Frame, Graph, Lookup, Virtual};

/// GROUP declarations by variable, from any element of the clause.
type Decls<'q> = HashMap<&'q Var, &'q [Expr]>;

pub(super) fn construct(
    ev: &Evaluator<'_>,
    c: &Construct,
    omega: &BindingSet,
    frame: &Frame,
    sources: &[Graph],
) -> Result<PathPropertyGraph, EvalError> {
    let mut decls: Decls<'_> = HashMap::new();
    for item in &c.items {
        if let ConstructTarget::Pattern { chain } = &item.target {
            for el in elements(chain).filter(|el| !el.group.is_empty()) {
                decls.insert(&el.var, &el.group);
            }
        }
    }
    let mut out = PathPropertyGraph::empty();
    for item in &c.items {
        let g = match &item.target {
            ConstructTarget::Graph { name } => (*ev.resolve(name, &frame.scope)?).clone(),
            ConstructTarget::Pattern { chain } => {
                Builder { ev, frame, omega, sources, decls: &decls }.object(chain, item)?
            }
        };
        out = out.union(&g);
    }
    Ok(out)
}

fn elements(chain: &Chain) -> impl Iterator<Item = &Element> + '_ {
    chain.nodes().chain(chain.steps.iter().map(|s| s.connector.element()))
}

/// A group value, or `None` when it is unbound.
fn key_value(v: Value) -> Option<Value> {
    match v {
        Value::Null => None,
        Value::Set(s) if s.is_empty() => None,
        v => Some(v.unwrap_singleton()),
    }
}

struct Builder<'a, 'c> {
    ev: &'a Evaluator<'c>,
    frame: &'a Frame,
    omega: &'a BindingSet,
    sources: &'a [Graph],
    decls: &'a Decls<'a>,
}

struct State {
    b: GraphBuilder,
    made: BTreeSet<Id>,
    /// Binding table augmented with constructed identities.
    rows: Vec<Binding>,
    /// Objects each row contributed.
    produced: Vec<BTreeSet<Id>>,
}

impl Builder<'_, '_> {
    fn env(&self) -> Lookup<'_, '_> {
        Lookup { ev: self.ev, frame: self.frame, graphs: self.sources, first: None, inherit: None }
    }

    fn object(&self, chain: &Chain, item: &ConstructItem) -> Result<PathPropertyGraph, EvalError> {
        let originals: Vec<&Binding> = self.omega.rows().collect();
        let mut st = State {
            b: GraphBuilder::new(),
            made: BTreeSet::new(),
            rows: originals.iter().map(|r| (*r).clone()).collect(),
            produced: vec![BTreeSet::new(); originals.len()],
        };
        let nodes: Vec<&Element> = chain.nodes().collect();
        for el in &nodes {
            self.identify(&mut st, el, Kind::Node, &originals, |_| Some(Vec::new()))?;
        }
        for (i, step) in chain.steps.iter().enumerate() {
            let (l, r) = (&nodes[i].var, &nodes[i + 1].var);
            match &step.connector {
                Connector::Edge { element, direction } => {
                    let (from, to) = if *direction == Direction::In { (r, l) } else { (l, r) };
                    self.identify(&mut st, element, Kind::Edge, &originals, |row| {
                        let s = row.get(from)?.as_id()?.clone();
                        let t = row.get(to)?.as_id()?.clone();
                        Some(vec![s, t])
                    })?;
                }
                Connector::Path { path, .. } => self.path(&mut st, &path.element, path.stored)?,
            }
        }
        for el in elements(chain) {
            self.annotate(&mut st, el)?;
        }
        self.set_remove(&mut st, item)?;
        let State { b, rows, produced, .. } = st;
        let g = b.build();
        let Some(when) = &item.when else { return Ok(g) };
        let env = Lookup { first: Some(&g), ..self.env() };
        let mut keep = BTreeSet::new();
        let mut all = true;
        for (row, ids) in rows.iter().zip(&produced) {
            let v = eval(when, row, &env)?.unwrap_singleton();
            match v {
                Value::Bool(true) => keep.extend(ids.iter().cloned()),
                Value::Bool(false) | Value::Null => all = false,
                other => return Err(EvalError::When(other.to_string())),
            }
        }
        Ok(if all { g } else { g.restrict(&keep) })
    }

    /// Assigns an identity to a node or edge element in every row, creating
    /// the object. `ends` gives an edge's endpoints (and is the edge's
    /// default group key); `None` skips the row.
    fn identify(
        &self,
        st: &mut State,
        el: &Element,
        kind: Kind,
        originals: &[&Binding],
        ends: impl Fn(&Binding) -> Option<Vec<Id>>,
    ) -> Result<(), EvalError> {
        let env = self.env();
        let bound = self.omega.vars().contains(&el.var);
        let group: &[Expr] = if el.group.is_empty() {
            self.decls.get(&el.var).copied().unwrap_or(&[])
        } else {
            &el.group
        };
        for (i, orig) in originals.iter().enumerate() {
            let Some(ends) = ends(&st.rows[i]) else { continue };
            let id = if let Some(v) = st.rows[i].get(&el.var) {
                match v.as_id() {
                    Some(id) if id.kind() == kind => id.clone(),
                    _ => continue,
                }
            } else if bound {
                continue;
            } else {
                let mut key: Vec<Option<Value>> = ends.iter().map(|e| Some(Value::Id(e.clone()))).collect();
                if group.is_empty() && kind == Kind::Node {
                    key.extend(self.omega.vars().iter().map(|v| orig.get(v).cloned()));
                } else {
                    for g in group {
                        match key_value(eval(g, orig, &env)?) {
                            Some(v) => key.push(Some(v)),
                            None => continue,
                        }
                    }
                    if key.len() != ends.len() + group.len() {
                        continue;
                    }
                }
                self.ev.skolem(&self.frame.site, kind, el.var.as_str(), &key)
            };
            if st.made.insert(id.clone()) {
                let from_source = self.sources.iter().filter(|g| g.contains(&id)).collect::<Vec<_>>();
                match kind {
                    Kind::Node if from_source.is_empty() => {
                        st.b.node(id.clone());
                    }
                    Kind::Node => from_source.iter().for_each(|g| {
                        st.b.copy_node(g, &id);
                    }),
                    _ if from_source.is_empty() => {
                        st.b.edge(id.clone(), ends[0].clone(), ends[1].clone());
                    }
                    _ => from_source.iter().for_each(|g| {
                        st.b.copy_edge(g, &id);
                    }),
                }
            }
            st.rows[i].insert(el.var.clone(), Value::Id(id.clone()));
            st.produced[i].insert(id);
            st.produced[i].extend(ends);
        }
        Ok(())
    }

    fn path(&self, st: &mut State, el: &Element, stored: bool) -> Result<(), EvalError> {
        for i in 0..st.rows.len() {
            let Some(pid) = st.rows[i].get(&el.var).and_then(Value::as_id).cloned() else { continue };
            let mut body: Vec<Id> = Vec::new();
            if let Some(src) = self.sources.iter().find(|g| g.path_body(&pid).is_some()) {
                body = src.path_body(&pid).unwrap_or_default().to_vec();
                if stored {
                    st.b.copy_path(src, &pid);
                } else {
                    st.b.copy_elements(src, &body);
                }
            } else {
                match self.ev.virtual_path(&pid) {
                    Some(Virtual::Walk { body: walk, graph }) => {
                        st.b.copy_elements(&graph, &walk);
                        if stored && st.made.insert(pid.clone()) {
                            st.b.path(pid.clone(), walk.clone());
                        }
                        body = walk;
                    }
                    Some(Virtual::Projection { graph }) => {
                        for n in graph.nodes() {
                            st.b.copy_node(&graph, n);
                            st.produced[i].insert(n.clone());
                        }
                        for (e, _, _) in graph.edges() {
                            st.b.copy_edge(&graph, e);
                            st.produced[i].insert(e.clone());
                        }
                    }
                    None => continue,
                }
            }
            if stored {
                st.made.insert(pid.clone());
                st.produced[i].insert(pid);
            }
            st.produced[i].extend(body);
        }
        Ok(())
    }

    /// Labels, copy patterns and `:=` assignments of one element.
    fn annotate(&self, st: &mut State, el: &Element) -> Result<(), EvalError> {
        let env = self.env();
        let groups = group_rows(&st.rows, &el.var, &st.made);
        for id in groups.keys() {
            for l in el.labels.iter().flatten() {
                st.b.label(id, l.as_str());
            }
        }
        if let Some(y) = &el.copy {
            for (id, rows) in &groups {
                let from: BTreeSet<Id> = rows.iter().filter_map(|r| r.get(y)?.as_id().cloned()).collect();
                for f in from {
                    for g in self.sources.iter().filter(|g| g.contains(&f)) {
                        for l in g.labels(&f) {
                            st.b.label(id, l.clone());
                        }
                        for (k, vs) in g.properties(&f) {
                            for v in vs {
                                st.b.property(id, k.clone(), v.clone());
                            }
                        }
                    }
                }
            }
        }
        for spec in el.props.iter().filter(|p| p.op == PropOp::Assign) {
            for (id, rows) in &groups {
                let v = eval_grouped(&spec.value, rows, &env)?;
                if !v.is_null() {
                    st.b.set_property(id, spec.key.as_str(), v.to_set());
                }
            }
        }
        Ok(())
    }

    fn set_remove(&self, st: &mut State, item: &ConstructItem) -> Result<(), EvalError> {
        let env = self.env();
        for s in &item.set {
            match s {
                SetItem::Property { var, key, value } => {
                    for (id, rows) in group_rows(&st.rows, var, &st.made) {
                        let v = eval_grouped(value, &rows, &env)?;
                        if !v.is_null() {
                            st.b.set_property(&id, key.as_str(), v.to_set());
                        }
                    }
                }
                SetItem::Label { var, label } => {
                    for id in group_rows(&st.rows, var, &st.made).into_keys() {
                        st.b.label(&id, label.as_str());
                    }
                }
            }
        }
        for r in &item.remove {
            match r {
                RemoveItem::Property { var, key } => {
                    for id in group_rows(&st.rows, var, &st.made).into_keys() {
                        st.b.remove_property(&id, key);
                    }
                }
                RemoveItem::Label { var, label } => {
                    for id in group_rows(&st.rows, var, &st.made).into_keys() {
                        st.b.remove_label(&id, label);
                    }
                }
            }
        }
        Ok(())
    }
}

/// Rows grouped by the object `var` stands for in the result.
fn group_rows<'r>(rows: &'r [Binding], var: &Var, made: &BTreeSet<Id>) -> BTreeMap<Id, Vec<&'r Binding>> {
    let mut out: BTreeMap<Id, Vec<&Binding>> = BTreeMap::new();
    for r in rows {
        if let Some(id) = r.get(var).and_then(Value::as_id).filter(|id| made.contains(*id)) {
            out.entry(id.clone()).or_default().push(r);
        }
    }
    out
}
