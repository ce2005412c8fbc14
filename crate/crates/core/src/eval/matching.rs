//! MATCH: pattern atoms, a greedy join order and OPTIONAL folding.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use crate::bindings::{Binding, BindingSet};
use crate::error::EvalError;
use crate::graph::{Id, PathPropertyGraph};
use crate::parser::ast::{
    Block, Chain, Connector, Direction, Element, Expr, Location, Match, PathMode, PathPattern, PropOp, Var,
};
use crate::path::{FoundPath, PathSearch, PathViewRelation, Regex};
use crate::values::{compare, eval, is_true, CmpOp, Value};

use super::{Evaluator, Frame, Graph, Lookup};

enum Atom<'q> {
    Node { el: &'q Element },
    Edge { el: &'q Element, src: &'q Var, dst: &'q Var, dir: Direction },
    Path { p: &'q PathPattern, src: &'q Var, dst: &'q Var, dir: Direction },
}

struct Located<'q> {
    atom: Atom<'q>,
    graph: usize,
}

impl Atom<'_> {
    fn vars(&self) -> Vec<Var> {
        let (el, ends) = match self {
            Atom::Node { el } => (*el, vec![]),
            Atom::Edge { el, src, dst, .. } => (*el, vec![(*src).clone(), (*dst).clone()]),
            Atom::Path { p, src, dst, .. } => (&p.element, vec![(*src).clone(), (*dst).clone()]),
        };
        let mut out = vec![el.var.clone()];
        out.extend(ends);
        if let Atom::Path { p, .. } = self {
            out.extend(p.cost_var.iter().cloned());
        }
        for spec in &el.props {
            if let Expr::Var { var } = &spec.value {
                out.push(var.clone());
            }
        }
        out
    }

    /// Lower is evaluated earlier.
    fn score(&self, bound: &BTreeSet<Var>) -> u8 {
        match self {
            Atom::Node { el } if bound.contains(&el.var) => 0,
            Atom::Node { el } if !el.labels.is_empty() || !el.props.is_empty() => 3,
            Atom::Node { .. } => 4,
            Atom::Edge { el, .. } if bound.contains(&el.var) => 0,
            Atom::Edge { src, dst, .. } if bound.contains(*src) || bound.contains(*dst) => 1,
            Atom::Edge { .. } => 5,
            Atom::Path { src, dst, dir, .. } => {
                let (s, d) = (bound.contains(*src), bound.contains(*dst));
                let from_bound = match dir {
                    Direction::Out => s,
                    Direction::In => d,
                    Direction::Any => s || d,
                };
                match (from_bound, s && d, s || d) {
                    (_, true, _) => 1,
                    (true, _, _) => 2,
                    (_, _, true) => 6,
                    _ => 8,
                }
            }
        }
    }
}

fn atoms<'q>(chain: &'q Chain, graph: usize, out: &mut Vec<Located<'q>>) {
    for n in chain.nodes() {
        out.push(Located { atom: Atom::Node { el: n }, graph });
    }
    let nodes: Vec<&Element> = chain.nodes().collect();
    for (i, s) in chain.steps.iter().enumerate() {
        let (src, dst) = (&nodes[i].var, &nodes[i + 1].var);
        let atom = match &s.connector {
            Connector::Edge { element, direction } => Atom::Edge { el: element, src, dst, dir: *direction },
            Connector::Path { path, direction } => Atom::Path { p: path, src, dst, dir: *direction },
        };
        out.push(Located { atom, graph });
    }
}

/// Greedy static order: cheapest atom given what is bound so far.
fn plan(atoms: &[Located<'_>], mut bound: BTreeSet<Var>) -> Vec<usize> {
    let mut left: Vec<usize> = (0..atoms.len()).collect();
    let mut order = Vec::new();
    while !left.is_empty() {
        let (pos, _) = left
            .iter()
            .enumerate()
            .min_by_key(|(_, &i)| atoms[i].atom.score(&bound))
            .expect("non-empty");
        let i = left.remove(pos);
        bound.extend(atoms[i].atom.vars());
        order.push(i);
    }
    order
}

fn chain_vars(chain: &Chain) -> BTreeSet<Var> {
    let mut v = Vec::new();
    atoms(chain, 0, &mut v);
    v.iter().flat_map(|a| a.atom.vars()).collect()
}

/// Variables a block binds or reads.
fn block_vars(b: &Block) -> BTreeSet<Var> {
    let mut vars: BTreeSet<Var> = b.patterns.iter().flat_map(|l| chain_vars(&l.chain)).collect();
    if let Some(w) = &b.where_ {
        vars.extend(w.all_vars());
    }
    vars
}

fn project(row: &Binding, vars: &BTreeSet<Var>) -> Binding {
    row.iter().filter(|(k, _)| vars.contains(*k)).map(|(k, v)| (k.clone(), v.clone())).collect()
}

fn bind(row: &Binding, var: &Var, value: Value) -> Option<Binding> {
    match row.get(var) {
        Some(v) if *v != value => None,
        Some(_) => Some(row.clone()),
        None => {
            let mut r = row.clone();
            r.insert(var.clone(), value);
            Some(r)
        }
    }
}

fn bound_id<'r>(row: &'r Binding, var: &Var) -> Option<&'r Id> {
    row.get(var).and_then(Value::as_id)
}

fn has_labels(g: &PathPropertyGraph, id: &Id, labels: &[Vec<String>]) -> bool {
    labels.iter().all(|alts| alts.iter().any(|l| g.has_label(id, l)))
}

fn located_graph(ev: &Evaluator<'_>, on: &Option<Location>, frame: &Frame) -> Result<Graph, EvalError> {
    match on {
        None => ev.default_graph(frame),
        Some(Location::Name { name }) => ev.resolve(name, &frame.scope),
        Some(Location::Query { query }) => {
            let sub = Frame { outer: Binding::new(), site: format!("{}.on", frame.site), top: false, ..frame.clone() };
            ev.query(query, &sub)
        }
    }
}

/// ⟦MATCH⟧ under the frame's outer binding. Returns the bindings and the
/// graphs they were read from.
pub(super) fn eval_match(ev: &Evaluator<'_>, m: &Match, frame: &Frame) -> Result<(BindingSet, Vec<Graph>), EvalError> {
    let mut graphs: Vec<Graph> = Vec::new();
    let mut block_graphs = Vec::new();
    for b in std::iter::once(&m.block).chain(&m.optionals) {
        // a pattern without ON reads from the next located pattern's graph
        let mut idx = vec![usize::MAX; b.patterns.len()];
        let mut next: Option<usize> = None;
        for (k, loc) in b.patterns.iter().enumerate().rev() {
            let i = match (&loc.on, next) {
                (None, Some(i)) => i,
                (on, _) => {
                    let g = located_graph(ev, on, frame)?;
                    match graphs.iter().position(|h| Arc::ptr_eq(h, &g)) {
                        Some(i) => i,
                        None => {
                            graphs.push(g);
                            graphs.len() - 1
                        }
                    }
                }
            };
            if loc.on.is_some() {
                next = Some(i);
            }
            idx[k] = i;
        }
        block_graphs.push(idx);
    }
    let seed = project(&frame.outer, &block_vars(&m.block));
    let mut omega = eval_block(ev, &m.block, &block_graphs[0], &graphs, vec![seed], frame)?;
    for (o, idx) in m.optionals.iter().zip(&block_graphs[1..]) {
        let vars = block_vars(o);
        let seeds: BTreeSet<Binding> = omega.rows().map(|r| project(r, &vars)).collect();
        let found = eval_block(ev, o, idx, &graphs, seeds.into_iter().collect(), frame)?;
        omega = omega.left_outer_join(&found);
    }
    Ok((omega, graphs))
}

/// Evaluates one block for each seed binding.
pub(super) fn eval_block(
    ev: &Evaluator<'_>,
    b: &Block,
    located: &[usize],
    graphs: &[Graph],
    seeds: Vec<Binding>,
    frame: &Frame,
) -> Result<BindingSet, EvalError> {
    let mut all: Vec<Located<'_>> = Vec::new();
    for (loc, &g) in b.patterns.iter().zip(located) {
        atoms(&loc.chain, g, &mut all);
    }
    let pattern_vars: BTreeSet<Var> = all.iter().flat_map(|a| a.atom.vars()).collect();
    let seed_vars: BTreeSet<Var> = seeds.iter().flat_map(|s| s.keys().cloned()).collect();
    let order = plan(&all, seed_vars.clone());

    let common = located.first().filter(|g| located.iter().all(|h| h == *g)).map(|&g| graphs[g].clone());
    let env = Lookup { ev, frame, graphs, first: None, inherit: common };
    let conjuncts: Vec<(&Expr, BTreeSet<Var>)> = b
        .where_
        .iter()
        .flat_map(|w| w.conjuncts())
        .map(|c| {
            let needs = c.all_vars().into_iter().filter(|v| pattern_vars.contains(v)).collect();
            (c, needs)
        })
        .collect();
    let mut applied = vec![false; conjuncts.len()];
    let mut known = seed_vars;
    let mut rows: BTreeSet<Binding> = seeds.into_iter().collect();

    let mut filter = |rows: BTreeSet<Binding>, known: &BTreeSet<Var>| -> Result<BTreeSet<Binding>, EvalError> {
        let ready: Vec<usize> = (0..conjuncts.len())
            .filter(|&i| !applied[i] && conjuncts[i].1.is_subset(known))
            .collect();
        if ready.is_empty() {
            return Ok(rows);
        }
        for &i in &ready {
            applied[i] = true;
        }
        let mut kept = BTreeSet::new();
        for r in rows {
            let mut ok = true;
            for &i in &ready {
                if !is_true(&eval(conjuncts[i].0, &r, &env)?) {
                    ok = false;
                    break;
                }
            }
            if ok {
                kept.insert(r);
            }
        }
        Ok(kept)
    };

    rows = filter(rows, &known)?;
    for i in order {
        if rows.is_empty() {
            break;
        }
        let a = &all[i];
        rows = extend(ev, a, &graphs[a.graph], rows, frame, &env)?;
        known.extend(a.atom.vars());
        rows = filter(rows, &known)?;
    }
    let everything: BTreeSet<Var> = pattern_vars.iter().cloned().collect();
    rows = filter(rows, &everything.union(&known).cloned().collect())?;
    Ok(BindingSet::from_rows(rows).with_vars(pattern_vars))
}

fn extend(
    ev: &Evaluator<'_>,
    a: &Located<'_>,
    g: &Graph,
    rows: BTreeSet<Binding>,
    frame: &Frame,
    env: &Lookup<'_, '_>,
) -> Result<BTreeSet<Binding>, EvalError> {
    let mut out = BTreeSet::new();
    match &a.atom {
        Atom::Node { el } => {
            for r in &rows {
                let candidates: Vec<&Id> = match r.get(&el.var) {
                    Some(v) => v.as_id().filter(|id| g.has_node(id)).into_iter().collect(),
                    None => g.nodes().collect(),
                };
                for id in candidates {
                    if !has_labels(g, id, &el.labels) {
                        continue;
                    }
                    if let Some(r) = bind(r, &el.var, Value::Id(id.clone())) {
                        out.extend(props(el, id, g, r, env)?);
                    }
                }
            }
        }
        Atom::Edge { el, src, dst, dir } => {
            for r in &rows {
                let candidates: Vec<&Id> = if let Some(v) = r.get(&el.var) {
                    v.as_id().filter(|id| g.endpoints(id).is_some()).into_iter().collect()
                } else if let Some(n) = bound_id(r, src).or_else(|| bound_id(r, dst)) {
                    let es: BTreeSet<&Id> = g.out_edges(n).iter().chain(g.in_edges(n)).collect();
                    es.into_iter().collect()
                } else {
                    g.edges().map(|(e, _, _)| e).collect()
                };
                for e in candidates {
                    if !has_labels(g, e, &el.labels) {
                        continue;
                    }
                    let (s, t) = g.endpoints(e).expect("candidate edges exist");
                    let mut ways = match dir {
                        Direction::Out => vec![(s, t)],
                        Direction::In => vec![(t, s)],
                        Direction::Any => vec![(s, t), (t, s)],
                    };
                    ways.dedup();
                    for (x, y) in ways {
                        let r = bind(r, &el.var, Value::Id(e.clone()))
                            .and_then(|r| bind(&r, src, Value::Id(x.clone())))
                            .and_then(|r| bind(&r, dst, Value::Id(y.clone())));
                        if let Some(r) = r {
                            out.extend(props(el, e, g, r, env)?);
                        }
                    }
                }
            }
        }
        Atom::Path { p, src, dst, dir } if p.stored => {
            let search = searcher(ev, p, g, frame)?;
            let hop_cost = p.regex.is_none();
            for r in &rows {
                let candidates: Vec<(&Id, &[Id])> = match r.get(&p.element.var) {
                    Some(v) => v
                        .as_id()
                        .and_then(|id| g.path_body(id).map(|b| (id, b)))
                        .into_iter()
                        .collect(),
                    None => g.paths().collect(),
                };
                for (pid, body) in candidates {
                    if !has_labels(g, pid, &p.element.labels) {
                        continue;
                    }
                    let (start, end) = (&body[0], &body[body.len() - 1]);
                    let cost = if hop_cost {
                        Value::Int((body.len() / 2) as i64)
                    } else {
                        let Some(c) = search.body_cost(body) else { continue };
                        search.cost_value(c)
                    };
                    let mut ways = match dir {
                        Direction::Out => vec![(start, end)],
                        Direction::In => vec![(end, start)],
                        Direction::Any => vec![(start, end), (end, start)],
                    };
                    ways.dedup();
                    for (x, y) in ways {
                        let mut row = bind(r, &p.element.var, Value::Id(pid.clone()))
                            .and_then(|r| bind(&r, src, Value::Id(x.clone())))
                            .and_then(|r| bind(&r, dst, Value::Id(y.clone())));
                        if let Some(cv) = &p.cost_var {
                            row = row.and_then(|r| bind(&r, cv, cost.clone()));
                        }
                        if let Some(row) = row {
                            out.extend(props(&p.element, pid, g, row, env)?);
                        }
                    }
                }
            }
        }
        Atom::Path { p, src, dst, dir } => {
            let search = searcher(ev, p, g, frame)?;
            let mut ways = match dir {
                Direction::Out => vec![(*src, *dst)],
                Direction::In => vec![(*dst, *src)],
                Direction::Any => vec![(*src, *dst), (*dst, *src)],
            };
            ways.dedup();
            let reach_only = p.element.var.is_anonymous() && p.cost_var.is_none() && p.mode == PathMode::Shortest { k: 1 };
            let mut reach: HashMap<Id, BTreeSet<Id>> = HashMap::new();
            let mut nearest: HashMap<Id, BTreeMap<Id, FoundPath>> = HashMap::new();
            for r in &rows {
                for &(from, to) in &ways {
                    let sources: Vec<Id> = match r.get(from) {
                        Some(v) => v.as_id().filter(|id| g.has_node(id)).cloned().into_iter().collect(),
                        None => g.nodes().cloned().collect(),
                    };
                    for s in sources {
                        let targets: Vec<Id> = match r.get(to) {
                            Some(v) => v.as_id().filter(|id| g.has_node(id)).cloned().into_iter().collect(),
                            None => reach.entry(s.clone()).or_insert_with(|| search.reachable_from(&s)).iter().cloned().collect(),
                        };
                        let base = bind(r, from, Value::Id(s.clone()));
                        for t in targets {
                            let Some(base) = base.as_ref().and_then(|b| bind(b, to, Value::Id(t.clone()))) else {
                                continue;
                            };
                            if reach_only {
                                let ok = reach.entry(s.clone()).or_insert_with(|| search.reachable_from(&s)).contains(&t);
                                if ok {
                                    out.insert(base);
                                }
                                continue;
                            }
                            let found: Vec<(Value, Option<Value>)> = match p.mode {
                                PathMode::All => {
                                    let proj = search.all_paths(&s, &t);
                                    if proj.is_empty() {
                                        vec![]
                                    } else {
                                        vec![(Value::Id(ev.register_projection(&s, &t, proj)), None)]
                                    }
                                }
                                PathMode::Shortest { k: 1 } => nearest
                                    .entry(s.clone())
                                    .or_insert_with(|| search.shortest_from(&s))
                                    .get(&t)
                                    .map(|f| walk(ev, &search, f, g))
                                    .into_iter()
                                    .collect(),
                                PathMode::Shortest { k } => search
                                    .k_shortest(&s, &t, k as usize)
                                    .iter()
                                    .map(|f| walk(ev, &search, f, g))
                                    .collect(),
                            };
                            for (pid, cost) in found {
                                let mut row = bind(&base, &p.element.var, pid);
                                if let (Some(cv), Some(c)) = (&p.cost_var, cost) {
                                    row = row.and_then(|r| bind(&r, cv, c));
                                }
                                out.extend(row);
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

fn walk(ev: &Evaluator<'_>, search: &PathSearch<'_>, f: &FoundPath, g: &Graph) -> (Value, Option<Value>) {
    (Value::Id(ev.register_walk(f.body.clone(), g)), Some(search.cost_value(f.cost)))
}

fn searcher<'g>(ev: &Evaluator<'_>, p: &PathPattern, g: &'g Graph, frame: &Frame) -> Result<PathSearch<'g>, EvalError> {
    let regex = p.regex.clone().unwrap_or_else(Regex::any_walk);
    let mut views: BTreeMap<String, Arc<PathViewRelation>> = BTreeMap::new();
    for name in regex.views() {
        let rel = ev.path_relation(&name, &frame.scope, g)?;
        views.insert(name, rel);
    }
    PathSearch::new(g, &regex, &views)
}

/// Applies `{k = e}` specs: a fresh variable is bound to each stored value,
/// anything else is compared against the stored set.
fn props(el: &Element, id: &Id, g: &PathPropertyGraph, row: Binding, env: &Lookup<'_, '_>) -> Result<Vec<Binding>, EvalError> {
    let mut rows = vec![row];
    for spec in el.props.iter().filter(|s| s.op == PropOp::Eq) {
        let stored = g.property(id, &spec.key);
        let mut next = Vec::new();
        for r in rows {
            match &spec.value {
                Expr::Var { var } if !r.contains_key(var) => {
                    next.extend(stored.iter().filter_map(|v| bind(&r, var, v.clone())));
                }
                Expr::Var { var } => {
                    let v = &r[var];
                    if stored.contains(v) || compare(CmpOp::Eq, &Value::Set(stored.clone()), v) {
                        next.push(r);
                    }
                }
                e => {
                    let v = eval(e, &r, env)?;
                    if compare(CmpOp::Eq, &Value::Set(stored.clone()), &v) {
                        next.push(r);
                    }
                }
            }
        }
        rows = next;
    }
    Ok(rows)
}

/// The atom order chosen for each block of a query's top-level MATCH
/// clauses, one line per atom.
pub fn explain(q: &crate::parser::ast::Query) -> String {
    use crate::parser::ast::FullQuery;
    fn walk_full(f: &FullQuery, out: &mut Vec<String>) {
        match f {
            FullQuery::Basic(b) => {
                for (i, blk) in std::iter::once(&b.match_.block).chain(&b.match_.optionals).enumerate() {
                    let mut all = Vec::new();
                    for (j, loc) in blk.patterns.iter().enumerate() {
                        atoms(&loc.chain, j, &mut all);
                    }
                    let kind = if i == 0 { "MATCH".to_string() } else { format!("OPTIONAL {i}") };
                    out.push(format!("{kind}:"));
                    for k in plan(&all, BTreeSet::new()) {
                        let line = match &all[k].atom {
                            Atom::Node { el } => format!("node ({})", el.var),
                            Atom::Edge { el, src, dst, .. } => format!("edge ({src})-[{}]-({dst})", el.var),
                            Atom::Path { p, src, dst, .. } => format!("path ({src})-/{}/-({dst})", p.element.var),
                        };
                        out.push(format!("  {line} on pattern {}", all[k].graph + 1));
                    }
                }
            }
            FullQuery::SetOp { left, right, .. } => {
                walk_full(left, out);
                walk_full(right, out);
            }
            FullQuery::Nested { query } => {
                if let Some(b) = &query.body {
                    walk_full(b, out);
                }
            }
            FullQuery::Graph { .. } => {}
        }
    }
    let mut out = Vec::new();
    if let Some(b) = &q.body {
        walk_full(b, &mut out);
    }
    out.join("\n")
}
