//! Property checks against straightforward reference implementations,
//! shared by the property tests and the acceptance report.

use super::common;

use std::collections::{BTreeMap, BTreeSet};

use gcore::bindings::{compatible, Binding, BindingSet};
use gcore::graph::{GraphBuilder, Id, PathPropertyGraph};
use gcore::parser::ast::Var;
use gcore::parser::{parse, render};
use gcore::path::{NoViews, PathSearch, Regex};
use gcore::values::Value;
use proptest::prelude::*;

// ---------- binding algebra ----------

pub fn binding_set() -> impl Strategy<Value = BindingSet> {
    let cell = prop::option::of(0i64..3);
    let row = prop::collection::vec(cell, 4).prop_map(|cells| {
        cells
            .into_iter()
            .zip(["a", "b", "c", "d"])
            .filter_map(|(v, k)| v.map(|v| (Var::from(k), Value::Int(v))))
            .collect::<Binding>()
    });
    prop::collection::vec(row, 0..6).prop_map(BindingSet::from_rows)
}

fn rows(b: &BindingSet) -> BTreeSet<Binding> {
    b.rows().cloned().collect()
}

fn merged(a: &Binding, b: &Binding) -> Binding {
    let mut m = b.clone();
    m.extend(a.iter().map(|(k, v)| (k.clone(), v.clone())));
    m
}

fn oracle_join(l: &BindingSet, r: &BindingSet) -> BTreeSet<Binding> {
    let mut out = BTreeSet::new();
    for a in l.rows() {
        for b in r.rows() {
            let ok = a.iter().all(|(k, v)| b.get(k).is_none_or(|w| w == v));
            if ok {
                out.insert(merged(a, b));
            }
        }
    }
    out
}

fn oracle_anti(l: &BindingSet, r: &BindingSet) -> BTreeSet<Binding> {
    l.rows().filter(|a| !r.rows().any(|b| a.iter().all(|(k, v)| b.get(k).is_none_or(|w| w == v)))).cloned().collect()
}

pub fn bindings(l: &BindingSet, r: &BindingSet) -> Result<(), TestCaseError> {
    prop_assert_eq!(rows(&l.join(r)), oracle_join(l, r));
    let union: BTreeSet<Binding> = rows(l).union(&rows(r)).cloned().collect();
    prop_assert_eq!(rows(&l.union(r)), union);
    let semi: BTreeSet<Binding> = rows(l).difference(&oracle_anti(l, r)).cloned().collect();
    prop_assert_eq!(rows(&l.semijoin(r)), semi);
    prop_assert_eq!(rows(&l.antijoin(r)), oracle_anti(l, r));
    let outer: BTreeSet<Binding> = oracle_join(l, r).union(&oracle_anti(l, r)).cloned().collect();
    prop_assert_eq!(rows(&l.left_outer_join(r)), outer);
    for a in l.rows() {
        for b in r.rows() {
            let naive = a.keys().filter(|k| b.contains_key(*k)).all(|k| a[k] == b[k]);
            prop_assert_eq!(compatible(a, b), naive);
        }
    }
    prop_assert_eq!(rows(&l.join(&BindingSet::unit())), rows(l));
    Ok(())
}

// ---------- graph set operations ----------

const NODES: usize = 10;

/// Endpoints are a function of the edge name, so any two generated graphs
/// are consistent.
fn edge_ends(i: usize) -> (usize, usize) {
    (i % NODES, (i * 3 + 1) % NODES)
}

pub fn random_graph() -> impl Strategy<Value = PathPropertyGraph> {
    (
        prop::collection::btree_set(0..NODES, 0..=NODES),
        prop::collection::btree_set(0usize..15, 0..15),
        prop::collection::vec((0usize..NODES, prop::sample::select(vec!["A", "B", "C"])), 0..8),
        prop::collection::vec((0usize..NODES, 0i64..3), 0..6),
        any::<bool>(),
    )
        .prop_map(|(nodes, edges, labels, props, with_path)| {
            let mut b = GraphBuilder::new();
            let n = |i: usize| Id::node(format!("n{i}"));
            for &i in &nodes {
                b.node(n(i));
            }
            let mut kept = Vec::new();
            for i in edges {
                let (s, t) = edge_ends(i);
                if nodes.contains(&s) && nodes.contains(&t) {
                    b.edge(Id::edge(format!("e{i}")), n(s), n(t));
                    kept.push(i);
                }
            }
            for (i, l) in labels.into_iter().filter(|(i, _)| nodes.contains(i)) {
                b.label(&n(i), l);
            }
            for (i, v) in props.into_iter().filter(|(i, _)| nodes.contains(i)) {
                b.property(&n(i), "k", Value::Int(v));
            }
            // a path named after its single edge always has the same body
            if let (true, Some(&i)) = (with_path, kept.first()) {
                let (s, t) = edge_ends(i);
                b.path(Id::path(format!("p{i}")), vec![n(s), Id::edge(format!("e{i}")), n(t)]);
            }
            b.build()
        })
}

pub fn graph_laws(g: &PathPropertyGraph, h: &PathPropertyGraph, k: &PathPropertyGraph) -> Result<(), TestCaseError> {
    let empty = PathPropertyGraph::empty();
    for r in [g.union(h), g.intersect(h), g.difference(h)] {
        prop_assert!(r.validate().is_empty(), "{:?}", r.validate());
    }
    prop_assert!(g.consistent(h));
    prop_assert_eq!(g.union(&empty), g.clone());
    prop_assert_eq!(g.union(h), h.union(g));
    prop_assert_eq!(g.union(h).union(k), g.union(&h.union(k)));
    prop_assert_eq!(g.union(g), g.clone());
    prop_assert!(g.difference(g).is_empty());
    prop_assert_eq!(g.intersect(h), h.intersect(g));
    Ok(())
}

// ---------- path search ----------

const PATH_NODES: usize = 8;

pub fn path_graph() -> impl Strategy<Value = PathPropertyGraph> {
    (
        1..=PATH_NODES,
        prop::collection::vec((0..PATH_NODES, 0..PATH_NODES, prop::sample::select(vec!["a", "b"])), 0..12),
        prop::collection::vec((0..PATH_NODES, prop::sample::select(vec!["X", "Y"])), 0..5),
    )
        .prop_map(|(n, edges, labels)| {
            let mut b = GraphBuilder::new();
            let node = |i: usize| Id::node(format!("v{i}"));
            for i in 0..n {
                b.node(node(i));
            }
            for (j, (s, t, l)) in edges.into_iter().enumerate().filter(|(_, (s, t, _))| *s < n && *t < n) {
                let e = Id::edge(format!("e{j:02}"));
                b.edge(e.clone(), node(s), node(t));
                b.label(&e, l);
            }
            for (i, l) in labels.into_iter().filter(|(i, _)| *i < n) {
                b.label(&node(i), l);
            }
            b.build()
        })
}

pub fn regex() -> impl Strategy<Value = Regex> {
    let leaf = prop_oneof![
        prop::sample::select(vec!["a", "b"]).prop_map(Regex::edge),
        prop::sample::select(vec!["a", "b"]).prop_map(Regex::inverse),
        prop::sample::select(vec!["X", "Y"]).prop_map(Regex::node),
        Just(Regex::Any),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Regex::alt(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Regex::concat(a, b)),
            inner.prop_map(Regex::star),
        ]
    })
}

type Matrix = BTreeMap<(Id, Id), usize>;

fn relax(m: &mut Matrix, k: (Id, Id), c: usize) {
    let slot = m.entry(k).or_insert(usize::MAX);
    *slot = (*slot).min(c);
}

/// Least hop count between every pair, computed over the structure of the
/// expression with min-plus algebra.
fn min_plus(g: &PathPropertyGraph, r: &Regex) -> Matrix {
    let mut m = Matrix::new();
    match r {
        Regex::Any => {
            for (_, s, t) in g.edges() {
                relax(&mut m, (s.clone(), t.clone()), 1);
                relax(&mut m, (t.clone(), s.clone()), 1);
            }
        }
        Regex::Edge { label } => {
            for (e, s, t) in g.edges().filter(|(e, _, _)| g.has_label(e, label)) {
                let _ = e;
                relax(&mut m, (s.clone(), t.clone()), 1);
            }
        }
        Regex::Inverse { label } => {
            for (_, s, t) in g.edges().filter(|(e, _, _)| g.has_label(e, label)) {
                relax(&mut m, (t.clone(), s.clone()), 1);
            }
        }
        Regex::Node { label } => {
            for v in g.nodes().filter(|v| g.has_label(v, label)) {
                relax(&mut m, (v.clone(), v.clone()), 0);
            }
        }
        Regex::View { .. } => unreachable!("no views generated"),
        Regex::Alt { left, right } => {
            m = min_plus(g, left);
            for (k, c) in min_plus(g, right) {
                relax(&mut m, k, c);
            }
        }
        Regex::Concat { left, right } => {
            let (l, r) = (min_plus(g, left), min_plus(g, right));
            for ((a, b), c1) in &l {
                for ((b2, d), c2) in &r {
                    if b == b2 {
                        relax(&mut m, (a.clone(), d.clone()), c1 + c2);
                    }
                }
            }
        }
        Regex::Star { inner } => {
            m = min_plus(g, inner);
            for v in g.nodes() {
                relax(&mut m, (v.clone(), v.clone()), 0);
            }
            let nodes: Vec<&Id> = g.nodes().collect();
            for k in &nodes {
                for i in &nodes {
                    for j in &nodes {
                        let (Some(&a), Some(&b)) = (m.get(&((*i).clone(), (*k).clone())), m.get(&((*k).clone(), (*j).clone())))
                        else {
                            continue;
                        };
                        relax(&mut m, ((*i).clone(), (*j).clone()), a + b);
                    }
                }
            }
        }
    }
    m
}

/// End positions reachable in `body` from position `i` by matching `r`.
fn ends(g: &PathPropertyGraph, r: &Regex, body: &[Id], i: usize) -> BTreeSet<usize> {
    let step = |fwd: bool, label: Option<&str>| -> BTreeSet<usize> {
        if i + 2 > body.len() || i + 2 > body.len() - 1 {
            return BTreeSet::new();
        }
        let (e, next) = (&body[i + 1], &body[i + 2]);
        let Some((s, t)) = g.endpoints(e) else { return BTreeSet::new() };
        let dir_ok = if fwd { s == &body[i] && t == next } else { t == &body[i] && s == next };
        let label_ok = label.is_none_or(|l| g.has_label(e, l));
        if dir_ok && label_ok {
            BTreeSet::from([i + 2])
        } else {
            BTreeSet::new()
        }
    };
    match r {
        Regex::Any => step(true, None).union(&step(false, None)).cloned().collect(),
        Regex::Edge { label } => step(true, Some(label)),
        Regex::Inverse { label } => step(false, Some(label)),
        Regex::Node { label } => {
            if g.has_label(&body[i], label) {
                BTreeSet::from([i])
            } else {
                BTreeSet::new()
            }
        }
        Regex::View { .. } => unreachable!(),
        Regex::Alt { left, right } => ends(g, left, body, i).union(&ends(g, right, body, i)).cloned().collect(),
        Regex::Concat { left, right } => ends(g, left, body, i).into_iter().flat_map(|j| ends(g, right, body, j)).collect(),
        Regex::Star { inner } => {
            let mut seen = BTreeSet::from([i]);
            let mut todo = vec![i];
            while let Some(j) = todo.pop() {
                for k in ends(g, inner, body, j) {
                    if seen.insert(k) {
                        todo.push(k);
                    }
                }
            }
            seen
        }
    }
}

pub fn conforms(g: &PathPropertyGraph, r: &Regex, body: &[Id]) -> bool {
    ends(g, r, body, 0).contains(&(body.len() - 1))
}

/// Every walk of at most `max` edges from `src`, in either direction.
pub fn walks(g: &PathPropertyGraph, src: &Id, max: usize) -> Vec<Vec<Id>> {
    let mut out = vec![vec![src.clone()]];
    let mut frontier = out.clone();
    for _ in 0..max {
        let mut next = Vec::new();
        for w in &frontier {
            let here = w.last().unwrap();
            for (e, s, t) in g.edges() {
                for (a, b) in [(s, t), (t, s)] {
                    if a == here {
                        let mut x = w.clone();
                        x.push(e.clone());
                        x.push(b.clone());
                        next.push(x);
                    }
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

const ENUM_DEPTH: usize = 4;

pub fn shortest_paths(g: &PathPropertyGraph, r: &Regex) -> Result<(), TestCaseError> {
    let search = PathSearch::new(g, r, &NoViews).unwrap();
    let exact = min_plus(g, r);
    for s in g.nodes() {
        let found = search.shortest_from(s);
        let reach = search.reachable_from(s);
        let enumerated: Vec<Vec<Id>> = walks(g, s, ENUM_DEPTH).into_iter().filter(|w| conforms(g, r, w)).collect();
        for t in g.nodes() {
            let want = exact.get(&(s.clone(), t.clone())).copied();
            let got = found.get(t);
            prop_assert_eq!(got.map(|f| f.cost as usize), want, "{} -> {} under {}", s, t, r);
            let by_enum = enumerated.iter().filter(|w| w.last() == Some(t)).map(|w| w.len() / 2).min();
            if let Some(c) = by_enum {
                prop_assert_eq!(want, Some(c));
            } else if let Some(c) = want {
                prop_assert!(c > ENUM_DEPTH);
            }
            prop_assert_eq!(reach.contains(t), want.is_some());
            prop_assert_eq!(!search.all_paths(s, t).is_empty(), want.is_some());
            if let Some(f) = got {
                prop_assert_eq!(f.body.first(), Some(s));
                prop_assert_eq!(f.body.last(), Some(t));
                prop_assert!(conforms(g, r, &f.body), "{:?} under {}", f.body, r);
                prop_assert!(search.conforms(&f.body));
                let k = search.k_shortest(s, t, 3);
                prop_assert!(!k.is_empty());
                prop_assert_eq!(k[0].cost, f.cost);
                prop_assert!(k.windows(2).all(|w| w[0].cost <= w[1].cost));
                let distinct: BTreeSet<&Vec<Id>> = k.iter().map(|p| &p.body).collect();
                prop_assert_eq!(distinct.len(), k.len());
                for p in &k {
                    prop_assert!(conforms(g, r, &p.body));
                }
            }
        }
    }
    Ok(())
}

// ---------- parser round trip ----------

fn ident() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["n", "m", "e", "x1", "name", "Person", "knows"]).prop_map(String::from)
}

pub fn expr_text() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        (0i64..100).prop_map(|i| i.to_string()),
        (-5i64..0).prop_map(|i| i.to_string()),
        (0.0f64..10.0).prop_map(|f| format!("{f:.2}")),
        "[a-z ]{0,6}".prop_map(|s| format!("'{s}'")),
        Just("TRUE".to_string()),
        Just("NULL".to_string()),
        prop::sample::select(vec!["n", "m"]).prop_map(String::from),
        (prop::sample::select(vec!["n", "m"]), ident()).prop_map(|(v, k)| format!("{v}.{k}")),
        prop::sample::select(vec!["n:Person", "m:Person|Tag"]).prop_map(String::from),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            (inner.clone(), prop::sample::select(vec!["+", "-", "*", "/", "%", "AND", "OR"]), inner.clone())
                .prop_map(|(a, op, b)| format!("({a}) {op} ({b})")),
            (inner.clone(), prop::sample::select(vec!["=", "<>", "<", "<=", ">", ">=", "IN", "SUBSET OF"]), inner.clone())
                .prop_map(|(a, op, b)| format!("({a}) {op} ({b})")),
            inner.clone().prop_map(|a| format!("NOT ({a})")),
            inner.clone().prop_map(|a| format!("-({a})")),
            inner.clone().prop_map(|a| format!("size({a})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("[{a}, {b}]")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("CASE WHEN {a} THEN {b} END")),
            (inner.clone(), inner).prop_map(|(a, b)| format!("CASE {a} WHEN 1 THEN {b} ELSE 0 END")),
        ]
    })
}

pub fn pattern_text() -> impl Strategy<Value = String> {
    let edge = prop_oneof![
        Just("-[e:knows]->".to_string()),
        Just("<-[:knows|likes]-".to_string()),
        Just("-".to_string()),
        Just("->".to_string()),
        Just("-/<knows*>/->".to_string()),
        Just("-/p<(knows + ^knows)* (:Person)> COST c/-".to_string()),
        Just("<-/2 SHORTEST p<_*>/-".to_string()),
        Just("-/@p:route/->".to_string()),
    ];
    let node = prop::sample::select(vec!["(n)", "(n:Person)", "(:Tag {name='Wagner'})", "(n {k=v})"]);
    (node.clone(), edge, prop::sample::select(vec!["(m)", "(m:Person:Tag)"])).prop_map(|(a, e, b)| format!("{a}{e}{b}"))
}

pub fn round_trip(p: &str, w: &str, s: &str) -> Result<(), TestCaseError> {
    let text = format!("CONSTRUCT (n) SET n.out := {s} MATCH {p} WHERE {w}");
    let q = match parse(&text) {
        Ok(q) => q,
        Err(e) => return Err(TestCaseError::fail(format!("{text}: {e}"))),
    };
    let shown = render(&q);
    let again = parse(&shown).map_err(|e| TestCaseError::fail(format!("{shown}: {e}")))?;
    prop_assert_eq!(&q, &again, "{}", shown);
    prop_assert_eq!(render(&again), shown);
    Ok(())
}

// ---------- determinism ----------

/// Golden query file names, sorted.
pub fn corpus() -> Vec<String> {
    let dir = common::fixtures().join("queries");
    let mut names: Vec<String> = std::fs::read_dir(&dir)
        .unwrap()
        .filter_map(|e| e.ok()?.file_name().into_string().ok())
        .filter(|n| n.ends_with(".gcore"))
        .collect();
    names.sort();
    names
}

/// Panics unless every golden query renders identically twice per seed.
pub fn same_seed_same_bytes() {
    let names = corpus();
    for seed in [0, 7] {
        let opts = gcore::Options { seed, ..Default::default() };
        let out = || -> Vec<String> {
            let mut c = common::catalog();
            names
                .iter()
                .map(|n| gcore::catalog::json::encode(&c.execute(&common::query_text(n), opts).unwrap().graph))
                .collect()
        };
        assert_eq!(out(), out());
    }
}

/// Time to answer a knows* shortest path end to end over an `n`-node chain.
pub fn knows_chain(n: usize) -> std::time::Duration {
    let mut b = GraphBuilder::new();
    let v = |i: usize| Id::node(format!("v{i}"));
    for i in 0..n {
        b.node(v(i)).label(&v(i), "Person");
        b.property(&v(i), "pos", Value::Int(i as i64));
    }
    for i in 1..n {
        let e = Id::edge(format!("k{i}"));
        b.edge(e.clone(), v(i - 1), v(i)).label(&e, "knows");
    }
    let mut c = gcore::Catalog::new();
    c.insert_graph("chain", b.build()).unwrap();
    let text = format!(
        "CONSTRUCT (a)-/@p:far/->(z) MATCH (a)-/p<:knows*>/->(z) ON chain WHERE a.pos = 0 AND z.pos = {}",
        n - 1
    );
    let start = std::time::Instant::now();
    let o = c.execute(&text, gcore::Options::default()).unwrap();
    let elapsed = start.elapsed();
    let (_, body) = o.graph.paths().next().expect("chain path");
    assert_eq!(body.len(), 2 * n - 1);
    elapsed
}
