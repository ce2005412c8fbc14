//! Search over the product of a graph and a path automaton.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap, HashSet};
use std::sync::Arc;

use crate::error::EvalError;
use crate::graph::{GraphBuilder, Id, PathPropertyGraph};
use crate::values::Value;

use super::{Nfa, PathViewRelation, Regex, Segment, Symbol, Views};

/// A walk found by the search, with its total cost.
#[derive(Clone, Debug, PartialEq)]
pub struct FoundPath {
    pub body: Vec<Id>,
    pub cost: f64,
}

/// One product-graph move out of a state.
enum Move<'a> {
    Stay(usize),
    Edge { edge: &'a Id, to: &'a Id, q: usize },
    Seg { seg: &'a Segment, q: usize },
}

impl Move<'_> {
    fn target(&self, here: &Id) -> (Id, usize) {
        match self {
            Move::Stay(q) => (here.clone(), *q),
            Move::Edge { to, q, .. } => ((*to).clone(), *q),
            Move::Seg { seg, q } => (seg.end.clone(), *q),
        }
    }

    fn cost(&self) -> f64 {
        match self {
            Move::Stay(_) => 0.0,
            Move::Edge { .. } => 1.0,
            Move::Seg { seg, .. } => seg.cost,
        }
    }

    fn hops(&self) -> usize {
        match self {
            Move::Stay(_) => 0,
            _ => 1,
        }
    }

    fn extend(&self, body: &mut Vec<Id>) {
        match self {
            Move::Stay(_) => {}
            Move::Edge { edge, to, .. } => {
                body.push((*edge).clone());
                body.push((*to).clone());
            }
            Move::Seg { seg, .. } => body.extend(seg.body.iter().skip(1).cloned()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Cost(f64);

impl Eq for Cost {}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cost {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Heap entry ordered so that the cheapest, lexicographically least walk
/// pops first.
#[derive(PartialEq, Eq)]
struct Entry {
    cost: Cost,
    body: Vec<Id>,
    q: usize,
    hops: usize,
}

impl Entry {
    fn node(&self) -> &Id {
        self.body.last().expect("bodies are never empty")
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        (other.cost, &other.body, other.q).cmp(&(self.cost, &self.body, self.q))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A compiled expression bound to a graph and its resolved views.
pub struct PathSearch<'g> {
    g: &'g PathPropertyGraph,
    nfa: Nfa,
    views: HashMap<String, Arc<PathViewRelation>>,
}

impl<'g> PathSearch<'g> {
    pub fn new(g: &'g PathPropertyGraph, r: &Regex, views: &dyn Views) -> Result<Self, EvalError> {
        let views = r
            .views()
            .into_iter()
            .map(|name| views.relation(&name).map(|rel| (name, rel)))
            .collect::<Result<_, _>>()?;
        Ok(PathSearch { g, nfa: Nfa::compile(r), views })
    }

    /// Whether every move costs one hop, so costs are integral.
    pub fn hop_only(&self) -> bool {
        self.views.is_empty()
    }

    pub fn cost_value(&self, cost: f64) -> Value {
        if self.hop_only() {
            Value::Int(cost as i64)
        } else {
            Value::Real(cost)
        }
    }

    fn hop_cap(&self) -> usize {
        (self.g.node_count().max(1)) * self.nfa.len()
    }

    fn for_moves<'s>(&'s self, v: &Id, q: usize, mut f: impl FnMut(Move<'s>)) {
        let g: &'s PathPropertyGraph = self.g;
        for (sym, to) in &self.nfa.moves[q] {
            let to = *to;
            match sym {
                None => f(Move::Stay(to)),
                Some(Symbol::NodeTest(l)) => {
                    if g.has_label(v, l) {
                        f(Move::Stay(to))
                    }
                }
                Some(Symbol::Fwd(l)) => {
                    for e in g.out_edges(v) {
                        if g.has_label(e, l) {
                            let (_, t) = g.endpoints(e).expect("adjacency edge");
                            f(Move::Edge { edge: e, to: t, q: to });
                        }
                    }
                }
                Some(Symbol::Bwd(l)) => {
                    for e in g.in_edges(v) {
                        if g.has_label(e, l) {
                            let (s, _) = g.endpoints(e).expect("adjacency edge");
                            f(Move::Edge { edge: e, to: s, q: to });
                        }
                    }
                }
                Some(Symbol::AnyEdge) => {
                    for e in g.out_edges(v) {
                        let (_, t) = g.endpoints(e).expect("adjacency edge");
                        f(Move::Edge { edge: e, to: t, q: to });
                    }
                    for e in g.in_edges(v) {
                        let (s, t) = g.endpoints(e).expect("adjacency edge");
                        if s != t {
                            f(Move::Edge { edge: e, to: s, q: to });
                        }
                    }
                }
                Some(Symbol::View(name)) => {
                    if let Some(rel) = self.views.get(name) {
                        for seg in rel.from_node(v) {
                            f(Move::Seg { seg, q: to });
                        }
                    }
                }
            }
        }
    }

    /// Cheapest conforming walk from `src` to every reachable node.
    pub fn shortest_from(&self, src: &Id) -> BTreeMap<Id, FoundPath> {
        let mut found = BTreeMap::new();
        if !self.g.has_node(src) {
            return found;
        }
        let mut settled: HashSet<(Id, usize)> = HashSet::new();
        let mut heap = BinaryHeap::new();
        heap.push(Entry { cost: Cost(0.0), body: vec![src.clone()], q: self.nfa.start, hops: 0 });
        while let Some(entry) = heap.pop() {
            let here = entry.node().clone();
            if !settled.insert((here.clone(), entry.q)) {
                continue;
            }
            if entry.q == self.nfa.accept {
                found
                    .entry(here.clone())
                    .or_insert_with(|| FoundPath { body: entry.body.clone(), cost: entry.cost.0 });
            }
            self.for_moves(&here, entry.q, |m| {
                if settled.contains(&m.target(&here)) {
                    return;
                }
                let mut body = entry.body.clone();
                m.extend(&mut body);
                heap.push(Entry {
                    cost: Cost(entry.cost.0 + m.cost()),
                    body,
                    q: m.target(&here).1,
                    hops: entry.hops + m.hops(),
                });
            });
        }
        found
    }

    /// Cheapest conforming walk from `src` to `dst`, ties broken by the
    /// lexicographically least body.
    pub fn shortest(&self, src: &Id, dst: &Id) -> Option<FoundPath> {
        self.shortest_from(src).remove(dst)
    }

    /// Up to `k` distinct conforming walks in non-decreasing cost order.
    pub fn k_shortest(&self, src: &Id, dst: &Id, k: usize) -> Vec<FoundPath> {
        let mut out = Vec::new();
        if k == 0 || !self.g.has_node(src) || !self.g.has_node(dst) {
            return out;
        }
        let cap = self.hop_cap();
        let mut pops: HashMap<(Id, usize), usize> = HashMap::new();
        let mut seen: HashSet<(Vec<Id>, usize)> = HashSet::new();
        let mut emitted: HashSet<Vec<Id>> = HashSet::new();
        let mut heap = BinaryHeap::new();
        heap.push(Entry { cost: Cost(0.0), body: vec![src.clone()], q: self.nfa.start, hops: 0 });
        while let Some(entry) = heap.pop() {
            if !seen.insert((entry.body.clone(), entry.q)) {
                continue;
            }
            let here = entry.node().clone();
            let count = pops.entry((here.clone(), entry.q)).or_insert(0);
            if *count >= k {
                continue;
            }
            *count += 1;
            if here == *dst && entry.q == self.nfa.accept && emitted.insert(entry.body.clone()) {
                out.push(FoundPath { body: entry.body.clone(), cost: entry.cost.0 });
                if out.len() == k {
                    break;
                }
            }
            self.for_moves(&here, entry.q, |m| {
                let hops = entry.hops + m.hops();
                if hops > cap {
                    return;
                }
                let mut body = entry.body.clone();
                m.extend(&mut body);
                heap.push(Entry { cost: Cost(entry.cost.0 + m.cost()), body, q: m.target(&here).1, hops });
            });
        }
        out
    }

    fn forward_states(&self, src: &Id) -> HashSet<(Id, usize)> {
        let mut seen = HashSet::new();
        if !self.g.has_node(src) {
            return seen;
        }
        let mut stack = vec![(src.clone(), self.nfa.start)];
        while let Some((v, q)) = stack.pop() {
            if !seen.insert((v.clone(), q)) {
                continue;
            }
            self.for_moves(&v, q, |m| {
                let t = m.target(&v);
                if !seen.contains(&t) {
                    stack.push(t);
                }
            });
        }
        seen
    }

    /// Nodes reachable from `src` by some conforming walk.
    pub fn reachable_from(&self, src: &Id) -> BTreeSet<Id> {
        self.forward_states(src)
            .into_iter()
            .filter(|(_, q)| *q == self.nfa.accept)
            .map(|(v, _)| v)
            .collect()
    }

    /// Subgraph of every node and edge lying on some conforming walk from
    /// `src` to `dst`. No walk is materialized.
    pub fn all_paths(&self, src: &Id, dst: &Id) -> PathPropertyGraph {
        let fwd = self.forward_states(src);
        let goal = (dst.clone(), self.nfa.accept);
        if !fwd.contains(&goal) {
            return PathPropertyGraph::empty();
        }
        // product transitions restricted to forward-reachable states
        let mut back: HashMap<(Id, usize), Vec<(Id, usize)>> = HashMap::new();
        for (v, q) in &fwd {
            self.for_moves(v, *q, |m| {
                back.entry(m.target(v)).or_default().push((v.clone(), *q));
            });
        }
        let mut live: HashSet<(Id, usize)> = HashSet::new();
        let mut stack = vec![goal];
        while let Some(s) = stack.pop() {
            if !live.insert(s.clone()) {
                continue;
            }
            if let Some(preds) = back.get(&s) {
                stack.extend(preds.iter().filter(|p| !live.contains(*p)).cloned());
            }
        }
        let mut keep: BTreeSet<Id> = BTreeSet::new();
        for (v, q) in &live {
            keep.insert(v.clone());
            self.for_moves(v, *q, |m| {
                if !live.contains(&m.target(v)) {
                    return;
                }
                match m {
                    Move::Stay(_) => {}
                    Move::Edge { edge, to, .. } => {
                        keep.insert(edge.clone());
                        keep.insert(to.clone());
                    }
                    Move::Seg { seg, .. } => keep.extend(seg.body.iter().cloned()),
                }
            });
        }
        let mut b = GraphBuilder::new();
        for id in &keep {
            if self.g.has_node(id) {
                b.copy_node(self.g, id);
            } else {
                b.copy_edge(self.g, id);
            }
        }
        b.build()
    }

    /// Whether a body (valid in the graph) conforms to the expression.
    pub fn conforms(&self, body: &[Id]) -> bool {
        if body.is_empty() || body.len().is_multiple_of(2) {
            return false;
        }
        let last = body.len() - 1;
        let mut seen: HashSet<(usize, usize)> = HashSet::new();
        let mut stack = vec![(0usize, self.nfa.start)];
        while let Some((pos, q)) = stack.pop() {
            if !seen.insert((pos, q)) {
                continue;
            }
            if pos == last && q == self.nfa.accept {
                return true;
            }
            let v = &body[pos];
            let step = (pos < last).then(|| {
                let e = &body[pos + 1];
                let next = &body[pos + 2];
                let (s, t) = self.g.endpoints(e).map_or((None, None), |(s, t)| (Some(s), Some(t)));
                let fwd = s == Some(v) && t == Some(next);
                let bwd = t == Some(v) && s == Some(next);
                (e, fwd, bwd)
            });
            for (sym, to) in &self.nfa.moves[q] {
                let to = *to;
                match sym {
                    None => stack.push((pos, to)),
                    Some(Symbol::NodeTest(l)) => {
                        if self.g.has_label(v, l) {
                            stack.push((pos, to));
                        }
                    }
                    Some(Symbol::Fwd(l)) => {
                        if let Some((e, true, _)) = step {
                            if self.g.has_label(e, l) {
                                stack.push((pos + 2, to));
                            }
                        }
                    }
                    Some(Symbol::Bwd(l)) => {
                        if let Some((e, _, true)) = step {
                            if self.g.has_label(e, l) {
                                stack.push((pos + 2, to));
                            }
                        }
                    }
                    Some(Symbol::AnyEdge) => {
                        if let Some((_, f, b)) = step {
                            if f || b {
                                stack.push((pos + 2, to));
                            }
                        }
                    }
                    Some(Symbol::View(name)) => {
                        if let Some(rel) = self.views.get(name) {
                            for seg in rel.from_node(v) {
                                if seg.body.len() > 1 && body[pos..].starts_with(&seg.body) {
                                    stack.push((pos + seg.body.len() - 1, to));
                                }
                            }
                        }
                    }
                }
            }
        }
        false
    }

    /// Cost of a conforming body: its hop count, or the cheapest split into
    /// view segments.
    pub fn body_cost(&self, body: &[Id]) -> Option<f64> {
        if self.hop_only() {
            return self.conforms(body).then_some((body.len() / 2) as f64);
        }
        // Dijkstra over (position, state) pairs
        let last = body.len().checked_sub(1)?;
        let mut best: HashMap<(usize, usize), f64> = HashMap::new();
        let mut heap = BinaryHeap::new();
        heap.push(std::cmp::Reverse((Cost(0.0), 0usize, self.nfa.start)));
        while let Some(std::cmp::Reverse((Cost(c), pos, q))) = heap.pop() {
            if best.contains_key(&(pos, q)) {
                continue;
            }
            best.insert((pos, q), c);
            if pos == last && q == self.nfa.accept {
                return Some(c);
            }
            let v = &body[pos];
            self.for_moves(v, q, |m| match &m {
                Move::Stay(t) => heap.push(std::cmp::Reverse((Cost(c), pos, *t))),
                Move::Edge { edge, to, q: t } => {
                    if body.get(pos + 1) == Some(*edge) && body.get(pos + 2) == Some(*to) {
                        heap.push(std::cmp::Reverse((Cost(c + 1.0), pos + 2, *t)));
                    }
                }
                Move::Seg { seg, q: t } => {
                    if seg.body.len() > 1 && body[pos..].starts_with(&seg.body) {
                        heap.push(std::cmp::Reverse((
                            Cost(c + seg.cost),
                            pos + seg.body.len() - 1,
                            *t,
                        )));
                    }
                }
            });
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::{parse_regex, NoViews};

    fn n(s: &str) -> Id {
        Id::node(s)
    }
    fn e(s: &str) -> Id {
        Id::edge(s)
    }

    fn toy() -> PathPropertyGraph {
        let mut b = PathPropertyGraph::builder();
        for id in ["101", "102", "103", "104", "105", "106"] {
            b.node(n(id));
        }
        b.label(&n("102"), "Manager").label(&n("102"), "Person").label(&n("101"), "Tag");
        for (id, s, t, l) in [
            ("201", "102", "101", "hasInterest"),
            ("202", "103", "102", "knows"),
            ("203", "102", "103", "knows"),
            ("204", "103", "104", "knows"),
            ("205", "102", "106", "locatedIn"),
            ("206", "105", "106", "locatedIn"),
            ("207", "105", "103", "knows"),
        ] {
            b.edge(e(id), n(s), n(t)).label(&e(id), l);
        }
        b.build()
    }

    fn search<'g>(g: &'g PathPropertyGraph, r: &str) -> PathSearch<'g> {
        PathSearch::new(g, &parse_regex(r).unwrap(), &NoViews).unwrap()
    }

    #[test]
    fn undirected_knows_shortest_is_stored_body() {
        let g = toy();
        let s = search(&g, "(knows + ^knows)*");
        let p = s.shortest(&n("105"), &n("102")).unwrap();
        assert_eq!(p.body, vec![n("105"), e("207"), n("103"), e("202"), n("102")]);
        assert_eq!(s.cost_value(p.cost), Value::Int(2));
    }

    #[test]
    fn zero_length_and_unreachable() {
        let g = toy();
        let s = search(&g, "knows*");
        let p = s.shortest(&n("105"), &n("105")).unwrap();
        assert_eq!(p.body, vec![n("105")]);
        assert_eq!(p.cost, 0.0);
        assert!(s.shortest(&n("101"), &n("105")).is_none());
        assert!(s.k_shortest(&n("101"), &n("105"), 3).is_empty());
        assert!(s.all_paths(&n("101"), &n("105")).is_empty());
    }

    #[test]
    fn node_tests_are_zero_length() {
        let g = toy();
        let s = search(&g, "(:Manager) _*");
        assert!(s.conforms(&[n("102"), e("201"), n("101")]));
        assert!(!s.conforms(&[n("101"), e("201"), n("102")]));
        let s = search(&g, "knows");
        assert!(!s.conforms(&[n("102"), e("201"), n("101")]));
    }

    #[test]
    fn k_shortest_allows_walks() {
        let g = toy();
        let s = search(&g, "(knows + ^knows)*");
        let ps = s.k_shortest(&n("105"), &n("102"), 3);
        assert_eq!(ps.len(), 3);
        assert_eq!(ps[0].cost, 2.0);
        assert!(ps.iter().all(|p| p.cost <= 4.0));
        assert!(ps.windows(2).all(|w| w[0].cost <= w[1].cost));
    }

    #[test]
    fn all_paths_projection_reverse_pair() {
        let g = toy();
        let s = search(&g, "knows*");
        let proj = s.all_paths(&n("105"), &n("102"));
        let nodes: Vec<_> = proj.nodes().map(|x| x.name().to_string()).collect();
        assert_eq!(nodes, ["102", "103", "105"]);
        let edges: Vec<_> = proj.edges().map(|(x, _, _)| x.name().to_string()).collect();
        assert_eq!(edges, ["202", "203", "207"]);
        assert_eq!(proj.path_count(), 0);
        let single = s.all_paths(&n("104"), &n("104"));
        assert_eq!(single.node_count(), 1);
        assert_eq!(single.edge_count(), 0);
    }

    #[test]
    fn view_segments_act_as_macro_edges() {
        let g = toy();
        let mut rel = PathViewRelation::new();
        rel.insert(n("105"), Segment { end: n("103"), body: vec![n("105"), e("207"), n("103")], cost: 0.5 });
        rel.insert(n("103"), Segment { end: n("102"), body: vec![n("103"), e("202"), n("102")], cost: 0.25 });
        let views: BTreeMap<String, Arc<PathViewRelation>> =
            [("v".to_string(), Arc::new(rel))].into_iter().collect();
        let s = PathSearch::new(&g, &parse_regex("~v*").unwrap(), &views).unwrap();
        let p = s.shortest(&n("105"), &n("102")).unwrap();
        assert_eq!(p.cost, 0.75);
        assert_eq!(p.body.len(), 5);
        assert!(s.conforms(&p.body));
        assert_eq!(s.body_cost(&p.body), Some(0.75));
        assert!(matches!(
            PathSearch::new(&g, &parse_regex("~w").unwrap(), &views),
            Err(EvalError::UnknownView(_))
        ));
    }

    #[test]
    fn chain_of_a_thousand() {
        let mut b = PathPropertyGraph::builder();
        for i in 0..1000 {
            b.node(n(&format!("v{i:04}")));
        }
        for i in 0..999 {
            let id = e(&format!("k{i:04}"));
            b.edge(id.clone(), n(&format!("v{i:04}")), n(&format!("v{:04}", i + 1)));
            b.label(&id, "knows");
        }
        let g = b.build();
        let s = search(&g, "knows*");
        let p = s.shortest(&n("v0000"), &n("v0999")).unwrap();
        assert_eq!(p.cost, 999.0);
    }
}
