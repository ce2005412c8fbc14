//! Static well-formedness rules, applied after parsing.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::ParseError;

use super::ast::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Sort {
    Node,
    Edge,
    Path,
    /// Bound by an ALL path pattern: usable only in a path construct.
    AllPaths,
    Value,
}

impl Sort {
    fn name(self) -> &'static str {
        match self {
            Sort::Node => "node",
            Sort::Edge => "edge",
            Sort::Path | Sort::AllPaths => "path",
            Sort::Value => "value",
        }
    }

    fn object(self) -> Sort {
        if self == Sort::AllPaths {
            Sort::Path
        } else {
            self
        }
    }
}

type Sorts = BTreeMap<Var, Sort>;

fn fail<T>(rule: &'static str, at: Span, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError::Static { rule, line: at.line, col: at.col, message: message.into() })
}

pub fn check(q: &Query) -> Result<(), ParseError> {
    query(q, &[], &Sorts::new())
}

fn query(q: &Query, enclosing: &[String], outer: &Sorts) -> Result<(), ParseError> {
    let mut views = enclosing.to_vec();
    for h in &q.heads {
        match h {
            HeadClause::Path(p) => {
                path_clause(p, &views)?;
                views.push(p.name.clone());
            }
            HeadClause::Graph(g) => query(&g.query, &views, &Sorts::new())?,
        }
    }
    match &q.body {
        Some(body) => full(body, &views, outer),
        None => Ok(()),
    }
}

fn full(f: &FullQuery, views: &[String], outer: &Sorts) -> Result<(), ParseError> {
    match f {
        FullQuery::Basic(b) => basic(b, views, outer),
        FullQuery::Graph { .. } => Ok(()),
        FullQuery::Nested { query: q } => query(q, views, outer),
        FullQuery::SetOp { left, right, .. } => {
            full(left, views, outer)?;
            full(right, views, outer)
        }
    }
}

fn path_clause(p: &PathClause, views: &[String]) -> Result<(), ParseError> {
    let first = &p.patterns[0];
    if first.steps.is_empty() {
        return fail(
            "joinable-walk",
            p.span,
            format!("path view {} needs a walk from a start node to an end node", p.name),
        );
    }
    let mut sorts = Sorts::new();
    for c in &p.patterns {
        match_chain(c, views, &mut sorts)?;
    }
    for e in p.where_.iter().chain(&p.cost) {
        no_aggregates(e, p.span, "a PATH clause")?;
        subqueries(e, views, &sorts)?;
    }
    Ok(())
}

fn bind(sorts: &mut Sorts, var: &Var, sort: Sort, at: Span) -> Result<(), ParseError> {
    match sorts.get(var) {
        Some(s) if s.object() != sort.object() => fail(
            "variable-sort",
            at,
            format!("{var} is used both as a {} and as a {}", s.name(), sort.name()),
        ),
        Some(_) => Ok(()),
        None => {
            sorts.insert(var.clone(), sort);
            Ok(())
        }
    }
}

fn match_element(el: &Element, sort: Sort, views: &[String], sorts: &mut Sorts) -> Result<(), ParseError> {
    bind(sorts, &el.var, sort, el.span)?;
    if el.copy.is_some() || !el.group.is_empty() {
        return fail("construct-labels", el.span, "copy and GROUP are only allowed in CONSTRUCT");
    }
    for p in &el.props {
        if p.op == PropOp::Assign {
            return fail("construct-labels", el.span, format!("MATCH compares properties with '=', not ':=' ({})", p.key));
        }
        no_aggregates(&p.value, el.span, "MATCH")?;
        if let Expr::Var { var } = &p.value {
            if !sorts.contains_key(var) {
                sorts.insert(var.clone(), Sort::Value);
            }
        }
        subqueries(&p.value, views, sorts)?;
    }
    Ok(())
}

fn match_chain(c: &Chain, views: &[String], sorts: &mut Sorts) -> Result<(), ParseError> {
    for n in c.nodes() {
        match_element(n, Sort::Node, views, sorts)?;
    }
    for s in &c.steps {
        match &s.connector {
            Connector::Edge { element, .. } => match_element(element, Sort::Edge, views, sorts)?,
            Connector::Path { path, .. } => {
                let sort = if path.mode == PathMode::All { Sort::AllPaths } else { Sort::Path };
                match_element(&path.element, sort, views, sorts)?;
                if let Some(cv) = &path.cost_var {
                    bind(sorts, cv, Sort::Value, path.element.span)?;
                }
                if let Some(r) = &path.regex {
                    for v in r.views() {
                        if !views.iter().any(|n| n == &v) {
                            return fail("unknown-view", path.element.span, format!("unknown path view ~{v}"));
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

fn no_aggregates(e: &Expr, at: Span, place: &str) -> Result<(), ParseError> {
    let mut found = None;
    e.walk(&mut |x| {
        if let Expr::Agg { func, .. } = x {
            found.get_or_insert(*func);
        }
    });
    match found {
        Some(f) => fail(
            "aggregate-placement",
            at,
            format!("{} is not allowed in {place}; aggregates belong in CONSTRUCT assignments", f.name()),
        ),
        None => Ok(()),
    }
}

fn no_all_paths(e: &Expr, sorts: &Sorts, at: Span) -> Result<(), ParseError> {
    for v in e.all_vars() {
        if sorts.get(&v) == Some(&Sort::AllPaths) {
            return fail("all-path-usage", at, format!("{v} is bound by ALL and can only be used in a path construct"));
        }
    }
    Ok(())
}

/// Checks the subqueries of an expression against the bindings in scope.
fn subqueries(e: &Expr, views: &[String], sorts: &Sorts) -> Result<(), ParseError> {
    let mut qs = Vec::new();
    e.walk(&mut |x| {
        if let Expr::Exists { query, .. } = x {
            qs.push(query);
        }
    });
    qs.into_iter().try_for_each(|q| query(q, views, sorts))
}

fn block(b: &Block, views: &[String], sorts: &mut Sorts) -> Result<(), ParseError> {
    for loc in &b.patterns {
        match_chain(&loc.chain, views, sorts)?;
        if let Some(Location::Query { query: q }) = &loc.on {
            query(q, views, &Sorts::new())?;
        }
    }
    Ok(())
}

fn block_where(b: &Block, views: &[String], sorts: &Sorts) -> Result<(), ParseError> {
    if let Some(w) = &b.where_ {
        let at = b.patterns[0].chain.span;
        no_aggregates(w, at, "WHERE")?;
        no_all_paths(w, sorts, at)?;
        subqueries(w, views, sorts)?;
    }
    Ok(())
}

fn basic(b: &BasicQuery, views: &[String], outer: &Sorts) -> Result<(), ParseError> {
    let mut sorts = outer.clone();
    block(&b.match_.block, views, &mut sorts)?;
    let mandatory = sorts.clone();
    let mut optional_owner: BTreeMap<Var, usize> = BTreeMap::new();
    for (i, o) in b.match_.optionals.iter().enumerate() {
        let mut local = mandatory.clone();
        block(o, views, &mut local)?;
        for (v, s) in local {
            if mandatory.contains_key(&v) {
                continue;
            }
            if optional_owner.contains_key(&v) && !v.is_anonymous() {
                return fail(
                    "optional-shared-variable",
                    o.patterns[0].chain.span,
                    format!("{v} is bound by two OPTIONAL blocks but not by the mandatory one"),
                );
            }
            optional_owner.insert(v.clone(), i);
            bind(&mut sorts, &v, s, o.patterns[0].chain.span)?;
        }
    }
    for blk in std::iter::once(&b.match_.block).chain(&b.match_.optionals) {
        block_where(blk, views, &sorts)?;
    }
    construct(&b.construct, views, &sorts)
}

fn construct(c: &Construct, views: &[String], bound: &Sorts) -> Result<(), ParseError> {
    let mut groups: BTreeMap<Var, &Vec<Expr>> = BTreeMap::new();
    let mut local = bound.clone();
    for item in &c.items {
        let ConstructTarget::Pattern { chain } = &item.target else {
            continue;
        };
        let mut elements: Vec<(&Element, Sort)> = chain.nodes().map(|n| (n, Sort::Node)).collect();
        for s in &chain.steps {
            let el = s.connector.element();
            if s.connector.direction() == Direction::Any {
                return fail("construct-direction", el.span, "constructed edges and paths must be directed");
            }
            match &s.connector {
                Connector::Edge { .. } => elements.push((el, Sort::Edge)),
                Connector::Path { path, .. } => {
                    elements.push((el, Sort::Path));
                    match bound.get(&el.var) {
                        Some(Sort::Path) => {}
                        Some(Sort::AllPaths) if !path.stored => {}
                        Some(Sort::AllPaths) => {
                            return fail(
                                "all-path-usage",
                                el.span,
                                format!("{} is bound by ALL and cannot be stored with @", el.var),
                            );
                        }
                        _ => {
                            return fail(
                                "path-construct-unbound",
                                el.span,
                                format!("constructed path {} must be bound by a MATCH path pattern", el.var),
                            );
                        }
                    }
                }
            }
        }
        // bound edges keep their endpoints, which must therefore be bound too
        let nodes: Vec<&Element> = chain.nodes().collect();
        for (i, s) in chain.steps.iter().enumerate() {
            if let Connector::Edge { element, .. } = &s.connector {
                if bound.get(&element.var) == Some(&Sort::Edge) {
                    for n in [nodes[i], nodes[i + 1]] {
                        if bound.get(&n.var) != Some(&Sort::Node) {
                            return fail(
                                "bound-edge-endpoints",
                                element.span,
                                format!("edge {} is bound, so endpoint {} must be bound as well", element.var, n.var),
                            );
                        }
                    }
                }
            }
        }
        for (el, sort) in &elements {
            construct_element(el, *sort, views, bound, &mut groups)?;
            bind(&mut local, &el.var, *sort, el.span)?;
        }
        let item_vars: BTreeSet<&Var> = elements.iter().map(|(e, _)| &e.var).collect();
        let span = chain.span;
        for s in &item.set {
            let (var, value) = match s {
                SetItem::Property { var, value, .. } => (var, Some(value)),
                SetItem::Label { var, .. } => (var, None),
            };
            if !item_vars.contains(var) {
                return fail("set-unknown-var", span, format!("SET refers to {var}, which this pattern does not construct"));
            }
            if let Some(v) = value {
                no_all_paths(v, bound, span)?;
                subqueries(v, views, bound)?;
            }
        }
        for r in &item.remove {
            let (RemoveItem::Property { var, .. } | RemoveItem::Label { var, .. }) = r;
            if !item_vars.contains(var) {
                return fail("set-unknown-var", span, format!("REMOVE refers to {var}, which this pattern does not construct"));
            }
        }
        if let Some(w) = &item.when {
            no_aggregates(w, span, "WHEN")?;
            no_all_paths(w, bound, span)?;
            subqueries(w, views, bound)?;
        }
    }
    Ok(())
}

fn construct_element<'a>(
    el: &'a Element,
    sort: Sort,
    views: &[String],
    bound: &Sorts,
    groups: &mut BTreeMap<Var, &'a Vec<Expr>>,
) -> Result<(), ParseError> {
    let at = el.span;
    if let Some(s) = bound.get(&el.var) {
        if s.object() != sort {
            return fail(
                "variable-sort",
                at,
                format!("{} is bound as a {} but constructed as a {}", el.var, s.name(), sort.name()),
            );
        }
        if *s == Sort::AllPaths && sort != Sort::Path {
            return fail("all-path-usage", at, format!("{} is bound by ALL", el.var));
        }
        if !el.group.is_empty() {
            return fail("group-on-bound", at, format!("{} is bound by MATCH and cannot be grouped", el.var));
        }
    }
    if !el.group.is_empty() {
        match groups.get(&el.var) {
            Some(g) if **g != el.group => {
                return fail("conflicting-group", at, format!("{} is grouped in two different ways", el.var));
            }
            _ => {
                groups.insert(el.var.clone(), &el.group);
            }
        }
    }
    if let Some(y) = &el.copy {
        match bound.get(y) {
            Some(s) if s.object() == sort => {}
            Some(s) => {
                return fail("variable-sort", at, format!("cannot copy the {} {y} into a {}", s.name(), sort.name()));
            }
            None => return fail("copy-unbound", at, format!("copied variable {y} is not bound by MATCH")),
        }
    }
    if el.labels.iter().any(|alts| alts.len() > 1) {
        return fail("construct-labels", at, "label disjunction is not allowed in CONSTRUCT");
    }
    for g in &el.group {
        no_aggregates(g, at, "GROUP")?;
        no_all_paths(g, bound, at)?;
        subqueries(g, views, bound)?;
    }
    for p in &el.props {
        if p.op == PropOp::Eq {
            return fail("construct-labels", at, format!("CONSTRUCT assigns properties with ':=' ({})", p.key));
        }
        no_all_paths(&p.value, bound, at)?;
        subqueries(&p.value, views, bound)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use crate::parser::parse;

    fn rule(q: &str) -> Option<&'static str> {
        parse(q).err().and_then(|e| e.rule())
    }

    #[test]
    fn accepts_plain_queries() {
        assert_eq!(rule("CONSTRUCT (n) MATCH (n:Person) WHERE n.age > 3"), None);
        assert_eq!(rule("CONSTRUCT (x GROUP e :Company {name:=e})<-[:worksAt]-(n) MATCH (n {employer=e})"), None);
    }

    #[test]
    fn rejections() {
        let cases = [
            ("CONSTRUCT (n) MATCH (n) OPTIONAL (n)-[]->(a) OPTIONAL (n)-[]->(a)", "optional-shared-variable"),
            ("CONSTRUCT (m) MATCH (n)-/ALL p<:k*>/->(m) WHERE p.x = 1", "all-path-usage"),
            ("CONSTRUCT (n)-/@q/->(m) MATCH (n)-[e]->(m)", "path-construct-unbound"),
            ("CONSTRUCT (n)-[e]->(x) MATCH (n)-[e]->(m)", "bound-edge-endpoints"),
            ("CONSTRUCT (n GROUP n.a) MATCH (n)", "group-on-bound"),
            ("CONSTRUCT (n) MATCH (n)-/<~nope*>/->(m)", "unknown-view"),
            ("PATH v = (x) CONSTRUCT (n) MATCH (n)-/<~v*>/->(m)", "joinable-walk"),
            ("CONSTRUCT (n) MATCH (n) WHERE COUNT(*) > 1", "aggregate-placement"),
            ("CONSTRUCT (n) SET m.a := 1 MATCH (n), (m)", "set-unknown-var"),
            ("CONSTRUCT (x GROUP n.a), (x GROUP n.b) MATCH (n)", "conflicting-group"),
            ("CONSTRUCT (n) MATCH (n)-[n]->(m)", "variable-sort"),
            ("CONSTRUCT (n:A|B) MATCH (n)", "construct-labels"),
            ("CONSTRUCT (n {a = 1}) MATCH (n)", "construct-labels"),
            ("CONSTRUCT (n) MATCH (n {a := 1})", "construct-labels"),
            ("CONSTRUCT (x = y) MATCH (n)", "copy-unbound"),
            ("CONSTRUCT (n)-[:k]-(m) MATCH (n), (m)", "construct-direction"),
        ];
        for (q, expect) in cases {
            assert_eq!(rule(q), Some(expect), "{q}");
        }
    }

    #[test]
    fn views_from_enclosing_query_are_visible() {
        let q = "PATH v = (x)-[:k]->(y) CONSTRUCT (n) MATCH (n) WHERE EXISTS (CONSTRUCT () MATCH (n)-/<~v>/->(m))";
        assert_eq!(rule(q), None);
    }
}
