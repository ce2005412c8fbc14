//! Canonical text for a syntax tree. Anonymous variables are omitted so the
//! output re-parses to an equal tree.

use std::fmt::Write;

use crate::values::Value;

use super::ast::*;

pub fn render(q: &Query) -> String {
    let mut out = String::new();
    query(&mut out, q, true);
    out
}

pub fn render_expr(e: &Expr) -> String {
    let mut out = String::new();
    expr(&mut out, e);
    out
}

fn query(out: &mut String, q: &Query, top: bool) {
    let sep = if top { "\n" } else { " " };
    for (i, h) in q.heads.iter().enumerate() {
        if i > 0 {
            out.push_str(sep);
        }
        match h {
            HeadClause::Path(p) => {
                let _ = write!(out, "PATH {} = ", p.name);
                for (j, c) in p.patterns.iter().enumerate() {
                    if j > 0 {
                        out.push_str(", ");
                    }
                    chain(out, c);
                }
                if let Some(w) = &p.where_ {
                    out.push_str(" WHERE ");
                    expr(out, w);
                }
                if let Some(c) = &p.cost {
                    out.push_str(" COST ");
                    expr(out, c);
                }
            }
            HeadClause::Graph(g) => {
                let view = if g.view { "VIEW " } else { "" };
                let _ = write!(out, "GRAPH {view}{} AS (", g.name);
                query(out, &g.query, false);
                out.push(')');
            }
        }
    }
    if let Some(body) = &q.body {
        if !q.heads.is_empty() {
            out.push_str(sep);
        }
        full(out, body, top);
    }
}

fn full(out: &mut String, f: &FullQuery, top: bool) {
    match f {
        FullQuery::Basic(b) => basic(out, b, top),
        FullQuery::Graph { name } => out.push_str(name),
        FullQuery::Nested { query: q } => {
            out.push('(');
            query(out, q, false);
            out.push(')');
        }
        FullQuery::SetOp { op, left, right } => {
            full(out, left, top);
            let word = match op {
                SetOp::Union => "UNION",
                SetOp::Intersect => "INTERSECT",
                SetOp::Minus => "MINUS",
            };
            let _ = write!(out, "{}{word} ", if top { "\n" } else { " " });
            if matches!(**right, FullQuery::SetOp { .. }) {
                out.push('(');
                full(out, right, false);
                out.push(')');
            } else {
                full(out, right, top);
            }
        }
    }
}

fn basic(out: &mut String, b: &BasicQuery, top: bool) {
    let sep = if top { "\n" } else { " " };
    out.push_str("CONSTRUCT ");
    for (i, item) in b.construct.items.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        match &item.target {
            ConstructTarget::Graph { name } => out.push_str(name),
            ConstructTarget::Pattern { chain: c } => chain(out, c),
        }
        if !item.set.is_empty() {
            out.push_str(" SET ");
            for (j, s) in item.set.iter().enumerate() {
                if j > 0 {
                    out.push_str(", ");
                }
                match s {
                    SetItem::Property { var, key, value } => {
                        let _ = write!(out, "{var}.{key} := ");
                        expr(out, value);
                    }
                    SetItem::Label { var, label } => {
                        let _ = write!(out, "{var}:{label}");
                    }
                }
            }
        }
        if !item.remove.is_empty() {
            out.push_str(" REMOVE ");
            for (j, r) in item.remove.iter().enumerate() {
                if j > 0 {
                    out.push_str(", ");
                }
                match r {
                    RemoveItem::Property { var, key } => {
                        let _ = write!(out, "{var}.{key}");
                    }
                    RemoveItem::Label { var, label } => {
                        let _ = write!(out, "{var}:{label}");
                    }
                }
            }
        }
        if let Some(w) = &item.when {
            out.push_str(" WHEN ");
            expr(out, w);
        }
    }
    out.push_str(sep);
    out.push_str("MATCH ");
    block(out, &b.match_.block);
    for o in &b.match_.optionals {
        out.push_str(sep);
        out.push_str("OPTIONAL ");
        block(out, o);
    }
}

fn block(out: &mut String, b: &Block) {
    for (i, loc) in b.patterns.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        chain(out, &loc.chain);
        match &loc.on {
            None => {}
            Some(Location::Name { name }) => {
                let _ = write!(out, " ON {name}");
            }
            Some(Location::Query { query: q }) => {
                out.push_str(" ON (");
                query(out, q, false);
                out.push(')');
            }
        }
    }
    if let Some(w) = &b.where_ {
        out.push_str(" WHERE ");
        expr(out, w);
    }
}

fn chain(out: &mut String, c: &Chain) {
    out.push('(');
    element(out, &c.start);
    out.push(')');
    for s in &c.steps {
        connector(out, &s.connector);
        out.push('(');
        element(out, &s.node);
        out.push(')');
    }
}

fn bare(el: &Element) -> bool {
    el.var.is_anonymous() && el.copy.is_none() && el.group.is_empty() && el.labels.is_empty() && el.props.is_empty()
}

fn connector(out: &mut String, c: &Connector) {
    let (open, close) = match c.direction() {
        Direction::Out => ("-", "->"),
        Direction::In => ("<-", "-"),
        Direction::Any => ("-", "-"),
    };
    match c {
        Connector::Edge { element: el, .. } if bare(el) => {
            out.push_str(match c.direction() {
                Direction::Out => "->",
                Direction::In => "<-",
                Direction::Any => "-",
            });
        }
        Connector::Edge { element: el, .. } => {
            let _ = write!(out, "{open}[");
            element(out, el);
            let _ = write!(out, "]{close}");
        }
        Connector::Path { path, .. } => {
            let _ = write!(out, "{open}/");
            let mut words: Vec<String> = Vec::new();
            if path.stored {
                words.push("@".into());
            }
            match path.mode {
                PathMode::Shortest { k: 1 } => {}
                PathMode::Shortest { k } => words.push(format!("{k} SHORTEST")),
                PathMode::All => words.push("ALL".into()),
            }
            let head = element_head(&path.element);
            let props = element_props(&path.element);
            if !head.is_empty() {
                words.push(head);
            }
            if let Some(r) = &path.regex {
                words.push(format!("<{r}>"));
            }
            if let Some(cv) = &path.cost_var {
                words.push(format!("COST {cv}"));
            }
            if !props.is_empty() {
                words.push(props);
            }
            out.push_str(&words.join(" "));
            let _ = write!(out, "/{close}");
        }
    }
}

/// Element contents; property specs come last, after a space.
fn element(out: &mut String, el: &Element) {
    let parts: Vec<String> =
        [element_head(el), element_props(el)].into_iter().filter(|p| !p.is_empty()).collect();
    out.push_str(&parts.join(" "));
}

fn element_head(el: &Element) -> String {
    let mut head = String::new();
    if !el.var.is_anonymous() {
        head.push_str(el.var.as_str());
    }
    if let Some(y) = &el.copy {
        if !head.is_empty() {
            head.push(' ');
        }
        let _ = write!(head, "= {y}");
    }
    if !el.group.is_empty() {
        if !head.is_empty() {
            head.push(' ');
        }
        head.push_str("GROUP ");
        list(&mut head, &el.group);
        if !el.labels.is_empty() {
            head.push(' ');
        }
    }
    for alts in &el.labels {
        let _ = write!(head, ":{}", alts.join("|"));
    }
    head
}

fn element_props(el: &Element) -> String {
    if el.props.is_empty() {
        return String::new();
    }
    let mut p = String::from("{");
    for (i, spec) in el.props.iter().enumerate() {
        if i > 0 {
            p.push_str(", ");
        }
        let op = match spec.op {
            PropOp::Eq => "=",
            PropOp::Assign => ":=",
        };
        let _ = write!(p, "{} {op} ", spec.key);
        expr(&mut p, &spec.value);
    }
    p.push('}');
    p
}

const NOT_PREC: u8 = 3;
const NEG_PREC: u8 = 7;
const POSTFIX_PREC: u8 = 8;
const ATOM_PREC: u8 = 9;

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Bin { op, .. } => op.precedence(),
        Expr::Not { .. } => NOT_PREC,
        Expr::Neg { .. } => NEG_PREC,
        Expr::Lit { value: Value::Int(i) } if *i < 0 => NEG_PREC,
        Expr::Lit { value: Value::Real(r) } if r.is_sign_negative() => NEG_PREC,
        Expr::Prop { .. } | Expr::Index { .. } => POSTFIX_PREC,
        // `x:L` is a primary, but a postfix operator after it would bind to the label
        Expr::HasLabel { .. } => NEG_PREC,
        _ => ATOM_PREC,
    }
}

fn wrapped(out: &mut String, e: &Expr, min: u8) {
    if prec(e) < min {
        out.push('(');
        expr(out, e);
        out.push(')');
    } else {
        expr(out, e);
    }
}

fn expr(out: &mut String, e: &Expr) {
    match e {
        Expr::Lit { value } => literal(out, value),
        Expr::Var { var } => out.push_str(var.as_str()),
        Expr::Prop { target, key } => {
            wrapped(out, target, POSTFIX_PREC);
            let _ = write!(out, ".{key}");
        }
        Expr::HasLabel { target, labels } => {
            wrapped(out, target, ATOM_PREC);
            let _ = write!(out, ":{}", labels.join("|"));
        }
        Expr::Not { arg } => {
            out.push_str("NOT ");
            wrapped(out, arg, NOT_PREC);
        }
        Expr::Neg { arg } => {
            out.push('-');
            // `--` would start a comment
            if prec(arg) <= NEG_PREC {
                out.push('(');
                expr(out, arg);
                out.push(')');
            } else {
                expr(out, arg);
            }
        }
        Expr::Bin { op, lhs, rhs } => {
            let p = op.precedence();
            let comparison = p == 4;
            wrapped(out, lhs, if comparison { p + 1 } else { p });
            let _ = write!(out, " {} ", op.symbol());
            wrapped(out, rhs, p + 1);
        }
        Expr::Call { name, args } => {
            let _ = write!(out, "{name}(");
            list(out, args);
            out.push(')');
        }
        Expr::Agg { func, arg } => {
            let _ = write!(out, "{}(", func.name());
            match arg {
                None => out.push('*'),
                Some(a) => expr(out, a),
            }
            out.push(')');
        }
        Expr::Exists { query: q, implicit } => {
            let pattern = implicit
                .then(|| match &q.body {
                    Some(FullQuery::Basic(b)) => b.match_.block.patterns.first(),
                    _ => None,
                })
                .flatten();
            match pattern {
                Some(loc) => chain(out, &loc.chain),
                None => {
                    out.push_str("EXISTS (");
                    query(out, q, false);
                    out.push(')');
                }
            }
        }
        Expr::Case { operand, branches, otherwise } => {
            out.push_str("CASE");
            if let Some(o) = operand {
                out.push(' ');
                expr(out, o);
            }
            for (c, r) in branches {
                out.push_str(" WHEN ");
                expr(out, c);
                out.push_str(" THEN ");
                expr(out, r);
            }
            if let Some(o) = otherwise {
                out.push_str(" ELSE ");
                expr(out, o);
            }
            out.push_str(" END");
        }
        Expr::List { items } => {
            out.push('[');
            list(out, items);
            out.push(']');
        }
        Expr::Index { target, index } => {
            wrapped(out, target, POSTFIX_PREC);
            out.push('[');
            expr(out, index);
            out.push(']');
        }
    }
}

fn list(out: &mut String, items: &[Expr]) {
    for (i, a) in items.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        expr(out, a);
    }
}

fn quote(s: &str) -> String {
    format!("'{}'", s.replace('\\', "\\\\").replace('\'', "''"))
}

fn literal(out: &mut String, v: &Value) {
    match v {
        Value::Null => out.push_str("NULL"),
        Value::Bool(true) => out.push_str("TRUE"),
        Value::Bool(false) => out.push_str("FALSE"),
        Value::Int(i) => {
            let _ = write!(out, "{i}");
        }
        Value::Real(r) => {
            let _ = write!(out, "{r:?}");
        }
        Value::Str(s) => out.push_str(&quote(s)),
        Value::Date(d) => {
            let _ = write!(out, "date({})", quote(d));
        }
        Value::Id(id) => {
            let _ = write!(out, "{id}");
        }
        Value::Set(items) => {
            out.push('[');
            for (i, x) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                literal(out, x);
            }
            out.push(']');
        }
        Value::List(items) => {
            out.push('[');
            for (i, x) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                literal(out, x);
            }
            out.push(']');
        }
    }
}
