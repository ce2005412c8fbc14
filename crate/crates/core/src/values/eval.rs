use std::collections::BTreeSet;

use crate::bindings::Binding;
use crate::error::EvalError;
use crate::graph::{Id, Kind, Label, ValueSet};
use crate::parser::ast::{AggFn, BinOp, Expr, Query};

use super::{arith, compare, negate, ArithOp, CmpOp, Value};

/// What expression evaluation needs from its surroundings.
pub trait Env {
    fn labels(&self, id: &Id) -> BTreeSet<Label>;
    fn property(&self, id: &Id, key: &str) -> ValueSet;
    fn path_body(&self, id: &Id) -> Option<Vec<Id>>;
    /// Evaluates a subquery correlated with `row` and reports whether its
    /// result has at least one node.
    fn exists(&self, query: &Query, row: &Binding) -> Result<bool, EvalError>;
}

/// Interprets a value as a condition: `Some(b)` for booleans (or a
/// singleton boolean set), `None` for unbound.
fn truth(v: &Value) -> Result<Option<bool>, EvalError> {
    match v {
        Value::Bool(b) => Ok(Some(*b)),
        Value::Null => Ok(None),
        Value::Set(s) if s.is_empty() => Ok(None),
        Value::Set(s) if s.len() == 1 => truth(s.first().unwrap_or(&Value::Null)),
        other => Err(EvalError::Type(format!("expected a boolean, found {other}"))),
    }
}

/// True only for an exact boolean true.
pub fn is_true(v: &Value) -> bool {
    matches!(truth(v), Ok(Some(true)))
}

pub fn has_aggregate(e: &Expr) -> bool {
    let mut found = false;
    e.walk(&mut |x| found |= matches!(x, Expr::Agg { .. }));
    found
}

fn target_id(v: &Value, what: &str) -> Result<Option<Id>, EvalError> {
    match v {
        Value::Null => Ok(None),
        Value::Id(id) => Ok(Some(id.clone())),
        Value::Set(s) if s.is_empty() => Ok(None),
        Value::Set(s) if s.len() == 1 => target_id(s.first().unwrap_or(&Value::Null), what),
        other => Err(EvalError::Type(format!("{what} needs a graph object, found {other}"))),
    }
}

pub fn eval(e: &Expr, row: &Binding, env: &dyn Env) -> Result<Value, EvalError> {
    Ok(match e {
        Expr::Lit { value } => value.clone(),
        Expr::Var { var } => row.get(var).cloned().unwrap_or_default(),
        Expr::Prop { target, key } => {
            let t = eval(target, row, env)?;
            match target_id(&t, &format!("property access .{key}"))? {
                Some(id) => Value::Set(env.property(&id, key)),
                None => Value::Set(BTreeSet::new()),
            }
        }
        Expr::HasLabel { target, labels } => {
            let t = eval(target, row, env)?;
            match target_id(&t, "a label test")? {
                Some(id) => {
                    let have = env.labels(&id);
                    Value::Bool(labels.iter().any(|l| have.contains(l.as_str())))
                }
                None => Value::Bool(false),
            }
        }
        Expr::Not { arg } => match truth(&eval(arg, row, env)?)? {
            Some(b) => Value::Bool(!b),
            None => Value::Null,
        },
        Expr::Neg { arg } => negate(&eval(arg, row, env)?)?,
        Expr::Bin { op: BinOp::And, lhs, rhs } => {
            if truth(&eval(lhs, row, env)?)? != Some(true) {
                return Ok(Value::Bool(false));
            }
            Value::Bool(truth(&eval(rhs, row, env)?)? == Some(true))
        }
        Expr::Bin { op: BinOp::Or, lhs, rhs } => {
            if truth(&eval(lhs, row, env)?)? == Some(true) {
                return Ok(Value::Bool(true));
            }
            Value::Bool(truth(&eval(rhs, row, env)?)? == Some(true))
        }
        Expr::Bin { op, lhs, rhs } => {
            let (a, b) = (eval(lhs, row, env)?, eval(rhs, row, env)?);
            binary(*op, &a, &b)?
        }
        Expr::Call { name, args } => {
            let vals = args
                .iter()
                .map(|a| eval(a, row, env))
                .collect::<Result<Vec<_>, _>>()?;
            call(name, &vals, env)?
        }
        Expr::Agg { func, .. } => return Err(EvalError::MisplacedAggregate(func.name())),
        Expr::Exists { query, .. } => Value::Bool(env.exists(query, row)?),
        Expr::Case { operand, branches, otherwise } => {
            let subject = operand.as_ref().map(|o| eval(o, row, env)).transpose()?;
            for (cond, result) in branches {
                let c = eval(cond, row, env)?;
                let hit = match &subject {
                    Some(s) => compare(CmpOp::Eq, s, &c),
                    None => truth(&c)? == Some(true),
                };
                if hit {
                    return eval(result, row, env);
                }
            }
            match otherwise {
                Some(o) => eval(o, row, env)?,
                None => Value::Null,
            }
        }
        Expr::List { items } => Value::List(
            items
                .iter()
                .map(|a| eval(a, row, env))
                .collect::<Result<_, _>>()?,
        ),
        Expr::Index { target, index } => {
            let t = eval(target, row, env)?.unwrap_singleton();
            let i = eval(index, row, env)?.unwrap_singleton();
            match (t, i) {
                (Value::Null, _) | (_, Value::Null) => Value::Null,
                (Value::List(items), Value::Int(i)) => {
                    usize::try_from(i).ok().and_then(|i| items.get(i).cloned()).unwrap_or_default()
                }
                (t, i) => {
                    return Err(EvalError::Type(format!(
                        "cannot index a {} with a {}",
                        t.type_name(),
                        i.type_name()
                    )))
                }
            }
        }
    })
}

fn binary(op: BinOp, a: &Value, b: &Value) -> Result<Value, EvalError> {
    let cmp = |c| Ok(Value::Bool(compare(c, a, b)));
    match op {
        BinOp::Eq => cmp(CmpOp::Eq),
        BinOp::Ne => cmp(CmpOp::Ne),
        BinOp::Lt => cmp(CmpOp::Lt),
        BinOp::Le => cmp(CmpOp::Le),
        BinOp::Gt => cmp(CmpOp::Gt),
        BinOp::Ge => cmp(CmpOp::Ge),
        BinOp::In => cmp(CmpOp::In),
        BinOp::Subset => cmp(CmpOp::Subset),
        BinOp::Add => arith(ArithOp::Add, a, b),
        BinOp::Sub => arith(ArithOp::Sub, a, b),
        BinOp::Mul => arith(ArithOp::Mul, a, b),
        BinOp::Div => arith(ArithOp::Div, a, b),
        BinOp::Mod => arith(ArithOp::Mod, a, b),
        BinOp::And | BinOp::Or => unreachable!("short-circuited by eval"),
    }
}

fn arity(name: &str, args: &[Value], n: usize) -> Result<(), EvalError> {
    if args.len() == n {
        Ok(())
    } else {
        Err(EvalError::Type(format!("{name} expects {n} argument(s), got {}", args.len())))
    }
}

fn scalar(v: &Value) -> Value {
    v.clone().unwrap_singleton()
}

fn string_arg(name: &str, v: &Value) -> Result<Option<String>, EvalError> {
    match scalar(v) {
        Value::Null => Ok(None),
        Value::Set(s) if s.is_empty() => Ok(None),
        Value::Str(s) => Ok(Some(s.to_string())),
        other => Err(EvalError::Type(format!("{name} expects a string, found {other}"))),
    }
}

fn call(name: &str, args: &[Value], env: &dyn Env) -> Result<Value, EvalError> {
    let lower = name.to_ascii_lowercase();
    let path_of = |v: &Value| -> Result<Option<Vec<Id>>, EvalError> {
        match target_id(v, name)? {
            None => Ok(None),
            Some(id) if id.kind() == Kind::Path => env
                .path_body(&id)
                .map(Some)
                .ok_or_else(|| EvalError::Type(format!("{name}: unknown path {id}"))),
            Some(id) => Err(EvalError::Type(format!("{name} expects a path, found #{id}"))),
        }
    };
    Ok(match lower.as_str() {
        "labels" => {
            arity(name, args, 1)?;
            match target_id(&args[0], name)? {
                Some(id) => Value::Set(env.labels(&id).into_iter().map(Value::Str).collect()),
                None => Value::Set(BTreeSet::new()),
            }
        }
        "nodes" | "edges" => {
            arity(name, args, 1)?;
            match path_of(&args[0])? {
                Some(body) => {
                    let skip = usize::from(lower == "edges");
                    Value::List(body.into_iter().skip(skip).step_by(2).map(Value::Id).collect())
                }
                None => Value::Null,
            }
        }
        "length"
            if args.len() == 1
                && matches!(target_id(&args[0], name), Ok(Some(ref id)) if id.kind() == Kind::Path) =>
        {
            let body = path_of(&args[0])?.unwrap_or_default();
            Value::Int((body.len() / 2) as i64)
        }
        "size" | "length" => {
            arity(name, args, 1)?;
            match &args[0] {
                Value::Null => Value::Int(0),
                Value::Set(s) if s.len() != 1 => Value::Int(s.len() as i64),
                v => match scalar(v) {
                    Value::List(l) => Value::Int(l.len() as i64),
                    Value::Str(s) => Value::Int(s.chars().count() as i64),
                    _ => Value::Int(1),
                },
            }
        }
        "tostring" => {
            arity(name, args, 1)?;
            match scalar(&args[0]) {
                Value::Null => Value::Null,
                Value::Str(s) | Value::Date(s) => Value::Str(s),
                Value::Id(id) => Value::str(id.name()),
                v => Value::str(v.to_string()),
            }
        }
        "tointeger" => {
            arity(name, args, 1)?;
            match scalar(&args[0]) {
                Value::Null => Value::Null,
                Value::Int(i) => Value::Int(i),
                Value::Real(r) => Value::Int(r.trunc() as i64),
                Value::Str(s) => s
                    .trim()
                    .parse::<i64>()
                    .map(Value::Int)
                    .map_err(|_| EvalError::Type(format!("cannot convert \"{s}\" to an integer")))?,
                v => return Err(EvalError::Type(format!("cannot convert {v} to an integer"))),
            }
        }
        "tofloat" | "toreal" => {
            arity(name, args, 1)?;
            match scalar(&args[0]) {
                Value::Null => Value::Null,
                Value::Int(i) => Value::Real(i as f64),
                Value::Real(r) => Value::Real(r),
                Value::Str(s) => s
                    .trim()
                    .parse::<f64>()
                    .map(Value::Real)
                    .map_err(|_| EvalError::Type(format!("cannot convert \"{s}\" to a real")))?,
                v => return Err(EvalError::Type(format!("cannot convert {v} to a real"))),
            }
        }
        "toboolean" => {
            arity(name, args, 1)?;
            match scalar(&args[0]) {
                Value::Null => Value::Null,
                Value::Bool(b) => Value::Bool(b),
                Value::Str(s) if s.eq_ignore_ascii_case("true") => Value::Bool(true),
                Value::Str(s) if s.eq_ignore_ascii_case("false") => Value::Bool(false),
                v => return Err(EvalError::Type(format!("cannot convert {v} to a boolean"))),
            }
        }
        "date" => {
            arity(name, args, 1)?;
            match string_arg(name, &args[0])? {
                Some(s) => Value::date(s),
                None => match scalar(&args[0]) {
                    Value::Date(d) => Value::Date(d),
                    _ => Value::Null,
                },
            }
        }
        "lower" | "upper" | "trim" => {
            arity(name, args, 1)?;
            match string_arg(name, &args[0])? {
                Some(s) => Value::str(match lower.as_str() {
                    "lower" => s.to_lowercase(),
                    "upper" => s.to_uppercase(),
                    _ => s.trim().to_string(),
                }),
                None => Value::Null,
            }
        }
        "substring" => {
            if args.len() != 2 && args.len() != 3 {
                return Err(EvalError::Type("substring expects 2 or 3 arguments".into()));
            }
            let Some(s) = string_arg(name, &args[0])? else { return Ok(Value::Null) };
            let int = |v: &Value| match scalar(v) {
                Value::Int(i) if i >= 0 => Ok(i as usize),
                v => Err(EvalError::Type(format!("substring expects a non-negative integer, found {v}"))),
            };
            let start = int(&args[1])?;
            let len = args.get(2).map(int).transpose()?.unwrap_or(usize::MAX);
            Value::str(s.chars().skip(start).take(len).collect::<String>())
        }
        "coalesce" => args
            .iter()
            .find(|v| match v {
                Value::Null => false,
                Value::Set(s) => !s.is_empty(),
                _ => true,
            })
            .cloned()
            .unwrap_or_default(),
        "id" => {
            arity(name, args, 1)?;
            match target_id(&args[0], name)? {
                Some(id) => Value::str(id.name()),
                None => Value::Null,
            }
        }
        _ => return Err(EvalError::UnknownFunction(name.to_string())),
    })
}

/// Evaluates an assignment expression over one group of bindings.
/// Aggregates fold over the whole group; the remaining expression is
/// evaluated per binding and the distinct results are unioned.
pub fn eval_grouped(e: &Expr, group: &[&Binding], env: &dyn Env) -> Result<Value, EvalError> {
    let folded = fold_aggregates(e, group, env)?;
    let empty = Binding::new();
    let rows: Vec<&Binding> = if group.is_empty() { vec![&empty] } else { group.to_vec() };
    let mut results: BTreeSet<Value> = BTreeSet::new();
    for r in rows {
        match eval(&folded, r, env)? {
            Value::Null => {}
            Value::Set(s) => results.extend(s),
            v => {
                results.insert(v);
            }
        }
    }
    Ok(match results.len() {
        0 => Value::Null,
        _ => Value::from_set(results),
    })
}

fn fold_aggregates(e: &Expr, group: &[&Binding], env: &dyn Env) -> Result<Expr, EvalError> {
    if !has_aggregate(e) {
        return Ok(e.clone());
    }
    let rec = |x: &Expr| fold_aggregates(x, group, env).map(Box::new);
    Ok(match e {
        Expr::Agg { func, arg } => Expr::Lit { value: aggregate(*func, arg.as_deref(), group, env)? },
        Expr::Prop { target, key } => Expr::Prop { target: rec(target)?, key: key.clone() },
        Expr::HasLabel { target, labels } => Expr::HasLabel { target: rec(target)?, labels: labels.clone() },
        Expr::Not { arg } => Expr::Not { arg: rec(arg)? },
        Expr::Neg { arg } => Expr::Neg { arg: rec(arg)? },
        Expr::Bin { op, lhs, rhs } => Expr::Bin { op: *op, lhs: rec(lhs)?, rhs: rec(rhs)? },
        Expr::Call { name, args } => Expr::Call {
            name: name.clone(),
            args: args.iter().map(|a| fold_aggregates(a, group, env)).collect::<Result<_, _>>()?,
        },
        Expr::Case { operand, branches, otherwise } => Expr::Case {
            operand: operand.as_deref().map(rec).transpose()?,
            branches: branches
                .iter()
                .map(|(c, r)| Ok((fold_aggregates(c, group, env)?, fold_aggregates(r, group, env)?)))
                .collect::<Result<_, EvalError>>()?,
            otherwise: otherwise.as_deref().map(rec).transpose()?,
        },
        Expr::List { items } => Expr::List {
            items: items.iter().map(|a| fold_aggregates(a, group, env)).collect::<Result<_, _>>()?,
        },
        Expr::Index { target, index } => Expr::Index { target: rec(target)?, index: rec(index)? },
        other => other.clone(),
    })
}

/// Folds an aggregate over a group. Unbound results are skipped and set
/// results contribute each of their elements.
pub fn aggregate(
    func: AggFn,
    arg: Option<&Expr>,
    group: &[&Binding],
    env: &dyn Env,
) -> Result<Value, EvalError> {
    let Some(arg) = arg else {
        return Ok(Value::Int(group.len() as i64));
    };
    let mut vals = Vec::new();
    for r in group {
        match eval(arg, r, env)? {
            Value::Null => {}
            Value::Set(s) => vals.extend(s),
            v => vals.push(v),
        }
    }
    let numeric = |vals: &[Value]| -> Result<(), EvalError> {
        match vals.iter().find(|v| v.as_f64().is_none()) {
            Some(v) => Err(EvalError::Type(format!("{} over non-numeric value {v}", func.name()))),
            None => Ok(()),
        }
    };
    Ok(match func {
        AggFn::Count => Value::Int(vals.len() as i64),
        AggFn::Collect => Value::List(vals),
        _ if vals.is_empty() => Value::Null,
        AggFn::Sum => {
            numeric(&vals)?;
            if vals.iter().all(|v| matches!(v, Value::Int(_))) {
                let mut acc: i64 = 0;
                for v in &vals {
                    if let Value::Int(i) = v {
                        acc = acc
                            .checked_add(*i)
                            .ok_or_else(|| EvalError::Type("integer overflow in SUM".into()))?;
                    }
                }
                Value::Int(acc)
            } else {
                Value::Real(vals.iter().filter_map(Value::as_f64).sum())
            }
        }
        AggFn::Avg => {
            numeric(&vals)?;
            Value::Real(vals.iter().filter_map(Value::as_f64).sum::<f64>() / vals.len() as f64)
        }
        AggFn::Min | AggFn::Max => {
            let numeric_all = vals.iter().all(|v| v.as_f64().is_some());
            let same_kind = vals.iter().all(|v| std::mem::discriminant(v) == std::mem::discriminant(&vals[0]));
            if !numeric_all && !same_kind {
                return Err(EvalError::Type(format!("{} over values of mixed types", func.name())));
            }
            let mut best = vals[0].clone();
            for v in &vals[1..] {
                let better = if func == AggFn::Min {
                    compare(CmpOp::Lt, v, &best)
                } else {
                    compare(CmpOp::Gt, v, &best)
                };
                if better {
                    best = v.clone();
                }
            }
            best
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::PathPropertyGraph;
    use crate::parser::ast::Var;

    struct GraphEnv(PathPropertyGraph);

    impl Env for GraphEnv {
        fn labels(&self, id: &Id) -> BTreeSet<Label> {
            self.0.labels(id).clone()
        }
        fn property(&self, id: &Id, key: &str) -> ValueSet {
            self.0.property(id, key).clone()
        }
        fn path_body(&self, id: &Id) -> Option<Vec<Id>> {
            self.0.path_body(id).map(<[Id]>::to_vec)
        }
        fn exists(&self, _: &Query, _: &Binding) -> Result<bool, EvalError> {
            Ok(false)
        }
    }

    fn env() -> GraphEnv {
        let mut b = PathPropertyGraph::builder();
        let (w, x, p) = (Id::node("106"), Id::node("102"), Id::node("105"));
        b.node(w.clone()).node(x.clone()).node(p.clone());
        b.property(&w, "name", Value::str("Houston"));
        b.label(&x, "Person").label(&x, "Manager").label(&p, "Person");
        GraphEnv(b.build())
    }

    fn bind(pairs: &[(&str, Value)]) -> Binding {
        pairs.iter().map(|(k, v)| (Var::new(*k), v.clone())).collect()
    }

    #[test]
    fn property_and_label_tests() {
        let env = env();
        let row = bind(&[("w", Value::Id(Id::node("106"))), ("x", Value::Id(Id::node("102")))]);
        let e = Expr::bin(BinOp::Eq, Expr::prop(Expr::var("w"), "name"), Expr::lit("Houston"));
        assert_eq!(eval(&e, &row, &env).unwrap(), Value::Bool(true));
        let l = Expr::HasLabel { target: Box::new(Expr::var("x")), labels: vec!["Person".into()] };
        assert_eq!(eval(&l, &row, &env).unwrap(), Value::Bool(true));
    }

    #[test]
    fn label_test_agrees_with_labels_function() {
        let env = env();
        for id in ["102", "105", "106"] {
            let row = bind(&[("x", Value::Id(Id::node(id)))]);
            let all = eval(&Expr::Call { name: "labels".into(), args: vec![Expr::var("x")] }, &row, &env)
                .unwrap()
                .to_set();
            for l in ["Person", "Manager", "City", "Tag"] {
                let t = Expr::HasLabel { target: Box::new(Expr::var("x")), labels: vec![l.into()] };
                assert_eq!(is_true(&eval(&t, &row, &env).unwrap()), all.contains(&Value::str(l)));
            }
        }
    }

    #[test]
    fn unbound_property_has_size_zero() {
        let env = env();
        let e = Expr::Call {
            name: "Size".into(),
            args: vec![Expr::prop(Expr::var("n"), "employer")],
        };
        assert_eq!(eval(&e, &Binding::new(), &env).unwrap(), Value::Int(0));
    }

    #[test]
    fn case_expressions() {
        let env = env();
        let case = |c: bool| Expr::Case {
            operand: None,
            branches: vec![(Expr::lit(c), Expr::lit(1))],
            otherwise: Some(Box::new(Expr::lit(2))),
        };
        assert_eq!(eval(&case(true), &Binding::new(), &env).unwrap(), Value::Int(1));
        assert_eq!(eval(&case(false), &Binding::new(), &env).unwrap(), Value::Int(2));
        let peter = bind(&[("n", Value::Id(Id::node("105")))]);
        let unemployed = Expr::Case {
            operand: None,
            branches: vec![(
                Expr::bin(
                    BinOp::Eq,
                    Expr::Call { name: "size".into(), args: vec![Expr::prop(Expr::var("n"), "employer")] },
                    Expr::lit(0),
                ),
                Expr::lit("unemployed"),
            )],
            otherwise: None,
        };
        assert_eq!(eval(&unemployed, &peter, &env).unwrap(), Value::str("unemployed"));
    }

    #[test]
    fn aggregates_over_groups() {
        let env = env();
        let rows: Vec<Binding> = (1..=3).map(|i| bind(&[("c", Value::Int(i))])).collect();
        let group: Vec<&Binding> = rows.iter().collect();
        let c = Expr::var("c");
        assert_eq!(aggregate(AggFn::Sum, Some(&c), &group, &env).unwrap(), Value::Int(6));
        assert_eq!(aggregate(AggFn::Count, None, &group, &env).unwrap(), Value::Int(3));
        assert_eq!(aggregate(AggFn::Count, None, &[], &env).unwrap(), Value::Int(0));
        assert_eq!(aggregate(AggFn::Max, Some(&c), &[], &env).unwrap(), Value::Null);
        assert_eq!(aggregate(AggFn::Avg, Some(&c), &group, &env).unwrap(), Value::Real(2.0));
        assert_eq!(aggregate(AggFn::Min, Some(&c), &group, &env).unwrap(), Value::Int(1));
        let mixed = [bind(&[("c", Value::Int(1))]), bind(&[("c", Value::str("a"))])];
        let mixed: Vec<&Binding> = mixed.iter().collect();
        assert!(aggregate(AggFn::Min, Some(&c), &mixed, &env).is_err());
        assert!(aggregate(AggFn::Sum, Some(&c), &mixed, &env).is_err());
        let e = Expr::bin(BinOp::Add, Expr::Agg { func: AggFn::Count, arg: None }, Expr::lit(1));
        assert_eq!(eval_grouped(&e, &group, &env).unwrap(), Value::Int(4));
        assert!(matches!(
            eval(&Expr::Agg { func: AggFn::Count, arg: None }, &Binding::new(), &env),
            Err(EvalError::MisplacedAggregate(_))
        ));
    }

    #[test]
    fn not_of_unbound_is_not_true() {
        let env = env();
        let e = Expr::Not { arg: Box::new(Expr::var("missing")) };
        assert!(!is_true(&eval(&e, &Binding::new(), &env).unwrap()));
    }
}
