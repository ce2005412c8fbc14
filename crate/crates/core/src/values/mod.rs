//! The value domain: literals, identifier references, value sets and lists,
//! with the multi-valued comparison rules used by WHERE and CONSTRUCT.

mod eval;

pub use eval::{eval, eval_grouped, has_aggregate, is_true, Env};

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};
use serde_json::json;

use crate::error::EvalError;
use crate::graph::{Id, Kind};

#[derive(Clone, Debug, Default)]
pub enum Value {
    /// Marker for an unbound variable.
    #[default]
    Null,
    Bool(bool),
    Int(i64),
    Real(f64),
    Str(Arc<str>),
    /// ISO-8601 text; ordered lexicographically.
    Date(Arc<str>),
    Id(Id),
    Set(BTreeSet<Value>),
    List(Vec<Value>),
}

impl Value {
    pub fn str(s: impl Into<Arc<str>>) -> Self {
        Value::Str(s.into())
    }

    pub fn date(s: impl Into<Arc<str>>) -> Self {
        Value::Date(s.into())
    }

    pub fn set(items: impl IntoIterator<Item = Value>) -> Self {
        Value::Set(items.into_iter().collect())
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Value::Null)
    }

    pub fn as_id(&self) -> Option<&Id> {
        match self {
            Value::Id(id) => Some(id),
            Value::Set(s) if s.len() == 1 => s.first().and_then(Value::as_id),
            _ => None,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Value::Null => 0,
            Value::Bool(_) => 1,
            Value::Int(_) => 2,
            Value::Real(_) => 3,
            Value::Str(_) => 4,
            Value::Date(_) => 5,
            Value::Id(_) => 6,
            Value::Set(_) => 7,
            Value::List(_) => 8,
        }
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Null => "null",
            Value::Bool(_) => "boolean",
            Value::Int(_) => "integer",
            Value::Real(_) => "real",
            Value::Str(_) => "string",
            Value::Date(_) => "date",
            Value::Id(id) => match id.kind() {
                Kind::Node => "node",
                Kind::Edge => "edge",
                Kind::Path => "path",
            },
            Value::Set(_) => "set",
            Value::List(_) => "list",
        }
    }

    /// The value seen as a set: sets as-is, lists by their elements, null as
    /// empty, scalars as singletons.
    pub fn to_set(&self) -> BTreeSet<Value> {
        match self {
            Value::Null => BTreeSet::new(),
            Value::Set(s) => s.clone(),
            Value::List(l) => l.iter().cloned().collect(),
            v => BTreeSet::from([v.clone()]),
        }
    }

    /// Collapses a singleton set to its element.
    pub fn unwrap_singleton(self) -> Self {
        match self {
            Value::Set(s) if s.len() == 1 => s.into_iter().next().unwrap_or_default(),
            v => v,
        }
    }

    /// A set of values as a value: singletons collapse, empty sets stay sets.
    pub fn from_set(s: BTreeSet<Value>) -> Self {
        Value::Set(s).unwrap_singleton()
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(i) => Some(*i as f64),
            Value::Real(r) => Some(*r),
            _ => None,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Value::Null => serde_json::Value::Null,
            Value::Bool(b) => json!(b),
            Value::Int(i) => json!(i),
            Value::Real(r) => json!(r),
            Value::Str(s) => json!(s.as_ref()),
            Value::Date(d) => json!({ "date": d.as_ref() }),
            Value::Id(id) => json!({ "ref": id.name(), "kind": id.kind() }),
            Value::Set(s) => json!({ "set": s.iter().map(Value::to_json).collect::<Vec<_>>() }),
            Value::List(l) => json!({ "list": l.iter().map(Value::to_json).collect::<Vec<_>>() }),
        }
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self, String> {
        use serde_json::Value as J;
        Ok(match v {
            J::Null => Value::Null,
            J::Bool(b) => Value::Bool(*b),
            J::Number(n) => match n.as_i64() {
                Some(i) => Value::Int(i),
                None => Value::Real(n.as_f64().ok_or_else(|| format!("bad number {n}"))?),
            },
            J::String(s) => Value::str(s.as_str()),
            J::Array(_) => return Err("nested arrays are not values; use {\"list\": [...]}".into()),
            J::Object(o) => {
                if let Some(J::String(d)) = o.get("date") {
                    Value::date(d.as_str())
                } else if let Some(J::String(r)) = o.get("ref") {
                    let kind = match o.get("kind").and_then(J::as_str) {
                        Some("node") | None => Kind::Node,
                        Some("edge") => Kind::Edge,
                        Some("path") => Kind::Path,
                        Some(k) => return Err(format!("unknown ref kind {k}")),
                    };
                    Value::Id(Id::new(kind, r.as_str()))
                } else if let Some(J::Array(items)) = o.get("list") {
                    Value::List(items.iter().map(Value::from_json).collect::<Result<_, _>>()?)
                } else if let Some(J::Array(items)) = o.get("set") {
                    Value::Set(items.iter().map(Value::from_json).collect::<Result<_, _>>()?)
                } else {
                    return Err(format!("unrecognised value object {v}"));
                }
            }
        })
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Value {}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Structural total order used for set storage and deterministic output.
impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        use Value::*;
        match (self, other) {
            (Null, Null) => Ordering::Equal,
            (Bool(a), Bool(b)) => a.cmp(b),
            (Int(a), Int(b)) => a.cmp(b),
            (Real(a), Real(b)) => a.total_cmp(b),
            (Str(a), Str(b)) | (Date(a), Date(b)) => a.cmp(b),
            (Id(a), Id(b)) => a.cmp(b),
            (Set(a), Set(b)) => a.cmp(b),
            (List(a), List(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl std::hash::Hash for Value {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.rank().hash(state);
        match self {
            Value::Null => {}
            Value::Bool(b) => b.hash(state),
            Value::Int(i) => i.hash(state),
            Value::Real(r) => r.to_bits().hash(state),
            Value::Str(s) | Value::Date(s) => s.hash(state),
            Value::Id(id) => id.hash(state),
            Value::Set(s) => s.iter().for_each(|v| v.hash(state)),
            Value::List(l) => l.iter().for_each(|v| v.hash(state)),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Null => f.write_str("null"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Real(r) => write!(f, "{r:?}"),
            Value::Str(s) => write!(f, "\"{s}\""),
            Value::Date(d) => write!(f, "{d}"),
            Value::Id(id) => write!(f, "#{id}"),
            Value::Set(s) if s.len() == 1 => write!(f, "{}", s.first().unwrap_or(&Value::Null)),
            Value::Set(s) => {
                f.write_str("{")?;
                for (i, v) in s.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("}")
            }
            Value::List(l) => {
                f.write_str("[")?;
                for (i, v) in l.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("]")
            }
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl From<i64> for Value {
    fn from(i: i64) -> Self {
        Value::Int(i)
    }
}

impl From<f64> for Value {
    fn from(r: f64) -> Self {
        Value::Real(r)
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::str(s)
    }
}

impl From<Id> for Value {
    fn from(id: Id) -> Self {
        Value::Id(id)
    }
}

/// Scalar equality with integer/real coercion.
pub fn scalar_eq(a: &Value, b: &Value) -> bool {
    match (a.as_f64(), b.as_f64()) {
        (Some(x), Some(y)) => x == y,
        _ => a == b,
    }
}

fn scalar_cmp(a: &Value, b: &Value) -> Option<Ordering> {
    use Value::*;
    if let (Some(x), Some(y)) = (a.as_f64(), b.as_f64()) {
        return x.partial_cmp(&y);
    }
    match (a, b) {
        (Bool(x), Bool(y)) => Some(x.cmp(y)),
        (Str(x), Str(y)) | (Date(x), Date(y)) => Some(x.cmp(y)),
        (Id(x), Id(y)) if x.kind() == y.kind() => Some(x.cmp(y)),
        _ => None,
    }
}

fn set_eq(a: &BTreeSet<Value>, b: &BTreeSet<Value>) -> bool {
    a.iter().all(|x| b.iter().any(|y| scalar_eq(x, y)))
        && b.iter().all(|y| a.iter().any(|x| scalar_eq(x, y)))
}

fn contains(set: &BTreeSet<Value>, x: &Value) -> bool {
    set.contains(x) || set.iter().any(|y| scalar_eq(x, y))
}

/// Comparison operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    In,
    Subset,
}

/// Applies a comparison. Any unbound operand yields false.
pub fn compare(op: CmpOp, lhs: &Value, rhs: &Value) -> bool {
    if lhs.is_null() || rhs.is_null() {
        return false;
    }
    match op {
        CmpOp::Eq => equals(lhs, rhs),
        CmpOp::Ne => !equals(lhs, rhs),
        CmpOp::In => {
            let elem = match lhs {
                Value::Set(s) if s.len() == 1 => s.first().cloned().unwrap_or_default(),
                Value::Set(_) => return false,
                v => v.clone(),
            };
            contains(&rhs.to_set(), &elem)
        }
        CmpOp::Subset => {
            let big = rhs.to_set();
            lhs.to_set().iter().all(|x| contains(&big, x))
        }
        CmpOp::Lt | CmpOp::Le | CmpOp::Gt | CmpOp::Ge => {
            let (a, b) = (lhs.clone().unwrap_singleton(), rhs.clone().unwrap_singleton());
            if matches!(a, Value::Set(_)) || matches!(b, Value::Set(_)) {
                return false;
            }
            match scalar_cmp(&a, &b) {
                Some(o) => match op {
                    CmpOp::Lt => o == Ordering::Less,
                    CmpOp::Le => o != Ordering::Greater,
                    CmpOp::Gt => o == Ordering::Greater,
                    _ => o != Ordering::Less,
                },
                None => false,
            }
        }
    }
}

fn equals(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::List(x), Value::List(y)) => {
            x.len() == y.len() && x.iter().zip(y).all(|(p, q)| equals(p, q))
        }
        (Value::Set(_), _) | (_, Value::Set(_)) => set_eq(&a.to_set(), &b.to_set()),
        _ => scalar_eq(a, b),
    }
}

/// Arithmetic operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
}

impl ArithOp {
    fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
            ArithOp::Mod => "%",
        }
    }
}

fn scalar_operand(v: &Value, op: &str) -> Result<Value, EvalError> {
    match v {
        Value::Set(s) if s.is_empty() => Ok(Value::Null),
        Value::Set(s) if s.len() == 1 => Ok(s.first().cloned().unwrap_or_default()),
        Value::Set(_) => Err(EvalError::Type(format!(
            "operator {op} applied to a multi-valued set {v}"
        ))),
        v => Ok(v.clone()),
    }
}

/// Arithmetic over singleton-coerced operands; unbound propagates.
pub fn arith(op: ArithOp, lhs: &Value, rhs: &Value) -> Result<Value, EvalError> {
    let a = scalar_operand(lhs, op.symbol())?;
    let b = scalar_operand(rhs, op.symbol())?;
    if a.is_null() || b.is_null() {
        return Ok(Value::Null);
    }
    let mismatch = || {
        EvalError::Type(format!(
            "cannot apply {} to {} and {}",
            op.symbol(),
            a.type_name(),
            b.type_name()
        ))
    };
    match (&a, &b) {
        (Value::Int(x), Value::Int(y)) => {
            let (x, y) = (*x, *y);
            match op {
                ArithOp::Add => x.checked_add(y).map(Value::Int).ok_or_else(overflow),
                ArithOp::Sub => x.checked_sub(y).map(Value::Int).ok_or_else(overflow),
                ArithOp::Mul => x.checked_mul(y).map(Value::Int).ok_or_else(overflow),
                ArithOp::Div if y == 0 => Err(EvalError::DivisionByZero),
                ArithOp::Div => Ok(Value::Real(x as f64 / y as f64)),
                ArithOp::Mod if y == 0 => Err(EvalError::DivisionByZero),
                ArithOp::Mod => Ok(Value::Int(x.rem_euclid(y))),
            }
        }
        (Value::Str(x), Value::Str(y)) if op == ArithOp::Add => {
            Ok(Value::str(format!("{x}{y}")))
        }
        _ => {
            let (x, y) = (a.as_f64().ok_or_else(mismatch)?, b.as_f64().ok_or_else(mismatch)?);
            match op {
                ArithOp::Add => Ok(Value::Real(x + y)),
                ArithOp::Sub => Ok(Value::Real(x - y)),
                ArithOp::Mul => Ok(Value::Real(x * y)),
                ArithOp::Div | ArithOp::Mod if y == 0.0 => Err(EvalError::DivisionByZero),
                ArithOp::Div => Ok(Value::Real(x / y)),
                ArithOp::Mod => Ok(Value::Real(x.rem_euclid(y))),
            }
        }
    }
}

fn overflow() -> EvalError {
    EvalError::Type("integer overflow".into())
}

pub fn negate(v: &Value) -> Result<Value, EvalError> {
    match scalar_operand(v, "-")? {
        Value::Null => Ok(Value::Null),
        Value::Int(i) => i.checked_neg().map(Value::Int).ok_or_else(overflow),
        Value::Real(r) => Ok(Value::Real(-r)),
        other => Err(EvalError::Type(format!("cannot negate a {}", other.type_name()))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: &str) -> Value {
        Value::str(x)
    }

    #[test]
    fn multi_valued_comparisons() {
        let emp = Value::set([s("CWI"), s("MIT")]);
        assert!(!compare(CmpOp::Eq, &s("MIT"), &emp));
        assert!(compare(CmpOp::In, &s("MIT"), &emp));
        assert!(compare(CmpOp::Subset, &Value::set([]), &emp));
        assert!(compare(CmpOp::Eq, &s("Acme"), &Value::set([s("Acme")])));
        assert!(compare(CmpOp::Subset, &s("CWI"), &emp));
        assert!(!compare(CmpOp::Subset, &emp, &s("CWI")));
    }

    #[test]
    fn equality_is_symmetric_and_coerces_numbers() {
        let cases = [
            Value::Int(1),
            Value::Real(1.0),
            Value::set([Value::Int(1)]),
            Value::set([Value::Int(1), Value::Int(2)]),
            s("1"),
            Value::set([]),
        ];
        for a in &cases {
            for b in &cases {
                assert_eq!(compare(CmpOp::Eq, a, b), compare(CmpOp::Eq, b, a), "{a} {b}");
            }
        }
        assert!(compare(CmpOp::Eq, &Value::Int(1), &Value::Real(1.0)));
        assert!(compare(CmpOp::Lt, &Value::Int(1), &Value::Real(1.5)));
    }

    #[test]
    fn every_comparison_with_unbound_is_false() {
        let ops = [
            CmpOp::Eq,
            CmpOp::Ne,
            CmpOp::Lt,
            CmpOp::Le,
            CmpOp::Gt,
            CmpOp::Ge,
            CmpOp::In,
            CmpOp::Subset,
        ];
        let others = [Value::Int(3), s("a"), Value::set([]), Value::Null, Value::Bool(true)];
        for op in ops {
            for v in &others {
                assert!(!compare(op, &Value::Null, v), "{op:?} null {v}");
                assert!(!compare(op, v, &Value::Null), "{op:?} {v} null");
            }
        }
    }

    #[test]
    fn ordering_needs_single_values() {
        assert!(!compare(CmpOp::Gt, &Value::set([]), &Value::Int(0)));
        assert!(!compare(CmpOp::Gt, &Value::set([Value::Int(1), Value::Int(5)]), &Value::Int(0)));
        assert!(compare(CmpOp::Gt, &Value::set([Value::Int(2)]), &Value::Int(0)));
        assert!(compare(CmpOp::Le, &Value::date("2014-12-01"), &Value::date("2015-01-01")));
        assert!(!compare(CmpOp::Lt, &s("a"), &Value::Int(1)));
    }

    #[test]
    fn arithmetic_rules() {
        assert_eq!(arith(ArithOp::Div, &Value::Int(1), &Value::Int(2)).unwrap(), Value::Real(0.5));
        assert_eq!(arith(ArithOp::Add, &Value::Int(1), &Value::Int(2)).unwrap(), Value::Int(3));
        assert_eq!(
            arith(ArithOp::Add, &Value::Int(1), &Value::set([Value::Int(4)])).unwrap(),
            Value::Int(5)
        );
        assert_eq!(arith(ArithOp::Add, &Value::Int(1), &Value::set([])).unwrap(), Value::Null);
        assert_eq!(
            arith(ArithOp::Div, &Value::Int(1), &Value::Int(0)),
            Err(EvalError::DivisionByZero)
        );
        assert!(matches!(
            arith(ArithOp::Mul, &s("a"), &Value::Int(2)),
            Err(EvalError::Type(_))
        ));
        assert_eq!(arith(ArithOp::Add, &s("a"), &s("b")).unwrap(), s("ab"));
    }

    #[test]
    fn display_collapses_singletons() {
        assert_eq!(Value::set([s("MIT")]).to_string(), "\"MIT\"");
        assert_eq!(Value::set([s("CWI"), s("MIT")]).to_string(), "{\"CWI\", \"MIT\"}");
        assert_eq!(Value::Id(Id::node("Alice")).to_string(), "#Alice");
    }

    #[test]
    fn json_round_trip() {
        let vals = [
            Value::Int(3),
            Value::Real(0.95),
            s("x"),
            Value::date("2014-12-01"),
            Value::Bool(false),
            Value::Id(Id::edge("e1")),
            Value::List(vec![Value::Int(1), s("a")]),
            Value::set([Value::Int(1), Value::Int(2)]),
        ];
        for v in vals {
            assert_eq!(Value::from_json(&v.to_json()).unwrap(), v);
        }
    }
}
