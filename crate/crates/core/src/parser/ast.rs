//! Query syntax tree.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::path::Regex;
use crate::values::Value;

/// A query variable. Parser-generated anonymous variables are named `_anonN`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Var(Arc<str>);

pub const ANON_PREFIX: &str = "_anon";

impl Var {
    pub fn new(name: impl Into<Arc<str>>) -> Self {
        Var(name.into())
    }

    pub fn anonymous(n: usize) -> Self {
        Var(format!("{ANON_PREFIX}{n}").into())
    }

    pub fn is_anonymous(&self) -> bool {
        self.0.starts_with(ANON_PREFIX)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Var {
    fn from(s: &str) -> Self {
        Var::new(s)
    }
}

/// Source position (1-based). Ignored by structural equality so that
/// re-parsed renderings compare equal.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl PartialEq for Span {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Query {
    pub heads: Vec<HeadClause>,
    pub body: Option<FullQuery>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "clause", rename_all = "lowercase")]
pub enum HeadClause {
    Path(PathClause),
    Graph(GraphClause),
}

/// `PATH name = walk, aux... [WHERE cond] [COST expr]`
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathClause {
    pub name: String,
    pub patterns: Vec<Chain>,
    pub where_: Option<Expr>,
    pub cost: Option<Expr>,
    pub span: Span,
}

/// `GRAPH [VIEW] name AS (query)`
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GraphClause {
    pub name: String,
    pub view: bool,
    pub query: Box<Query>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SetOp {
    Union,
    Intersect,
    Minus,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FullQuery {
    Basic(Box<BasicQuery>),
    Graph { name: String },
    Nested { query: Box<Query> },
    SetOp { op: SetOp, left: Box<FullQuery>, right: Box<FullQuery> },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BasicQuery {
    pub construct: Construct,
    pub match_: Match,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Construct {
    pub items: Vec<ConstructItem>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstructItem {
    pub target: ConstructTarget,
    pub set: Vec<SetItem>,
    pub remove: Vec<RemoveItem>,
    pub when: Option<Expr>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ConstructTarget {
    Graph { name: String },
    Pattern { chain: Chain },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SetItem {
    Property { var: Var, key: String, value: Expr },
    Label { var: Var, label: String },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RemoveItem {
    Property { var: Var, key: String },
    Label { var: Var, label: String },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Match {
    pub block: Block,
    pub optionals: Vec<Block>,
}

/// Comma-separated located patterns with an optional filter.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Block {
    pub patterns: Vec<Located>,
    pub where_: Option<Expr>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Located {
    pub chain: Chain,
    pub on: Option<Location>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Location {
    Name { name: String },
    Query { query: Box<Query> },
}

/// `(a)-[e]->(b)-/p/->(c)...`
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Chain {
    pub start: Element,
    pub steps: Vec<Step>,
    pub span: Span,
}

impl Chain {
    pub fn nodes(&self) -> impl Iterator<Item = &Element> + '_ {
        std::iter::once(&self.start).chain(self.steps.iter().map(|s| &s.node))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Step {
    pub connector: Connector,
    pub node: Element,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Out,
    In,
    Any,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Connector {
    Edge { element: Element, direction: Direction },
    Path { path: PathPattern, direction: Direction },
}

impl Connector {
    pub fn element(&self) -> &Element {
        match self {
            Connector::Edge { element, .. } => element,
            Connector::Path { path, .. } => &path.element,
        }
    }

    pub fn direction(&self) -> Direction {
        match self {
            Connector::Edge { direction, .. } | Connector::Path { direction, .. } => *direction,
        }
    }
}

/// Node, edge or path object description shared by MATCH and CONSTRUCT.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Element {
    pub var: Var,
    /// CONSTRUCT copy pattern `(x = y)`.
    pub copy: Option<Var>,
    /// CONSTRUCT grouping expressions.
    pub group: Vec<Expr>,
    /// Conjunction of disjunctions: `:A|B:C` is `[[A, B], [C]]`.
    pub labels: Vec<Vec<String>>,
    pub props: Vec<PropSpec>,
    pub span: Span,
}

impl Element {
    pub fn new(var: Var) -> Self {
        Element {
            var,
            copy: None,
            group: Vec::new(),
            labels: Vec::new(),
            props: Vec::new(),
            span: Span::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PropOp {
    /// MATCH `{k = e}` (or `{k: e}`); a bare variable on the right binds it
    /// to each stored value.
    Eq,
    /// CONSTRUCT `{k := e}`.
    Assign,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropSpec {
    pub key: String,
    pub op: PropOp,
    pub value: Expr,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum PathMode {
    Shortest { k: u32 },
    All,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathPattern {
    pub element: Element,
    /// `@`: stored path.
    pub stored: bool,
    pub mode: PathMode,
    pub regex: Option<Regex>,
    pub cost_var: Option<Var>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BinOp {
    Or,
    And,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    In,
    Subset,
    Add,
    Sub,
    Mul,
    Div,
    Mod,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Or => "OR",
            BinOp::And => "AND",
            BinOp::Eq => "=",
            BinOp::Ne => "<>",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::In => "IN",
            BinOp::Subset => "SUBSET OF",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
        }
    }

    /// Binding strength; larger binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq
            | BinOp::Ne
            | BinOp::Lt
            | BinOp::Le
            | BinOp::Gt
            | BinOp::Ge
            | BinOp::In
            | BinOp::Subset => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div | BinOp::Mod => 6,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum AggFn {
    Count,
    Min,
    Max,
    Sum,
    Avg,
    Collect,
}

impl AggFn {
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name.to_ascii_uppercase().as_str() {
            "COUNT" => AggFn::Count,
            "MIN" => AggFn::Min,
            "MAX" => AggFn::Max,
            "SUM" => AggFn::Sum,
            "AVG" => AggFn::Avg,
            "COLLECT" => AggFn::Collect,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            AggFn::Count => "COUNT",
            AggFn::Min => "MIN",
            AggFn::Max => "MAX",
            AggFn::Sum => "SUM",
            AggFn::Avg => "AVG",
            AggFn::Collect => "COLLECT",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "expr", rename_all = "lowercase")]
pub enum Expr {
    Lit { value: Value },
    Var { var: Var },
    Prop { target: Box<Expr>, key: String },
    /// `x:A|B`
    HasLabel { target: Box<Expr>, labels: Vec<String> },
    Not { arg: Box<Expr> },
    Neg { arg: Box<Expr> },
    Bin { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr> },
    Call { name: String, args: Vec<Expr> },
    /// `arg: None` is `COUNT(*)`.
    Agg { func: AggFn, arg: Option<Box<Expr>> },
    /// `implicit` marks a bare pattern written as a condition.
    Exists { query: Box<Query>, implicit: bool },
    Case {
        operand: Option<Box<Expr>>,
        branches: Vec<(Expr, Expr)>,
        otherwise: Option<Box<Expr>>,
    },
    List { items: Vec<Expr> },
    Index { target: Box<Expr>, index: Box<Expr> },
}

impl Expr {
    pub fn lit(value: impl Into<Value>) -> Self {
        Expr::Lit { value: value.into() }
    }

    pub fn var(v: impl Into<Var>) -> Self {
        Expr::Var { var: v.into() }
    }

    pub fn bin(op: BinOp, lhs: Expr, rhs: Expr) -> Self {
        Expr::Bin { op, lhs: Box::new(lhs), rhs: Box::new(rhs) }
    }

    pub fn prop(target: Expr, key: impl Into<String>) -> Self {
        Expr::Prop { target: Box::new(target), key: key.into() }
    }

    /// Visits every sub-expression, not descending into subqueries.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::Lit { .. } | Expr::Var { .. } | Expr::Exists { .. } => {}
            Expr::Prop { target, .. } | Expr::HasLabel { target, .. } => target.walk(f),
            Expr::Not { arg } | Expr::Neg { arg } => arg.walk(f),
            Expr::Bin { lhs, rhs, .. } => {
                lhs.walk(f);
                rhs.walk(f);
            }
            Expr::Call { args, .. } => args.iter().for_each(|a| a.walk(f)),
            Expr::Agg { arg, .. } => {
                if let Some(a) = arg {
                    a.walk(f)
                }
            }
            Expr::Case { operand, branches, otherwise } => {
                if let Some(o) = operand {
                    o.walk(f);
                }
                for (c, r) in branches {
                    c.walk(f);
                    r.walk(f);
                }
                if let Some(o) = otherwise {
                    o.walk(f);
                }
            }
            Expr::List { items } => items.iter().for_each(|a| a.walk(f)),
            Expr::Index { target, index } => {
                target.walk(f);
                index.walk(f);
            }
        }
    }

    /// Variables mentioned directly (outside subqueries).
    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.walk(&mut |e| {
            if let Expr::Var { var } = e {
                if !out.contains(var) {
                    out.push(var.clone());
                }
            }
        });
        out
    }

    /// Variables mentioned anywhere, including inside EXISTS subqueries.
    pub fn all_vars(&self) -> Vec<Var> {
        let mut out = self.vars();
        self.walk(&mut |e| {
            if let Expr::Exists { query, .. } = e {
                for v in query.mentioned_vars() {
                    if !out.contains(&v) {
                        out.push(v);
                    }
                }
            }
        });
        out
    }

    /// Splits a conjunction into its conjuncts.
    pub fn conjuncts(&self) -> Vec<&Expr> {
        match self {
            Expr::Bin { op: BinOp::And, lhs, rhs } => {
                let mut v = lhs.conjuncts();
                v.extend(rhs.conjuncts());
                v
            }
            e => vec![e],
        }
    }
}

impl Query {
    /// Every variable name occurring in patterns or expressions of the query.
    pub fn mentioned_vars(&self) -> Vec<Var> {
        let mut out: Vec<Var> = Vec::new();
        let mut push = |v: &Var| {
            if !out.contains(v) {
                out.push(v.clone());
            }
        };
        let mut exprs: Vec<&Expr> = Vec::new();
        let mut chains: Vec<&Chain> = Vec::new();
        for h in &self.heads {
            if let HeadClause::Path(p) = h {
                chains.extend(p.patterns.iter());
                exprs.extend(p.where_.iter());
                exprs.extend(p.cost.iter());
            }
        }
        if let Some(body) = &self.body {
            body.collect(&mut chains, &mut exprs);
        }
        for c in chains {
            for el in c.nodes().chain(c.steps.iter().map(|s| s.connector.element())) {
                push(&el.var);
                if let Some(y) = &el.copy {
                    push(y);
                }
                exprs.extend(el.group.iter());
                exprs.extend(el.props.iter().map(|p| &p.value));
            }
            for s in &c.steps {
                if let Connector::Path { path, .. } = &s.connector {
                    if let Some(cv) = &path.cost_var {
                        push(cv);
                    }
                }
            }
        }
        for e in exprs {
            for v in e.all_vars() {
                push(&v);
            }
        }
        out
    }
}

impl FullQuery {
    fn collect<'a>(&'a self, chains: &mut Vec<&'a Chain>, exprs: &mut Vec<&'a Expr>) {
        match self {
            FullQuery::Basic(b) => {
                for item in &b.construct.items {
                    if let ConstructTarget::Pattern { chain } = &item.target {
                        chains.push(chain);
                    }
                    exprs.extend(item.when.iter());
                    for s in &item.set {
                        if let SetItem::Property { value, .. } = s {
                            exprs.push(value);
                        }
                    }
                }
                for block in std::iter::once(&b.match_.block).chain(&b.match_.optionals) {
                    for loc in &block.patterns {
                        chains.push(&loc.chain);
                    }
                    exprs.extend(block.where_.iter());
                }
            }
            FullQuery::SetOp { left, right, .. } => {
                left.collect(chains, exprs);
                right.collect(chains, exprs);
            }
            FullQuery::Graph { .. } | FullQuery::Nested { .. } => {}
        }
    }
}
