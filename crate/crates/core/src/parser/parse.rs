use crate::error::ParseError;
use crate::path::{parse_regex_at, Regex};
use crate::values::Value;

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};

const RESERVED: &[&str] = &[
    "CONSTRUCT", "MATCH", "OPTIONAL", "WHERE", "ON", "UNION", "INTERSECT", "MINUS", "PATH",
    "GRAPH", "VIEW", "AS", "SET", "REMOVE", "WHEN", "GROUP", "SHORTEST", "ALL", "COST", "EXISTS",
    "CASE", "THEN", "ELSE", "END", "AND", "OR", "NOT", "IN", "SUBSET", "OF", "TRUE", "FALSE",
    "NULL",
];

fn is_reserved(s: &str) -> bool {
    RESERVED.iter().any(|k| k.eq_ignore_ascii_case(s))
}

pub(crate) struct Parser<'s> {
    src: &'s str,
    toks: Vec<Token>,
    pos: usize,
    anon: usize,
    /// Inside a GROUP list, where `x :L` introduces construct labels.
    in_group: bool,
}

type PResult<T> = Result<T, ParseError>;

impl<'s> Parser<'s> {
    pub(crate) fn new(src: &'s str) -> PResult<Self> {
        Ok(Parser { src, toks: tokenize(src)?, pos: 0, anon: 0, in_group: false })
    }

    fn tok(&self) -> &Token {
        &self.toks[self.pos.min(self.toks.len() - 1)]
    }

    fn peek(&self) -> &Tok {
        &self.tok().tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) {
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
    }

    fn span(&self) -> Span {
        Span { line: self.tok().line, col: self.tok().col }
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        let t = self.tok();
        ParseError::Syntax { line: t.line, col: t.col, message: message.into() }
    }

    fn found(&self) -> String {
        match self.peek() {
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Int(i) => i.to_string(),
            Tok::Real(r) => r.to_string(),
            Tok::Str(s) => format!("string '{s}'"),
            Tok::Sym(s) => format!("'{s}'"),
            Tok::Eof => "end of input".into(),
        }
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(t) if *t == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        let hit = self.is_sym(s);
        if hit {
            self.bump();
        }
        hit
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(self.error(format!("expected '{s}' but found {}", self.found())))
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s.eq_ignore_ascii_case(kw))
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        let hit = self.is_kw(kw);
        if hit {
            self.bump();
        }
        hit
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.error(format!("expected {kw} but found {}", self.found())))
        }
    }

    /// Any identifier, reserved or not (labels, keys, function names).
    fn name(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.error(format!("expected a name but found {}", self.found()))),
        }
    }

    fn at_user_ident(&self) -> bool {
        matches!(self.peek(), Tok::Ident(s) if !is_reserved(s))
    }

    fn user_ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_reserved(&s) => {
                if s.starts_with(ANON_PREFIX) {
                    return Err(self.error(format!("names starting with {ANON_PREFIX} are reserved")));
                }
                self.bump();
                Ok(s)
            }
            _ => Err(self.error(format!("expected a name but found {}", self.found()))),
        }
    }

    fn var(&mut self) -> PResult<Var> {
        self.user_ident().map(Var::new)
    }

    fn fresh(&mut self) -> Var {
        let v = Var::anonymous(self.anon);
        self.anon += 1;
        v
    }

    pub(crate) fn finish(&mut self) -> PResult<()> {
        self.eat_sym(";");
        if *self.peek() != Tok::Eof {
            return Err(self.error(format!("unexpected {} after the end of the query", self.found())));
        }
        Ok(())
    }

    // ---- queries ----

    pub(crate) fn query(&mut self) -> PResult<Query> {
        let mut heads = Vec::new();
        loop {
            if self.is_kw("PATH") {
                heads.push(HeadClause::Path(self.path_clause()?));
            } else if self.is_kw("GRAPH") {
                heads.push(HeadClause::Graph(self.graph_clause()?));
            } else {
                break;
            }
        }
        let starts_body =
            self.is_kw("CONSTRUCT") || self.is_sym("(") || self.at_user_ident();
        let body = if starts_body {
            Some(self.full_query()?)
        } else if heads.iter().any(|h| matches!(h, HeadClause::Graph(g) if g.view)) {
            None
        } else {
            return Err(self.error(format!("expected CONSTRUCT/PATH/GRAPH but found {}", self.found())));
        };
        Ok(Query { heads, body })
    }

    fn path_clause(&mut self) -> PResult<PathClause> {
        let span = self.span();
        self.expect_kw("PATH")?;
        let name = self.user_ident()?;
        self.expect_sym("=")?;
        let mut patterns = vec![self.chain()?];
        while self.eat_sym(",") {
            patterns.push(self.chain()?);
        }
        let (mut where_, mut cost) = (None, None);
        loop {
            if where_.is_none() && self.eat_kw("WHERE") {
                where_ = Some(self.expr()?);
            } else if cost.is_none() && self.eat_kw("COST") {
                cost = Some(self.expr()?);
            } else {
                break;
            }
        }
        Ok(PathClause { name, patterns, where_, cost, span })
    }

    fn graph_clause(&mut self) -> PResult<GraphClause> {
        self.expect_kw("GRAPH")?;
        let view = self.eat_kw("VIEW");
        let name = self.user_ident()?;
        self.expect_kw("AS")?;
        self.expect_sym("(")?;
        let query = self.query()?;
        self.expect_sym(")")?;
        Ok(GraphClause { name, view, query: Box::new(query) })
    }

    fn full_query(&mut self) -> PResult<FullQuery> {
        let mut left = self.operand()?;
        loop {
            let op = if self.eat_kw("UNION") {
                SetOp::Union
            } else if self.eat_kw("INTERSECT") {
                SetOp::Intersect
            } else if self.eat_kw("MINUS") {
                SetOp::Minus
            } else {
                return Ok(left);
            };
            let right = self.operand()?;
            left = FullQuery::SetOp { op, left: Box::new(left), right: Box::new(right) };
        }
    }

    fn operand(&mut self) -> PResult<FullQuery> {
        if self.is_kw("CONSTRUCT") {
            return Ok(FullQuery::Basic(Box::new(self.basic()?)));
        }
        if self.eat_sym("(") {
            let q = self.query()?;
            self.expect_sym(")")?;
            return Ok(FullQuery::Nested { query: Box::new(q) });
        }
        if self.at_user_ident() {
            return Ok(FullQuery::Graph { name: self.user_ident()? });
        }
        Err(self.error(format!("expected CONSTRUCT, '(' or a graph name but found {}", self.found())))
    }

    fn basic(&mut self) -> PResult<BasicQuery> {
        self.expect_kw("CONSTRUCT")?;
        let construct = self.construct()?;
        self.expect_kw("MATCH")?;
        let block = self.block()?;
        let mut optionals = Vec::new();
        while self.eat_kw("OPTIONAL") {
            optionals.push(self.block()?);
        }
        Ok(BasicQuery { construct, match_: Match { block, optionals } })
    }

    fn construct(&mut self) -> PResult<Construct> {
        let mut items = Vec::new();
        loop {
            let target = if self.is_sym("(") {
                ConstructTarget::Pattern { chain: self.chain()? }
            } else if self.at_user_ident() {
                ConstructTarget::Graph { name: self.user_ident()? }
            } else {
                return Err(self.error(format!(
                    "expected a construct pattern or graph name but found {}",
                    self.found()
                )));
            };
            let mut item = ConstructItem { target, set: Vec::new(), remove: Vec::new(), when: None };
            loop {
                if self.eat_kw("SET") {
                    loop {
                        item.set.push(self.set_item()?);
                        if !(self.is_sym(",") && self.assignment_follows()) {
                            break;
                        }
                        self.bump();
                    }
                } else if self.eat_kw("REMOVE") {
                    loop {
                        item.remove.push(self.remove_item()?);
                        if !(self.is_sym(",") && self.assignment_follows()) {
                            break;
                        }
                        self.bump();
                    }
                } else if item.when.is_none() && self.eat_kw("WHEN") {
                    item.when = Some(self.expr()?);
                } else {
                    break;
                }
            }
            items.push(item);
            if !self.eat_sym(",") {
                return Ok(Construct { items });
            }
        }
    }

    /// After a comma: does `x.k` or `x:L` follow?
    fn assignment_follows(&self) -> bool {
        matches!(self.peek_at(1), Tok::Ident(_))
            && matches!(self.peek_at(2), Tok::Sym(".") | Tok::Sym(":"))
    }

    fn set_item(&mut self) -> PResult<SetItem> {
        let var = self.var()?;
        if self.eat_sym(".") {
            let key = self.name()?;
            self.expect_sym(":=")?;
            let value = self.expr()?;
            Ok(SetItem::Property { var, key, value })
        } else {
            self.expect_sym(":")?;
            Ok(SetItem::Label { var, label: self.name()? })
        }
    }

    fn remove_item(&mut self) -> PResult<RemoveItem> {
        let var = self.var()?;
        if self.eat_sym(".") {
            Ok(RemoveItem::Property { var, key: self.name()? })
        } else {
            self.expect_sym(":")?;
            Ok(RemoveItem::Label { var, label: self.name()? })
        }
    }

    fn block(&mut self) -> PResult<Block> {
        let mut patterns = vec![self.located()?];
        while self.eat_sym(",") {
            patterns.push(self.located()?);
        }
        let where_ = if self.eat_kw("WHERE") { Some(self.expr()?) } else { None };
        Ok(Block { patterns, where_ })
    }

    fn located(&mut self) -> PResult<Located> {
        let chain = self.chain()?;
        let on = if self.eat_kw("ON") {
            if self.eat_sym("(") {
                let q = self.query()?;
                self.expect_sym(")")?;
                Some(Location::Query { query: Box::new(q) })
            } else {
                Some(Location::Name { name: self.user_ident()? })
            }
        } else {
            None
        };
        Ok(Located { chain, on })
    }

    // ---- patterns ----

    fn chain(&mut self) -> PResult<Chain> {
        let span = self.span();
        let start = self.node_pattern()?;
        let mut steps = Vec::new();
        while self.is_sym("-") || (self.is_sym("<") && matches!(self.peek_at(1), Tok::Sym("-"))) {
            let connector = self.connector()?;
            let node = self.node_pattern()?;
            steps.push(Step { connector, node });
        }
        Ok(Chain { start, steps, span })
    }

    fn node_pattern(&mut self) -> PResult<Element> {
        self.expect_sym("(")?;
        let el = self.element()?;
        self.expect_sym(")")?;
        Ok(el)
    }

    fn element(&mut self) -> PResult<Element> {
        let span = self.span();
        let var = if self.at_user_ident() { self.var()? } else { self.fresh() };
        let mut el = Element::new(var);
        el.span = span;
        if self.eat_sym("=") {
            el.copy = Some(self.var()?);
        }
        if self.eat_kw("GROUP") {
            self.in_group = true;
            let group = self.group_list();
            self.in_group = false;
            el.group = group?;
        }
        el.labels = self.labels()?;
        el.props = self.props()?;
        Ok(el)
    }

    fn group_list(&mut self) -> PResult<Vec<Expr>> {
        let mut out = vec![self.expr()?];
        while self.eat_sym(",") {
            out.push(self.expr()?);
        }
        Ok(out)
    }

    fn labels(&mut self) -> PResult<Vec<Vec<String>>> {
        let mut out = Vec::new();
        while self.eat_sym(":") {
            let mut alts = vec![self.name()?];
            while self.eat_sym("|") {
                alts.push(self.name()?);
            }
            out.push(alts);
        }
        Ok(out)
    }

    fn props(&mut self) -> PResult<Vec<PropSpec>> {
        let mut out = Vec::new();
        if !self.eat_sym("{") {
            return Ok(out);
        }
        if self.eat_sym("}") {
            return Ok(out);
        }
        loop {
            let key = self.name()?;
            let op = if self.eat_sym(":=") {
                PropOp::Assign
            } else if self.eat_sym("=") || self.eat_sym(":") {
                PropOp::Eq
            } else {
                return Err(self.error(format!("expected ':=', '=' or ':' but found {}", self.found())));
            };
            let value = self.expr()?;
            out.push(PropSpec { key, op, value });
            if self.eat_sym("}") {
                return Ok(out);
            }
            self.expect_sym(",")?;
        }
    }

    fn connector(&mut self) -> PResult<Connector> {
        if self.eat_sym("<") {
            self.expect_sym("-")?;
            if self.eat_sym("[") {
                let element = self.element()?;
                self.expect_sym("]")?;
                self.expect_sym("-")?;
                return Ok(Connector::Edge { element, direction: Direction::In });
            }
            if self.eat_sym("/") {
                let path = self.path_inner()?;
                self.expect_sym("/")?;
                self.expect_sym("-")?;
                return Ok(Connector::Path { path, direction: Direction::In });
            }
            let element = Element::new(self.fresh());
            return Ok(Connector::Edge { element, direction: Direction::In });
        }
        self.expect_sym("-")?;
        let out = |p: &mut Self| if p.eat_sym(">") { Direction::Out } else { Direction::Any };
        if self.eat_sym("[") {
            let element = self.element()?;
            self.expect_sym("]")?;
            self.expect_sym("-")?;
            let direction = out(self);
            return Ok(Connector::Edge { element, direction });
        }
        if self.eat_sym("/") {
            let path = self.path_inner()?;
            self.expect_sym("/")?;
            self.expect_sym("-")?;
            let direction = out(self);
            return Ok(Connector::Path { path, direction });
        }
        let element = Element::new(self.fresh());
        let direction = out(self);
        Ok(Connector::Edge { element, direction })
    }

    fn path_inner(&mut self) -> PResult<PathPattern> {
        let span = self.span();
        let stored = self.eat_sym("@");
        let mode = if let Tok::Int(k) = *self.peek() {
            self.bump();
            self.expect_kw("SHORTEST")?;
            let k = u32::try_from(k)
                .ok()
                .filter(|k| *k >= 1)
                .ok_or_else(|| self.error("SHORTEST needs a positive count"))?;
            PathMode::Shortest { k }
        } else if self.eat_kw("SHORTEST") {
            PathMode::Shortest { k: 1 }
        } else if self.eat_kw("ALL") {
            PathMode::All
        } else {
            PathMode::Shortest { k: 1 }
        };
        let var = if self.at_user_ident() { self.var()? } else { self.fresh() };
        let mut element = Element::new(var);
        element.span = span;
        element.labels = self.labels()?;
        let regex = if self.is_sym("<>") {
            return Err(self.error("empty regular expression"));
        } else if self.is_sym("<") {
            Some(self.regex()?)
        } else {
            None
        };
        let cost_var = if self.eat_kw("COST") { Some(self.var()?) } else { None };
        element.props = self.props()?;
        Ok(PathPattern { element, stored, mode, regex, cost_var })
    }

    fn regex(&mut self) -> PResult<Regex> {
        let open = self.tok().clone();
        let close = (self.pos + 1..self.toks.len())
            .find(|&i| matches!(self.toks[i].tok, Tok::Sym(">") | Tok::Sym(">=")))
            .ok_or_else(|| self.error("unterminated regular expression, expected '>'"))?;
        if matches!(self.toks[close].tok, Tok::Sym(">=")) {
            return Err(self.error("unterminated regular expression, expected '>'"));
        }
        let text = &self.src[open.end..self.toks[close].start];
        let r = parse_regex_at(text, open.line, open.col + 1)?;
        self.pos = close + 1;
        Ok(r)
    }

    // ---- expressions ----

    pub(crate) fn expr(&mut self) -> PResult<Expr> {
        self.or_expr()
    }

    fn or_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.and_expr()?;
        while self.eat_kw("OR") {
            lhs = Expr::bin(BinOp::Or, lhs, self.and_expr()?);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.not_expr()?;
        while self.eat_kw("AND") {
            lhs = Expr::bin(BinOp::And, lhs, self.not_expr()?);
        }
        Ok(lhs)
    }

    fn not_expr(&mut self) -> PResult<Expr> {
        if self.eat_kw("NOT") {
            return Ok(Expr::Not { arg: Box::new(self.not_expr()?) });
        }
        self.cmp_expr()
    }

    fn cmp_expr(&mut self) -> PResult<Expr> {
        let lhs = self.add_expr()?;
        let op = match self.peek() {
            Tok::Sym("=") => BinOp::Eq,
            Tok::Sym("<>") | Tok::Sym("!=") => BinOp::Ne,
            Tok::Sym("<") => BinOp::Lt,
            Tok::Sym("<=") => BinOp::Le,
            Tok::Sym(">") => BinOp::Gt,
            Tok::Sym(">=") => BinOp::Ge,
            _ if self.is_kw("IN") => BinOp::In,
            _ if self.is_kw("SUBSET") => {
                self.bump();
                if !self.is_kw("OF") {
                    return Err(self.error("expected OF after SUBSET"));
                }
                BinOp::Subset
            }
            _ => return Ok(lhs),
        };
        self.bump();
        Ok(Expr::bin(op, lhs, self.add_expr()?))
    }

    fn add_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.mul_expr()?;
        loop {
            let op = if self.is_sym("+") {
                BinOp::Add
            } else if self.is_sym("-") {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            self.bump();
            lhs = Expr::bin(op, lhs, self.mul_expr()?);
        }
    }

    fn mul_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Sym("*") => BinOp::Mul,
                Tok::Sym("/") => BinOp::Div,
                Tok::Sym("%") => BinOp::Mod,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::bin(op, lhs, self.unary()?);
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.eat_sym("-") {
            return Ok(match self.unary()? {
                Expr::Lit { value: Value::Int(i) } if i != i64::MIN => Expr::lit(-i),
                Expr::Lit { value: Value::Real(r) } => Expr::lit(-r),
                arg => Expr::Neg { arg: Box::new(arg) },
            });
        }
        self.postfix()
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.primary()?;
        loop {
            if self.is_sym(".") && matches!(self.peek_at(1), Tok::Ident(_)) {
                self.bump();
                e = Expr::Prop { target: Box::new(e), key: self.name()? };
            } else if self.eat_sym("[") {
                let index = self.expr()?;
                self.expect_sym("]")?;
                e = Expr::Index { target: Box::new(e), index: Box::new(index) };
            } else {
                return Ok(e);
            }
        }
    }

    fn primary(&mut self) -> PResult<Expr> {
        match self.peek().clone() {
            Tok::Int(i) => {
                self.bump();
                Ok(Expr::lit(i))
            }
            Tok::Real(r) => {
                self.bump();
                Ok(Expr::lit(r))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Expr::lit(s.as_str()))
            }
            Tok::Sym("(") => self.paren_or_pattern(),
            Tok::Sym("[") => {
                self.bump();
                let mut items = Vec::new();
                if !self.eat_sym("]") {
                    loop {
                        items.push(self.expr()?);
                        if self.eat_sym("]") {
                            break;
                        }
                        self.expect_sym(",")?;
                    }
                }
                Ok(Expr::List { items })
            }
            Tok::Ident(word) => self.word(&word),
            _ => Err(self.error(format!("expected an expression but found {}", self.found()))),
        }
    }

    fn paren_or_pattern(&mut self) -> PResult<Expr> {
        let (save_pos, save_anon, save_group) = (self.pos, self.anon, self.in_group);
        self.in_group = false;
        let attempt = self.chain();
        self.in_group = save_group;
        if let Ok(chain) = attempt {
            if !chain.steps.is_empty() {
                return Ok(self.implicit_exists(chain));
            }
        }
        self.pos = save_pos;
        self.anon = save_anon;
        self.expect_sym("(")?;
        self.in_group = false;
        let e = self.expr();
        self.in_group = save_group;
        let e = e?;
        self.expect_sym(")")?;
        Ok(e)
    }

    fn implicit_exists(&mut self, chain: Chain) -> Expr {
        let span = chain.span;
        let target = Chain { start: Element::new(self.fresh()), steps: Vec::new(), span };
        let query = Query {
            heads: Vec::new(),
            body: Some(FullQuery::Basic(Box::new(BasicQuery {
                construct: Construct {
                    items: vec![ConstructItem {
                        target: ConstructTarget::Pattern { chain: target },
                        set: Vec::new(),
                        remove: Vec::new(),
                        when: None,
                    }],
                },
                match_: Match {
                    block: Block { patterns: vec![Located { chain, on: None }], where_: None },
                    optionals: Vec::new(),
                },
            }))),
        };
        Expr::Exists { query: Box::new(query), implicit: true }
    }

    fn word(&mut self, word: &str) -> PResult<Expr> {
        let upper = word.to_ascii_uppercase();
        match upper.as_str() {
            "TRUE" | "FALSE" => {
                self.bump();
                return Ok(Expr::lit(upper == "TRUE"));
            }
            "NULL" => {
                self.bump();
                return Ok(Expr::Lit { value: Value::Null });
            }
            "EXISTS" => {
                self.bump();
                self.expect_sym("(")?;
                let q = self.query()?;
                self.expect_sym(")")?;
                return Ok(Expr::Exists { query: Box::new(q), implicit: false });
            }
            "CASE" => {
                self.bump();
                return self.case();
            }
            _ => {}
        }
        if matches!(self.peek_at(1), Tok::Sym("(")) {
            self.bump();
            self.bump();
            if let Some(func) = AggFn::from_name(word) {
                let arg = if self.eat_sym("*") {
                    if func != AggFn::Count {
                        return Err(self.error(format!("{}(*) is not allowed", func.name())));
                    }
                    None
                } else {
                    Some(Box::new(self.expr()?))
                };
                self.expect_sym(")")?;
                return Ok(Expr::Agg { func, arg });
            }
            let mut args = Vec::new();
            if !self.eat_sym(")") {
                loop {
                    args.push(self.expr()?);
                    if self.eat_sym(")") {
                        break;
                    }
                    self.expect_sym(",")?;
                }
            }
            return Ok(Expr::Call { name: word.to_string(), args });
        }
        if is_reserved(word) {
            return Err(self.error(format!("unexpected keyword {word}")));
        }
        let var = self.var()?;
        let target = Expr::Var { var };
        if !self.in_group && self.is_sym(":") {
            self.bump();
            let mut labels = vec![self.name()?];
            while self.eat_sym("|") {
                labels.push(self.name()?);
            }
            return Ok(Expr::HasLabel { target: Box::new(target), labels });
        }
        Ok(target)
    }

    fn case(&mut self) -> PResult<Expr> {
        let operand = if self.is_kw("WHEN") { None } else { Some(Box::new(self.expr()?)) };
        let mut branches = Vec::new();
        while self.eat_kw("WHEN") {
            let cond = self.expr()?;
            self.expect_kw("THEN")?;
            branches.push((cond, self.expr()?));
        }
        if branches.is_empty() {
            return Err(self.error("CASE needs at least one WHEN branch"));
        }
        let otherwise = if self.eat_kw("ELSE") { Some(Box::new(self.expr()?)) } else { None };
        self.expect_kw("END")?;
        Ok(Expr::Case { operand, branches, otherwise })
    }
}
