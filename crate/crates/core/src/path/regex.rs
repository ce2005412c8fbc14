//! Regular expressions over edge labels, node labels and path views.
//!
//! Concrete syntax:
//! `_` any edge (either direction), `l` or `:l` forward edge, `^l` or `l⁻`
//! inverse edge, `(:l)` node label test, `~view` path view, `r*` star,
//! juxtaposition for concatenation and `+` or `|` for alternation.

use std::fmt;

use serde::Serialize;

use crate::error::ParseError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "re", rename_all = "lowercase")]
pub enum Regex {
    Any,
    Edge { label: String },
    Inverse { label: String },
    Node { label: String },
    View { name: String },
    Alt { left: Box<Regex>, right: Box<Regex> },
    Concat { left: Box<Regex>, right: Box<Regex> },
    Star { inner: Box<Regex> },
}

impl Regex {
    pub fn edge(l: &str) -> Self {
        Regex::Edge { label: l.into() }
    }

    pub fn inverse(l: &str) -> Self {
        Regex::Inverse { label: l.into() }
    }

    pub fn node(l: &str) -> Self {
        Regex::Node { label: l.into() }
    }

    pub fn view(n: &str) -> Self {
        Regex::View { name: n.into() }
    }

    pub fn alt(a: Regex, b: Regex) -> Self {
        Regex::Alt { left: Box::new(a), right: Box::new(b) }
    }

    pub fn concat(a: Regex, b: Regex) -> Self {
        Regex::Concat { left: Box::new(a), right: Box::new(b) }
    }

    pub fn star(r: Regex) -> Self {
        Regex::Star { inner: Box::new(r) }
    }

    /// `_*`, the default when a path pattern has no expression.
    pub fn any_walk() -> Self {
        Regex::star(Regex::Any)
    }

    /// Names of referenced path views.
    pub fn views(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_views(&mut out);
        out
    }

    fn collect_views(&self, out: &mut Vec<String>) {
        match self {
            Regex::View { name } if !out.contains(name) => out.push(name.clone()),
            Regex::Alt { left, right } | Regex::Concat { left, right } => {
                left.collect_views(out);
                right.collect_views(out);
            }
            Regex::Star { inner } => inner.collect_views(out),
            _ => {}
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Regex::Alt { .. } => 1,
            Regex::Concat { .. } => 2,
            Regex::Star { .. } => 3,
            _ => 4,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let paren = self.precedence() < min;
        if paren {
            f.write_str("(")?;
        }
        match self {
            Regex::Any => f.write_str("_")?,
            Regex::Edge { label } => write!(f, ":{label}")?,
            Regex::Inverse { label } => write!(f, "^:{label}")?,
            Regex::Node { label } => write!(f, "(:{label})")?,
            Regex::View { name } => write!(f, "~{name}")?,
            Regex::Alt { left, right } => {
                left.fmt_at(f, 1)?;
                f.write_str(" + ")?;
                right.fmt_at(f, 2)?;
            }
            Regex::Concat { left, right } => {
                left.fmt_at(f, 2)?;
                f.write_str(" ")?;
                right.fmt_at(f, 3)?;
            }
            Regex::Star { inner } => {
                inner.fmt_at(f, 4)?;
                f.write_str("*")?;
            }
        }
        if paren {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Regex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}

/// Parses a regular expression.
pub fn parse_regex(text: &str) -> Result<Regex, ParseError> {
    parse_regex_at(text, 1, 1)
}

/// Parses a regular expression embedded at the given source position.
pub(crate) fn parse_regex_at(text: &str, line: usize, col: usize) -> Result<Regex, ParseError> {
    let mut p = RegexParser { chars: text.chars().collect(), pos: 0, line, col };
    p.skip_ws();
    if p.at_end() {
        return Err(p.error("empty regular expression"));
    }
    let r = p.alt()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.error(&format!("unexpected '{}' in regular expression", p.chars[p.pos])));
    }
    Ok(r)
}

struct RegexParser {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

impl RegexParser {
    fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, off: usize) -> Option<char> {
        self.chars.get(self.pos + off).copied()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn error(&self, msg: &str) -> ParseError {
        let col = self.col + self.chars[..self.pos.min(self.chars.len())]
            .iter()
            .rev()
            .take_while(|c| **c != '\n')
            .count();
        let line = self.line + self.chars[..self.pos.min(self.chars.len())]
            .iter()
            .filter(|c| **c == '\n')
            .count();
        ParseError::Syntax { line, col, message: msg.to_string() }
    }

    fn alt(&mut self) -> Result<Regex, ParseError> {
        let mut left = self.concat()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some('+') | Some('|') => {
                    self.pos += 1;
                    let right = self.concat()?;
                    left = Regex::alt(left, right);
                }
                _ => return Ok(left),
            }
        }
    }

    fn starts_atom(&self) -> bool {
        matches!(self.peek(), Some(c) if is_ident_char(c) || matches!(c, '(' | ':' | '^' | '~'))
    }

    fn concat(&mut self) -> Result<Regex, ParseError> {
        self.skip_ws();
        if !self.starts_atom() {
            return Err(match self.peek() {
                Some(c) => self.error(&format!("expected a label, '_', '(' or '~' but found '{c}'")),
                None => self.error("unexpected end of regular expression"),
            });
        }
        let mut left = self.postfix()?;
        loop {
            self.skip_ws();
            if !self.starts_atom() {
                return Ok(left);
            }
            let right = self.postfix()?;
            left = Regex::concat(left, right);
        }
    }

    fn postfix(&mut self) -> Result<Regex, ParseError> {
        let mut r = self.atom()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    r = Regex::star(r);
                }
                Some('⁻') | Some('^') => {
                    return Err(self.error("inverse marker must follow an edge label"));
                }
                _ => return Ok(r),
            }
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.peek().is_some_and(is_ident_char) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected a label name"));
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    fn inverse_suffix(&mut self) -> bool {
        if self.peek() == Some('⁻') {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn atom(&mut self) -> Result<Regex, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                self.skip_ws();
                if self.peek() == Some(':') {
                    // (:Label) node test, unless it is a parenthesised edge group
                    let save = self.pos;
                    self.pos += 1;
                    let label = self.ident()?;
                    self.skip_ws();
                    if self.peek() == Some(')') {
                        self.pos += 1;
                        return Ok(Regex::node(&label));
                    }
                    self.pos = save;
                }
                let inner = self.alt()?;
                self.skip_ws();
                if self.peek() != Some(')') {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some('~') => {
                self.pos += 1;
                let name = self.ident()?;
                if matches!(self.peek(), Some('⁻') | Some('^')) {
                    return Err(self.error("a path view cannot be traversed inversely"));
                }
                Ok(Regex::view(&name))
            }
            Some('^') => {
                self.pos += 1;
                self.skip_ws();
                if self.peek() == Some(':') {
                    self.pos += 1;
                }
                if self.peek() == Some('~') {
                    return Err(self.error("a path view cannot be traversed inversely"));
                }
                let label = self.ident()?;
                if label == "_" {
                    return Ok(Regex::Any);
                }
                Ok(Regex::inverse(&label))
            }
            Some(':') => {
                self.pos += 1;
                let label = self.ident()?;
                Ok(if self.inverse_suffix() {
                    Regex::inverse(&label)
                } else {
                    Regex::edge(&label)
                })
            }
            Some('_') if !self.peek_at(1).is_some_and(is_ident_char) => {
                self.pos += 1;
                self.inverse_suffix();
                Ok(Regex::Any)
            }
            Some(c) if is_ident_char(c) => {
                let label = self.ident()?;
                Ok(if self.inverse_suffix() {
                    Regex::inverse(&label)
                } else {
                    Regex::edge(&label)
                })
            }
            Some(c) => Err(self.error(&format!("unexpected '{c}' in regular expression"))),
            None => Err(self.error("unexpected end of regular expression")),
        }
    }
}
