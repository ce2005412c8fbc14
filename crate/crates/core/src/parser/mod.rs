//! Query language front end: lexer, parser, static checks and rendering.

pub mod ast;
mod check;
mod lexer;
mod parse;
mod render;

pub use check::check;
pub use render::{render, render_expr};

use crate::error::ParseError;
use ast::{Expr, Query};

/// Parses a query and applies the static rules.
pub fn parse(text: &str) -> Result<Query, ParseError> {
    let q = parse_unchecked(text)?;
    check(&q)?;
    Ok(q)
}

/// Syntax only.
pub fn parse_unchecked(text: &str) -> Result<Query, ParseError> {
    let mut p = parse::Parser::new(text)?;
    let q = p.query()?;
    p.finish()?;
    Ok(q)
}

pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let mut p = parse::Parser::new(text)?;
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}
