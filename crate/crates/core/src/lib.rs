//! G-CORE: a path property graph query language.

pub mod bindings;
pub mod catalog;
pub mod error;
pub mod eval;
pub mod export;
pub mod graph;
pub mod parser;
pub mod path;
pub mod values;

pub use catalog::Catalog;
pub use error::{Error, EvalError, ParseError, StorageError};
pub use eval::{Evaluator, Options, Outcome};
pub use graph::{Id, Kind, PathPropertyGraph};
pub use parser::parse;
