//! Regular path queries: expressions, automata and product-graph search.

mod nfa;
mod regex;
mod search;
mod view;

pub use nfa::{Nfa, Symbol};
pub use regex::{parse_regex, Regex};
pub(crate) use regex::parse_regex_at;
pub use search::{FoundPath, PathSearch};
pub use view::{NoViews, PathViewRelation, Segment, Views};
