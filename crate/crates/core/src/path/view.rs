use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::EvalError;
use crate::graph::Id;

/// One cheapest walk recorded by a PATH view.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub end: Id,
    pub body: Vec<Id>,
    pub cost: f64,
}

/// The binary relation computed by a PATH clause, keyed by start node.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PathViewRelation {
    by_start: BTreeMap<Id, Vec<Segment>>,
}

impl PathViewRelation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, start: Id, seg: Segment) {
        self.by_start.entry(start).or_default().push(seg);
    }

    pub fn from_node(&self, start: &Id) -> &[Segment] {
        self.by_start.get(start).map_or(&[], Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.by_start.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.by_start.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Id, &Segment)> + '_ {
        self.by_start.iter().flat_map(|(s, v)| v.iter().map(move |seg| (s, seg)))
    }
}

/// Source of evaluated path views.
pub trait Views {
    fn relation(&self, name: &str) -> Result<Arc<PathViewRelation>, EvalError>;
}

/// No views declared.
pub struct NoViews;

impl Views for NoViews {
    fn relation(&self, name: &str) -> Result<Arc<PathViewRelation>, EvalError> {
        Err(EvalError::UnknownView(name.to_string()))
    }
}

impl Views for BTreeMap<String, Arc<PathViewRelation>> {
    fn relation(&self, name: &str) -> Result<Arc<PathViewRelation>, EvalError> {
        self.get(name)
            .cloned()
            .ok_or_else(|| EvalError::UnknownView(name.to_string()))
    }
}
