//! PATH clauses: the cheapest weighted walk per pair of endpoints.

use std::collections::BTreeMap;
use std::rc::Rc;

use crate::bindings::Binding;
use crate::error::EvalError;
use crate::graph::Id;
use crate::parser::ast::{Block, Chain, Connector, Located, PathClause};
use crate::path::{PathViewRelation, Segment};
use crate::values::{eval, Value};

use super::{matching, DefaultGraph, Evaluator, Frame, Graph, Lookup, Scope, Virtual};

pub(super) fn relation(
    ev: &Evaluator<'_>,
    clause: &PathClause,
    home: &Rc<Scope>,
    g: &Graph,
) -> Result<PathViewRelation, EvalError> {
    let frame = Frame {
        scope: home.clone(),
        default: DefaultGraph::Fixed(g.clone()),
        outer: Binding::new(),
        site: format!("path:{}", clause.name),
        top: false,
    };
    let block = Block {
        patterns: clause.patterns.iter().map(|c| Located { chain: c.clone(), on: None }).collect(),
        where_: clause.where_.clone(),
    };
    let graphs = [g.clone()];
    let located = vec![0; block.patterns.len()];
    let omega = matching::eval_block(ev, &block, &located, &graphs, vec![Binding::new()], &frame)?;
    let env = Lookup { ev, frame: &frame, graphs: &graphs, first: None, inherit: Some(g.clone()) };

    let mut best: BTreeMap<(Id, Id), (f64, Vec<Id>)> = BTreeMap::new();
    for row in omega.rows() {
        let Some(body) = walk_body(ev, &clause.patterns[0], row, g) else { continue };
        if body.len() < 3 {
            continue;
        }
        let cost = match &clause.cost {
            None => (body.len() / 2) as f64,
            Some(e) => {
                let v = eval(e, row, &env)?.unwrap_singleton();
                match v.as_f64() {
                    Some(c) if c.is_finite() && c > 0.0 => c,
                    _ => {
                        return Err(EvalError::Cost(format!(
                            "PATH {} cost must be a positive number, found {v}",
                            clause.name
                        )))
                    }
                }
            }
        };
        let key = (body[0].clone(), body[body.len() - 1].clone());
        let better = best.get(&key).is_none_or(|(c, b)| cost < *c || (cost == *c && body < *b));
        if better {
            best.insert(key, (cost, body));
        }
    }
    let mut rel = PathViewRelation::new();
    for ((start, end), (cost, body)) in best {
        rel.insert(start, Segment { end, body, cost });
    }
    Ok(rel)
}

/// The walk a binding traces along the first pattern of the clause.
fn walk_body(ev: &Evaluator<'_>, chain: &Chain, row: &Binding, g: &Graph) -> Option<Vec<Id>> {
    let id = |v| row.get(v).and_then(Value::as_id).cloned();
    let mut body = vec![id(&chain.start.var)?];
    for step in &chain.steps {
        let here = body.last()?.clone();
        let next = id(&step.node.var)?;
        match &step.connector {
            Connector::Edge { element, .. } => {
                body.push(id(&element.var)?);
                body.push(next);
            }
            Connector::Path { path, .. } => {
                let pid = id(&path.element.var)?;
                let mut seg = match g.path_body(&pid) {
                    Some(b) => b.to_vec(),
                    None => match ev.virtual_path(&pid)? {
                        Virtual::Walk { body, .. } => body,
                        Virtual::Projection { .. } => return None,
                    },
                };
                if seg.first() != Some(&here) {
                    seg.reverse();
                }
                if seg.first() != Some(&here) || seg.last() != Some(&next) {
                    return None;
                }
                body.extend(seg.into_iter().skip(1));
            }
        }
    }
    Some(body)
}
