//! Tables as graphs of isolated nodes.

use std::collections::BTreeMap;
use std::io::Read;
use std::str::FromStr;

use crate::graph::{Id, PathPropertyGraph};
use crate::values::Value;

/// How the cells of a column are read. Cells are strings unless told otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ColumnType {
    Str,
    Int,
    Real,
    Bool,
    Date,
}

impl FromStr for ColumnType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "str" | "string" => ColumnType::Str,
            "int" | "integer" => ColumnType::Int,
            "real" | "float" => ColumnType::Real,
            "bool" | "boolean" => ColumnType::Bool,
            "date" => ColumnType::Date,
            other => return Err(format!("unknown column type {other}")),
        })
    }
}

#[derive(Clone, Debug, Default)]
pub struct ImportOptions {
    /// Label for every node; defaults to the graph name.
    pub label: Option<String>,
    pub types: BTreeMap<String, ColumnType>,
}

fn cell(raw: &str, ty: ColumnType) -> Result<Value, String> {
    let bad = |what: &str| format!("cannot read '{raw}' as {what}");
    Ok(match ty {
        ColumnType::Str => Value::str(raw),
        ColumnType::Int => Value::Int(raw.trim().parse().map_err(|_| bad("an integer"))?),
        ColumnType::Real => Value::Real(raw.trim().parse().map_err(|_| bad("a real"))?),
        ColumnType::Bool => match raw.trim().to_ascii_lowercase().as_str() {
            "true" => Value::Bool(true),
            "false" => Value::Bool(false),
            _ => return Err(bad("a boolean")),
        },
        ColumnType::Date => Value::date(raw.trim()),
    })
}

/// One node per data row with id `name#row` (rows counted from 1). Empty
/// cells leave the property absent.
pub fn import(name: &str, input: impl Read, options: &ImportOptions) -> Result<PathPropertyGraph, String> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(false).from_reader(input);
    let mut records = reader.records();
    let header = match records.next() {
        None => return Err("empty file: a header row is required".into()),
        Some(r) => r.map_err(|e| e.to_string())?,
    };
    let columns: Vec<String> = header.iter().map(|h| h.trim().to_string()).collect();
    if let Some(unknown) = options.types.keys().find(|k| !columns.contains(k)) {
        return Err(format!("type given for unknown column {unknown}"));
    }
    let label = options.label.clone().unwrap_or_else(|| name.to_string());
    let mut b = PathPropertyGraph::builder();
    for (i, rec) in records.enumerate() {
        let rec = rec.map_err(|e| match e.kind() {
            csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
                format!("row {}: expected {expected_len} fields, found {len}", i + 1)
            }
            _ => e.to_string(),
        })?;
        let id = Id::node(format!("{name}#{}", i + 1));
        b.node(id.clone());
        b.label(&id, label.as_str());
        for (col, raw) in columns.iter().zip(rec.iter()) {
            if raw.is_empty() {
                continue;
            }
            let ty = options.types.get(col).copied().unwrap_or(ColumnType::Str);
            let v = cell(raw, ty).map_err(|m| format!("row {}, column {col}: {m}", i + 1))?;
            b.property(&id, col.as_str(), v);
        }
    }
    Ok(b.build())
}
