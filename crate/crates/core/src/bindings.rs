//! Binding tables and their algebra.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::parser::ast::Var;
use crate::values::Value;

/// Partial map from variables to graph objects or values.
pub type Binding = BTreeMap<Var, Value>;

/// Whether every shared bound variable maps to the same value.
pub fn compatible(a: &Binding, b: &Binding) -> bool {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    small.iter().all(|(k, v)| large.get(k).is_none_or(|w| w == v))
}

fn merge(a: &Binding, b: &Binding) -> Binding {
    let mut m = a.clone();
    for (k, v) in b {
        m.entry(k.clone()).or_insert_with(|| v.clone());
    }
    m
}

/// A set of bindings over a common variable universe.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BindingSet {
    vars: BTreeSet<Var>,
    rows: BTreeSet<Binding>,
}

impl BindingSet {
    /// The empty set (no bindings at all).
    pub fn empty() -> Self {
        Self::default()
    }

    /// `{μ∅}`: the neutral element of join.
    pub fn unit() -> Self {
        BindingSet { vars: BTreeSet::new(), rows: BTreeSet::from([Binding::new()]) }
    }

    pub fn from_rows(rows: impl IntoIterator<Item = Binding>) -> Self {
        let rows: BTreeSet<Binding> = rows.into_iter().collect();
        let vars = rows.iter().flat_map(|r| r.keys().cloned()).collect();
        BindingSet { vars, rows }
    }

    pub fn with_vars(mut self, vars: impl IntoIterator<Item = Var>) -> Self {
        self.vars.extend(vars);
        self
    }

    pub fn vars(&self) -> &BTreeSet<Var> {
        &self.vars
    }

    pub fn rows(&self) -> impl Iterator<Item = &Binding> + '_ {
        self.rows.iter()
    }

    pub fn into_rows(self) -> BTreeSet<Binding> {
        self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn contains(&self, row: &Binding) -> bool {
        self.rows.contains(row)
    }

    pub fn insert(&mut self, row: Binding) {
        self.vars.extend(row.keys().cloned());
        self.rows.insert(row);
    }

    /// Variables bound in every row.
    fn always_bound(&self) -> BTreeSet<Var> {
        self.vars
            .iter()
            .filter(|v| self.rows.iter().all(|r| r.contains_key(*v)))
            .cloned()
            .collect()
    }

    /// Natural join. Hash-partitions on variables bound on both sides in
    /// every row, falling back to nested loops otherwise.
    pub fn join(&self, other: &Self) -> Self {
        let key: Vec<Var> = self
            .always_bound()
            .intersection(&other.always_bound())
            .cloned()
            .collect();
        let mut out = BindingSet::empty().with_vars(self.vars.union(&other.vars).cloned());
        if key.is_empty() {
            for a in &self.rows {
                for b in &other.rows {
                    if compatible(a, b) {
                        out.rows.insert(merge(a, b));
                    }
                }
            }
            return out;
        }
        let mut index: HashMap<Vec<&Value>, Vec<&Binding>> = HashMap::new();
        for b in &other.rows {
            index.entry(key.iter().map(|k| &b[k]).collect()).or_default().push(b);
        }
        for a in &self.rows {
            let probe: Vec<&Value> = key.iter().map(|k| &a[k]).collect();
            if let Some(bs) = index.get(&probe) {
                for b in bs {
                    if compatible(a, b) {
                        out.rows.insert(merge(a, b));
                    }
                }
            }
        }
        out
    }

    pub fn union(&self, other: &Self) -> Self {
        BindingSet {
            vars: self.vars.union(&other.vars).cloned().collect(),
            rows: self.rows.union(&other.rows).cloned().collect(),
        }
    }

    /// Rows of `self` compatible with some row of `other`.
    pub fn semijoin(&self, other: &Self) -> Self {
        BindingSet {
            vars: self.vars.clone(),
            rows: self
                .rows
                .iter()
                .filter(|a| other.rows.iter().any(|b| compatible(a, b)))
                .cloned()
                .collect(),
        }
    }

    /// Rows of `self` compatible with no row of `other`.
    pub fn antijoin(&self, other: &Self) -> Self {
        BindingSet {
            vars: self.vars.clone(),
            rows: self
                .rows
                .iter()
                .filter(|a| !other.rows.iter().any(|b| compatible(a, b)))
                .cloned()
                .collect(),
        }
    }

    pub fn left_outer_join(&self, other: &Self) -> Self {
        let mut out = self.join(other).union(&self.antijoin(other));
        out.vars.extend(other.vars.iter().cloned());
        out
    }

    pub fn filter(&self, mut keep: impl FnMut(&Binding) -> bool) -> Self {
        BindingSet {
            vars: self.vars.clone(),
            rows: self.rows.iter().filter(|r| keep(r)).cloned().collect(),
        }
    }

    /// Restriction of every row to `vars`.
    pub fn project(&self, vars: &BTreeSet<Var>) -> Self {
        BindingSet {
            vars: self.vars.intersection(vars).cloned().collect(),
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().filter(|(k, _)| vars.contains(*k)).map(|(k, v)| (k.clone(), v.clone())).collect())
                .collect(),
        }
    }

    /// Equivalence classes under agreement on `gamma`; an unbound variable
    /// only agrees with unbound. Classes come out in key order.
    pub fn group_by(&self, gamma: &[Var]) -> Vec<(Vec<Option<Value>>, Vec<&Binding>)> {
        let mut classes: BTreeMap<Vec<Option<Value>>, Vec<&Binding>> = BTreeMap::new();
        for r in &self.rows {
            let key = gamma.iter().map(|v| r.get(v).cloned()).collect();
            classes.entry(key).or_default().push(r);
        }
        classes.into_iter().collect()
    }

    /// Aligned text table, identifiers printed as `#name`.
    pub fn to_table(&self) -> String {
        let vars: Vec<&Var> = self.vars.iter().filter(|v| !v.is_anonymous()).collect();
        let header: Vec<String> = vars.iter().map(|v| v.to_string()).collect();
        let body: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vars.iter()
                    .map(|v| r.get(*v).map_or(String::new(), |x| x.to_string()))
                    .collect()
            })
            .collect();
        let widths: Vec<usize> = (0..vars.len())
            .map(|i| {
                body.iter()
                    .map(|row| row[i].chars().count())
                    .chain([header[i].chars().count()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let line = |cells: &[String]| -> String {
            let padded: Vec<String> = cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect();
            format!("| {} |", padded.join(" | ")).trim_end().to_string()
        };
        let rule = format!(
            "+{}+",
            widths.iter().map(|w| "-".repeat(w + 2)).collect::<Vec<_>>().join("+")
        );
        let mut out = vec![rule.clone(), line(&header), rule.clone()];
        out.extend(body.iter().map(|r| line(r)));
        out.push(rule);
        out.join("\n") + "\n"
    }
}

impl fmt::Display for BindingSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_table())
    }
}

impl FromIterator<Binding> for BindingSet {
    fn from_iter<T: IntoIterator<Item = Binding>>(iter: T) -> Self {
        BindingSet::from_rows(iter)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Id;

    fn row(pairs: &[(&str, &str)]) -> Binding {
        pairs
            .iter()
            .map(|(k, v)| (Var::new(*k), Value::Id(Id::node(*v))))
            .collect()
    }

    #[test]
    fn compatibility() {
        assert!(compatible(&Binding::new(), &row(&[("x", "105")])));
        assert!(compatible(&row(&[("x", "105")]), &row(&[("x", "105"), ("y", "102")])));
        assert!(!compatible(&row(&[("x", "105")]), &row(&[("x", "102")])));
    }

    #[test]
    fn join_with_unit_is_identity() {
        let o = BindingSet::from_rows([row(&[("x", "1")]), row(&[("x", "2"), ("y", "3")])]);
        assert_eq!(o.join(&BindingSet::unit()), o);
        assert_eq!(BindingSet::unit().join(&o), o);
    }

    #[test]
    fn left_outer_join_keeps_unmatched() {
        let l = BindingSet::from_rows([row(&[("n", "Peter")])]);
        let r = l.left_outer_join(&BindingSet::empty());
        assert_eq!(r.into_rows(), BTreeSet::from([row(&[("n", "Peter")])]));
    }

    #[test]
    fn appendix_join_of_three_atoms() {
        let located_x = BindingSet::from_rows([
            row(&[("x", "105"), ("w", "106")]),
            row(&[("x", "102"), ("w", "106")]),
        ]);
        let located_y = BindingSet::from_rows([
            row(&[("y", "105"), ("w", "106")]),
            row(&[("y", "102"), ("w", "106")]),
        ]);
        let mut z = row(&[("x", "105"), ("y", "102")]);
        z.insert(Var::new("z"), Value::Id(Id::path("301")));
        let paths = BindingSet::from_rows([z.clone()]);
        let joined = located_x.join(&located_y).join(&paths);
        let mut expect = z;
        expect.insert(Var::new("w"), Value::Id(Id::node("106")));
        assert_eq!(joined.into_rows(), BTreeSet::from([expect]));
    }

    #[test]
    fn grouping_partitions() {
        let o = BindingSet::from_rows([
            row(&[("n", "a"), ("e", "x")]),
            row(&[("n", "b"), ("e", "x")]),
            row(&[("n", "c")]),
        ]);
        let groups = o.group_by(&[Var::new("e")]);
        assert_eq!(groups.len(), 2);
        assert_eq!(groups.iter().map(|(_, g)| g.len()).sum::<usize>(), 3);
        assert_eq!(o.group_by(&[]).len(), 1);
        assert_eq!(o.group_by(&[Var::new("n"), Var::new("e")]).len(), 3);
    }

    #[test]
    fn table_rendering() {
        let o = BindingSet::from_rows([row(&[("c", "Acme"), ("n", "Alice")])]);
        let t = o.to_table();
        assert!(t.contains("| c     | n      |"));
        assert!(t.contains("| #Acme | #Alice |"));
    }
}
