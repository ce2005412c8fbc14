//! Thompson construction.

use super::Regex;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Symbol {
    /// Any edge, traversed in either direction.
    AnyEdge,
    Fwd(String),
    Bwd(String),
    /// Zero-length test on the current node.
    NodeTest(String),
    /// One segment of a path view.
    View(String),
}

#[derive(Clone, Debug)]
pub struct Nfa {
    pub start: usize,
    pub accept: usize,
    /// Outgoing moves per state; `None` is an epsilon move.
    pub moves: Vec<Vec<(Option<Symbol>, usize)>>,
}

impl Nfa {
    pub fn compile(r: &Regex) -> Self {
        let mut nfa = Nfa { start: 0, accept: 0, moves: Vec::new() };
        let (s, a) = nfa.build(r);
        nfa.start = s;
        nfa.accept = a;
        nfa
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    fn state(&mut self) -> usize {
        self.moves.push(Vec::new());
        self.moves.len() - 1
    }

    fn link(&mut self, from: usize, sym: Option<Symbol>, to: usize) {
        self.moves[from].push((sym, to));
    }

    fn build(&mut self, r: &Regex) -> (usize, usize) {
        match r {
            Regex::Alt { left, right } => {
                let (s, a) = (self.state(), self.state());
                let (ls, la) = self.build(left);
                let (rs, ra) = self.build(right);
                self.link(s, None, ls);
                self.link(s, None, rs);
                self.link(la, None, a);
                self.link(ra, None, a);
                (s, a)
            }
            Regex::Concat { left, right } => {
                let (ls, la) = self.build(left);
                let (rs, ra) = self.build(right);
                self.link(la, None, rs);
                (ls, ra)
            }
            Regex::Star { inner } => {
                let (s, a) = (self.state(), self.state());
                let (is, ia) = self.build(inner);
                self.link(s, None, is);
                self.link(s, None, a);
                self.link(ia, None, is);
                self.link(ia, None, a);
                (s, a)
            }
            leaf => {
                let sym = match leaf {
                    Regex::Any => Symbol::AnyEdge,
                    Regex::Edge { label } => Symbol::Fwd(label.clone()),
                    Regex::Inverse { label } => Symbol::Bwd(label.clone()),
                    Regex::Node { label } => Symbol::NodeTest(label.clone()),
                    Regex::View { name } => Symbol::View(name.clone()),
                    _ => unreachable!("composite handled above"),
                };
                let (s, a) = (self.state(), self.state());
                self.link(s, Some(sym), a);
                (s, a)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_count_is_linear() {
        let r = Regex::star(Regex::alt(Regex::edge("a"), Regex::inverse("a")));
        let nfa = Nfa::compile(&r);
        assert_eq!(nfa.len(), 8);
        assert_ne!(nfa.start, nfa.accept);
    }
}
