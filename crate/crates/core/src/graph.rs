//! Finite labeled directed graphs (sofic presentations).

use serde::{Deserialize, Serialize};

use crate::alphabet::{Alphabet, Sym, Word};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GraphEdge {
    pub from: usize,
    pub to: usize,
    pub label: Sym,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledGraph {
    pub alphabet: Alphabet,
    pub states: Vec<String>,
    pub edges: Vec<GraphEdge>,
}

/// JSON shape of a graph: `{"states": [...], "edges": [{"from", "to", "label"}]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphFile {
    pub states: Vec<String>,
    pub edges: Vec<GraphEdgeFile>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphEdgeFile {
    pub from: String,
    pub to: String,
    pub label: String,
}

impl LabeledGraph {
    pub fn new(alphabet: Alphabet, states: Vec<String>, edges: Vec<GraphEdge>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidSpec("graph has no states".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for s in &states {
            if !seen.insert(s) {
                return Err(Error::InvalidSpec(format!("duplicate state `{s}`")));
            }
        }
        for e in &edges {
            if e.from >= states.len() || e.to >= states.len() {
                return Err(Error::InvalidSpec("edge endpoint out of range".into()));
            }
            if e.label as usize >= alphabet.len() {
                return Err(Error::InvalidSpec("edge label out of range".into()));
            }
        }
        Ok(Self { alphabet, states, edges })
    }

    /// Builds a graph from its file form. Without an explicit alphabet the
    /// labels are taken in order of first appearance.
    pub fn from_file(file: &GraphFile, alphabet: Option<&Alphabet>) -> Result<Self> {
        let alphabet = match alphabet {
            Some(a) => a.clone(),
            None => {
                let mut names: Vec<String> = Vec::new();
                for e in &file.edges {
                    if !names.contains(&e.label) {
                        names.push(e.label.clone());
                    }
                }
                Alphabet::new(names)?
            }
        };
        let state_ix = |name: &str| {
            file.states
                .iter()
                .position(|s| s == name)
                .ok_or_else(|| Error::InvalidSpec(format!("unknown state `{name}`")))
        };
        let edges = file
            .edges
            .iter()
            .map(|e| {
                Ok(GraphEdge { from: state_ix(&e.from)?, to: state_ix(&e.to)?, label: alphabet.sym(&e.label)? })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(alphabet, file.states.clone(), edges)
    }

    pub fn to_file(&self) -> GraphFile {
        GraphFile {
            states: self.states.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| GraphEdgeFile {
                    from: self.states[e.from].clone(),
                    to: self.states[e.to].clone(),
                    label: self.alphabet.name(e.label).to_string(),
                })
                .collect(),
        }
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    /// Every state has an incoming and an outgoing edge.
    pub fn is_essential(&self) -> bool {
        let n = self.num_states();
        let mut has_in = vec![false; n];
        let mut has_out = vec![false; n];
        for e in &self.edges {
            has_out[e.from] = true;
            has_in[e.to] = true;
        }
        has_in.iter().chain(&has_out).all(|&b| b)
    }

    /// First pair of equally labeled edges sharing a terminal, if any.
    pub fn left_resolving_violation(&self) -> Option<(GraphEdge, GraphEdge)> {
        for (i, e) in self.edges.iter().enumerate() {
            for f in &self.edges[i + 1..] {
                if e.to == f.to && e.label == f.label {
                    return Some((*e, *f));
                }
            }
        }
        None
    }

    pub fn is_left_resolving(&self) -> bool {
        self.left_resolving_violation().is_none()
    }

    /// Edge-count matrix `A(i, j)` = number of edges from state i to state j.
    pub fn adjacency(&self) -> Vec<Vec<u64>> {
        let n = self.num_states();
        let mut a = vec![vec![0u64; n]; n];
        for e in &self.edges {
            a[e.from][e.to] += 1;
        }
        a
    }

    pub fn is_strongly_connected(&self) -> bool {
        let n = self.num_states();
        let reach = |forward: bool| {
            let mut seen = vec![false; n];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(v) = stack.pop() {
                for e in &self.edges {
                    let (a, b) = if forward { (e.from, e.to) } else { (e.to, e.from) };
                    if a == v && !seen[b] {
                        seen[b] = true;
                        stack.push(b);
                    }
                }
            }
            seen.into_iter().all(|b| b)
        };
        reach(true) && reach(false)
    }

    /// Whether some labeled path reads `w`.
    pub fn reads(&self, w: &Word) -> bool {
        let n = self.num_states();
        let mut cur = vec![true; n];
        for &s in w.syms() {
            let mut next = vec![false; n];
            for e in &self.edges {
                if e.label == s && cur[e.from] {
                    next[e.to] = true;
                }
            }
            if !next.iter().any(|&b| b) {
                return false;
            }
            cur = next;
        }
        true
    }

    /// Replaces every edge labeled `symbol` by a two-edge path `fresh · symbol`
    /// through a new intermediate state. The fresh symbol comes first in the
    /// new alphabet.
    pub fn expand(&self, symbol: Sym, fresh: &str) -> Result<Self> {
        if self.alphabet.contains(fresh) {
            return Err(Error::SymbolCollision(format!("`{fresh}` already in the alphabet")));
        }
        let mut names = vec![fresh.to_string()];
        names.extend(self.alphabet.symbols().iter().cloned());
        let alphabet = Alphabet::new(names)?;
        let mut states = self.states.clone();
        let mut edges = Vec::with_capacity(self.edges.len() * 2);
        for (k, e) in self.edges.iter().enumerate() {
            if e.label == symbol {
                let mid = states.len();
                let mut name = format!("{}~{}", self.states[e.from], k);
                while states.contains(&name) {
                    name.push('\'');
                }
                states.push(name);
                edges.push(GraphEdge { from: e.from, to: mid, label: 0 });
                edges.push(GraphEdge { from: mid, to: e.to, label: symbol + 1 });
            } else {
                edges.push(GraphEdge { from: e.from, to: e.to, label: e.label + 1 });
            }
        }
        Self::new(alphabet, states, edges)
    }

    /// Largest subgraph in which every state has incoming and outgoing edges.
    pub fn essential_part(&self) -> Result<Self> {
        let n = self.num_states();
        let mut alive = vec![true; n];
        loop {
            let mut has_in = vec![false; n];
            let mut has_out = vec![false; n];
            for e in &self.edges {
                if alive[e.from] && alive[e.to] {
                    has_out[e.from] = true;
                    has_in[e.to] = true;
                }
            }
            let mut changed = false;
            for v in 0..n {
                if alive[v] && !(has_in[v] && has_out[v]) {
                    alive[v] = false;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let remap: Vec<Option<usize>> = {
            let mut k = 0;
            alive
                .iter()
                .map(|&a| {
                    a.then(|| {
                        k += 1;
                        k - 1
                    })
                })
                .collect()
        };
        let states = (0..n).filter(|&v| alive[v]).map(|v| self.states[v].clone()).collect();
        let edges = self
            .edges
            .iter()
            .filter_map(|e| Some(GraphEdge { from: remap[e.from]?, to: remap[e.to]?, label: e.label }))
            .collect();
        Self::new(self.alphabet.clone(), states, edges)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden() -> LabeledGraph {
        let a = Alphabet::new(["a", "b"]).unwrap();
        LabeledGraph::new(
            a,
            vec!["p".into(), "q".into()],
            vec![
                GraphEdge { from: 0, to: 0, label: 0 },
                GraphEdge { from: 0, to: 1, label: 0 },
                GraphEdge { from: 1, to: 0, label: 1 },
            ],
        )
        .unwrap()
    }

    #[test]
    fn golden_graph_properties() {
        let g = golden();
        assert!(g.is_essential());
        assert!(g.is_left_resolving());
        assert!(g.is_strongly_connected());
        assert_eq!(g.adjacency(), vec![vec![1, 1], vec![1, 0]]);
        assert!(g.reads(&Word(vec![0, 1, 0])));
        assert!(!g.reads(&Word(vec![1, 1])));
    }

    #[test]
    fn expansion_splits_edges() {
        let g = golden().expand(1, "z").unwrap();
        assert_eq!(g.num_states(), 3);
        assert_eq!(g.alphabet.symbols()[0], "z");
        assert!(g.reads(&Word(vec![0, 2, 1])));
        assert!(!g.reads(&Word(vec![2, 2])));
        assert!(golden().expand(1, "a").is_err());
    }

    #[test]
    fn file_roundtrip() {
        let g = golden();
        let back = LabeledGraph::from_file(&g.to_file(), Some(&g.alphabet)).unwrap();
        assert_eq!(back, g);
    }
}
