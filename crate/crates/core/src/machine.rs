//! Deterministic right-reading machines for the admissible-word languages.
//!
//! A machine state summarizes a word `w` exactly enough to decide
//! admissibility of every right extension `wω`. Each state also has a left
//! key: two words with equal keys have equal predecessor sets at the given
//! level.

use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::OnceLock;

use crate::alphabet::{Sym, Word};
use crate::graph::LabeledGraph;
use crate::md::{md_step, Bracket, MdState, TransitionMatrix};
use crate::spec::Kind;

pub(crate) type Bits = Box<[u64]>;

fn words_for(n: usize) -> usize {
    n.div_ceil(64).max(1)
}

fn bit(b: &[u64], i: usize) -> bool {
    b[i / 64] >> (i % 64) & 1 == 1
}

fn set(b: &mut [u64], i: usize) {
    b[i / 64] |= 1 << (i % 64);
}

fn any(b: &[u64]) -> bool {
    b.iter().any(|&w| w != 0)
}

fn meets(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).any(|(x, y)| x & y != 0)
}

fn or_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d |= s;
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum State {
    /// Reachability relation of a graph presentation: row `s` holds the
    /// terminal states of paths from `s` reading the word.
    Rel(Bits),
    Md(MdState),
    Exp(Box<ExpState>),
}

/// State of the expansion wrapper. `inner` is the state of the collapsed
/// word after completion (a trailing fresh symbol counts as already followed
/// by the expanded symbol).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExpState {
    empty: bool,
    /// the word starts with the expanded symbol not preceded by the fresh one
    lead: bool,
    /// the word ends with the fresh symbol
    pending: bool,
    inner: State,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Key {
    Starts(Bits),
    Md { mu: Vec<u16>, y: Option<u64> },
    Exp { empty: bool, lead: bool, inner: Box<Key> },
}

#[derive(Debug)]
pub(crate) struct GraphMachine {
    n: usize,
    k: usize,
    symbols: usize,
    /// `succ[label][state]`: states reached by one edge with that label
    succ: Vec<Vec<Bits>>,
    pred: Vec<Vec<Bits>>,
    /// start sets `P(ω)` of all admissible ω, with a witness each
    back: OnceLock<Option<Vec<(Bits, Word)>>>,
    /// end sets `E(μ)` of all admissible μ, with a witness each
    fwd: OnceLock<Option<Vec<(Bits, Word)>>>,
}

const FAMILY_CAP: usize = 200_000;

impl GraphMachine {
    fn new(g: &LabeledGraph) -> Self {
        let n = g.num_states();
        let k = words_for(n);
        let symbols = g.alphabet.len();
        let empty = || vec![0u64; k].into_boxed_slice();
        let mut succ = vec![vec![empty(); n]; symbols];
        let mut pred = vec![vec![empty(); n]; symbols];
        for e in &g.edges {
            set(&mut succ[e.label as usize][e.from], e.to);
            set(&mut pred[e.label as usize][e.to], e.from);
        }
        Self { n, k, symbols, succ, pred, back: OnceLock::new(), fwd: OnceLock::new() }
    }

    fn full(&self) -> Bits {
        let mut b = vec![0u64; self.k].into_boxed_slice();
        for i in 0..self.n {
            set(&mut b, i);
        }
        b
    }

    fn image(&self, table: &[Vec<Bits>], from: &[u64], label: Sym) -> Bits {
        let mut out = vec![0u64; self.k].into_boxed_slice();
        for t in 0..self.n {
            if bit(from, t) {
                or_into(&mut out, &table[label as usize][t]);
            }
        }
        out
    }

    fn identity(&self) -> Bits {
        let mut r = vec![0u64; self.n * self.k].into_boxed_slice();
        for s in 0..self.n {
            set(&mut r[s * self.k..(s + 1) * self.k], s);
        }
        r
    }

    fn step(&self, rel: &[u64], label: Sym) -> Option<Bits> {
        let mut out = vec![0u64; self.n * self.k].into_boxed_slice();
        let mut live = false;
        for s in 0..self.n {
            let row = &rel[s * self.k..(s + 1) * self.k];
            if !any(row) {
                continue;
            }
            let img = self.image(&self.succ, row, label);
            live |= any(&img);
            out[s * self.k..(s + 1) * self.k].copy_from_slice(&img);
        }
        live.then_some(out)
    }

    fn row<'a>(&self, rel: &'a [u64], s: usize) -> &'a [u64] {
        &rel[s * self.k..(s + 1) * self.k]
    }

    pub(crate) fn starts(&self, rel: &[u64]) -> Bits {
        let mut b = vec![0u64; self.k].into_boxed_slice();
        for s in 0..self.n {
            if any(self.row(rel, s)) {
                set(&mut b, s);
            }
        }
        b
    }

    /// Closure of the full set under one-symbol images, breadth first so
    /// witnesses are shortlex-minimal. `prepend` grows witnesses on the left.
    fn family(&self, table: &[Vec<Bits>], prepend: bool) -> Option<Vec<(Bits, Word)>> {
        let mut seen: HashSet<Bits> = HashSet::new();
        let mut out = Vec::new();
        let mut queue = VecDeque::new();
        let full = self.full();
        seen.insert(full.clone());
        queue.push_back((full, Word::empty()));
        while let Some((set_, w)) = queue.pop_front() {
            for b in 0..self.symbols as Sym {
                let img = self.image(table, &set_, b);
                if any(&img) && seen.insert(img.clone()) {
                    if seen.len() > FAMILY_CAP {
                        return None;
                    }
                    let w2 = if prepend { w.prepend(b) } else { w.push(b) };
                    queue.push_back((img, w2));
                }
            }
            out.push((set_, w));
        }
        Some(out)
    }

    pub(crate) fn back_family(&self) -> Option<&[(Bits, Word)]> {
        self.back.get_or_init(|| self.family(&self.pred, true)).as_deref()
    }

    pub(crate) fn fwd_family(&self) -> Option<&[(Bits, Word)]> {
        self.fwd.get_or_init(|| self.family(&self.succ, false)).as_deref()
    }

    /// Start sets of `wω` over all admissible ω, given the relation of `w`.
    fn reachable_starts(&self, rel: &[u64]) -> Option<Vec<(Bits, Word)>> {
        let mut seen = HashMap::new();
        let mut out = Vec::new();
        for (p, w) in self.back_family()? {
            let mut s = vec![0u64; self.k].into_boxed_slice();
            for st in 0..self.n {
                if meets(self.row(rel, st), p) {
                    set(&mut s, st);
                }
            }
            if any(&s) && seen.insert(s.clone(), ()).is_none() {
                out.push((s, w.clone()));
            }
        }
        Some(out)
    }

    pub(crate) fn relation_pairs(&self, rel: &[u64]) -> Vec<(usize, usize)> {
        let mut v = Vec::new();
        for s in 0..self.n {
            for t in 0..self.n {
                if bit(self.row(rel, s), t) {
                    v.push((s, t));
                }
            }
        }
        v
    }

    pub(crate) fn contains(b: &[u64], i: usize) -> bool {
        bit(b, i)
    }
}

#[derive(Debug)]
pub(crate) enum Machine {
    Graph(GraphMachine),
    Md(TransitionMatrix),
    /// expansion of a non-graph inner subshift; `a` indexes the inner alphabet
    Exp { inner: Box<Machine>, a: Sym, symbols: usize },
}

impl Machine {
    pub(crate) fn compile(kind: &Kind, presentation: Option<&LabeledGraph>) -> Self {
        if let Some(g) = presentation {
            return Machine::Graph(GraphMachine::new(g));
        }
        match kind {
            Kind::MarkovDyck { matrix } => Machine::Md(matrix.clone()),
            Kind::Expanded { inner, symbol } => Machine::Exp {
                inner: Box::new(Machine::compile(&inner.kind, inner.graph_presentation())),
                a: *symbol,
                symbols: inner.alphabet().len() + 1,
            },
            _ => unreachable!("graph-backed kinds always have a presentation"),
        }
    }

    pub(crate) fn num_symbols(&self) -> usize {
        match self {
            Machine::Graph(g) => g.symbols,
            Machine::Md(m) => 2 * m.size(),
            Machine::Exp { symbols, .. } => *symbols,
        }
    }

    pub(crate) fn initial(&self) -> State {
        match self {
            Machine::Graph(g) => State::Rel(g.identity()),
            Machine::Md(_) => State::Md(MdState::Unit),
            Machine::Exp { inner, .. } => State::Exp(Box::new(ExpState {
                empty: true,
                lead: false,
                pending: false,
                inner: inner.initial(),
            })),
        }
    }

    /// Reads one more symbol; `None` when the extension is not admissible.
    pub(crate) fn step(&self, state: &State, s: Sym) -> Option<State> {
        match (self, state) {
            (Machine::Graph(g), State::Rel(r)) => g.step(r, s).map(State::Rel),
            (Machine::Md(a), State::Md(m)) => {
                let n = a.size() as u16;
                let b = if s < n { Bracket::Open(s) } else { Bracket::Close(s - n) };
                let next = md_step(m, b, a);
                (!next.is_zero()).then_some(State::Md(next))
            }
            (Machine::Exp { inner, a, .. }, State::Exp(e)) => {
                let mut e = (**e).clone();
                if s == 0 {
                    // fresh symbol: must be followed by `a`, so read `a` now
                    if e.pending {
                        return None;
                    }
                    e.inner = inner.step(&e.inner, *a)?;
                    e.pending = true;
                } else {
                    let t = s - 1;
                    if e.pending {
                        if t != *a {
                            return None;
                        }
                        e.pending = false;
                    } else if t == *a {
                        if !e.empty {
                            return None;
                        }
                        e.lead = true;
                        e.inner = inner.step(&e.inner, t)?;
                    } else {
                        e.inner = inner.step(&e.inner, t)?;
                    }
                }
                e.empty = false;
                Some(State::Exp(Box::new(e)))
            }
            _ => unreachable!("state does not belong to this machine"),
        }
    }

    pub(crate) fn run(&self, w: &Word) -> Option<State> {
        self.run_from(&self.initial(), w)
    }

    pub(crate) fn run_from(&self, st: &State, w: &Word) -> Option<State> {
        let mut st = st.clone();
        for &s in w.syms() {
            st = self.step(&st, s)?;
        }
        Some(st)
    }

    /// Key determining the set of admissible left extensions of length `l`.
    pub(crate) fn left_key(&self, state: &State, l: usize) -> Key {
        match (self, state) {
            (Machine::Graph(g), State::Rel(r)) => Key::Starts(g.starts(r)),
            (Machine::Md(a), State::Md(m)) => {
                let (mu, y, _) = m.parts(a).expect("live state");
                if mu.len() >= l {
                    Key::Md { mu: mu[..l].to_vec(), y: None }
                } else {
                    Key::Md { mu: mu.to_vec(), y: Some(y) }
                }
            }
            (Machine::Exp { inner, .. }, State::Exp(e)) => Key::Exp {
                empty: e.empty,
                lead: e.lead,
                inner: Box::new(inner.left_key(&e.inner, l)),
            },
            _ => unreachable!("state does not belong to this machine"),
        }
    }

    /// Symbols whose application suffices to reach every left key reachable
    /// from `state` at level `l`. Empty when the key can no longer change.
    fn moves(&self, state: &State, l: usize) -> Vec<Sym> {
        match (self, state) {
            (Machine::Graph(g), _) => (0..g.symbols as Sym).collect(),
            (Machine::Md(a), State::Md(m)) => {
                let n = a.size() as u16;
                let (mu, y, nu) = m.parts(a).expect("live state");
                if mu.len() >= l {
                    return Vec::new();
                }
                if let Some(&top) = nu.first() {
                    return vec![n + top];
                }
                let mut v: Vec<Sym> = (0..n).collect();
                v.extend((0..n).filter(|j| y >> j & 1 == 1).map(|j| n + j));
                v
            }
            (Machine::Exp { inner, a, symbols }, State::Exp(e)) => {
                if e.empty {
                    return (0..*symbols as Sym).collect();
                }
                if e.pending {
                    return vec![*a + 1];
                }
                let mut v: Vec<Sym> = inner
                    .moves(&e.inner, l)
                    .into_iter()
                    .map(|m| if m == *a { 0 } else { m + 1 })
                    .collect();
                v.sort_unstable();
                v.dedup();
                v
            }
            _ => unreachable!("state does not belong to this machine"),
        }
    }

    /// Every left key at level `l` reached by some admissible extension of
    /// the word in `state`, each with a witness extension. `None` when more
    /// than `cap` states would have to be explored.
    pub(crate) fn reachable_keys(&self, state: &State, l: usize, cap: usize) -> Option<Vec<(Key, Word)>> {
        if let (Machine::Graph(g), State::Rel(r)) = (self, state) {
            return Some(g.reachable_starts(r)?.into_iter().map(|(s, w)| (Key::Starts(s), w)).collect());
        }
        let mut seen: HashSet<State> = HashSet::new();
        let mut keys: HashSet<Key> = HashSet::new();
        let mut out = Vec::new();
        let mut queue = VecDeque::new();
        seen.insert(state.clone());
        queue.push_back((state.clone(), Word::empty()));
        while let Some((st, w)) = queue.pop_front() {
            let key = self.left_key(&st, l);
            if keys.insert(key.clone()) {
                out.push((key, w.clone()));
            }
            for s in self.moves(&st, l) {
                if let Some(next) = self.step(&st, s) {
                    if seen.insert(next.clone()) {
                        if seen.len() > cap {
                            return None;
                        }
                        queue.push_back((next, w.push(s)));
                    }
                }
            }
        }
        Some(out)
    }

    pub(crate) fn as_graph(&self) -> Option<&GraphMachine> {
        match self {
            Machine::Graph(g) => Some(g),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::spec::{Subshift, SubshiftSpec};

    fn dyck2() -> Subshift {
        Subshift::new(SubshiftSpec::Dyck { n: 2 }).unwrap()
    }

    #[test]
    fn dyck_steps() {
        let s = dyck2();
        let m = &s.machine;
        assert!(m.run(&s.parse("α1 β1").unwrap()).is_some());
        assert!(m.run(&s.parse("α1 β2").unwrap()).is_none());
        assert!(m.run(&s.parse("β2 α1 α2 β2").unwrap()).is_some());
    }

    #[test]
    fn expanded_wrapper_over_dyck() {
        let inner = SubshiftSpec::Dyck { n: 2 };
        let s = Subshift::new(SubshiftSpec::Expanded { inner: Box::new(inner), symbol: "α1".into(), fresh: "0".into() })
            .unwrap();
        let m = &s.machine;
        let ok = |t: &str| m.run(&s.parse(t).unwrap()).is_some();
        assert!(ok("0 α1 β1"));
        assert!(ok("α1 β1"));
        assert!(ok("β1 0"));
        assert!(!ok("0 β1"));
        assert!(!ok("β1 α1"));
        assert!(!ok("0 α1 β2"));
        assert!(!ok("0 0"));
    }

    #[test]
    fn golden_mean_relation() {
        let s = Subshift::from_json(r#"{"kind":"sft","alphabet":["a","b"],"forbidden":["bb"]}"#).unwrap();
        let m = &s.machine;
        assert!(m.run(&s.parse("a b a b a").unwrap()).is_some());
        assert!(m.run(&s.parse("a b b").unwrap()).is_none());
    }
}
