//! Synchronizing words, past-equivalence classes and λ-synchronization.

use std::collections::{HashMap, HashSet, VecDeque};
use std::rc::Rc;

use serde::Serialize;

use crate::alphabet::{Sym, Word};
use crate::error::{Error, Result};
use crate::machine::{Key, State};
use crate::oracle::{blocks, DEFAULT_ENUM_CAP};
use crate::spec::Subshift;

/// Limits on exploration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    /// candidate words per enumeration
    pub enum_cap: usize,
    /// machine states explored by one exact synchronization decision
    pub state_cap: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Self { enum_cap: DEFAULT_ENUM_CAP, state_cap: 200_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SyncVerdict {
    Yes,
    /// `predecessor · μ` is admissible but `predecessor · μ · extension` is not.
    No { extension: Word, predecessor: Word },
    UnknownAtHorizon { horizon: usize },
}

impl SyncVerdict {
    pub fn is_yes(&self) -> bool {
        matches!(self, SyncVerdict::Yes)
    }

    pub fn is_no(&self) -> bool {
        matches!(self, SyncVerdict::No { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            SyncVerdict::Yes => "yes",
            SyncVerdict::No { .. } => "no",
            SyncVerdict::UnknownAtHorizon { .. } => "unknown",
        }
    }
}

/// A set of words of length `l` as a bitset over `B_l(Λ)`.
pub(crate) type Pattern = Rc<[u64]>;

/// One class of `S_l(Λ)/~_l`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PastClass {
    /// shortlex-minimal member
    pub rep: Word,
    /// the common predecessor set `Γ_l^-`, lexicographic
    pub gamma: Vec<Word>,
    /// all members of length at most the word cap, shortlex
    pub members: Vec<Word>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PastPartition {
    pub level: usize,
    pub word_cap: usize,
    pub classes: Vec<PastClass>,
    /// words skipped because their verdict was unknown
    pub unknown: usize,
}

/// Result of a search for words of `S_l(Λ)` up to a word cap.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyncWords {
    pub words: Vec<Word>,
    pub unknown: Vec<Word>,
}

/// Row of a λ-synchronization table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LambdaSyncRow {
    pub l: usize,
    pub k: usize,
    pub eta: String,
    pub verdict: String,
    pub witness: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct ClassInfo {
    pub rep: Word,
    pub pattern: Pattern,
}

/// Memoizing front end for every question about one subshift.
pub struct Analyzer<'a> {
    sub: &'a Subshift,
    budget: Budget,
    blocks: HashMap<usize, Rc<Vec<(Word, State)>>>,
    patterns: HashMap<(usize, Key), Pattern>,
    verdicts: HashMap<(usize, State), SyncVerdict>,
}

fn has(p: &[u64], i: usize) -> bool {
    p[i / 64] >> (i % 64) & 1 == 1
}

impl<'a> Analyzer<'a> {
    pub fn new(sub: &'a Subshift) -> Self {
        Self::with_budget(sub, Budget::default())
    }

    pub fn with_budget(sub: &'a Subshift, budget: Budget) -> Self {
        Self { sub, budget, blocks: HashMap::new(), patterns: HashMap::new(), verdicts: HashMap::new() }
    }

    pub fn subshift(&self) -> &'a Subshift {
        self.sub
    }

    pub(crate) fn blocks(&mut self, l: usize) -> Result<Rc<Vec<(Word, State)>>> {
        if let Some(b) = self.blocks.get(&l) {
            return Ok(b.clone());
        }
        let b = Rc::new(blocks(self.sub, l, self.budget.enum_cap)?);
        self.blocks.insert(l, b.clone());
        Ok(b)
    }

    /// Lexicographic list of `B_l(Λ)`.
    pub fn block_words(&mut self, l: usize) -> Result<Vec<Word>> {
        Ok(self.blocks(l)?.iter().map(|(w, _)| w.clone()).collect())
    }

    pub(crate) fn state(&self, w: &Word) -> Result<State> {
        self.sub.alphabet().check(w)?;
        self.sub.machine.run(w).ok_or_else(|| Error::NotAdmissible(self.sub.render(w)))
    }

    /// Predecessor pattern of the word `w` whose state is `st`.
    pub(crate) fn pattern_of(&mut self, l: usize, st: &State, w: &Word) -> Result<Pattern> {
        let key = self.sub.machine.left_key(st, l);
        if let Some(p) = self.patterns.get(&(l, key.clone())) {
            return Ok(p.clone());
        }
        let bl = self.blocks(l)?;
        let m = &self.sub.machine;
        let mut bits = vec![0u64; bl.len().div_ceil(64).max(1)];
        for (i, (_, s)) in bl.iter().enumerate() {
            if m.run_from(s, w).is_some() {
                bits[i / 64] |= 1 << (i % 64);
            }
        }
        let p: Pattern = bits.into();
        self.patterns.insert((l, key), p.clone());
        Ok(p)
    }

    pub(crate) fn pattern_words(&mut self, l: usize, p: &[u64]) -> Result<Vec<Word>> {
        let bl = self.blocks(l)?;
        Ok(bl.iter().enumerate().filter(|(i, _)| has(p, *i)).map(|(_, (w, _))| w.clone()).collect())
    }

    /// `Γ_l^-(w)`.
    pub fn gamma_minus(&mut self, w: &Word, l: usize) -> Result<Vec<Word>> {
        let st = self.state(w)?;
        let p = self.pattern_of(l, &st, w)?;
        self.pattern_words(l, &p)
    }

    fn first_lost(&mut self, l: usize, base: &[u64], p: &[u64]) -> Result<Word> {
        let bl = self.blocks(l)?;
        let i = (0..bl.len()).find(|&i| has(base, i) && !has(p, i)).expect("predecessor sets only shrink");
        Ok(bl[i].0.clone())
    }

    /// Whether `μ` is l-synchronizing. Exact whenever the reachable
    /// predecessor keys fit in the state budget; otherwise a scan of
    /// extensions up to `horizon` that can only refute.
    pub fn is_l_synchronizing(&mut self, mu: &Word, l: usize, horizon: usize) -> Result<SyncVerdict> {
        let st = self.state(mu)?;
        self.verdict(&st, mu, l, horizon)
    }

    pub(crate) fn verdict(&mut self, st: &State, mu: &Word, l: usize, horizon: usize) -> Result<SyncVerdict> {
        if let Some(v) = self.verdicts.get(&(l, st.clone())) {
            return Ok(v.clone());
        }
        let base = self.pattern_of(l, st, mu)?;
        let v = match self.sub.machine.reachable_keys(st, l, self.budget.state_cap) {
            Some(list) => {
                let mut v = SyncVerdict::Yes;
                for (_, omega) in list {
                    let full = mu.concat(&omega);
                    let st2 = self.sub.machine.run_from(st, &omega).expect("reachable");
                    let p = self.pattern_of(l, &st2, &full)?;
                    if p != base {
                        let predecessor = self.first_lost(l, &base, &p)?;
                        v = SyncVerdict::No { extension: omega, predecessor };
                        break;
                    }
                }
                v
            }
            None => self.bounded_scan(st, mu, l, horizon, &base)?,
        };
        self.verdicts.insert((l, st.clone()), v.clone());
        Ok(v)
    }

    fn bounded_scan(&mut self, st: &State, mu: &Word, l: usize, horizon: usize, base: &[u64]) -> Result<SyncVerdict> {
        let m = &self.sub.machine;
        let k = m.num_symbols();
        let mut seen: HashSet<State> = HashSet::new();
        let mut frontier = vec![(st.clone(), Word::empty())];
        seen.insert(st.clone());
        for _ in 0..horizon {
            let mut next = Vec::new();
            for (s, w) in &frontier {
                for a in 0..k as Sym {
                    if let Some(s2) = m.step(s, a) {
                        if seen.insert(s2.clone()) {
                            if seen.len() > self.budget.enum_cap {
                                return Err(Error::BudgetExceeded("bounded synchronization scan".into()));
                            }
                            next.push((s2, w.push(a)));
                        }
                    }
                }
            }
            for (s2, omega) in &next {
                let p = self.pattern_of(l, s2, &mu.concat(omega))?;
                if *p != *base {
                    let predecessor = self.first_lost(l, base, &p)?;
                    return Ok(SyncVerdict::No { extension: omega.clone(), predecessor });
                }
            }
            frontier = next;
        }
        Ok(SyncVerdict::UnknownAtHorizon { horizon })
    }

    /// The bounded scan alone: refutes within `horizon` or reports unknown.
    pub fn is_l_synchronizing_bounded(&mut self, mu: &Word, l: usize, horizon: usize) -> Result<SyncVerdict> {
        let st = self.state(mu)?;
        let base = self.pattern_of(l, &st, mu)?;
        self.bounded_scan(&st, mu, l, horizon, &base)
    }

    /// States reachable by words of length at most `w_cap`, each with its
    /// shortlex-minimal word, in shortlex order of those words.
    pub(crate) fn state_reps(&self, w_cap: usize) -> Result<Vec<(Word, State)>> {
        let m = &self.sub.machine;
        let k = m.num_symbols();
        let mut seen: HashSet<State> = HashSet::new();
        let init = m.initial();
        seen.insert(init.clone());
        let mut out = vec![(Word::empty(), init)];
        let mut start = 0;
        for _ in 0..w_cap {
            let end = out.len();
            for i in start..end {
                for a in 0..k as Sym {
                    if let Some(s2) = m.step(&out[i].1, a) {
                        if seen.insert(s2.clone()) {
                            if seen.len() > self.budget.enum_cap {
                                return Err(Error::BudgetExceeded(format!("more than {} states", self.budget.enum_cap)));
                            }
                            let w = out[i].0.push(a);
                            out.push((w, s2));
                        }
                    }
                }
            }
            start = end;
        }
        Ok(out)
    }

    /// All words of length at most `w_cap` in shortlex order, with states.
    fn all_words(&self, w_cap: usize) -> Result<Vec<(Word, State)>> {
        let m = &self.sub.machine;
        let k = m.num_symbols();
        let mut out = vec![(Word::empty(), m.initial())];
        let mut start = 0;
        for _ in 0..w_cap {
            let end = out.len();
            for i in start..end {
                for a in 0..k as Sym {
                    if let Some(s2) = m.step(&out[i].1, a) {
                        let w = out[i].0.push(a);
                        out.push((w, s2));
                        if out.len() > self.budget.enum_cap {
                            return Err(Error::BudgetExceeded(format!("more than {} words", self.budget.enum_cap)));
                        }
                    }
                }
            }
            start = end;
        }
        Ok(out)
    }

    /// `S_l(Λ)` restricted to words of length at most `w_cap`, shortlex.
    pub fn enumerate_sync_words(&mut self, l: usize, w_cap: usize, horizon: usize) -> Result<SyncWords> {
        let mut words = Vec::new();
        let mut unknown = Vec::new();
        for (w, st) in self.all_words(w_cap)? {
            match self.verdict(&st, &w, l, horizon)? {
                SyncVerdict::Yes => words.push(w),
                SyncVerdict::No { .. } => {}
                SyncVerdict::UnknownAtHorizon { .. } => unknown.push(w),
            }
        }
        Ok(SyncWords { words, unknown })
    }

    /// Classes of `S_l(Λ)/~_l` met by words of length at most `w_cap`,
    /// ordered by shortlex representative. Also counts unknown states.
    pub(crate) fn level_classes(&mut self, l: usize, w_cap: usize, horizon: usize) -> Result<(Vec<ClassInfo>, usize)> {
        let mut classes: Vec<ClassInfo> = Vec::new();
        let mut index: HashSet<Pattern> = HashSet::new();
        let mut unknown = 0;
        for (w, st) in self.state_reps(w_cap)? {
            match self.verdict(&st, &w, l, horizon)? {
                SyncVerdict::Yes => {
                    let p = self.pattern_of(l, &st, &w)?;
                    if index.insert(p.clone()) {
                        classes.push(ClassInfo { rep: w, pattern: p });
                    }
                }
                SyncVerdict::No { .. } => {}
                SyncVerdict::UnknownAtHorizon { .. } => unknown += 1,
            }
        }
        Ok((classes, unknown))
    }

    /// `S_l(Λ)/~_l` with members up to length `w_cap`.
    pub fn past_equiv_classes(&mut self, l: usize, w_cap: usize, horizon: usize) -> Result<PastPartition> {
        let (infos, _) = self.level_classes(l, w_cap, horizon)?;
        let pos: HashMap<Pattern, usize> = infos.iter().enumerate().map(|(i, c)| (c.pattern.clone(), i)).collect();
        let mut members = vec![Vec::new(); infos.len()];
        let mut unknown = 0;
        for (w, st) in self.all_words(w_cap)? {
            match self.verdict(&st, &w, l, horizon)? {
                SyncVerdict::Yes => {
                    let p = self.pattern_of(l, &st, &w)?;
                    members[pos[&p]].push(w);
                }
                SyncVerdict::No { .. } => {}
                SyncVerdict::UnknownAtHorizon { .. } => unknown += 1,
            }
        }
        let mut classes = Vec::with_capacity(infos.len());
        for (info, members) in infos.into_iter().zip(members) {
            let gamma = self.pattern_words(l, &info.pattern)?;
            classes.push(PastClass { rep: info.rep, gamma, members });
        }
        Ok(PastPartition { level: l, word_cap: w_cap, classes, unknown })
    }

    /// Searches, for every `η ∈ B_l(Λ)`, a word `ν ∈ S_k(Λ)` with
    /// `ην ∈ S_{k-l}(Λ)` among words of length at most `w_cap`.
    pub fn check_lambda_synchronizing(
        &mut self,
        l_max: usize,
        k_max: usize,
        w_cap: usize,
        horizon: usize,
    ) -> Result<Vec<LambdaSyncRow>> {
        if l_max > k_max {
            return Err(Error::Domain(format!("l_max {l_max} exceeds k_max {k_max}")));
        }
        let mut rows = Vec::new();
        for l in 0..=l_max {
            let etas = self.blocks(l)?;
            for k in l..=k_max {
                for (eta, eta_st) in etas.iter() {
                    let (verdict, witness) = self.lambda_search(eta, eta_st, l, k, w_cap, horizon)?;
                    rows.push(LambdaSyncRow {
                        l,
                        k,
                        eta: self.sub.render(eta),
                        verdict: verdict.into(),
                        witness: witness.map(|w| self.sub.render(&w)),
                    });
                }
            }
        }
        Ok(rows)
    }

    fn lambda_search(
        &mut self,
        eta: &Word,
        eta_st: &State,
        l: usize,
        k: usize,
        w_cap: usize,
        horizon: usize,
    ) -> Result<(&'static str, Option<Word>)> {
        let m = &self.sub.machine;
        let n = m.num_symbols();
        let mut seen: HashSet<(State, State)> = HashSet::new();
        let mut queue = VecDeque::new();
        let start = (m.initial(), eta_st.clone());
        seen.insert(start.clone());
        queue.push_back((start, Word::empty()));
        let mut undecided = false;
        while let Some(((nu_st, eta_nu_st), nu)) = queue.pop_front() {
            let a = self.verdict(&nu_st, &nu, k, horizon)?;
            let b = self.verdict(&eta_nu_st, &eta.concat(&nu), k - l, horizon)?;
            if a.is_yes() && b.is_yes() {
                return Ok(("pass", Some(nu)));
            }
            if !a.is_no() && !b.is_no() {
                undecided = true;
            }
            if nu.len() == w_cap {
                undecided = true;
                continue;
            }
            let m = &self.sub.machine;
            for s in 0..n as Sym {
                if let (Some(x), Some(y)) = (m.step(&nu_st, s), m.step(&eta_nu_st, s)) {
                    let pair = (x, y);
                    if seen.insert(pair.clone()) {
                        if seen.len() > self.budget.state_cap {
                            return Ok(("unknown", None));
                        }
                        queue.push_back((pair, nu.push(s)));
                    }
                }
            }
        }
        Ok(if undecided { ("unknown", None) } else { ("fail", None) })
    }

    /// Whether `ω` is intrinsically synchronizing: `μω, ων` admissible
    /// imply `μων` admissible. Exact for graph-backed subshifts; otherwise
    /// a scan of `μ, ν` up to length `horizon` that can only refute.
    /// A counterexample reports `μ` as predecessor and `ν` as extension.
    pub fn is_intrinsically_synchronizing(&mut self, omega: &Word, horizon: usize) -> Result<SyncVerdict> {
        let st = self.state(omega)?;
        let m = &self.sub.machine;
        if let (Some(g), State::Rel(rel)) = (m.as_graph(), &st) {
            if let (Some(fwd), Some(back)) = (g.fwd_family(), g.back_family()) {
                let pairs = g.relation_pairs(rel);
                use crate::machine::GraphMachine as G;
                for (e, mu) in fwd {
                    if !pairs.iter().any(|&(s, _)| G::contains(e, s)) {
                        continue;
                    }
                    for (p, nu) in back {
                        if !pairs.iter().any(|&(_, t)| G::contains(p, t)) {
                            continue;
                        }
                        if !pairs.iter().any(|&(s, t)| G::contains(e, s) && G::contains(p, t)) {
                            return Ok(SyncVerdict::No { extension: nu.clone(), predecessor: mu.clone() });
                        }
                    }
                }
                return Ok(SyncVerdict::Yes);
            }
        }
        let mut mus: Vec<(Word, State)> = Vec::new();
        let mut seen = HashSet::new();
        for (mu, mst) in self.all_words(horizon)? {
            if let Some(s) = m.run_from(&mst, omega) {
                if seen.insert(s.clone()) {
                    mus.push((mu, s));
                }
            }
        }
        let nus: Vec<Word> = self
            .all_words(horizon)?
            .into_iter()
            .map(|(w, _)| w)
            .filter(|nu| m.run_from(&st, nu).is_some())
            .collect();
        for nu in &nus {
            for (mu, s) in &mus {
                if m.run_from(s, nu).is_none() {
                    return Ok(SyncVerdict::No { extension: nu.clone(), predecessor: mu.clone() });
                }
            }
        }
        Ok(SyncVerdict::UnknownAtHorizon { horizon })
    }
}

/// `Γ_l^-` test helper shared by builders: whether `μ·ω` keeps `Γ_l^-(μ)`.
pub fn is_l_synchronizing(sub: &Subshift, mu: &Word, l: usize, horizon: usize) -> Result<SyncVerdict> {
    Analyzer::new(sub).is_l_synchronizing(mu, l, horizon)
}

pub fn enumerate_sync_words(sub: &Subshift, l: usize, w_cap: usize, horizon: usize) -> Result<SyncWords> {
    Analyzer::new(sub).enumerate_sync_words(l, w_cap, horizon)
}

pub fn past_equiv_classes(sub: &Subshift, l: usize, w_cap: usize, horizon: usize) -> Result<PastPartition> {
    Analyzer::new(sub).past_equiv_classes(l, w_cap, horizon)
}

pub fn check_lambda_synchronizing(
    sub: &Subshift,
    l_max: usize,
    k_max: usize,
    w_cap: usize,
    horizon: usize,
) -> Result<Vec<LambdaSyncRow>> {
    Analyzer::new(sub).check_lambda_synchronizing(l_max, k_max, w_cap, horizon)
}

pub fn is_intrinsically_synchronizing(sub: &Subshift, omega: &Word, horizon: usize) -> Result<SyncVerdict> {
    Analyzer::new(sub).is_intrinsically_synchronizing(omega, horizon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::SubshiftSpec;

    fn dyck2() -> Subshift {
        Subshift::new(SubshiftSpec::Dyck { n: 2 }).unwrap()
    }

    fn golden() -> Subshift {
        Subshift::from_json(r#"{"kind":"sft","alphabet":["a","b"],"forbidden":["bb"]}"#).unwrap()
    }

    #[test]
    fn dyck_alpha_is_not_synchronizing() {
        let d = dyck2();
        let v = is_l_synchronizing(&d, &d.parse("α1").unwrap(), 1, 3).unwrap();
        assert_eq!(
            v,
            SyncVerdict::No { extension: d.parse("β1 β1").unwrap(), predecessor: d.parse("α2").unwrap() }
        );
        assert!(is_l_synchronizing(&d, &d.parse("β1").unwrap(), 1, 3).unwrap().is_yes());
    }

    #[test]
    fn dyck_level_one_sync_words() {
        let d = dyck2();
        let s = enumerate_sync_words(&d, 1, 1, 2).unwrap();
        let names: Vec<String> = s.words.iter().map(|w| d.render(w)).collect();
        assert_eq!(names, ["β1", "β2"]);
        assert!(s.unknown.is_empty());
    }

    #[test]
    fn class_counts() {
        assert_eq!(past_equiv_classes(&dyck2(), 2, 4, 6).unwrap().classes.len(), 4);
        assert_eq!(past_equiv_classes(&golden(), 1, 3, 5).unwrap().classes.len(), 2);
        let f3 = Subshift::new(SubshiftSpec::FullShift { n: 3, alphabet: None }).unwrap();
        assert_eq!(past_equiv_classes(&f3, 2, 2, 4).unwrap().classes.len(), 1);
    }

    #[test]
    fn golden_mean_symbols_synchronize() {
        let g = golden();
        let s = enumerate_sync_words(&g, 1, 2, 3).unwrap();
        assert!(s.words.contains(&g.parse("a").unwrap()));
        assert!(s.words.contains(&g.parse("b").unwrap()));
    }

    #[test]
    fn intrinsic() {
        let g = golden();
        assert!(is_intrinsically_synchronizing(&g, &g.parse("a").unwrap(), 3).unwrap().is_yes());
        let d = dyck2();
        let v = is_intrinsically_synchronizing(&d, &d.parse("β1").unwrap(), 3).unwrap();
        let SyncVerdict::No { extension, predecessor } = v else { panic!("expected refutation, got {v:?}") };
        let omega = d.parse("β1").unwrap();
        let m = &d.machine;
        assert!(m.run(&predecessor.concat(&omega)).is_some());
        assert!(m.run(&omega.concat(&extension)).is_some());
        assert!(m.run(&predecessor.concat(&omega).concat(&extension)).is_none());
    }

    #[test]
    fn lambda_tables() {
        let d = dyck2();
        let rows = check_lambda_synchronizing(&d, 2, 3, 6, 6).unwrap();
        assert!(rows.iter().all(|r| r.verdict == "pass"), "{rows:?}");
        let rows = check_lambda_synchronizing(&golden(), 2, 3, 6, 6).unwrap();
        assert!(rows.iter().all(|r| r.verdict == "pass"));
    }
}
