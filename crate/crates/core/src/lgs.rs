//! λ-graph systems: storage, the canonical builder, stationary systems,
//! validation, launching vertices, reduction and isomorphism.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::alphabet::{Alphabet, Sym, Word};
use crate::error::{Error, Result};
use crate::graph::LabeledGraph;
use crate::spec::Subshift;
use crate::sync::{Analyzer, Budget, Pattern, SyncVerdict};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vertex {
    /// predecessor set `Γ_l^-(v)`, lexicographic
    pub gamma: Vec<Word>,
    pub rep: Option<Word>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub label: Sym,
}

/// One level: its vertices, the edges to the next level and `ι` from the
/// next level (`iota[child] = parent`). The top level has neither.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Level {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    pub iota: Vec<usize>,
}

/// A λ-graph system truncated at level `L = levels.len() - 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LambdaGraphSystem {
    pub alphabet: Alphabet,
    pub levels: Vec<Level>,
}

#[derive(Serialize, Deserialize)]
struct LgsFile {
    alphabet: Vec<String>,
    levels: Vec<LevelFile>,
}

#[derive(Serialize, Deserialize)]
struct LevelFile {
    vertices: Vec<VertexFile>,
    edges: Vec<EdgeFile>,
    iota: Vec<IotaFile>,
}

#[derive(Serialize, Deserialize)]
struct VertexFile {
    id: usize,
    gamma: Vec<String>,
    rep: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct EdgeFile {
    src: usize,
    dst: usize,
    label: String,
}

#[derive(Serialize, Deserialize)]
struct IotaFile {
    child: usize,
    parent: usize,
}

impl LambdaGraphSystem {
    pub fn top(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn vertex_counts(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.vertices.len()).collect()
    }

    pub fn to_json(&self) -> String {
        let file = LgsFile {
            alphabet: self.alphabet.symbols().to_vec(),
            levels: self
                .levels
                .iter()
                .map(|lv| LevelFile {
                    vertices: lv
                        .vertices
                        .iter()
                        .enumerate()
                        .map(|(id, v)| VertexFile {
                            id,
                            gamma: v.gamma.iter().map(|w| self.alphabet.render(w)).collect(),
                            rep: v.rep.as_ref().map(|w| self.alphabet.render(w)),
                        })
                        .collect(),
                    edges: lv
                        .edges
                        .iter()
                        .map(|e| EdgeFile { src: e.src, dst: e.dst, label: self.alphabet.name(e.label).into() })
                        .collect(),
                    iota: lv.iota.iter().enumerate().map(|(child, &parent)| IotaFile { child, parent }).collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("system serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: LgsFile = serde_json::from_str(text)?;
        let alphabet = Alphabet::new(file.alphabet)?;
        if file.levels.is_empty() {
            return Err(Error::Malformed("no levels".into()));
        }
        let mut levels = Vec::with_capacity(file.levels.len());
        for (l, lf) in file.levels.into_iter().enumerate() {
            let mut vertices = Vec::with_capacity(lf.vertices.len());
            for (i, vf) in lf.vertices.into_iter().enumerate() {
                if vf.id != i {
                    return Err(Error::Malformed(format!("level {l}: vertex ids must be 0.. in order")));
                }
                let gamma = vf.gamma.iter().map(|g| alphabet.parse(g)).collect::<Result<Vec<_>>>()?;
                let rep = vf.rep.map(|r| alphabet.parse(&r)).transpose()?;
                vertices.push(Vertex { gamma, rep });
            }
            let edges = lf
                .edges
                .iter()
                .map(|e| Ok(Edge { src: e.src, dst: e.dst, label: alphabet.sym(&e.label)? }))
                .collect::<Result<Vec<_>>>()?;
            let mut iota = vec![usize::MAX; lf.iota.len()];
            for i in lf.iota {
                if i.child >= iota.len() {
                    return Err(Error::Malformed(format!("level {l}: iota child {} out of range", i.child)));
                }
                iota[i.child] = i.parent;
            }
            levels.push(Level { vertices, edges, iota });
        }
        let lgs = Self { alphabet, levels };
        lgs.check_indices()?;
        Ok(lgs)
    }

    fn check_indices(&self) -> Result<()> {
        let top = self.top();
        for (l, lv) in self.levels.iter().enumerate() {
            let here = lv.vertices.len();
            let next = self.levels.get(l + 1).map_or(0, |n| n.vertices.len());
            if l == top && (!lv.edges.is_empty() || !lv.iota.is_empty()) {
                return Err(Error::Malformed("top level carries edges or iota".into()));
            }
            for e in &lv.edges {
                if e.src >= here || e.dst >= next || e.label as usize >= self.alphabet.len() {
                    return Err(Error::Malformed(format!("level {l}: edge out of range")));
                }
            }
            if l < top && lv.iota.len() != next {
                return Err(Error::Malformed(format!("level {l}: iota must cover every vertex of level {}", l + 1)));
            }
            if lv.iota.iter().any(|&p| p >= here) {
                return Err(Error::Malformed(format!("level {l}: iota parent out of range")));
            }
        }
        Ok(())
    }

    /// `ι^n` from level `l + n` down to level `l`.
    pub fn iota_pow(&self, l: usize, n: usize, v: usize) -> usize {
        let mut v = v;
        for k in (l..l + n).rev() {
            v = self.levels[k].iota[v];
        }
        v
    }

    /// Labels of paths from `V_0` to each vertex (`Γ_l^-(v)` read off the structure).
    pub fn predecessor_sets(&self) -> Vec<Vec<Vec<Word>>> {
        let mut out: Vec<Vec<Vec<Word>>> = Vec::with_capacity(self.levels.len());
        out.push(vec![vec![Word::empty()]; self.levels[0].vertices.len()]);
        for l in 0..self.top() {
            let mut next: Vec<Vec<Word>> = vec![Vec::new(); self.levels[l + 1].vertices.len()];
            for e in &self.levels[l].edges {
                for k in &out[l][e.src] {
                    next[e.dst].push(k.push(e.label));
                }
            }
            for s in &mut next {
                s.sort();
                s.dedup();
            }
            out.push(next);
        }
        out
    }

    /// Replaces stored predecessor sets by the structural ones.
    pub fn with_structural_gamma(mut self) -> Self {
        let sets = self.predecessor_sets();
        for (lv, s) in self.levels.iter_mut().zip(sets) {
            for (v, g) in lv.vertices.iter_mut().zip(s) {
                v.gamma = g;
            }
        }
        self
    }

    /// Vertices at level `l + 1` reachable from `from` by one edge labeled `a`.
    fn step(&self, l: usize, from: &[bool], a: Sym) -> Vec<bool> {
        let mut out = vec![false; self.levels[l + 1].vertices.len()];
        for e in &self.levels[l].edges {
            if e.label == a && from[e.src] {
                out[e.dst] = true;
            }
        }
        out
    }

    /// Terminal vertices of paths labeled `w` from `v` at level `l`, if
    /// the path fits below the top level.
    pub fn read_from(&self, l: usize, v: usize, w: &Word) -> Option<Vec<usize>> {
        if l + w.len() > self.top() {
            return None;
        }
        let mut cur = vec![false; self.levels[l].vertices.len()];
        cur[v] = true;
        for (k, &a) in w.syms().iter().enumerate() {
            cur = self.step(l + k, &cur, a);
        }
        Some(cur.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect())
    }

    pub fn to_dot(&self, l: usize) -> Result<String> {
        if l >= self.top() {
            return Err(Error::LevelRangeMismatch(format!("level {l} has no successor level (top is {})", self.top())));
        }
        let name = |lv: usize, i: usize| format!("\"{lv}:{i}\"");
        let label = |lv: usize, i: usize| match &self.levels[lv].vertices[i].rep {
            Some(r) => format!("v{lv}_{i} [{}]", self.alphabet.render(r)),
            None => format!("v{lv}_{i}"),
        };
        let mut s = String::new();
        let _ = writeln!(s, "digraph level_{l}_{} {{", l + 1);
        let _ = writeln!(s, "  rankdir=TB;");
        for lv in [l, l + 1] {
            let _ = writeln!(s, "  {{ rank=same;");
            for i in 0..self.levels[lv].vertices.len() {
                let _ = writeln!(s, "    {} [label=\"{}\"];", name(lv, i), label(lv, i));
            }
            let _ = writeln!(s, "  }}");
        }
        for e in &self.levels[l].edges {
            let _ = writeln!(
                s,
                "  {} -> {} [label=\"{}\"];",
                name(l, e.src),
                name(l + 1, e.dst),
                self.alphabet.name(e.label)
            );
        }
        for (child, &parent) in self.levels[l].iota.iter().enumerate() {
            let _ = writeln!(s, "  {} -> {} [style=dashed, arrowhead=empty];", name(l + 1, child), name(l, parent));
        }
        s.push_str("}\n");
        Ok(s)
    }
}

/// Builds the canonical λ-synchronizing λ-graph system of `sub` up to level
/// `levels`, using synchronizing words of length at most `word_cap`.
pub fn build_lambda_sync_lgs(sub: &Subshift, levels: usize, word_cap: usize, horizon: usize) -> Result<LambdaGraphSystem> {
    Ok(build_with_report(sub, levels, word_cap, horizon, Budget::default())?.0)
}

/// Builder returning also, per level, the number of explored states whose
/// synchronization verdict stayed unknown.
pub fn build_with_report(
    sub: &Subshift,
    levels: usize,
    word_cap: usize,
    horizon: usize,
    budget: Budget,
) -> Result<(LambdaGraphSystem, Vec<usize>)> {
    let mut an = Analyzer::with_budget(sub, budget);
    let mut classes = Vec::with_capacity(levels + 1);
    let mut unknown = Vec::with_capacity(levels + 1);
    for l in 0..=levels {
        let (c, u) = an.level_classes(l, word_cap, horizon)?;
        if c.is_empty() {
            return Err(Error::ClassResolution { level: l, word: "(no synchronizing word within the word cap)".into() });
        }
        classes.push(c);
        unknown.push(u);
    }
    let mut out_levels = Vec::with_capacity(levels + 1);
    for l in 0..=levels {
        let vertices = classes[l]
            .iter()
            .map(|c| Ok(Vertex { gamma: an.pattern_words(l, &c.pattern)?, rep: Some(c.rep.clone()) }))
            .collect::<Result<Vec<_>>>()?;
        out_levels.push(Level { vertices, edges: Vec::new(), iota: Vec::new() });
    }
    for l in 0..levels {
        let lower = an.blocks(l)?;
        let upper = an.blocks(l + 1)?;
        let upper_ix: HashMap<&Word, usize> = upper.iter().enumerate().map(|(i, (w, _))| (w, i)).collect();
        let lower_ix: HashMap<&Word, usize> = lower.iter().enumerate().map(|(i, (w, _))| (w, i)).collect();
        let by_pattern: HashMap<&Pattern, usize> = classes[l].iter().enumerate().map(|(i, c)| (&c.pattern, i)).collect();
        let words = lower.len().div_ceil(64).max(1);
        let mut edges = Vec::new();
        let mut iota = Vec::with_capacity(classes[l + 1].len());
        for (j, class) in classes[l + 1].iter().enumerate() {
            let has = |i: usize| class.pattern[i / 64] >> (i % 64) & 1 == 1;
            // ι-parent: length-l suffixes of Γ_{l+1}
            let mut parent = vec![0u64; words];
            let mut labels = Vec::new();
            for (i, (w, _)) in upper.iter().enumerate() {
                if has(i) {
                    let k = lower_ix[&w.suffix(l)];
                    parent[k / 64] |= 1 << (k % 64);
                    labels.push(w.last().expect("nonempty"));
                }
            }
            labels.sort_unstable();
            labels.dedup();
            let parent: Pattern = parent.into();
            let Some(&p) = by_pattern.get(&parent) else {
                return Err(Error::ClassResolution { level: l, word: sub.render(&class.rep) });
            };
            iota.push(p);
            for &a in &labels {
                // Γ_l(aν) = {κ : κa ∈ Γ_{l+1}(ν)}
                let mut src = vec![0u64; words];
                for (k, (kappa, _)) in lower.iter().enumerate() {
                    if upper_ix.get(&kappa.push(a)).is_some_and(|&i| has(i)) {
                        src[k / 64] |= 1 << (k % 64);
                    }
                }
                let src: Pattern = src.into();
                let Some(&s) = by_pattern.get(&src) else {
                    return Err(Error::ClassResolution { level: l, word: sub.render(&class.rep.prepend(a)) });
                };
                edges.push(Edge { src: s, dst: j, label: a });
            }
        }
        edges.sort();
        out_levels[l].edges = edges;
        out_levels[l].iota = iota;
    }
    Ok((LambdaGraphSystem { alphabet: sub.alphabet().clone(), levels: out_levels }, unknown))
}

/// The level-constant system of a left-resolving graph.
pub fn stationary_lgs(g: &LabeledGraph, levels: usize) -> Result<LambdaGraphSystem> {
    if let Some((e, f)) = g.left_resolving_violation() {
        return Err(Error::NotLeftResolving(format!(
            "edges {} -{}-> {} and {} -{}-> {}",
            g.states[e.from],
            g.alphabet.name(e.label),
            g.states[e.to],
            g.states[f.from],
            g.alphabet.name(f.label),
            g.states[f.to]
        )));
    }
    if !g.is_essential() {
        return Err(Error::InvalidSpec("graph is not essential".into()));
    }
    let n = g.num_states();
    let mut edges: Vec<Edge> = g.edges.iter().map(|e| Edge { src: e.from, dst: e.to, label: e.label }).collect();
    edges.sort();
    let levels = (0..=levels)
        .map(|l| Level {
            vertices: vec![Vertex { gamma: Vec::new(), rep: None }; n],
            edges: if l < levels { edges.clone() } else { Vec::new() },
            iota: if l < levels { (0..n).collect() } else { Vec::new() },
        })
        .collect();
    Ok(LambdaGraphSystem { alphabet: g.alphabet.clone(), levels }.with_structural_gamma())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", content = "witness", rename_all = "lowercase")]
pub enum Check {
    Pass,
    Fail(String),
}

impl Check {
    pub fn passed(&self) -> bool {
        matches!(self, Check::Pass)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub left_resolving: Check,
    pub predecessor_separated: Check,
    pub local_property: Check,
    pub essential: Check,
    pub iota_surjective: Check,
    /// per level, whether predecessor sets are pairwise distinct
    pub separated_levels: Vec<bool>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.left_resolving.passed()
            && self.predecessor_separated.passed()
            && self.local_property.passed()
            && self.essential.passed()
            && self.iota_surjective.passed()
    }

    /// Everything except predecessor separation at level 0.
    pub fn pass_from_level_1(&self) -> bool {
        self.left_resolving.passed()
            && self.local_property.passed()
            && self.essential.passed()
            && self.iota_surjective.passed()
            && self.separated_levels.iter().skip(1).all(|&b| b)
    }
}

pub fn validate_lgs(lgs: &LambdaGraphSystem) -> ValidationReport {
    let a = &lgs.alphabet;
    let top = lgs.top();

    let mut left_resolving = Check::Pass;
    'lr: for (l, lv) in lgs.levels.iter().enumerate() {
        let mut seen: HashMap<(usize, Sym), &Edge> = HashMap::new();
        for e in &lv.edges {
            if let Some(f) = seen.insert((e.dst, e.label), e) {
                left_resolving = Check::Fail(format!(
                    "level {l}: edges {}->{} and {}->{} both labeled {} into vertex {} of level {}",
                    f.src,
                    f.dst,
                    e.src,
                    e.dst,
                    a.name(e.label),
                    e.dst,
                    l + 1
                ));
                break 'lr;
            }
        }
    }

    let sets = lgs.predecessor_sets();
    let mut separated_levels = Vec::with_capacity(sets.len());
    let mut predecessor_separated = Check::Pass;
    for (l, s) in sets.iter().enumerate() {
        let mut seen: HashMap<&Vec<Word>, usize> = HashMap::new();
        let mut ok = true;
        for (i, g) in s.iter().enumerate() {
            if let Some(j) = seen.insert(g, i) {
                ok = false;
                if predecessor_separated.passed() {
                    predecessor_separated = Check::Fail(format!("level {l}: vertices {j} and {i} have equal predecessor sets"));
                }
                break;
            }
        }
        separated_levels.push(ok);
    }

    let mut local_property = Check::Pass;
    'local: for l in 1..top {
        let mut count: BTreeMap<(usize, usize, Sym), i64> = BTreeMap::new();
        for e in &lgs.levels[l].edges {
            let u = lgs.levels[l - 1].iota[e.src];
            *count.entry((u, e.dst, e.label)).or_default() += 1;
        }
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); lgs.levels[l].vertices.len()];
        for (v, &p) in lgs.levels[l].iota.iter().enumerate() {
            children[p].push(v);
        }
        for e in &lgs.levels[l - 1].edges {
            for &v in &children[e.dst] {
                *count.entry((e.src, v, e.label)).or_default() -= 1;
            }
        }
        if let Some(((u, v, lab), c)) = count.into_iter().find(|(_, c)| *c != 0) {
            local_property = Check::Fail(format!(
                "u = {u} at level {}, v = {v} at level {}: label {} occurs {} more time(s) upstairs",
                l - 1,
                l + 1,
                a.name(lab),
                c
            ));
            break 'local;
        }
    }

    let mut essential = Check::Pass;
    'ess: for (l, lv) in lgs.levels.iter().enumerate() {
        if l < top {
            let mut out = vec![false; lv.vertices.len()];
            for e in &lv.edges {
                out[e.src] = true;
            }
            if let Some(i) = out.iter().position(|&b| !b) {
                essential = Check::Fail(format!("vertex {i} at level {l} has no outgoing edge"));
                break 'ess;
            }
        }
        if l > 0 {
            let mut inc = vec![false; lv.vertices.len()];
            for e in &lgs.levels[l - 1].edges {
                inc[e.dst] = true;
            }
            if let Some(i) = inc.iter().position(|&b| !b) {
                essential = Check::Fail(format!("vertex {i} at level {l} has no incoming edge"));
                break 'ess;
            }
        }
    }

    let mut iota_surjective = Check::Pass;
    for l in 0..top {
        let mut hit = vec![false; lgs.levels[l].vertices.len()];
        for &p in &lgs.levels[l].iota {
            hit[p] = true;
        }
        if let Some(i) = hit.iter().position(|&b| !b) {
            iota_surjective = Check::Fail(format!("vertex {i} at level {l} is not the image of iota"));
            break;
        }
    }

    ValidationReport { left_resolving, predecessor_separated, local_property, essential, iota_surjective, separated_levels }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LaunchKind {
    /// the word leaves this vertex and no other within the truncation
    Path,
    /// a synchronizing word of the vertex's past class; it launches the
    /// vertex in the untruncated system and its readable prefix leaves it here
    Language,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaunchWitness {
    pub word: Word,
    pub kind: LaunchKind,
}

/// Per level and vertex, a word launched by that vertex. Levels that are
/// not predecessor-separated have no launching vertices.
pub fn launching_vertices(lgs: &LambdaGraphSystem, sub: &Subshift, horizon: usize) -> Result<Vec<Vec<Option<LaunchWitness>>>> {
    let report = validate_lgs(lgs);
    let sets = lgs.predecessor_sets();
    let mut an = Analyzer::new(sub);
    let mut language: Option<Vec<(Word, crate::machine::State)>> = None;
    let mut out = Vec::with_capacity(lgs.levels.len());
    for (l, lv) in lgs.levels.iter().enumerate() {
        let n = lv.vertices.len();
        if !report.separated_levels[l] {
            out.push(vec![None; n]);
            continue;
        }
        let mut row: Vec<Option<LaunchWitness>> = path_witnesses(lgs, l, horizon.min(lgs.top() - l));
        for v in 0..n {
            if row[v].is_some() {
                continue;
            }
            let mut candidates = Vec::new();
            if let Some(r) = &lv.vertices[v].rep {
                candidates.push(r.clone());
            }
            if candidates.is_empty() {
                let reps = language.get_or_insert_with(|| an.state_reps(horizon).unwrap_or_default());
                candidates.extend(reps.iter().map(|(w, _)| w.clone()));
            }
            for w in candidates {
                if sub.machine.run(&w).is_none() {
                    continue;
                }
                if !matches!(an.is_l_synchronizing(&w, l, horizon)?, SyncVerdict::Yes) {
                    continue;
                }
                if an.gamma_minus(&w, l)? != sets[l][v] {
                    continue;
                }
                let fit = w.prefix(w.len().min(lgs.top() - l));
                if lgs.read_from(l, v, &fit).is_some_and(|t| !t.is_empty()) {
                    row[v] = Some(LaunchWitness { word: w, kind: LaunchKind::Language });
                    break;
                }
            }
        }
        out.push(row);
    }
    Ok(out)
}

/// Shortest words (up to `max_len`) leaving exactly one vertex of level `l`.
fn path_witnesses(lgs: &LambdaGraphSystem, l: usize, max_len: usize) -> Vec<Option<LaunchWitness>> {
    let n = lgs.levels[l].vertices.len();
    let mut out: Vec<Option<LaunchWitness>> = vec![None; n];
    // frontier entries: word and, per start vertex, the current terminal set
    let init: Vec<Vec<bool>> = (0..n)
        .map(|v| {
            let mut s = vec![false; n];
            s[v] = true;
            s
        })
        .collect();
    let mut frontier = vec![(Word::empty(), init)];
    let mut seen: HashSet<Vec<Vec<bool>>> = HashSet::new();
    for depth in 0..=max_len {
        let mut next = Vec::new();
        for (w, sets) in &frontier {
            let alive: Vec<usize> = (0..n).filter(|&v| sets[v].iter().any(|&b| b)).collect();
            if alive.len() == 1 && out[alive[0]].is_none() {
                out[alive[0]] = Some(LaunchWitness { word: w.clone(), kind: LaunchKind::Path });
            }
            if depth == max_len || alive.is_empty() {
                continue;
            }
            for a in 0..lgs.alphabet.len() as Sym {
                let stepped: Vec<Vec<bool>> = sets.iter().map(|s| lgs.step(l + depth, s, a)).collect();
                if stepped.iter().any(|s| s.iter().any(|&b| b)) && seen.insert(stepped.clone()) {
                    next.push((w.push(a), stepped));
                }
            }
        }
        if out.iter().all(Option::is_some) {
            break;
        }
        frontier = next;
        seen.clear();
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tri {
    Pass,
    Fail(String),
    Unknown(String),
}

/// Checks ι-irreducibility with connecting paths and test paths of length
/// at most `depth`, on every level `l` with `l + 2·depth ≤ L`.
pub fn check_iota_irreducible(lgs: &LambdaGraphSystem, depth: usize) -> Tri {
    let top = lgs.top();
    if top < 2 * depth {
        return Tri::Unknown(format!("need at least {} levels for depth {depth}, have {top}", 2 * depth));
    }
    for l in 0..=top - 2 * depth {
        let n = lgs.levels[l].vertices.len();
        // (label, terminal) pairs of paths of length ≤ depth from each u
        let mut paths: Vec<Vec<(Word, usize)>> = Vec::with_capacity(n);
        for u in 0..n {
            let mut all = vec![(Word::empty(), u)];
            let mut layer = vec![(Word::empty(), u)];
            for k in 0..depth {
                let mut next = Vec::new();
                for (w, x) in &layer {
                    for e in lgs.levels[l + k].edges.iter().filter(|e| e.src == *x) {
                        next.push((w.push(e.label), e.dst));
                    }
                }
                next.sort();
                next.dedup();
                all.extend(next.iter().cloned());
                layer = next;
            }
            paths.push(all);
        }
        for v in 0..n {
            // vertices reachable from v in exactly k steps
            let mut reach: Vec<Vec<bool>> = Vec::with_capacity(depth + 1);
            let mut cur = vec![false; n];
            cur[v] = true;
            reach.push(cur.clone());
            for k in 0..depth {
                let mut nx = vec![false; lgs.levels[l + k + 1].vertices.len()];
                for e in &lgs.levels[l + k].edges {
                    if cur[e.src] {
                        nx[e.dst] = true;
                    }
                }
                reach.push(nx.clone());
                cur = nx;
            }
            for u in 0..n {
                for (gamma, t) in &paths[u] {
                    let ok = (0..=depth).any(|nn| {
                        reach[nn].iter().enumerate().any(|(u2, &r)| {
                            r && lgs.iota_pow(l, nn, u2) == u
                                && lgs.read_from(l + nn, u2, gamma).is_some_and(|ends| {
                                    ends.iter().any(|&e| lgs.iota_pow(l + gamma.len(), nn, e) == *t)
                                })
                        })
                    });
                    if !ok {
                        return Tri::Fail(format!(
                            "level {l}: from vertex {v} no lift of the path `{}` from vertex {u}",
                            lgs.alphabet.render(gamma)
                        ));
                    }
                }
            }
        }
    }
    Tri::Pass
}

/// Identifies vertices with equal predecessor sets, level by level.
pub fn reduce_lgs(lgs: &LambdaGraphSystem) -> Result<LambdaGraphSystem> {
    let sets = lgs.predecessor_sets();
    let mut class_of: Vec<Vec<usize>> = Vec::with_capacity(sets.len());
    let mut levels: Vec<Level> = Vec::with_capacity(sets.len());
    for (l, s) in sets.iter().enumerate() {
        let mut index: HashMap<&Vec<Word>, usize> = HashMap::new();
        let mut map = Vec::with_capacity(s.len());
        let mut vertices = Vec::new();
        for (i, g) in s.iter().enumerate() {
            let c = *index.entry(g).or_insert_with(|| {
                vertices.push(Vertex { gamma: g.clone(), rep: lgs.levels[l].vertices[i].rep.clone() });
                vertices.len() - 1
            });
            map.push(c);
        }
        class_of.push(map);
        levels.push(Level { vertices, edges: Vec::new(), iota: Vec::new() });
    }
    for l in 0..lgs.top() {
        let mut edges: Vec<Edge> = lgs.levels[l]
            .edges
            .iter()
            .map(|e| Edge { src: class_of[l][e.src], dst: class_of[l + 1][e.dst], label: e.label })
            .collect();
        edges.sort();
        edges.dedup();
        let mut into: HashMap<(usize, Sym), usize> = HashMap::new();
        for e in &edges {
            if let Some(prev) = into.insert((e.dst, e.label), e.src) {
                return Err(Error::QuotientBreaksLeftResolving {
                    level: l,
                    detail: format!(
                        "classes {prev} and {} both reach class {} with label {}",
                        e.src,
                        e.dst,
                        lgs.alphabet.name(e.label)
                    ),
                });
            }
        }
        let mut iota = vec![usize::MAX; levels[l + 1].vertices.len()];
        for (child, &parent) in lgs.levels[l].iota.iter().enumerate() {
            let (c, p) = (class_of[l + 1][child], class_of[l][parent]);
            if iota[c] != usize::MAX && iota[c] != p {
                return Err(Error::QuotientBreaksLeftResolving {
                    level: l,
                    detail: format!("iota is not constant on class {c} of level {}", l + 1),
                });
            }
            iota[c] = p;
        }
        levels[l].edges = edges;
        levels[l].iota = iota;
    }
    Ok(LambdaGraphSystem { alphabet: lgs.alphabet.clone(), levels })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Isomorphism {
    /// `bijection[l][i]` is the vertex of the second system matched to vertex `i`.
    Yes { from_level: usize, bijection: Vec<Vec<usize>> },
    No { level: usize, reason: String },
}

impl Isomorphism {
    pub fn holds(&self) -> bool {
        matches!(self, Isomorphism::Yes { .. })
    }
}

/// Compares two predecessor-separated systems from level `from` up, keying
/// vertices by their structural predecessor sets.
pub fn are_isomorphic(a: &LambdaGraphSystem, b: &LambdaGraphSystem, from: usize) -> Result<Isomorphism> {
    if a.top() != b.top() {
        return Err(Error::LevelRangeMismatch(format!("systems truncated at {} and {}", a.top(), b.top())));
    }
    if from > a.top() {
        return Err(Error::LevelRangeMismatch(format!("start level {from} above top level {}", a.top())));
    }
    if a.alphabet != b.alphabet {
        return Ok(Isomorphism::No { level: from, reason: "alphabets differ".into() });
    }
    let (sa, sb) = (a.predecessor_sets(), b.predecessor_sets());
    let mut bijection = Vec::new();
    for l in from..=a.top() {
        let ia: HashMap<&Vec<Word>, usize> = sa[l].iter().enumerate().map(|(i, g)| (g, i)).collect();
        let ib: HashMap<&Vec<Word>, usize> = sb[l].iter().enumerate().map(|(i, g)| (g, i)).collect();
        if ia.len() != sa[l].len() || ib.len() != sb[l].len() {
            return Err(Error::Domain(format!("level {l} is not predecessor-separated; reduce first")));
        }
        if sa[l].len() != sb[l].len() {
            return Ok(Isomorphism::No {
                level: l,
                reason: format!("vertex counts {} and {}", sa[l].len(), sb[l].len()),
            });
        }
        let mut map = Vec::with_capacity(sa[l].len());
        for (i, g) in sa[l].iter().enumerate() {
            match ib.get(g) {
                Some(&j) => map.push(j),
                None => {
                    return Ok(Isomorphism::No { level: l, reason: format!("vertex {i} has no counterpart") });
                }
            }
        }
        bijection.push(map);
    }
    for l in from..a.top() {
        let (lo, hi) = (&bijection[l - from], &bijection[l + 1 - from]);
        let mut ea: Vec<Edge> =
            a.levels[l].edges.iter().map(|e| Edge { src: lo[e.src], dst: hi[e.dst], label: e.label }).collect();
        let mut eb = b.levels[l].edges.clone();
        ea.sort();
        eb.sort();
        if ea != eb {
            return Ok(Isomorphism::No { level: l, reason: "edge sets differ".into() });
        }
        for (child, &parent) in a.levels[l].iota.iter().enumerate() {
            if b.levels[l].iota[hi[child]] != lo[parent] {
                return Ok(Isomorphism::No { level: l, reason: format!("iota differs at vertex {child} of level {}", l + 1) });
            }
        }
    }
    Ok(Isomorphism::Yes { from_level: from, bijection })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DeletionOutcome {
    NotALambdaGraphSystem(String),
    LanguageChanged { level: usize, word: Word },
    Unchanged,
}

/// Removes vertex `v` of level `l` together with everything above it under ι.
pub fn delete_vertex(lgs: &LambdaGraphSystem, l: usize, v: usize) -> LambdaGraphSystem {
    let mut dead: Vec<HashSet<usize>> = vec![HashSet::new(); lgs.levels.len()];
    dead[l].insert(v);
    for k in l..lgs.top() {
        for (child, &p) in lgs.levels[k].iota.iter().enumerate() {
            if dead[k].contains(&p) {
                dead[k + 1].insert(child);
            }
        }
    }
    remove(lgs, &dead, &HashSet::new())
}

/// Removes edge number `k` of level pair `(l, l+1)`.
pub fn delete_edge(lgs: &LambdaGraphSystem, l: usize, k: usize) -> LambdaGraphSystem {
    let dead = vec![HashSet::new(); lgs.levels.len()];
    remove(lgs, &dead, &HashSet::from([(l, k)]))
}

fn remove(lgs: &LambdaGraphSystem, dead: &[HashSet<usize>], dead_edges: &HashSet<(usize, usize)>) -> LambdaGraphSystem {
    let maps: Vec<Vec<Option<usize>>> = lgs
        .levels
        .iter()
        .enumerate()
        .map(|(l, lv)| {
            let mut k = 0;
            (0..lv.vertices.len())
                .map(|i| {
                    (!dead[l].contains(&i)).then(|| {
                        k += 1;
                        k - 1
                    })
                })
                .collect()
        })
        .collect();
    let mut levels = Vec::new();
    for (l, lv) in lgs.levels.iter().enumerate() {
        let vertices = lv.vertices.iter().enumerate().filter(|(i, _)| maps[l][*i].is_some()).map(|(_, v)| v.clone()).collect();
        let mut edges = Vec::new();
        let mut iota = Vec::new();
        if l < lgs.top() {
            for (k, e) in lv.edges.iter().enumerate() {
                if dead_edges.contains(&(l, k)) {
                    continue;
                }
                if let (Some(s), Some(d)) = (maps[l][e.src], maps[l + 1][e.dst]) {
                    edges.push(Edge { src: s, dst: d, label: e.label });
                }
            }
            for (child, &p) in lv.iota.iter().enumerate() {
                if maps[l + 1][child].is_some() {
                    iota.push(maps[l][p].unwrap_or(usize::MAX));
                }
            }
        }
        levels.push(Level { vertices, edges, iota });
    }
    LambdaGraphSystem { alphabet: lgs.alphabet.clone(), levels }
}

/// Words leaving each level within the truncation.
fn leaving_words(lgs: &LambdaGraphSystem) -> Vec<HashSet<Word>> {
    (0..=lgs.top())
        .map(|l| {
            let mut out = HashSet::new();
            let n = lgs.levels[l].vertices.len();
            let mut frontier = vec![(Word::empty(), vec![true; n])];
            out.insert(Word::empty());
            for k in 0..lgs.top() - l {
                let mut next = Vec::new();
                for (w, s) in &frontier {
                    for a in 0..lgs.alphabet.len() as Sym {
                        let t = lgs.step(l + k, s, a);
                        if t.iter().any(|&b| b) {
                            out.insert(w.push(a));
                            next.push((w.push(a), t));
                        }
                    }
                }
                frontier = next;
            }
            out
        })
        .collect()
}

/// Effect of a modification: is the result still a λ-graph system, and if
/// so does it present the same words.
pub fn deletion_outcome(original: &LambdaGraphSystem, modified: &LambdaGraphSystem) -> DeletionOutcome {
    if modified.levels.iter().any(|lv| lv.vertices.is_empty()) {
        return DeletionOutcome::NotALambdaGraphSystem("a level became empty".into());
    }
    if modified.levels.iter().any(|lv| lv.iota.contains(&usize::MAX)) {
        return DeletionOutcome::NotALambdaGraphSystem("iota undefined on some vertex".into());
    }
    let r = validate_lgs(modified);
    for (name, c) in [
        ("left-resolving", &r.left_resolving),
        ("local property", &r.local_property),
        ("essential", &r.essential),
        ("iota surjective", &r.iota_surjective),
    ] {
        if let Check::Fail(w) = c {
            return DeletionOutcome::NotALambdaGraphSystem(format!("{name}: {w}"));
        }
    }
    let (a, b) = (leaving_words(original), leaving_words(modified));
    for l in 0..a.len() {
        let mut lost: Vec<&Word> = a[l].difference(&b[l]).collect();
        lost.sort_by(|x, y| x.shortlex_cmp(y));
        if let Some(w) = lost.first() {
            return DeletionOutcome::LanguageChanged { level: l, word: (*w).clone() };
        }
    }
    let (pa, pb) = (original.predecessor_sets(), modified.predecessor_sets());
    for l in 0..pa.len() {
        let ua: HashSet<&Word> = pa[l].iter().flatten().collect();
        let ub: HashSet<&Word> = pb[l].iter().flatten().collect();
        if let Some(w) = ua.difference(&ub).min_by(|x, y| x.shortlex_cmp(y)) {
            return DeletionOutcome::LanguageChanged { level: l, word: (*w).clone() };
        }
    }
    DeletionOutcome::Unchanged
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::SubshiftSpec;

    fn golden() -> Subshift {
        Subshift::from_json(r#"{"kind":"sft","alphabet":["a","b"],"forbidden":["bb"]}"#).unwrap()
    }

    fn golden_graph() -> LabeledGraph {
        let file: crate::graph::GraphFile = serde_json::from_str(
            r#"{"states":["p","q"],"edges":[{"from":"p","to":"p","label":"a"},{"from":"p","to":"q","label":"a"},{"from":"q","to":"p","label":"b"}]}"#,
        )
        .unwrap();
        LabeledGraph::from_file(&file, None).unwrap()
    }

    #[test]
    fn full_shift_system() {
        let f = Subshift::new(SubshiftSpec::FullShift { n: 2, alphabet: None }).unwrap();
        let g = build_lambda_sync_lgs(&f, 3, 3, 4).unwrap();
        assert_eq!(g.vertex_counts(), [1, 1, 1, 1]);
        assert!(g.levels[..3].iter().all(|lv| lv.edges.len() == 2));
        assert!(validate_lgs(&g).all_pass());
    }

    #[test]
    fn golden_mean_system() {
        let g = build_lambda_sync_lgs(&golden(), 3, 6, 5).unwrap();
        assert_eq!(g.vertex_counts(), [1, 2, 2, 2]);
        assert!(validate_lgs(&g).all_pass());
        let st = stationary_lgs(&golden_graph(), 3).unwrap();
        let r = validate_lgs(&st);
        assert!(!r.predecessor_separated.passed());
        assert_eq!(r.separated_levels, [false, true, true, true]);
        let red = reduce_lgs(&st).unwrap();
        assert_eq!(red.vertex_counts(), [1, 2, 2, 2]);
        assert!(are_isomorphic(&red, &g, 1).unwrap().holds());
    }

    #[test]
    fn stored_gamma_matches_structure() {
        let d = Subshift::new(SubshiftSpec::Dyck { n: 2 }).unwrap();
        let g = build_lambda_sync_lgs(&d, 3, 4, 6).unwrap();
        assert_eq!(g.vertex_counts(), [1, 2, 4, 8]);
        let s = g.predecessor_sets();
        for (l, lv) in g.levels.iter().enumerate() {
            for (i, v) in lv.vertices.iter().enumerate() {
                assert_eq!(v.gamma, s[l][i]);
            }
        }
    }

    #[test]
    fn json_roundtrip() {
        let g = build_lambda_sync_lgs(&golden(), 2, 4, 4).unwrap();
        assert_eq!(LambdaGraphSystem::from_json(&g.to_json()).unwrap(), g);
    }

    #[test]
    fn left_resolving_failure_witness() {
        let a = Alphabet::new(["a"]).unwrap();
        let v = || Vertex { gamma: Vec::new(), rep: None };
        let lgs = LambdaGraphSystem {
            alphabet: a,
            levels: vec![
                Level { vertices: vec![v(), v()], edges: vec![Edge { src: 0, dst: 0, label: 0 }, Edge { src: 1, dst: 0, label: 0 }], iota: vec![0] },
                Level { vertices: vec![v()], edges: vec![], iota: vec![] },
            ],
        };
        assert!(matches!(validate_lgs(&lgs).left_resolving, Check::Fail(_)));
    }

    #[test]
    fn stationary_rejects_non_left_resolving() {
        let file: crate::graph::GraphFile = serde_json::from_str(
            r#"{"states":["p","q"],"edges":[{"from":"p","to":"q","label":"a"},{"from":"q","to":"q","label":"a"},{"from":"q","to":"p","label":"b"}]}"#,
        )
        .unwrap();
        let g = LabeledGraph::from_file(&file, None).unwrap();
        assert!(matches!(stationary_lgs(&g, 2), Err(Error::NotLeftResolving(_))));
    }

    #[test]
    fn disconnected_graph_is_not_iota_irreducible() {
        let file: crate::graph::GraphFile = serde_json::from_str(
            r#"{"states":["p","q"],"edges":[{"from":"p","to":"p","label":"a"},{"from":"q","to":"q","label":"b"}]}"#,
        )
        .unwrap();
        let g = LabeledGraph::from_file(&file, None).unwrap();
        let st = stationary_lgs(&g, 3).unwrap();
        assert!(matches!(check_iota_irreducible(&st, 1), Tri::Fail(_)));
        let gm = stationary_lgs(&golden_graph(), 3).unwrap();
        assert_eq!(check_iota_irreducible(&gm, 1), Tri::Pass);
        assert!(matches!(check_iota_irreducible(&gm, 2), Tri::Unknown(_)));
    }

    #[test]
    fn stationary_launching_needs_separation() {
        let st = stationary_lgs(&golden_graph(), 3).unwrap();
        let w = launching_vertices(&st, &golden(), 4).unwrap();
        assert_eq!(w[0], vec![None, None]);
        assert!(w[1].iter().all(Option::is_some));
    }

    #[test]
    fn dot_output() {
        let g = build_lambda_sync_lgs(&golden(), 2, 4, 4).unwrap();
        let dot = g.to_dot(1).unwrap();
        assert!(dot.starts_with("digraph"));
        assert_eq!(dot.matches("style=dashed").count(), 2);
        assert!(g.to_dot(2).is_err());
    }
}
