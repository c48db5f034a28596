//! Built-in subshifts, Fischer covers and Cantor horizon λ-graph systems.

use std::collections::{HashMap, VecDeque};
use std::path::Path;

use crate::alphabet::{Alphabet, Sym, Word};
use crate::error::{Error, Result};
use crate::graph::{GraphEdge, GraphFile, LabeledGraph};
use crate::lgs::{Edge, LambdaGraphSystem, Level, Vertex};
use crate::md::TransitionMatrix;
use crate::spec::{Subshift, SubshiftSpec};

pub fn golden_mean() -> Subshift {
    Subshift::new(SubshiftSpec::SftForbidden {
        alphabet: vec!["a".into(), "b".into()],
        forbidden: vec![vec!["b".into(), "b".into()]],
    })
    .expect("golden mean is valid")
}

pub fn full_shift(n: usize) -> Result<Subshift> {
    Subshift::new(SubshiftSpec::FullShift { n, alphabet: None })
}

pub fn dyck(n: usize) -> Result<Subshift> {
    Subshift::new(SubshiftSpec::Dyck { n })
}

pub fn markov_dyck(matrix: Vec<Vec<u8>>) -> Result<Subshift> {
    Subshift::new(SubshiftSpec::MarkovDyck { matrix })
}

pub fn sofic_from_graph(graph: GraphFile) -> Result<Subshift> {
    Subshift::new(SubshiftSpec::SoficGraph { alphabet: None, graph })
}

/// Names understood by [`from_name`], with a short description each.
pub fn catalog_entries() -> Vec<(&'static str, &'static str)> {
    vec![
        ("golden-mean", "SFT over {a, b} forbidding \"bb\""),
        ("full:N", "full shift on symbols 1..N (N >= 2)"),
        ("dyck:N", "Dyck shift with brackets α1..αN, β1..βN (N >= 2)"),
        ("markov-dyck:<file>", "Markov-Dyck shift of the 0/1 matrix stored as JSON in <file>"),
        ("sofic:<file>", "sofic shift presented by the labeled graph stored as JSON in <file>"),
    ]
}

/// Resolves a catalog name such as `dyck:2` or `sofic:graph.json`.
pub fn from_name(name: &str) -> Result<Subshift> {
    let parse_n = |s: &str| s.parse::<usize>().map_err(|_| Error::Malformed(format!("`{s}` is not a number")));
    match name.split_once(':') {
        None if name == "golden-mean" => Ok(golden_mean()),
        Some(("full", n)) => full_shift(parse_n(n)?),
        Some(("dyck", n)) => dyck(parse_n(n)?),
        Some(("markov-dyck", file)) => {
            let text = std::fs::read_to_string(Path::new(file))?;
            markov_dyck(serde_json::from_str(&text)?)
        }
        Some(("sofic", file)) => {
            let text = std::fs::read_to_string(Path::new(file))?;
            sofic_from_graph(serde_json::from_str(&text)?)
        }
        _ => Err(Error::Malformed(format!("unknown catalog entry `{name}`"))),
    }
}

/// The left Fischer cover: the minimal left-resolving presentation of an
/// irreducible sofic shift.
///
/// Subsets of presentation states from which a word can be read are
/// generated by reading right to left; the unique closed strongly connected
/// part of that automaton is minimized and its edges reversed.
pub fn fischer_cover(sub: &Subshift) -> Result<LabeledGraph> {
    let g = sub
        .graph_presentation()
        .ok_or_else(|| Error::Domain("the Fischer cover needs a sofic subshift".into()))?;
    let gm = sub.machine.as_graph().expect("graph-backed subshift");
    let family = gm
        .back_family()
        .ok_or_else(|| Error::BudgetExceeded("subset construction of the presentation".into()))?;
    let k = g.alphabet.len();
    let index: HashMap<&[u64], usize> = family.iter().enumerate().map(|(i, (s, _))| (&s[..], i)).collect();
    // delta[i][b]: the subset reached by prepending b
    let delta: Vec<Vec<Option<usize>>> = family
        .iter()
        .map(|(s, _)| {
            (0..k as Sym)
                .map(|b| gm_pred(sub, s, b).map(|t| index[&t[..]]))
                .collect()
        })
        .collect();
    let comp = closed_component(&delta)?;
    // Moore refinement inside the component
    let mut class: HashMap<usize, usize> = comp.iter().map(|&i| (i, 0)).collect();
    loop {
        let mut sig_ix: HashMap<(usize, Vec<Option<usize>>), usize> = HashMap::new();
        let mut next = HashMap::new();
        for &i in &comp {
            let sig = (class[&i], delta[i].iter().map(|t| t.map(|t| class[&t])).collect());
            let n = sig_ix.len();
            next.insert(i, *sig_ix.entry(sig).or_insert(n));
        }
        let done = sig_ix.len() == class.values().collect::<std::collections::HashSet<_>>().len();
        class = next;
        if done {
            break;
        }
    }
    // order classes by the shortlex-least witness among their members
    let mut reps: HashMap<usize, &Word> = HashMap::new();
    for &i in &comp {
        let w = &family[i].1;
        let e = reps.entry(class[&i]).or_insert(w);
        if w.shortlex_cmp(e).is_lt() {
            *e = w;
        }
    }
    let mut order: Vec<(usize, &Word)> = reps.into_iter().collect();
    order.sort_by(|a, b| a.1.shortlex_cmp(b.1));
    let rank: HashMap<usize, usize> = order.iter().enumerate().map(|(r, (c, _))| (*c, r)).collect();
    let mut edges = Vec::new();
    for &i in &comp {
        for b in 0..k as Sym {
            if let Some(t) = delta[i][b as usize] {
                edges.push(GraphEdge { from: rank[&class[&t]], to: rank[&class[&i]], label: b });
            }
        }
    }
    edges.sort();
    edges.dedup();
    let states = (0..order.len()).map(|i| format!("F{i}")).collect();
    let cover = LabeledGraph::new(g.alphabet.clone(), states, edges)?;
    if !cover.is_strongly_connected() {
        return Err(Error::NotIrreducible("Fischer cover is not strongly connected".into()));
    }
    Ok(cover)
}

fn gm_pred(sub: &Subshift, s: &[u64], b: Sym) -> Option<Box<[u64]>> {
    let g = sub.graph_presentation().expect("graph-backed");
    let mut out = vec![0u64; s.len()].into_boxed_slice();
    let mut any = false;
    for e in &g.edges {
        if e.label == b && s[e.to / 64] >> (e.to % 64) & 1 == 1 {
            out[e.from / 64] |= 1 << (e.from % 64);
            any = true;
        }
    }
    any.then_some(out)
}

/// The unique strongly connected component with no transitions leaving it.
fn closed_component(delta: &[Vec<Option<usize>>]) -> Result<Vec<usize>> {
    let n = delta.len();
    let succ = |i: usize| delta[i].iter().flatten().copied();
    let reach = |start: usize| {
        let mut seen = vec![false; n];
        let mut q = VecDeque::from([start]);
        seen[start] = true;
        while let Some(v) = q.pop_front() {
            for t in succ(v) {
                if !seen[t] {
                    seen[t] = true;
                    q.push_back(t);
                }
            }
        }
        seen
    };
    let all: Vec<Vec<bool>> = (0..n).map(reach).collect();
    // closed components are those whose members reach only each other
    let mut closed: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        let comp: Vec<usize> = (0..n).filter(|&j| all[i][j]).collect();
        if comp.iter().all(|&j| all[j][i]) && !closed.iter().any(|c| c.contains(&i)) {
            closed.push(comp);
        }
    }
    match closed.len() {
        1 => Ok(closed.pop().expect("one component")),
        c => Err(Error::NotIrreducible(format!("{c} closed components in the subset automaton"))),
    }
}

/// Cantor horizon λ-graph system of the Dyck shift on `n` bracket pairs.
pub fn cantor_horizon_dyck(n: usize, levels: usize) -> Result<LambdaGraphSystem> {
    if n < 2 {
        return Err(Error::InvalidSpec(format!("Dyck shift needs n >= 2, got {n}")));
    }
    cantor_horizon(&TransitionMatrix::all_ones(n), levels)
}

/// Cantor horizon λ-graph system of the Markov–Dyck shift of `matrix`.
pub fn cantor_horizon_markov_dyck(matrix: &[Vec<u8>], levels: usize) -> Result<LambdaGraphSystem> {
    let sub = markov_dyck(matrix.to_vec())?;
    let crate::spec::Kind::MarkovDyck { matrix } = &sub.kind else { unreachable!() };
    cantor_horizon(matrix, levels)
}

fn cantor_horizon(a: &TransitionMatrix, levels: usize) -> Result<LambdaGraphSystem> {
    let n = a.size() as u16;
    let alphabet = bracket_alphabet(n as usize)?;
    // vertices at level l: A-admissible words over 0..n, lexicographic
    let mut words: Vec<Vec<Vec<u16>>> = vec![vec![Vec::new()]];
    for l in 0..levels {
        let next: Vec<Vec<u16>> = words[l]
            .iter()
            .flat_map(|w| (0..n).filter(|&j| w.last().is_none_or(|&p| a.get(p, j))).map(move |j| [w.clone(), vec![j]].concat()))
            .collect();
        words.push(next);
    }
    let index: Vec<HashMap<&Vec<u16>, usize>> =
        words.iter().map(|ws| ws.iter().enumerate().map(|(i, w)| (w, i)).collect()).collect();
    let beta = |w: &[u16]| Word(w.iter().map(|&j| n + j).collect());
    let mut out = Vec::with_capacity(levels + 1);
    for l in 0..=levels {
        let vertices = words[l].iter().map(|w| Vertex { gamma: Vec::new(), rep: Some(beta(w)) }).collect();
        let mut edges = Vec::new();
        let mut iota = Vec::new();
        if l < levels {
            for (t, mu) in words[l + 1].iter().enumerate() {
                iota.push(index[l][&mu[..l].to_vec()]);
                // α_j from μ_2..μ_{l+1} when μ_1 = j
                edges.push(Edge { src: index[l][&mu[1..].to_vec()], dst: t, label: mu[0] });
                // β_j from (j μ)[..l] whenever j μ is admissible
                for j in 0..n {
                    if a.get(j, mu[0]) {
                        let src: Vec<u16> = std::iter::once(j).chain(mu.iter().copied()).take(l).collect();
                        edges.push(Edge { src: index[l][&src], dst: t, label: n + j });
                    }
                }
            }
        }
        edges.sort();
        out.push(Level { vertices, edges, iota });
    }
    Ok(LambdaGraphSystem { alphabet, levels: out }.with_structural_gamma())
}

fn bracket_alphabet(n: usize) -> Result<Alphabet> {
    Alphabet::new((1..=n).map(|i| format!("α{i}")).chain((1..=n).map(|i| format!("β{i}"))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lgs::{are_isomorphic, build_lambda_sync_lgs, validate_lgs};

    #[test]
    fn names() {
        assert_eq!(from_name("dyck:2").unwrap().alphabet().len(), 4);
        assert!(from_name("full:1").is_err());
        assert!(from_name("nonsense").is_err());
        assert_eq!(from_name("golden-mean").unwrap().alphabet().len(), 2);
    }

    #[test]
    fn golden_mean_cover() {
        let f = fischer_cover(&golden_mean()).unwrap();
        assert_eq!(f.num_states(), 2);
        assert_eq!(f.adjacency(), vec![vec![1, 1], vec![1, 0]]);
        assert!(f.is_left_resolving());
        let f3 = fischer_cover(&full_shift(3).unwrap()).unwrap();
        assert_eq!(f3.num_states(), 1);
        assert_eq!(f3.edges.len(), 3);
    }

    #[test]
    fn redundant_presentation_is_merged() {
        let g: GraphFile = serde_json::from_str(
            r#"{"states":["p","q","r"],"edges":[
                {"from":"p","to":"p","label":"a"},{"from":"p","to":"q","label":"a"},{"from":"q","to":"p","label":"b"},
                {"from":"r","to":"r","label":"a"},{"from":"r","to":"q","label":"a"},{"from":"p","to":"r","label":"a"},
                {"from":"r","to":"p","label":"a"}]}"#,
        )
        .unwrap();
        let f = fischer_cover(&sofic_from_graph(g).unwrap()).unwrap();
        assert_eq!(f.num_states(), 2);
    }

    #[test]
    fn reducible_presentation_is_rejected() {
        let g: GraphFile = serde_json::from_str(
            r#"{"states":["p","q"],"edges":[{"from":"p","to":"p","label":"a"},{"from":"q","to":"q","label":"b"}]}"#,
        )
        .unwrap();
        assert!(matches!(fischer_cover(&sofic_from_graph(g).unwrap()), Err(Error::NotIrreducible(_))));
    }

    #[test]
    fn cantor_horizon_matches_builder() {
        let ch = cantor_horizon_dyck(2, 3).unwrap();
        assert_eq!(ch.vertex_counts(), [1, 2, 4, 8]);
        assert!(validate_lgs(&ch).all_pass());
        let built = build_lambda_sync_lgs(&dyck(2).unwrap(), 3, 4, 6).unwrap();
        assert!(are_isomorphic(&ch, &built, 0).unwrap().holds());
        let md = cantor_horizon_markov_dyck(&[vec![1, 1], vec![1, 1]], 3).unwrap();
        assert_eq!(md, ch);
    }

    #[test]
    fn markov_dyck_horizon_matches_builder() {
        let a = vec![vec![1, 1], vec![1, 0]];
        let ch = cantor_horizon_markov_dyck(&a, 3).unwrap();
        assert_eq!(ch.vertex_counts(), [1, 2, 3, 5]);
        assert!(validate_lgs(&ch).all_pass());
        let built = build_lambda_sync_lgs(&markov_dyck(a).unwrap(), 3, 5, 6).unwrap();
        assert!(are_isomorphic(&ch, &built, 0).unwrap().holds());
    }
}
