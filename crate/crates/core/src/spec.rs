//! Subshift descriptions, their JSON form, validation and compilation.

use serde::{Deserialize, Serialize};

use crate::alphabet::{Alphabet, Sym, Word};
use crate::error::{Error, Result};
use crate::graph::{GraphEdge, GraphFile, LabeledGraph};
use crate::machine::Machine;
use crate::md::TransitionMatrix;

/// Tagged description of a subshift as read from a spec file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SubshiftSpec {
    /// Full shift on `n` symbols, named `1..=n` unless an alphabet is given.
    FullShift { n: usize, alphabet: Option<Vec<String>> },
    SftForbidden { alphabet: Vec<String>, forbidden: Vec<Vec<String>> },
    SoficGraph { alphabet: Option<Vec<String>>, graph: GraphFile },
    Dyck { n: usize },
    MarkovDyck { matrix: Vec<Vec<u8>> },
    /// `inner` with every `symbol` replaced by `fresh symbol`.
    Expanded { inner: Box<SubshiftSpec>, symbol: String, fresh: String },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alphabet: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    forbidden: Option<Vec<WordRepr>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    graph: Option<GraphFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrix: Option<Vec<Vec<u8>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    inner: Option<Box<SpecFile>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    symbol: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fresh: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum WordRepr {
    Symbols(Vec<String>),
    Text(String),
}

fn missing(kind: &str, field: &str) -> Error {
    Error::Malformed(format!("`{kind}` spec needs field `{field}`"))
}

impl SpecFile {
    fn into_spec(self) -> Result<SubshiftSpec> {
        let kind = self.kind.as_str();
        Ok(match kind {
            "full" => SubshiftSpec::FullShift { n: self.n.ok_or_else(|| missing(kind, "n"))?, alphabet: self.alphabet },
            "sft" => {
                let alphabet = self.alphabet.ok_or_else(|| missing(kind, "alphabet"))?;
                let forbidden = self
                    .forbidden
                    .ok_or_else(|| missing(kind, "forbidden"))?
                    .into_iter()
                    .map(|w| split_word(w, &alphabet))
                    .collect();
                SubshiftSpec::SftForbidden { alphabet, forbidden }
            }
            "sofic" => SubshiftSpec::SoficGraph {
                alphabet: self.alphabet,
                graph: self.graph.ok_or_else(|| missing(kind, "graph"))?,
            },
            "dyck" => SubshiftSpec::Dyck { n: self.n.ok_or_else(|| missing(kind, "n"))? },
            "markov_dyck" => SubshiftSpec::MarkovDyck { matrix: self.matrix.ok_or_else(|| missing(kind, "matrix"))? },
            "expanded" => SubshiftSpec::Expanded {
                inner: Box::new(self.inner.ok_or_else(|| missing(kind, "inner"))?.into_spec()?),
                symbol: self.symbol.ok_or_else(|| missing(kind, "symbol"))?,
                fresh: self.fresh.ok_or_else(|| missing(kind, "fresh"))?,
            },
            other => return Err(Error::Malformed(format!("unknown subshift kind `{other}`"))),
        })
    }

    fn from_spec(spec: &SubshiftSpec) -> Self {
        let mut f = SpecFile {
            kind: String::new(),
            n: None,
            alphabet: None,
            forbidden: None,
            graph: None,
            matrix: None,
            inner: None,
            symbol: None,
            fresh: None,
        };
        match spec {
            SubshiftSpec::FullShift { n, alphabet } => {
                f.kind = "full".into();
                f.n = Some(*n);
                f.alphabet = alphabet.clone();
            }
            SubshiftSpec::SftForbidden { alphabet, forbidden } => {
                f.kind = "sft".into();
                f.alphabet = Some(alphabet.clone());
                f.forbidden = Some(forbidden.iter().cloned().map(WordRepr::Symbols).collect());
            }
            SubshiftSpec::SoficGraph { alphabet, graph } => {
                f.kind = "sofic".into();
                f.alphabet = alphabet.clone();
                f.graph = Some(graph.clone());
            }
            SubshiftSpec::Dyck { n } => {
                f.kind = "dyck".into();
                f.n = Some(*n);
            }
            SubshiftSpec::MarkovDyck { matrix } => {
                f.kind = "markov_dyck".into();
                f.matrix = Some(matrix.clone());
            }
            SubshiftSpec::Expanded { inner, symbol, fresh } => {
                f.kind = "expanded".into();
                f.inner = Some(Box::new(SpecFile::from_spec(inner)));
                f.symbol = Some(symbol.clone());
                f.fresh = Some(fresh.clone());
            }
        }
        f
    }
}

/// A forbidden word given as a string is whitespace-separated; a string
/// without whitespace that is not itself a symbol is read one char per symbol.
fn split_word(w: WordRepr, alphabet: &[String]) -> Vec<String> {
    match w {
        WordRepr::Symbols(v) => v,
        WordRepr::Text(t) => {
            if t.contains(char::is_whitespace) || alphabet.contains(&t) {
                t.split_whitespace().map(str::to_string).collect()
            } else {
                t.chars().map(|c| c.to_string()).collect()
            }
        }
    }
}

impl SubshiftSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<SpecFile>(text)?.into_spec()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&SpecFile::from_spec(self)).expect("spec serializes")
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(SpecFile::from_spec(self)).expect("spec serializes")
    }
}

/// Which exact representation backs a compiled subshift.
#[derive(Debug)]
pub(crate) enum Kind {
    Full,
    Sft { forbidden: Vec<Word> },
    Sofic { graph: LabeledGraph },
    MarkovDyck { matrix: TransitionMatrix },
    /// `symbol` indexes the inner alphabet; the fresh symbol is index 0 of ours.
    Expanded { inner: Box<Subshift>, symbol: Sym },
}

/// A validated, compiled subshift. Immutable and shareable across threads.
#[derive(Debug)]
pub struct Subshift {
    spec: SubshiftSpec,
    alphabet: Alphabet,
    pub(crate) kind: Kind,
    presentation: Option<LabeledGraph>,
    pub(crate) machine: Machine,
}

impl Subshift {
    pub fn new(spec: SubshiftSpec) -> Result<Self> {
        let (alphabet, kind, presentation) = match &spec {
            SubshiftSpec::FullShift { n, alphabet } => {
                if *n < 2 {
                    return Err(Error::InvalidSpec(format!("full shift needs at least 2 symbols, got {n}")));
                }
                let names = match alphabet {
                    Some(a) if a.len() != *n => {
                        return Err(Error::InvalidSpec("full shift alphabet size differs from n".into()))
                    }
                    Some(a) => a.clone(),
                    None => (1..=*n).map(|i| i.to_string()).collect(),
                };
                let alphabet = Alphabet::new(names)?;
                let edges = alphabet.syms().map(|label| GraphEdge { from: 0, to: 0, label }).collect();
                let g = LabeledGraph::new(alphabet.clone(), vec!["*".into()], edges)?;
                (alphabet, Kind::Full, Some(g))
            }
            SubshiftSpec::SftForbidden { alphabet, forbidden } => {
                let alphabet = Alphabet::new(alphabet.clone())?;
                if forbidden.is_empty() {
                    return Err(Error::InvalidSpec("forbidden list is empty".into()));
                }
                let forbidden =
                    forbidden.iter().map(|w| alphabet.word_from_names(w)).collect::<Result<Vec<_>>>()?;
                if forbidden.iter().any(Word::is_empty) {
                    return Err(Error::InvalidSpec("the empty word cannot be forbidden".into()));
                }
                let g = de_bruijn(&alphabet, &forbidden)?;
                (alphabet, Kind::Sft { forbidden }, Some(g))
            }
            SubshiftSpec::SoficGraph { alphabet, graph } => {
                let alphabet = alphabet.as_ref().map(|a| Alphabet::new(a.clone())).transpose()?;
                let g = LabeledGraph::from_file(graph, alphabet.as_ref())?;
                if !g.is_essential() {
                    return Err(Error::InvalidSpec("sofic graph is not essential".into()));
                }
                (g.alphabet.clone(), Kind::Sofic { graph: g.clone() }, Some(g))
            }
            SubshiftSpec::Dyck { n } => {
                if *n < 2 {
                    return Err(Error::InvalidSpec(format!("Dyck shift needs n >= 2, got {n}")));
                }
                if *n > 64 {
                    return Err(Error::InvalidSpec("at most 64 bracket pairs".into()));
                }
                (bracket_alphabet(*n)?, Kind::MarkovDyck { matrix: TransitionMatrix::all_ones(*n) }, None)
            }
            SubshiftSpec::MarkovDyck { matrix } => {
                let m = TransitionMatrix::new(matrix)
                    .ok_or_else(|| Error::InvalidSpec("matrix must be square, 0/1, at most 64x64".into()))?;
                let n = m.size();
                for i in 0..n as u16 {
                    if m.row(i) == 0 {
                        return Err(Error::InvalidSpec(format!("row {} of the matrix is zero", i + 1)));
                    }
                    if (0..n as u16).all(|r| !m.get(r, i)) {
                        return Err(Error::InvalidSpec(format!("column {} of the matrix is zero", i + 1)));
                    }
                }
                (bracket_alphabet(n)?, Kind::MarkovDyck { matrix: m }, None)
            }
            SubshiftSpec::Expanded { inner, symbol, fresh } => {
                let inner = Subshift::new((**inner).clone())?;
                let a = inner.alphabet.sym(symbol).map_err(|_| {
                    Error::InvalidSpec(format!("expanded symbol `{symbol}` is not in the inner alphabet"))
                })?;
                if inner.alphabet.contains(fresh) {
                    return Err(Error::SymbolCollision(format!("fresh symbol `{fresh}` is already used")));
                }
                let mut names = vec![fresh.clone()];
                names.extend(inner.alphabet.symbols().iter().cloned());
                let alphabet = Alphabet::new(names)?;
                let presentation = inner.presentation.as_ref().map(|g| g.expand(a, fresh)).transpose()?;
                (alphabet, Kind::Expanded { inner: Box::new(inner), symbol: a }, presentation)
            }
        };
        let machine = Machine::compile(&kind, presentation.as_ref());
        Ok(Self { spec, alphabet, kind, presentation, machine })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::new(SubshiftSpec::from_json(text)?)
    }

    pub fn spec(&self) -> &SubshiftSpec {
        &self.spec
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    /// A finite labeled-graph presentation, when the subshift is sofic by construction.
    pub fn graph_presentation(&self) -> Option<&LabeledGraph> {
        self.presentation.as_ref()
    }

    pub fn is_sofic(&self) -> bool {
        self.presentation.is_some()
    }

    /// The (inner, expanded symbol, fresh symbol name) of an expanded subshift.
    pub fn expansion_parts(&self) -> Option<(&Subshift, Sym)> {
        match &self.kind {
            Kind::Expanded { inner, symbol } => Some((inner, *symbol)),
            _ => None,
        }
    }

    pub fn parse(&self, text: &str) -> Result<Word> {
        self.alphabet.parse(text)
    }

    pub fn render(&self, w: &Word) -> String {
        self.alphabet.render(w)
    }
}

fn bracket_alphabet(n: usize) -> Result<Alphabet> {
    let names = (1..=n).map(|i| format!("α{i}")).chain((1..=n).map(|i| format!("β{i}")));
    Alphabet::new(names)
}

/// Higher-block graph of an SFT: states are allowed words of length `m - 1`
/// where `m` is the longest forbidden word. Fails unless every allowed word
/// extends in both directions.
fn de_bruijn(alphabet: &Alphabet, forbidden: &[Word]) -> Result<LabeledGraph> {
    let m = forbidden.iter().map(Word::len).max().unwrap_or(1);
    let k = alphabet.len();
    let span = m - 1;
    if (k as f64).powi(span as i32) > 1e6 {
        return Err(Error::BudgetExceeded(format!("SFT memory {span} over {k} symbols")));
    }
    let free = |w: &Word| !forbidden.iter().any(|f| w.contains_factor(f));
    // all factor-free words of each length up to span
    let mut layers: Vec<Vec<Word>> = vec![vec![Word::empty()]];
    for len in 1..=span {
        let next: Vec<Word> = layers[len - 1]
            .iter()
            .flat_map(|w| alphabet.syms().map(move |s| w.push(s)))
            .filter(|w| free(w))
            .collect();
        layers.push(next);
    }
    for len in 0..span {
        let longer: std::collections::HashSet<&Word> = layers[len + 1].iter().collect();
        if let Some(w) = layers[len].iter().find(|w| !alphabet.syms().any(|s| longer.contains(&w.push(s)))) {
            return Err(Error::InvalidSpec(format!(
                "SFT is not essential: `{}` has no right extension",
                alphabet.render(w)
            )));
        }
    }
    let states = &layers[span];
    if states.is_empty() {
        return Err(Error::InvalidSpec("SFT is empty".into()));
    }
    let index: std::collections::HashMap<&Word, usize> = states.iter().enumerate().map(|(i, w)| (w, i)).collect();
    let mut edges = Vec::new();
    for (i, w) in states.iter().enumerate() {
        for s in alphabet.syms() {
            let long = w.push(s);
            if free(&long) {
                let target = long.suffix(span);
                edges.push(GraphEdge { from: i, to: index[&target], label: s });
            }
        }
    }
    let names = states.iter().map(|w| format!("[{}]", alphabet.render(w))).collect();
    let g = LabeledGraph::new(alphabet.clone(), names, edges)?;
    if !g.is_essential() {
        return Err(Error::InvalidSpec("SFT is not essential: some allowed block does not extend".into()));
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_roundtrip_all_kinds() {
        let texts = [
            r#"{"kind":"full","n":3}"#,
            r#"{"kind":"sft","alphabet":["a","b"],"forbidden":["bb"]}"#,
            r#"{"kind":"sofic","graph":{"states":["p","q"],"edges":[{"from":"p","to":"p","label":"a"},{"from":"p","to":"q","label":"a"},{"from":"q","to":"p","label":"b"}]}}"#,
            r#"{"kind":"dyck","n":2}"#,
            r#"{"kind":"markov_dyck","matrix":[[1,1],[1,0]]}"#,
            r#"{"kind":"expanded","inner":{"kind":"full","n":2},"symbol":"1","fresh":"0"}"#,
        ];
        for t in texts {
            let spec = SubshiftSpec::from_json(t).unwrap();
            let again = SubshiftSpec::from_json(&spec.to_json()).unwrap();
            assert_eq!(spec, again);
            Subshift::new(spec).unwrap();
        }
    }

    #[test]
    fn validation_failures() {
        let bad = [
            r#"{"kind":"full","n":1}"#,
            r#"{"kind":"dyck","n":1}"#,
            r#"{"kind":"sft","alphabet":["a","b"],"forbidden":[]}"#,
            r#"{"kind":"sft","alphabet":["a","b"],"forbidden":["c"]}"#,
            r#"{"kind":"markov_dyck","matrix":[[1,0],[1,0]]}"#,
            r#"{"kind":"markov_dyck","matrix":[[0,0],[1,1]]}"#,
            r#"{"kind":"markov_dyck","matrix":[[1,1]]}"#,
            r#"{"kind":"expanded","inner":{"kind":"full","n":2},"symbol":"7","fresh":"0"}"#,
            r#"{"kind":"expanded","inner":{"kind":"full","n":2},"symbol":"1","fresh":"2"}"#,
            r#"{"kind":"sofic","graph":{"states":["p","q"],"edges":[{"from":"p","to":"q","label":"a"}]}}"#,
            r#"{"kind":"nope"}"#,
        ];
        for t in bad {
            assert!(Subshift::from_json(t).is_err(), "{t} should be rejected");
        }
    }

    #[test]
    fn non_essential_sft_rejected() {
        // "ab" and "bb" forbidden: b can never be followed by anything
        let spec = SubshiftSpec::SftForbidden {
            alphabet: vec!["a".into(), "b".into()],
            forbidden: vec![vec!["b".into(), "a".into()], vec!["b".into(), "b".into()]],
        };
        assert!(Subshift::new(spec).is_err());
    }

    #[test]
    fn golden_mean_de_bruijn() {
        let s = Subshift::from_json(r#"{"kind":"sft","alphabet":["a","b"],"forbidden":["bb"]}"#).unwrap();
        let g = s.graph_presentation().unwrap();
        assert_eq!(g.num_states(), 2);
        assert_eq!(g.edges.len(), 3);
    }

    #[test]
    fn dyck_alphabet() {
        let s = Subshift::new(SubshiftSpec::Dyck { n: 2 }).unwrap();
        assert_eq!(s.alphabet().symbols(), &["α1", "α2", "β1", "β2"]);
        assert!(!s.is_sofic());
    }
}
