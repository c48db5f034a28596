//! Alphabets and finite words.
//!
//! Symbols are interned as indices into an ordered [`Alphabet`]; the index
//! order is the enumeration order used everywhere (so `Word`'s derived
//! `Ord` is the lexicographic order induced by the alphabet).

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

pub type Sym = u16;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<String>,
    index: HashMap<String, Sym>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(symbols: impl IntoIterator<Item = S>) -> Result<Self> {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(Error::InvalidSpec("alphabet is empty".into()));
        }
        if symbols.len() > Sym::MAX as usize {
            return Err(Error::InvalidSpec("alphabet too large".into()));
        }
        let mut index = HashMap::with_capacity(symbols.len());
        for (i, s) in symbols.iter().enumerate() {
            if s.is_empty() || s.chars().any(char::is_whitespace) {
                return Err(Error::InvalidSpec(format!("bad symbol name `{s}`")));
            }
            if index.insert(s.clone(), i as Sym).is_some() {
                return Err(Error::InvalidSpec(format!("duplicate symbol `{s}`")));
            }
        }
        Ok(Self { symbols, index })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn name(&self, s: Sym) -> &str {
        &self.symbols[s as usize]
    }

    pub fn sym(&self, name: &str) -> Result<Sym> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownSymbol(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn syms(&self) -> impl Iterator<Item = Sym> {
        0..self.symbols.len() as Sym
    }

    /// Parses a whitespace-separated word; the empty string (or `ε`) is the empty word.
    pub fn parse(&self, text: &str) -> Result<Word> {
        let text = text.trim();
        if text == "ε" {
            return Ok(Word::empty());
        }
        text.split_whitespace()
            .map(|t| self.sym(t))
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }

    pub fn word_from_names<S: AsRef<str>>(&self, names: &[S]) -> Result<Word> {
        names
            .iter()
            .map(|n| self.sym(n.as_ref()))
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }

    /// Space-separated rendering; the empty word renders as the empty string.
    pub fn render(&self, w: &Word) -> String {
        w.0.iter().map(|&s| self.name(s)).collect::<Vec<_>>().join(" ")
    }

    pub fn check(&self, w: &Word) -> Result<()> {
        match w.0.iter().find(|&&s| s as usize >= self.len()) {
            Some(s) => Err(Error::UnknownSymbol(format!("#{s}"))),
            None => Ok(()),
        }
    }
}

/// A finite word over some alphabet, stored as symbol indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<Sym>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn syms(&self) -> &[Sym] {
        &self.0
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn push(&self, s: Sym) -> Word {
        let mut v = self.0.clone();
        v.push(s);
        Word(v)
    }

    pub fn prepend(&self, s: Sym) -> Word {
        let mut v = Vec::with_capacity(self.len() + 1);
        v.push(s);
        v.extend_from_slice(&self.0);
        Word(v)
    }

    pub fn suffix(&self, len: usize) -> Word {
        Word(self.0[self.len() - len..].to_vec())
    }

    pub fn prefix(&self, len: usize) -> Word {
        Word(self.0[..len].to_vec())
    }

    pub fn first(&self) -> Option<Sym> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<Sym> {
        self.0.last().copied()
    }

    /// Whether `f` occurs as a contiguous factor.
    pub fn contains_factor(&self, f: &Word) -> bool {
        f.is_empty() || self.0.windows(f.len()).any(|w| w == f.0.as_slice())
    }

    /// Shortlex comparison: shorter words first, then lexicographic.
    pub fn shortlex_cmp(&self, other: &Word) -> std::cmp::Ordering {
        self.len().cmp(&other.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl From<Vec<Sym>> for Word {
    fn from(v: Vec<Sym>) -> Self {
        Word(v)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "ε");
        }
        let parts: Vec<String> = self.0.iter().map(|s| format!("#{s}")).collect();
        write!(f, "{}", parts.join(" "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_empty() {
        assert!(Alphabet::new(Vec::<String>::new()).is_err());
        assert!(Alphabet::new(["a", "a"]).is_err());
        assert!(Alphabet::new(["a b"]).is_err());
    }

    #[test]
    fn parse_render_roundtrip() {
        let a = Alphabet::new(["α1", "α2", "β1", "β2"]).unwrap();
        let w = a.parse("α1 β1 β2").unwrap();
        assert_eq!(w.0, vec![0, 2, 3]);
        assert_eq!(a.render(&w), "α1 β1 β2");
        assert_eq!(a.parse("").unwrap(), Word::empty());
        assert!(matches!(a.parse("γ"), Err(Error::UnknownSymbol(_))));
    }

    #[test]
    fn factors() {
        let w = Word(vec![0, 1, 1, 0]);
        assert!(w.contains_factor(&Word(vec![1, 1])));
        assert!(!w.contains_factor(&Word(vec![0, 0])));
        assert!(w.contains_factor(&Word::empty()));
    }
}
