//! Language-membership oracles and word enumeration.

use crate::alphabet::{Sym, Word};
use crate::error::{Error, Result};
use crate::md::{md_step, Bracket, MdState};
use crate::spec::{Kind, Subshift};

/// Default cap on candidate words examined by a single enumeration.
pub const DEFAULT_ENUM_CAP: usize = 2_000_000;

/// Membership in `B_*(Λ)`, decided directly from the definition of each
/// subshift class (independently of the compiled machine).
pub fn is_admissible(sub: &Subshift, w: &Word) -> Result<bool> {
    sub.alphabet().check(w)?;
    Ok(admissible_unchecked(sub, w))
}

fn admissible_unchecked(sub: &Subshift, w: &Word) -> bool {
    match &sub.kind {
        Kind::Full => true,
        Kind::Sft { forbidden } => !forbidden.iter().any(|f| w.contains_factor(f)),
        Kind::Sofic { graph } => graph.reads(w),
        Kind::MarkovDyck { matrix } => {
            let n = matrix.size() as Sym;
            let mut st = MdState::Unit;
            for &s in w.syms() {
                let b = if s < n { Bracket::Open(s) } else { Bracket::Close(s - n) };
                st = md_step(&st, b, matrix);
                if st.is_zero() {
                    return false;
                }
            }
            true
        }
        Kind::Expanded { inner, symbol } => {
            let a = symbol + 1;
            let mut v = w.syms().to_vec();
            if v.first() == Some(&a) {
                v.insert(0, 0);
            }
            if v.last() == Some(&0) {
                v.push(a);
            }
            for i in 0..v.len() {
                if v[i] == 0 && v.get(i + 1) != Some(&a) {
                    return false;
                }
                if v[i] == a && (i == 0 || v[i - 1] != 0) {
                    return false;
                }
            }
            let collapsed: Vec<Sym> = v.into_iter().filter(|&s| s != 0).map(|s| s - 1).collect();
            admissible_unchecked(inner, &Word(collapsed))
        }
    }
}

/// `B_l(Λ)` in lexicographic order of the alphabet.
pub fn enumerate_words(sub: &Subshift, l: usize) -> Result<Vec<Word>> {
    enumerate_words_capped(sub, l, DEFAULT_ENUM_CAP)
}

pub fn enumerate_words_capped(sub: &Subshift, l: usize, cap: usize) -> Result<Vec<Word>> {
    Ok(blocks(sub, l, cap)?.into_iter().map(|(w, _)| w).collect())
}

/// Words of length `l` paired with their machine states, lexicographic.
pub(crate) fn blocks(sub: &Subshift, l: usize, cap: usize) -> Result<Vec<(Word, crate::machine::State)>> {
    let m = &sub.machine;
    let k = m.num_symbols();
    let mut layer = vec![(Word::empty(), m.initial())];
    for _ in 0..l {
        if layer.len().saturating_mul(k) > cap {
            return Err(Error::BudgetExceeded(format!("more than {cap} candidate words at length {}", l)));
        }
        let mut next = Vec::new();
        for (w, st) in &layer {
            for s in 0..k as Sym {
                if let Some(st2) = m.step(st, s) {
                    next.push((w.push(s), st2));
                }
            }
        }
        layer = next;
    }
    Ok(layer)
}

fn require_admissible(sub: &Subshift, mu: &Word) -> Result<()> {
    if !is_admissible(sub, mu)? {
        return Err(Error::NotAdmissible(sub.render(mu)));
    }
    Ok(())
}

/// `Γ_l^-(μ)`: admissible words of length `l` that may precede `μ`.
pub fn left_extensions(sub: &Subshift, mu: &Word, l: usize) -> Result<Vec<Word>> {
    require_admissible(sub, mu)?;
    let m = &sub.machine;
    Ok(blocks(sub, l, DEFAULT_ENUM_CAP)?
        .into_iter()
        .filter(|(_, st)| m.run_from(st, mu).is_some())
        .map(|(w, _)| w)
        .collect())
}

/// `Γ_l^+(μ)`: admissible words of length `l` that may follow `μ`.
pub fn right_extensions(sub: &Subshift, mu: &Word, l: usize) -> Result<Vec<Word>> {
    require_admissible(sub, mu)?;
    let m = &sub.machine;
    let start = m.run(mu).expect("admissible");
    let k = m.num_symbols();
    let mut layer = vec![(Word::empty(), start)];
    for _ in 0..l {
        if layer.len().saturating_mul(k) > DEFAULT_ENUM_CAP {
            return Err(Error::BudgetExceeded(format!("more than {DEFAULT_ENUM_CAP} right extensions")));
        }
        layer = layer
            .iter()
            .flat_map(|(w, st)| (0..k as Sym).filter_map(move |s| m.step(st, s).map(|st2| (w.push(s), st2))))
            .collect();
    }
    Ok(layer.into_iter().map(|(w, _)| w).collect())
}

/// All right extensions of `μ` of length at most `horizon`, shortest first.
pub fn right_extensions_upto(sub: &Subshift, mu: &Word, horizon: usize) -> Result<Vec<Word>> {
    let mut out = Vec::new();
    for l in 0..=horizon {
        out.extend(right_extensions(sub, mu, l)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::SubshiftSpec;

    fn golden() -> Subshift {
        Subshift::from_json(r#"{"kind":"sft","alphabet":["a","b"],"forbidden":["bb"]}"#).unwrap()
    }

    fn dyck2() -> Subshift {
        Subshift::new(SubshiftSpec::Dyck { n: 2 }).unwrap()
    }

    fn render(sub: &Subshift, ws: &[Word]) -> Vec<String> {
        ws.iter().map(|w| sub.render(w)).collect()
    }

    #[test]
    fn dyck_brackets() {
        let d = dyck2();
        assert!(is_admissible(&d, &d.parse("α1 β1").unwrap()).unwrap());
        assert!(!is_admissible(&d, &d.parse("α1 β2").unwrap()).unwrap());
    }

    #[test]
    fn unknown_symbol_is_an_error() {
        let d = dyck2();
        assert!(is_admissible(&d, &Word(vec![9])).is_err());
    }

    #[test]
    fn block_counts() {
        let f = Subshift::new(SubshiftSpec::FullShift { n: 2, alphabet: None }).unwrap();
        assert_eq!(enumerate_words(&f, 3).unwrap().len(), 8);
        assert_eq!(enumerate_words(&f, 0).unwrap(), vec![Word::empty()]);
        let g = golden();
        assert_eq!(render(&g, &enumerate_words(&g, 2).unwrap()), ["a a", "a b", "b a"]);
        assert_eq!(enumerate_words(&dyck2(), 1).unwrap().len(), 4);
    }

    #[test]
    fn extension_sets() {
        let g = golden();
        let b = g.parse("b").unwrap();
        assert_eq!(render(&g, &left_extensions(&g, &b, 1).unwrap()), ["a"]);
        assert_eq!(render(&g, &right_extensions(&g, &b, 1).unwrap()), ["a"]);
        assert_eq!(left_extensions(&g, &Word::empty(), 1).unwrap().len(), 2);
        let d = dyck2();
        let a1 = d.parse("α1").unwrap();
        assert_eq!(render(&d, &right_extensions(&d, &a1, 1).unwrap()), ["α1", "α2", "β1"]);
        assert_eq!(right_extensions(&d, &a1, 0).unwrap(), vec![Word::empty()]);
        assert!(left_extensions(&g, &g.parse("b b").unwrap(), 1).is_err());
    }

    #[test]
    fn budget_is_enforced() {
        let f = Subshift::new(SubshiftSpec::FullShift { n: 4, alphabet: None }).unwrap();
        assert!(matches!(enumerate_words_capped(&f, 12, 1000), Err(Error::BudgetExceeded(_))));
    }

    #[test]
    fn expanded_examples() {
        let e = Subshift::from_json(r#"{"kind":"expanded","inner":{"kind":"full","n":2},"symbol":"1","fresh":"0"}"#)
            .unwrap();
        assert!(!is_admissible(&e, &e.parse("0 2").unwrap()).unwrap());
        assert!(is_admissible(&e, &e.parse("0 1 2").unwrap()).unwrap());
        let g = Subshift::from_json(
            r#"{"kind":"expanded","inner":{"kind":"sft","alphabet":["a","b"],"forbidden":["bb"]},"symbol":"b","fresh":"z"}"#,
        )
        .unwrap();
        assert!(!is_admissible(&g, &g.parse("z b z b").unwrap()).unwrap());
        assert!(is_admissible(&g, &g.parse("z b a z b").unwrap()).unwrap());
    }
}
