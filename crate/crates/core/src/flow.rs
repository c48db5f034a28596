//! The symbol expansion `a ↦ z a`, its rewriting maps, and the harness that
//! compares invariants of a subshift with those of its expansion.

use serde::Serialize;

use crate::alphabet::{Alphabet, Sym, Word};
use crate::error::{Error, Result};
use crate::ktheory::{bowen_franks, extract_matrix_system, k0_tower, k1_tower, GroupTower, Stabilization, DEFAULT_WINDOW};
use crate::lgs::build_lambda_sync_lgs;
use crate::spec::{Subshift, SubshiftSpec};
use crate::sync::{Analyzer, SyncVerdict};

/// Default fresh symbol of an expansion.
pub const DEFAULT_FRESH: &str = "0";

/// Inner alphabet `Σ`, expanded symbol `a ∈ Σ` and fresh symbol `z ∉ Σ`.
///
/// Outer words use the alphabet `{z} ∪ Σ` with `z` first, so inner symbol
/// `s` is outer symbol `s + 1`.
#[derive(Clone, Debug)]
pub struct ExpansionContext {
    inner: Alphabet,
    outer: Alphabet,
    a: Sym,
}

impl ExpansionContext {
    pub fn new(inner: &Alphabet, symbol: &str, fresh: &str) -> Result<Self> {
        let a = inner
            .sym(symbol)
            .map_err(|_| Error::InvalidSpec(format!("expanded symbol `{symbol}` is not in the alphabet")))?;
        if inner.contains(fresh) {
            return Err(Error::SymbolCollision(format!("fresh symbol `{fresh}` is already used")));
        }
        let outer = Alphabet::new(std::iter::once(fresh.to_string()).chain(inner.symbols().iter().cloned()))?;
        Ok(Self { inner: inner.clone(), outer, a })
    }

    /// The context of an expanded subshift.
    pub fn of(sub: &Subshift) -> Option<Self> {
        let (inner, a) = sub.expansion_parts()?;
        Some(Self { inner: inner.alphabet().clone(), outer: sub.alphabet().clone(), a })
    }

    pub fn inner(&self) -> &Alphabet {
        &self.inner
    }

    pub fn outer(&self) -> &Alphabet {
        &self.outer
    }

    /// The expanded symbol as an inner symbol.
    pub fn symbol(&self) -> Sym {
        self.a
    }

    fn outer_a(&self) -> Sym {
        self.a + 1
    }

    /// Whether an outer word starts with `a` or ends with `z`.
    pub fn is_boundary_word(&self, w: &Word) -> bool {
        w.first() == Some(self.outer_a()) || w.last() == Some(0)
    }

    /// `ξ`: replaces every `a` by `z a`.
    pub fn xi(&self, w: &Word) -> Result<Word> {
        self.inner.check(w)?;
        let mut out = Vec::with_capacity(w.len() * 2);
        for &s in w.syms() {
            if s == self.a {
                out.push(0);
            }
            out.push(s + 1);
        }
        Ok(Word(out))
    }

    /// `η`: replaces every `z a` by `a`. Defined on words that neither start
    /// with `a` nor end with `z` and in which `z` and `a` occur only as `z a`.
    pub fn eta(&self, w: &Word) -> Result<Word> {
        self.outer.check(w)?;
        if self.is_boundary_word(w) {
            return Err(Error::Domain(format!(
                "`{}` starts with the expanded symbol or ends with the fresh symbol",
                self.outer.render(w)
            )));
        }
        let s = w.syms();
        let a = self.outer_a();
        let mut out = Vec::with_capacity(s.len());
        for (i, &c) in s.iter().enumerate() {
            let paired = if c == 0 { s.get(i + 1) == Some(&a) } else { c != a || (i > 0 && s[i - 1] == 0) };
            if !paired {
                return Err(Error::Domain(format!("`{}` is not a rewritten word", self.outer.render(w))));
            }
            if c != 0 {
                out.push(c - 1);
            }
        }
        Ok(Word(out))
    }

    /// `φ`: keeps the leading `a` and applies `ξ` to the rest.
    pub fn phi(&self, w: &Word) -> Result<Word> {
        self.inner.check(w)?;
        if w.first() != Some(self.a) {
            return Err(Error::Domain(format!("`{}` does not start with the expanded symbol", self.inner.render(w))));
        }
        let tail = self.xi(&Word(w.syms()[1..].to_vec()))?;
        Ok(tail.prepend(self.outer_a()))
    }

    /// `ψ`: keeps the leading `a` and applies `η` to the rest.
    pub fn psi(&self, w: &Word) -> Result<Word> {
        self.outer.check(w)?;
        if w.first() != Some(self.outer_a()) {
            return Err(Error::Domain(format!("`{}` does not start with the expanded symbol", self.outer.render(w))));
        }
        if w.last() == Some(0) {
            return Err(Error::Domain(format!("`{}` ends with the fresh symbol", self.outer.render(w))));
        }
        let tail = self.eta(&Word(w.syms()[1..].to_vec()))?;
        Ok(tail.prepend(self.a))
    }
}

/// The expansion of `spec` replacing `symbol` by `fresh symbol`.
pub fn expand(spec: &SubshiftSpec, symbol: &str, fresh: &str) -> Result<SubshiftSpec> {
    let out = SubshiftSpec::Expanded { inner: Box::new(spec.clone()), symbol: symbol.into(), fresh: fresh.into() };
    Subshift::new(out.clone())?;
    Ok(out)
}

/// The expansion with the first symbol of the alphabet and [`DEFAULT_FRESH`]
/// unless overridden.
pub fn expand_subshift(sub: &Subshift, symbol: Option<&str>, fresh: Option<&str>) -> Result<Subshift> {
    let symbol = symbol.unwrap_or_else(|| sub.alphabet().name(0));
    Subshift::new(expand(sub.spec(), symbol, fresh.unwrap_or(DEFAULT_FRESH))?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RowVerdict {
    Pass,
    Fail,
    Unknown,
}

impl From<&SyncVerdict> for RowVerdict {
    fn from(v: &SyncVerdict) -> Self {
        match v {
            SyncVerdict::Yes => RowVerdict::Pass,
            SyncVerdict::No { .. } => RowVerdict::Fail,
            SyncVerdict::UnknownAtHorizon { .. } => RowVerdict::Unknown,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TransferRow {
    /// `xi` (synchronizing words map forward), `class` (past classes map
    /// forward) or `eta` (synchronizing words of double level map back)
    pub direction: &'static str,
    pub word: String,
    pub image: String,
    pub verdict: RowVerdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TransferReport {
    pub level: usize,
    pub rows: Vec<TransferRow>,
}

impl TransferReport {
    pub fn count(&self, v: RowVerdict) -> usize {
        self.rows.iter().filter(|r| r.verdict == v).count()
    }
}

/// Checks that `ξ` carries `l`-synchronizing words and their past classes
/// into the expansion, and that `η` carries `2l`-synchronizing words of the
/// expansion back to `l`-synchronizing words.
pub fn sync_transfer_check(
    sub: &Subshift,
    expanded: &Subshift,
    l: usize,
    word_cap: usize,
    horizon: usize,
) -> Result<TransferReport> {
    let ctx = ExpansionContext::of(expanded)
        .ok_or_else(|| Error::Domain("the second subshift is not an expansion".into()))?;
    let mut inner = Analyzer::new(sub);
    let mut outer = Analyzer::new(expanded);
    let mut rows = Vec::new();
    let partition = inner.past_equiv_classes(l, word_cap, horizon)?;
    for class in &partition.classes {
        // the empty word is excluded: a point following it may start with `a`
        let mut members = class.members.iter().filter(|w| !w.is_empty());
        let Some(first) = members.clone().next() else { continue };
        let rep_image = ctx.xi(first)?;
        let rep_gamma = outer.gamma_minus(&rep_image, l)?;
        for mu in members.by_ref() {
            let image = ctx.xi(mu)?;
            let row = |direction, verdict, detail| TransferRow {
                direction,
                word: sub.render(mu),
                image: expanded.render(&image),
                verdict,
                detail,
            };
            if ctx.is_boundary_word(&image) {
                rows.push(row("xi", RowVerdict::Fail, Some("image is a boundary word".into())));
                continue;
            }
            let v = outer.is_l_synchronizing(&image, l, horizon + image.len())?;
            rows.push(row("xi", (&v).into(), None));
            if mu != first {
                let same = outer.gamma_minus(&image, l)? == rep_gamma;
                let detail = (!same).then(|| format!("past set differs from that of `{}`", expanded.render(&rep_image)));
                rows.push(row("class", if same { RowVerdict::Pass } else { RowVerdict::Fail }, detail));
            }
        }
    }
    let doubled = outer.enumerate_sync_words(2 * l, word_cap, horizon)?;
    for omega in doubled.words.iter().filter(|w| !w.is_empty() && !ctx.is_boundary_word(w)) {
        let image = ctx.eta(omega)?;
        let v = inner.is_l_synchronizing(&image, l, horizon)?;
        rows.push(TransferRow {
            direction: "eta",
            word: expanded.render(omega),
            image: sub.render(&image),
            verdict: (&v).into(),
            detail: None,
        });
    }
    Ok(TransferReport { level: l, rows })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Match,
    Mismatch,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct InvarianceRow {
    pub invariant: String,
    pub lhs: String,
    pub rhs: String,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct InvarianceReport {
    pub rows: Vec<InvarianceRow>,
}

impl InvarianceReport {
    pub fn has_mismatch(&self) -> bool {
        self.rows.iter().any(|r| r.verdict == Verdict::Mismatch)
    }

    pub fn count(&self, v: Verdict) -> usize {
        self.rows.iter().filter(|r| r.verdict == v).count()
    }
}

#[derive(Clone, Debug)]
pub struct InvarianceParams {
    /// word cap for every build; defaults to `2L + 4`
    pub word_cap: Option<usize>,
    /// fallback horizon; defaults to `L + 4`
    pub horizon: Option<usize>,
    pub window: usize,
}

impl Default for InvarianceParams {
    fn default() -> Self {
        Self { word_cap: None, horizon: None, window: DEFAULT_WINDOW }
    }
}

/// Computed invariants of one subshift truncated at one level.
#[derive(Clone, Debug)]
pub struct Invariants {
    pub levels: usize,
    pub k0: GroupTower,
    pub k1: GroupTower,
}

impl Invariants {
    pub fn compute(sub: &Subshift, levels: usize, word_cap: usize, horizon: usize, window: usize) -> Result<Self> {
        let lgs = build_lambda_sync_lgs(sub, levels, word_cap, horizon)?;
        let ms = extract_matrix_system(&lgs);
        Ok(Self { levels, k0: k0_tower(&ms, window)?, k1: k1_tower(&ms, window)? })
    }

    /// `(name, value)` pairs; `None` when the window does not decide it.
    fn described(&self) -> Vec<(&'static str, Option<String>)> {
        let tower = |t: &GroupTower| match &t.stabilization {
            Stabilization::Stabilized { group, .. } => {
                (Some(group.torsion_part().to_string()), Some(group.rank.to_string()))
            }
            Stabilization::TorsionStabilized { torsion, .. } => (Some(torsion.to_string()), Some("unbounded".into())),
            Stabilization::Undetermined => (None, None),
        };
        let (t0, r0) = tower(&self.k0);
        let (t1, r1) = tower(&self.k1);
        let (bf0, bf1) = match bowen_franks(&self.k0, &self.k1) {
            Ok((a, b)) => (Some(a.to_string()), Some(b.to_string())),
            Err(_) => (None, None),
        };
        vec![
            ("K0 torsion", t0),
            ("K0 rank", r0),
            ("K1 torsion", t1),
            ("K1 rank", r1),
            ("BF0", bf0),
            ("BF1", bf1),
        ]
    }
}

/// Compares the stabilized invariants of `left` at `L` with those of
/// `right` at `L` and at `2L`.
pub fn compare_invariants(left: &Subshift, right: &Subshift, levels: usize, params: &InvarianceParams) -> Result<InvarianceReport> {
    let w = params.word_cap.unwrap_or(2 * levels + 4);
    let h = params.horizon.unwrap_or(levels + 4);
    let lhs = Invariants::compute(left, levels, w, h, params.window)?;
    let mut rows = Vec::new();
    for rl in [levels, 2 * levels] {
        let rhs = Invariants::compute(right, rl, w, h, params.window)?;
        for ((name, a), (_, b)) in lhs.described().into_iter().zip(rhs.described()) {
            let verdict = match (&a, &b) {
                (Some(x), Some(y)) if x == y => Verdict::Match,
                (Some(_), Some(_)) => Verdict::Mismatch,
                _ => Verdict::Inconclusive,
            };
            let show = |v: Option<String>| v.unwrap_or_else(|| "undetermined".into());
            rows.push(InvarianceRow {
                invariant: format!("{name} (levels {levels} vs {rl})"),
                lhs: show(a),
                rhs: show(b),
                verdict,
            });
        }
    }
    Ok(InvarianceReport { rows })
}

/// [`compare_invariants`] between `sub` and its default expansion.
pub fn invariance_report(sub: &Subshift, levels: usize, params: &InvarianceParams) -> Result<InvarianceReport> {
    compare_invariants(sub, &expand_subshift(sub, None, None)?, levels, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{dyck, full_shift, golden_mean};
    use crate::oracle::is_admissible;

    fn ctx123() -> ExpansionContext {
        ExpansionContext::new(full_shift(3).unwrap().alphabet(), "1", "0").unwrap()
    }

    #[test]
    fn displayed_maps() {
        let c = ctx123();
        let w = c.inner().parse("1 1 2 1 2 1 3 2 1").unwrap();
        let x = c.outer().parse("0 1 0 1 2 0 1 2 0 1 3 2 0 1").unwrap();
        assert_eq!(c.xi(&w).unwrap(), x);
        assert_eq!(c.eta(&x).unwrap(), w);
        let w = c.inner().parse("1 1 2 1 3 2 1 3 1").unwrap();
        let p = c.outer().parse("1 0 1 2 0 1 3 2 0 1 3 0 1").unwrap();
        assert_eq!(c.phi(&w).unwrap(), p);
        assert_eq!(c.psi(&p).unwrap(), w);
        assert_eq!(c.xi(&Word::empty()).unwrap(), Word::empty());
        let a = c.inner().parse("1").unwrap();
        assert_eq!(c.phi(&a).unwrap(), c.outer().parse("1").unwrap());
    }

    #[test]
    fn domain_errors() {
        let c = ctx123();
        for bad in ["1 2", "2 0", "0 2", "2 1"] {
            assert!(matches!(c.eta(&c.outer().parse(bad).unwrap()), Err(Error::Domain(_))), "{bad}");
        }
        assert!(c.phi(&c.inner().parse("2 1").unwrap()).is_err());
        assert!(c.psi(&c.outer().parse("1 0").unwrap()).is_err());
        assert!(matches!(ExpansionContext::new(c.inner(), "1", "2"), Err(Error::SymbolCollision(_))));
    }

    #[test]
    fn expansion_examples() {
        let two = Subshift::new(SubshiftSpec::FullShift { n: 2, alphabet: None }).unwrap();
        let e = Subshift::new(expand(two.spec(), "1", "0").unwrap()).unwrap();
        assert!(!is_admissible(&e, &e.parse("0 2").unwrap()).unwrap());
        assert!(is_admissible(&e, &e.parse("0 1 2").unwrap()).unwrap());
        let g = golden_mean();
        let e = Subshift::new(expand(g.spec(), "b", "z").unwrap()).unwrap();
        assert!(!is_admissible(&e, &e.parse("z b z b").unwrap()).unwrap());
        assert!(matches!(expand(g.spec(), "b", "a"), Err(Error::SymbolCollision(_))));
    }

    #[test]
    fn transfer_has_no_failures() {
        for sub in [full_shift(2).unwrap(), golden_mean()] {
            let e = expand_subshift(&sub, None, None).unwrap();
            for l in 0..=2 {
                let r = sync_transfer_check(&sub, &e, l, 6, 8).unwrap();
                assert_eq!(r.count(RowVerdict::Fail), 0, "{:?}", r.rows);
                assert!(!r.rows.is_empty());
            }
        }
        let d = dyck(2).unwrap();
        let e = expand_subshift(&d, None, None).unwrap();
        for l in 0..=2 {
            let r = sync_transfer_check(&d, &e, l, 4, 6).unwrap();
            assert_eq!(r.count(RowVerdict::Fail), 0, "{:?}", r.rows);
        }
    }

    #[test]
    fn golden_mean_invariants_match() {
        let r = invariance_report(&golden_mean(), 3, &InvarianceParams::default()).unwrap();
        assert!(!r.has_mismatch(), "{:?}", r.rows);
        assert!(r.count(Verdict::Match) > 0);
    }
}
