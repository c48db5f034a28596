//! Reduction machine for Dyck and Markov–Dyck words.
//!
//! A nonzero product of the partial isometries `t_i` (for `β_i`) and `t_i*`
//! (for `α_i`) in the Cuntz–Krieger algebra of a 0/1 matrix `A` reduces to
//! `t_μ P_Y t_ν*` with `P_Y = Σ_{k∈Y} t_k t_k*`. The reduction is kept in that
//! canonical form; `Zero` is absorbing.

use std::fmt;

/// A bracket symbol of the Markov–Dyck alphabet, zero-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Bracket {
    /// `α_i`, mapped to `t_i*`.
    Open(u16),
    /// `β_j`, mapped to `t_j`.
    Close(u16),
}

/// Square 0/1 matrix with rows packed into bitmasks (at most 64 generators).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TransitionMatrix {
    n: usize,
    rows: Vec<u64>,
}

impl TransitionMatrix {
    pub fn new(entries: &[Vec<u8>]) -> Option<Self> {
        let n = entries.len();
        if n == 0 || n > 64 || entries.iter().any(|r| r.len() != n) {
            return None;
        }
        let mut rows = vec![0u64; n];
        for (i, r) in entries.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                match v {
                    0 => {}
                    1 => rows[i] |= 1 << j,
                    _ => return None,
                }
            }
        }
        Some(Self { n, rows })
    }

    pub fn all_ones(n: usize) -> Self {
        let full = full_mask(n);
        Self { n, rows: vec![full; n] }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: u16) -> u64 {
        self.rows[i as usize]
    }

    pub fn get(&self, i: u16, j: u16) -> bool {
        self.rows[i as usize] >> j & 1 == 1
    }

    pub fn full(&self) -> u64 {
        full_mask(self.n)
    }

    pub fn entries(&self) -> Vec<Vec<u8>> {
        (0..self.n as u16)
            .map(|i| (0..self.n as u16).map(|j| self.get(i, j) as u8).collect())
            .collect()
    }
}

fn full_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Canonical form of a Markov–Dyck monoid element.
///
/// In `Triple`, `mu` is the word of unmatched `β`s (left part), `nu` the
/// unmatched `α`s with the most recently read one first, and `y` the support
/// of the middle projection as a bitmask over generators.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MdState {
    Zero,
    Unit,
    Triple { mu: Vec<u16>, y: u64, nu: Vec<u16> },
}

impl MdState {
    pub fn is_zero(&self) -> bool {
        matches!(self, MdState::Zero)
    }

    /// `(μ, Y, ν)` view; `Unit` is `(ε, all, ε)`.
    pub fn parts<'a>(&'a self, a: &TransitionMatrix) -> Option<(&'a [u16], u64, &'a [u16])> {
        match self {
            MdState::Zero => None,
            MdState::Unit => Some((&[], a.full(), &[])),
            MdState::Triple { mu, y, nu } => Some((mu, *y, nu)),
        }
    }
}

impl fmt::Display for MdState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MdState::Zero => write!(f, "0"),
            MdState::Unit => write!(f, "1"),
            MdState::Triple { mu, y, nu } => {
                let w = |v: &[u16]| v.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join("");
                let ys: Vec<String> = (0..64).filter(|k| y >> k & 1 == 1).map(|k| (k + 1).to_string()).collect();
                write!(f, "t[{}] P{{{}}} t[{}]*", w(mu), ys.join(","), w(nu))
            }
        }
    }
}

/// Right-multiplies `state` by the image of `symbol`.
pub fn md_step(state: &MdState, symbol: Bracket, a: &TransitionMatrix) -> MdState {
    let Some((mu, y, nu)) = state.parts(a) else {
        return MdState::Zero;
    };
    match symbol {
        Bracket::Close(j) => {
            if let Some(&top) = nu.first() {
                if top != j {
                    return MdState::Zero;
                }
                let rest = nu[1..].to_vec();
                let y = if rest.is_empty() { y & a.row(j) } else { y };
                if y == 0 {
                    return MdState::Zero;
                }
                MdState::Triple { mu: mu.to_vec(), y, nu: rest }
            } else {
                if y >> j & 1 == 0 {
                    return MdState::Zero;
                }
                let mut mu = mu.to_vec();
                mu.push(j);
                MdState::Triple { mu, y: a.row(j), nu: Vec::new() }
            }
        }
        Bracket::Open(i) => {
            if let Some(&top) = nu.first() {
                if !a.get(i, top) {
                    return MdState::Zero;
                }
                let mut v = Vec::with_capacity(nu.len() + 1);
                v.push(i);
                v.extend_from_slice(nu);
                MdState::Triple { mu: mu.to_vec(), y, nu: v }
            } else {
                let y = y & a.row(i);
                if y == 0 {
                    return MdState::Zero;
                }
                MdState::Triple { mu: mu.to_vec(), y, nu: vec![i] }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triple(mu: &[u16], y: u64, nu: &[u16]) -> MdState {
        MdState::Triple { mu: mu.to_vec(), y, nu: nu.to_vec() }
    }

    #[test]
    fn close_from_unit() {
        let a = TransitionMatrix::all_ones(2);
        assert_eq!(md_step(&MdState::Unit, Bracket::Close(0), &a), triple(&[0], 0b11, &[]));
    }

    #[test]
    fn mismatched_close_is_zero() {
        let a = TransitionMatrix::all_ones(2);
        let s = triple(&[0], 0b11, &[0]);
        assert_eq!(md_step(&s, Bracket::Close(1), &a), MdState::Zero);
    }

    #[test]
    fn matched_pair_cancels() {
        let a = TransitionMatrix::all_ones(2);
        let s = md_step(&MdState::Unit, Bracket::Open(0), &a);
        assert_eq!(md_step(&s, Bracket::Close(0), &a), triple(&[], 0b11, &[]));
    }

    #[test]
    fn zero_absorbs() {
        let a = TransitionMatrix::all_ones(3);
        assert_eq!(md_step(&MdState::Zero, Bracket::Open(1), &a), MdState::Zero);
    }

    #[test]
    fn markov_constraint_on_closers() {
        // golden-mean style A: 2 cannot follow 2
        let a = TransitionMatrix::new(&[vec![1, 1], vec![1, 0]]).unwrap();
        let s = md_step(&MdState::Unit, Bracket::Close(1), &a);
        assert_eq!(md_step(&s, Bracket::Close(1), &a), MdState::Zero);
        assert!(!md_step(&s, Bracket::Close(0), &a).is_zero());
        // α2 α2 is forbidden exactly when β2 β2 is
        let s = md_step(&MdState::Unit, Bracket::Open(1), &a);
        assert_eq!(md_step(&s, Bracket::Open(1), &a), MdState::Zero);
    }

    #[test]
    fn rejects_bad_matrices() {
        assert!(TransitionMatrix::new(&[vec![1, 2], vec![1, 0]]).is_none());
        assert!(TransitionMatrix::new(&[vec![1, 1]]).is_none());
    }
}
