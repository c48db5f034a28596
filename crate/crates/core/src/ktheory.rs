//! Matrix systems of λ-graph systems, K-group towers and Bowen–Franks groups.

use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use serde_json::json;

use crate::error::{Error, Result};
use crate::intalg::{big_to_json, cokernel, kernel_basis, smith_normal_form, Cokernel, FgAbelianGroup, IntMatrix};
use crate::lgs::LambdaGraphSystem;

/// `(A_l, I_l)` for each level pair: `A_l(i,j)` counts edges from `v_i^l`
/// to `v_j^{l+1}`, `I_l(i,j) = 1` iff `ι(v_j^{l+1}) = v_i^l`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixSystem {
    pub a: Vec<IntMatrix>,
    pub i: Vec<IntMatrix>,
}

pub fn extract_matrix_system(lgs: &LambdaGraphSystem) -> MatrixSystem {
    let mut a = Vec::with_capacity(lgs.top());
    let mut i = Vec::with_capacity(lgs.top());
    for l in 0..lgs.top() {
        let (m, n) = (lgs.levels[l].vertices.len(), lgs.levels[l + 1].vertices.len());
        let mut al = IntMatrix::zeros(m, n);
        for e in &lgs.levels[l].edges {
            let v = al.get(e.src, e.dst) + 1;
            al.set(e.src, e.dst, v);
        }
        let mut il = IntMatrix::zeros(m, n);
        for (child, &parent) in lgs.levels[l].iota.iter().enumerate() {
            il.set(parent, child, BigInt::from(1));
        }
        a.push(al);
        i.push(il);
    }
    MatrixSystem { a, i }
}

impl MatrixSystem {
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// `ᵗI_l − ᵗA_l`, an `m(l+1) × m(l)` matrix.
    pub fn difference(&self, l: usize) -> IntMatrix {
        self.i[l].transpose().sub(&self.a[l].transpose())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let levels: Vec<_> = (0..self.len())
            .map(|l| json!({ "level": l, "A": self.a[l], "I": self.i[l] }))
            .collect();
        json!(levels)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Stabilization {
    /// connecting maps are isomorphisms from tower index `from` on
    Stabilized { from: usize, group: FgAbelianGroup },
    /// torsion constant and free rank strictly increasing over the window
    TorsionStabilized { torsion: FgAbelianGroup, ranks: Vec<usize> },
    Undetermined,
}

impl fmt::Display for Stabilization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stabilization::Stabilized { from, group } => write!(f, "stabilized from level {from}: {group}"),
            Stabilization::TorsionStabilized { torsion, ranks } => {
                let r: Vec<String> = ranks.iter().map(ToString::to_string).collect();
                write!(f, "torsion stabilized: {torsion}, free ranks {} increasing", r.join(", "))
            }
            Stabilization::Undetermined => write!(f, "undetermined"),
        }
    }
}

/// Level groups with connecting maps in canonical generators
/// (`maps[k]: groups[k] → groups[k+1]`) and a verdict over a finite window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupTower {
    pub groups: Vec<FgAbelianGroup>,
    pub maps: Vec<IntMatrix>,
    pub stabilization: Stabilization,
    pub window: usize,
}

pub const DEFAULT_WINDOW: usize = 3;

impl GroupTower {
    fn classify(groups: Vec<FgAbelianGroup>, maps: Vec<IntMatrix>, window: usize) -> Self {
        let window = window.max(1);
        let n = groups.len();
        let iso: Vec<bool> = (0..maps.len())
            .map(|k| crate::intalg::is_isomorphism(&maps[k], &groups[k], &groups[k + 1]))
            .collect();
        let mut from = n.saturating_sub(1);
        while from > 0 && iso[from - 1] {
            from -= 1;
        }
        let stabilization = if n >= window && n - from >= window {
            Stabilization::Stabilized { from, group: groups[n - 1].clone() }
        } else if n >= window.max(2) {
            let tail = &groups[n - window.max(2)..];
            let torsion = tail[0].torsion_part();
            if tail.iter().all(|g| g.torsion_part() == torsion) && tail.windows(2).all(|w| w[0].rank < w[1].rank) {
                Stabilization::TorsionStabilized { torsion, ranks: tail.iter().map(|g| g.rank).collect() }
            } else {
                Stabilization::Undetermined
            }
        } else {
            Stabilization::Undetermined
        };
        Self { groups, maps, stabilization, window }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let stab = match &self.stabilization {
            Stabilization::Stabilized { from, group } => {
                json!({ "kind": "stabilized", "from": from, "group": group.to_string() })
            }
            Stabilization::TorsionStabilized { torsion, ranks } => {
                json!({ "kind": "torsion_stabilized", "torsion": torsion.to_string(), "ranks": ranks })
            }
            Stabilization::Undetermined => json!({ "kind": "undetermined" }),
        };
        json!({
            "levels": self.groups.iter().enumerate().map(|(l, g)| json!({
                "level": l,
                "rank": g.rank,
                "torsion": g.torsion.iter().map(big_to_json).collect::<Vec<_>>(),
                "group": g.to_string(),
            })).collect::<Vec<_>>(),
            "stabilization": stab,
            "window": self.window,
            "note": "stabilization is judged on the last levels of a finite window",
        })
    }
}

/// `coker(ᵗI_l − ᵗA_l)` with maps induced by `ᵗI_l`.
pub fn k0_tower(ms: &MatrixSystem, window: usize) -> Result<GroupTower> {
    let diffs: Vec<IntMatrix> = (0..ms.len()).map(|l| ms.difference(l)).collect();
    let cokers: Vec<Cokernel> = diffs.iter().map(Cokernel::new).collect();
    let mut maps = Vec::new();
    for l in 1..ms.len() {
        let j = ms.i[l].transpose();
        maps.push(crate::intalg::induced_map(&cokers[l - 1], &cokers[l], &diffs[l - 1], &j)?);
    }
    Ok(GroupTower::classify(cokers.into_iter().map(|c| c.group).collect(), maps, window))
}

/// `ker(ᵗI_l − ᵗA_l)` with maps induced by `ᵗI_{l-1}`.
pub fn k1_tower(ms: &MatrixSystem, window: usize) -> Result<GroupTower> {
    let diffs: Vec<IntMatrix> = (0..ms.len()).map(|l| ms.difference(l)).collect();
    let bases: Vec<Vec<Vec<BigInt>>> = diffs.iter().map(kernel_basis).collect();
    let mut maps = Vec::new();
    for l in 1..ms.len() {
        let j = ms.i[l - 1].transpose();
        maps.push(kernel_map(&bases[l - 1], &diffs[l], &bases[l], &j)?);
    }
    let groups = bases.iter().map(|b| FgAbelianGroup::free(b.len())).collect();
    Ok(GroupTower::classify(groups, maps, window))
}

/// Matrix of `x ↦ J x` from the lattice spanned by `b1` into `ker(m2)` in basis `b2`.
fn kernel_map(b1: &[Vec<BigInt>], m2: &IntMatrix, b2: &[Vec<BigInt>], j: &IntMatrix) -> Result<IntMatrix> {
    let snf = smith_normal_form(m2);
    let rank = snf.rank();
    let mut f = IntMatrix::zeros(b2.len(), b1.len());
    for (c, x) in b1.iter().enumerate() {
        let y = j.mul_vec(x);
        let coords = snf.v_inv.mul_vec(&y);
        if coords[..rank].iter().any(|v| !v.is_zero()) {
            return Err(Error::NotWellDefined { column: c });
        }
        for (r, v) in coords[rank..].iter().enumerate() {
            f.set(r, c, v.clone());
        }
    }
    Ok(f)
}

/// A Bowen–Franks group, possibly with a free part of unbounded rank.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BfGroup {
    Group(FgAbelianGroup),
    UnboundedFree { torsion: FgAbelianGroup },
}

impl fmt::Display for BfGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BfGroup::Group(g) => write!(f, "{g}"),
            BfGroup::UnboundedFree { torsion } if torsion.is_trivial() => write!(f, "Z^(unbounded)"),
            BfGroup::UnboundedFree { torsion } => write!(f, "Z^(unbounded) (+) {torsion}"),
        }
    }
}

/// `BF⁰ ≅ Ext(K₀, Z) ⊕ Hom(K₁, Z)` and `BF¹ ≅ Hom(K₀, Z)`.
pub fn bowen_franks(k0: &GroupTower, k1: &GroupTower) -> Result<(BfGroup, BfGroup)> {
    let undetermined = |name: &str| Error::UndeterminedTower(format!("{name} tower did not stabilize in the window"));
    let (k0_torsion, k0_rank) = match &k0.stabilization {
        Stabilization::Stabilized { group, .. } => (group.torsion_part(), Some(group.rank)),
        Stabilization::TorsionStabilized { torsion, .. } => (torsion.clone(), None),
        Stabilization::Undetermined => return Err(undetermined("K0")),
    };
    let k1_rank = match &k1.stabilization {
        Stabilization::Stabilized { group, .. } => Some(group.rank),
        Stabilization::TorsionStabilized { .. } => None,
        Stabilization::Undetermined => return Err(undetermined("K1")),
    };
    let bf0 = match k1_rank {
        Some(r) => BfGroup::Group(FgAbelianGroup { rank: r, torsion: k0_torsion.torsion }),
        None => BfGroup::UnboundedFree { torsion: k0_torsion },
    };
    let bf1 = match k0_rank {
        Some(r) => BfGroup::Group(FgAbelianGroup::free(r)),
        None => BfGroup::UnboundedFree { torsion: FgAbelianGroup::trivial() },
    };
    Ok((bf0, bf1))
}

/// `Z^N / (I − A) Z^N` and a basis of `ker(I − A)`.
pub fn stationary_bf(a: &IntMatrix) -> (FgAbelianGroup, Vec<Vec<BigInt>>) {
    assert_eq!(a.rows(), a.cols(), "square matrix required");
    let m = IntMatrix::identity(a.rows()).sub(a);
    (cokernel(&m), kernel_basis(&m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::LabeledGraph;
    use crate::lgs::stationary_lgs;

    fn full(n: usize) -> LambdaGraphSystem {
        let a = crate::Alphabet::new((1..=n).map(|i| i.to_string())).unwrap();
        let edges = a.syms().map(|label| crate::GraphEdge { from: 0, to: 0, label }).collect();
        let g = LabeledGraph::new(a, vec!["*".into()], edges).unwrap();
        stationary_lgs(&g, 4).unwrap()
    }

    #[test]
    fn full_shift_matrices_and_groups() {
        let ms = extract_matrix_system(&full(2));
        assert_eq!(ms.a[0], IntMatrix::from_i64(&[vec![2]]));
        assert_eq!(ms.i[0], IntMatrix::from_i64(&[vec![1]]));
        for n in 2..=5 {
            let ms = extract_matrix_system(&full(n));
            let k0 = k0_tower(&ms, 3).unwrap();
            let k1 = k1_tower(&ms, 3).unwrap();
            let expect = FgAbelianGroup::from_diagonal(0, &[BigInt::from(n - 1)]);
            assert_eq!(k0.stabilization, Stabilization::Stabilized { from: 0, group: expect.clone() });
            assert_eq!(k1.stabilization, Stabilization::Stabilized { from: 0, group: FgAbelianGroup::trivial() });
            let (bf0, bf1) = bowen_franks(&k0, &k1).unwrap();
            assert_eq!(bf0, BfGroup::Group(expect));
            assert_eq!(bf1, BfGroup::Group(FgAbelianGroup::trivial()));
        }
    }

    #[test]
    fn stationary_bf_examples() {
        let (g, k) = stationary_bf(&IntMatrix::from_i64(&[vec![1, 1], vec![1, 0]]));
        assert!(g.is_trivial() && k.is_empty());
        let (g, k) = stationary_bf(&IntMatrix::from_i64(&[vec![3]]));
        assert_eq!(g.to_string(), "Z/2");
        assert!(k.is_empty());
        let (g, k) = stationary_bf(&IntMatrix::identity(2));
        assert_eq!(g, FgAbelianGroup::free(2));
        assert_eq!(k.len(), 2);
    }

    #[test]
    fn bf_from_groups() {
        let z2 = FgAbelianGroup::from_diagonal(0, &[BigInt::from(2)]);
        let tower = |g: FgAbelianGroup| GroupTower {
            groups: vec![g.clone(); 3],
            maps: vec![],
            stabilization: Stabilization::Stabilized { from: 0, group: g },
            window: 3,
        };
        let (bf0, bf1) = bowen_franks(&tower(z2.clone()), &tower(FgAbelianGroup::trivial())).unwrap();
        assert_eq!((bf0.to_string(), bf1.to_string()), ("Z/2".into(), "0".into()));
        let (bf0, bf1) = bowen_franks(&tower(FgAbelianGroup::free(3)), &tower(FgAbelianGroup::trivial())).unwrap();
        assert_eq!((bf0.to_string(), bf1.to_string()), ("0".into(), "Z^3".into()));
        let undetermined = GroupTower { groups: vec![], maps: vec![], stabilization: Stabilization::Undetermined, window: 3 };
        assert!(bowen_franks(&undetermined, &tower(z2)).is_err());
    }
}
