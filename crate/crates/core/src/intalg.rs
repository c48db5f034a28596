//! Exact integer matrices, Smith normal form and finitely generated abelian groups.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::ser::{Serialize, SerializeSeq, Serializer};

use crate::error::{Error, Result};

/// Dense integer matrix with arbitrary-precision entries.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    /// Builds from rows; `cols` disambiguates the shape when there are no rows.
    pub fn from_rows<T: Into<BigInt> + Clone>(rows: &[Vec<T>], cols: usize) -> Self {
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged matrix");
            for (j, v) in r.iter().enumerate() {
                m.data[i * cols + j] = v.clone().into();
            }
        }
        m
    }

    pub fn from_i64(rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        Self::from_rows(rows, cols)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    fn at(&mut self, i: usize, j: usize) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.data[i * self.cols..(i + 1) * self.cols].to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "shape mismatch in product");
        let mut p = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        *p.at(i, j) += a * b;
                    }
                }
            }
        }
        p
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len(), "shape mismatch in product");
        (0..self.rows).map(|i| (0..self.cols).map(|j| self.get(i, j) * &v[j]).sum()).collect()
    }

    pub fn sub(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch in difference");
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        IntMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    /// Determinant by fraction-free elimination.
    pub fn det(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n {
            if a.get(k, k).is_zero() {
                let Some(p) = (k + 1..n).find(|&i| !a.get(i, k).is_zero()) else {
                    return BigInt::zero();
                };
                a.swap_rows(k, p);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (a.get(i, j) * a.get(k, k) - a.get(i, k) * a.get(k, j)) / &prev;
                    a.set(i, j, v);
                }
            }
            prev = a.get(k, k).clone();
        }
        sign * a.get(n - 1, n - 1)
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i != j {
            for c in 0..self.cols {
                self.data.swap(i * self.cols + c, j * self.cols + c);
            }
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        if i != j {
            for r in 0..self.rows {
                self.data.swap(r * self.cols + i, r * self.cols + j);
            }
        }
    }

    /// row_i += k · row_j
    fn add_row(&mut self, i: usize, j: usize, k: &BigInt) {
        for c in 0..self.cols {
            let v = self.get(j, c) * k;
            *self.at(i, c) += v;
        }
    }

    /// col_i += k · col_j
    fn add_col(&mut self, i: usize, j: usize, k: &BigInt) {
        for r in 0..self.rows {
            let v = self.get(r, j) * k;
            *self.at(r, i) += v;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for c in 0..self.cols {
            let v = -self.get(i, c);
            self.set(i, c, v);
        }
    }

    /// Rank over the rationals.
    pub fn rank(&self) -> usize {
        smith_normal_form(self).rank()
    }
}

impl Serialize for IntMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.rows))?;
        for r in self.to_rows() {
            let row: Vec<serde_json::Value> = r.iter().map(big_to_json).collect();
            seq.serialize_element(&row)?;
        }
        seq.end()
    }
}

/// Small integers as JSON numbers, large ones as decimal strings.
pub fn big_to_json(v: &BigInt) -> serde_json::Value {
    match i64::try_from(v) {
        Ok(x) => serde_json::Value::from(x),
        Err(_) => serde_json::Value::from(v.to_string()),
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in self.to_rows() {
            let cells: Vec<String> = r.iter().map(ToString::to_string).collect();
            writeln!(f, "[{}]", cells.join(" "))?;
        }
        Ok(())
    }
}

/// `U · M · V = D` with `U`, `V` unimodular and `D` diagonal, `d_1 | d_2 | ⋯`.
#[derive(Clone, Debug)]
pub struct SmithDecomposition {
    pub u: IntMatrix,
    pub u_inv: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
    pub v_inv: IntMatrix,
}

impl SmithDecomposition {
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.d.rows.min(self.d.cols)).map(|i| self.d.get(i, i).clone()).collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().iter().filter(|x| !x.is_zero()).count()
    }
}

struct Reducer {
    d: IntMatrix,
    u: IntMatrix,
    u_inv: IntMatrix,
    v: IntMatrix,
    v_inv: IntMatrix,
}

impl Reducer {
    fn row_add(&mut self, i: usize, j: usize, k: &BigInt) {
        self.d.add_row(i, j, k);
        self.u.add_row(i, j, k);
        self.u_inv.add_col(j, i, &-k);
    }

    fn row_swap(&mut self, i: usize, j: usize) {
        self.d.swap_rows(i, j);
        self.u.swap_rows(i, j);
        self.u_inv.swap_cols(i, j);
    }

    fn row_negate(&mut self, i: usize) {
        self.d.negate_row(i);
        self.u.negate_row(i);
        let inv = &mut self.u_inv;
        for r in 0..inv.rows {
            let v = -inv.get(r, i);
            inv.set(r, i, v);
        }
    }

    fn col_add(&mut self, i: usize, j: usize, k: &BigInt) {
        self.d.add_col(i, j, k);
        self.v.add_col(i, j, k);
        self.v_inv.add_row(j, i, &-k);
    }

    fn col_swap(&mut self, i: usize, j: usize) {
        self.d.swap_cols(i, j);
        self.v.swap_cols(i, j);
        self.v_inv.swap_rows(i, j);
    }

    /// Smallest nonzero |entry| in the lower-right block from `t`.
    fn pivot(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<((usize, usize), BigInt)> = None;
        for i in t..self.d.rows {
            for j in t..self.d.cols {
                let a = self.d.get(i, j).abs();
                if !a.is_zero() && best.as_ref().is_none_or(|(_, b)| a < *b) {
                    best = Some(((i, j), a));
                }
            }
        }
        best.map(|(p, _)| p)
    }

    fn run(&mut self) {
        let (r, c) = (self.d.rows, self.d.cols);
        for t in 0..r.min(c) {
            let Some((pi, pj)) = self.pivot(t) else { break };
            self.row_swap(t, pi);
            self.col_swap(t, pj);
            loop {
                let mut dirty = false;
                for i in t + 1..r {
                    if !self.d.get(i, t).is_zero() {
                        let q = self.d.get(i, t).div_floor(self.d.get(t, t));
                        self.row_add(i, t, &-q);
                        if !self.d.get(i, t).is_zero() {
                            dirty = true;
                        }
                    }
                }
                for j in t + 1..c {
                    if !self.d.get(t, j).is_zero() {
                        let q = self.d.get(t, j).div_floor(self.d.get(t, t));
                        self.col_add(j, t, &-q);
                        if !self.d.get(t, j).is_zero() {
                            dirty = true;
                        }
                    }
                }
                if dirty {
                    // a smaller remainder is left in row or column t: move it to the pivot
                    let (mut bi, mut bj) = (t, t);
                    let mut best = self.d.get(t, t).abs();
                    for i in t + 1..r {
                        let a = self.d.get(i, t).abs();
                        if !a.is_zero() && a < best {
                            (bi, bj, best) = (i, t, a);
                        }
                    }
                    for j in t + 1..c {
                        let a = self.d.get(t, j).abs();
                        if !a.is_zero() && a < best {
                            (bi, bj, best) = (t, j, a);
                        }
                    }
                    self.row_swap(t, bi);
                    self.col_swap(t, bj);
                    continue;
                }
                let p = self.d.get(t, t).clone();
                let bad = (t + 1..r).find(|&i| (t + 1..c).any(|j| !self.d.get(i, j).is_multiple_of(&p)));
                match bad {
                    Some(i) => self.row_add(t, i, &BigInt::one()),
                    None => break,
                }
            }
            if self.d.get(t, t).is_negative() {
                self.row_negate(t);
            }
        }
    }
}

pub fn smith_normal_form(m: &IntMatrix) -> SmithDecomposition {
    let mut red = Reducer {
        d: m.clone(),
        u: IntMatrix::identity(m.rows),
        u_inv: IntMatrix::identity(m.rows),
        v: IntMatrix::identity(m.cols),
        v_inv: IntMatrix::identity(m.cols),
    };
    red.run();
    SmithDecomposition { u: red.u, u_inv: red.u_inv, d: red.d, v: red.v, v_inv: red.v_inv }
}

/// Finitely generated abelian group `Z^rank ⊕ Z/d_1 ⊕ ⋯` with `d_i ≥ 2`, `d_i | d_{i+1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FgAbelianGroup {
    pub rank: usize,
    pub torsion: Vec<BigInt>,
}

impl FgAbelianGroup {
    pub fn trivial() -> Self {
        Self { rank: 0, torsion: Vec::new() }
    }

    pub fn free(rank: usize) -> Self {
        Self { rank, torsion: Vec::new() }
    }

    /// Canonical form of `Z^rank ⊕ ⊕ Z/d` for arbitrary nonnegative `d`
    /// (`d = 0` contributes a free summand, `d = 1` nothing).
    pub fn from_diagonal(rank: usize, ds: &[BigInt]) -> Self {
        let mut rank = rank;
        let mut rest = Vec::new();
        for d in ds {
            let d = d.abs();
            if d.is_zero() {
                rank += 1;
            } else if !d.is_one() {
                rest.push(d);
            }
        }
        let torsion = invariant_chain(rest);
        Self { rank, torsion }
    }

    pub fn is_trivial(&self) -> bool {
        self.rank == 0 && self.torsion.is_empty()
    }

    pub fn torsion_part(&self) -> FgAbelianGroup {
        Self { rank: 0, torsion: self.torsion.clone() }
    }

    /// Number of canonical generators (torsion first, then free).
    pub fn num_generators(&self) -> usize {
        self.torsion.len() + self.rank
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "rank": self.rank,
            "torsion": self.torsion.iter().map(big_to_json).collect::<Vec<_>>(),
        })
    }
}

/// Turns a list of cyclic orders into invariant factors by repeated
/// `(a, b) -> (gcd, lcm)`.
fn invariant_chain(mut v: Vec<BigInt>) -> Vec<BigInt> {
    let n = v.len();
    for i in 0..n {
        for j in i + 1..n {
            let g = v[i].gcd(&v[j]);
            let l = v[i].lcm(&v[j]);
            v[i] = g;
            v[j] = l;
        }
    }
    v.into_iter().filter(|d| !d.is_one()).collect()
}

impl fmt::Display for FgAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        if self.rank > 0 {
            parts.push(format!("Z^{}", self.rank));
        }
        parts.extend(self.torsion.iter().map(|d| format!("Z/{d}")));
        write!(f, "{}", parts.join(" (+) "))
    }
}

/// `Z^rows / M·Z^cols` with its canonical generator system.
#[derive(Clone, Debug)]
pub struct Cokernel {
    pub group: FgAbelianGroup,
    snf: SmithDecomposition,
    /// SNF coordinates that survive: `(index, modulus)`; modulus 0 = free
    gens: Vec<(usize, BigInt)>,
}

impl Cokernel {
    pub fn new(m: &IntMatrix) -> Self {
        let snf = smith_normal_form(m);
        let diag = snf.diagonal();
        let mut torsion = Vec::new();
        let mut free = Vec::new();
        for i in 0..m.rows {
            let d = diag.get(i).cloned().unwrap_or_else(BigInt::zero);
            if d.is_zero() {
                free.push((i, d));
            } else if !d.is_one() {
                torsion.push((i, d));
            }
        }
        let group =
            FgAbelianGroup { rank: free.len(), torsion: torsion.iter().map(|(_, d)| d.clone()).collect() };
        torsion.extend(free);
        Self { group, snf, gens: torsion }
    }

    /// Coordinates of the class of `x ∈ Z^rows` in canonical generators.
    pub fn coordinates(&self, x: &[BigInt]) -> Vec<BigInt> {
        let y = self.snf.u.mul_vec(x);
        self.gens.iter().map(|(i, d)| if d.is_zero() { y[*i].clone() } else { y[*i].mod_floor(d) }).collect()
    }

    /// Whether `x` lies in the image of `M`.
    pub fn is_zero_class(&self, x: &[BigInt]) -> bool {
        let y = self.snf.u.mul_vec(x);
        let diag = self.snf.diagonal();
        y.iter().enumerate().all(|(i, v)| {
            let d = diag.get(i).cloned().unwrap_or_else(BigInt::zero);
            if d.is_zero() {
                v.is_zero()
            } else {
                v.is_multiple_of(&d)
            }
        })
    }

    /// A lift in `Z^rows` of the `k`-th canonical generator.
    pub fn generator_lift(&self, k: usize) -> Vec<BigInt> {
        self.snf.u_inv.column(self.gens[k].0)
    }

    pub fn moduli(&self) -> Vec<BigInt> {
        self.gens.iter().map(|(_, d)| d.clone()).collect()
    }
}

pub fn cokernel(m: &IntMatrix) -> FgAbelianGroup {
    Cokernel::new(m).group
}

/// A lattice basis of `{x : M x = 0}`.
pub fn kernel_basis(m: &IntMatrix) -> Vec<Vec<BigInt>> {
    let snf = smith_normal_form(m);
    (snf.rank()..m.cols).map(|j| snf.v.column(j)).collect()
}

/// Matrix of `coker(M1) → coker(M2)`, `[x] ↦ [J x]`, in canonical generators.
pub fn induced_map_on_cokernels(m1: &IntMatrix, m2: &IntMatrix, j: &IntMatrix) -> Result<IntMatrix> {
    induced_map(&Cokernel::new(m1), &Cokernel::new(m2), m1, j)
}

pub(crate) fn induced_map(c1: &Cokernel, c2: &Cokernel, m1: &IntMatrix, j: &IntMatrix) -> Result<IntMatrix> {
    if j.cols != m1.rows || j.rows != c2.snf.u.rows {
        return Err(Error::LevelRangeMismatch(format!(
            "connecting matrix is {}x{}, expected {}x{}",
            j.rows,
            j.cols,
            c2.snf.u.rows,
            m1.rows
        )));
    }
    let jm = j.mul(m1);
    for col in 0..jm.cols {
        if !c2.is_zero_class(&jm.column(col)) {
            return Err(Error::NotWellDefined { column: col });
        }
    }
    let n1 = c1.gens.len();
    let n2 = c2.gens.len();
    let mut f = IntMatrix::zeros(n2, n1);
    for k in 0..n1 {
        let img = c2.coordinates(&j.mul_vec(&c1.generator_lift(k)));
        for (r, v) in img.into_iter().enumerate() {
            f.set(r, k, v);
        }
    }
    Ok(f)
}

/// Whether the homomorphism with matrix `f` from `g1` to `g2` (canonical
/// generators) is an isomorphism.
pub fn is_isomorphism(f: &IntMatrix, g1: &FgAbelianGroup, g2: &FgAbelianGroup) -> bool {
    if g1 != g2 {
        return false;
    }
    // equal f.g. abelian groups: bijective iff surjective
    let n = g2.num_generators();
    let mut aug = IntMatrix::zeros(n, f.cols + n);
    for r in 0..n {
        for c in 0..f.cols {
            aug.set(r, c, f.get(r, c).clone());
        }
        if r < g2.torsion.len() {
            aug.set(r, f.cols + r, g2.torsion[r].clone());
        }
    }
    cokernel(&aug).is_trivial()
}
