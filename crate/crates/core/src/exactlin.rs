//! Exact SL_n matrices over a number field: Bruhat decomposition through
//! upper-triangular row/column operations, block (big-cell) factorization
//! relative to a composition, and the relative decomposition g = w z v+ v-.
//!
//! Everything here is exact; no numerical pivoting. Minor tests are exact
//! zero tests on field elements.

use std::sync::Arc;

use crate::error::{Alarm, Error, Result};
use crate::numfield::{FieldElement, NumberField};
use crate::poly::Q;
use crate::weylcomb::{coset_reps, PsiSet, WeylPerm};

#[derive(Clone, PartialEq)]
pub struct MatrixK {
    pub field: Arc<NumberField>,
    pub n: usize,
    pub entries: Vec<FieldElement>,
}

impl std::fmt::Debug for MatrixK {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "MatrixK {}x{} [", self.n, self.n)?;
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|j| format!("{:?}", self.at(i, j))).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl MatrixK {
    pub fn new(field: Arc<NumberField>, n: usize, entries: Vec<FieldElement>) -> Self {
        assert_eq!(entries.len(), n * n);
        MatrixK { field, n, entries }
    }

    pub fn identity(field: &Arc<NumberField>, n: usize) -> Self {
        let mut entries = vec![FieldElement::zero(field); n * n];
        for i in 0..n {
            entries[i * n + i] = FieldElement::one(field);
        }
        MatrixK { field: field.clone(), n, entries }
    }

    pub fn from_rows(field: &Arc<NumberField>, rows: Vec<Vec<FieldElement>>) -> Self {
        let n = rows.len();
        let entries: Vec<FieldElement> = rows.into_iter().flatten().collect();
        MatrixK::new(field.clone(), n, entries)
    }

    pub fn from_i64_rows(field: &Arc<NumberField>, rows: &[Vec<i64>]) -> Self {
        let n = rows.len();
        let entries = rows
            .iter()
            .flat_map(|r| {
                assert_eq!(r.len(), n);
                r.iter().map(|&x| FieldElement::from_int(field, x))
            })
            .collect();
        MatrixK::new(field.clone(), n, entries)
    }

    pub fn from_rational_rows(field: &Arc<NumberField>, rows: &[Vec<Q>]) -> Self {
        let n = rows.len();
        let entries = rows
            .iter()
            .flat_map(|r| r.iter().map(|x| FieldElement::from_ratio(field, x.clone())))
            .collect();
        MatrixK::new(field.clone(), n, entries)
    }

    /// The canonical SL_n representative of a Weyl element.
    pub fn weyl(field: &Arc<NumberField>, w: &WeylPerm) -> Self {
        let n = w.n();
        let mut m = MatrixK::new(field.clone(), n, vec![FieldElement::zero(field); n * n]);
        for (row, col, sign) in w.rep_entries() {
            *m.at_mut(row, col) = FieldElement::from_int(field, sign);
        }
        m
    }

    pub fn diagonal(field: &Arc<NumberField>, diag: &[FieldElement]) -> Self {
        let n = diag.len();
        let mut m = MatrixK::new(field.clone(), n, vec![FieldElement::zero(field); n * n]);
        for (i, d) in diag.iter().enumerate() {
            *m.at_mut(i, i) = d.clone();
        }
        m
    }

    /// I + x E_ij.
    pub fn elementary(field: &Arc<NumberField>, n: usize, i: usize, j: usize, x: FieldElement) -> Self {
        assert_ne!(i, j);
        let mut m = MatrixK::identity(field, n);
        *m.at_mut(i, j) = x;
        m
    }

    pub fn at(&self, i: usize, j: usize) -> &FieldElement {
        &self.entries[i * self.n + j]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut FieldElement {
        &mut self.entries[i * self.n + j]
    }

    pub fn mul(&self, other: &MatrixK) -> MatrixK {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut entries = vec![FieldElement::zero(&self.field); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.at(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = other.at(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    entries[i * n + j] = entries[i * n + j].add(&a.mul(b));
                }
            }
        }
        MatrixK::new(self.field.clone(), n, entries)
    }

    pub fn transpose(&self) -> MatrixK {
        let n = self.n;
        let mut m = self.clone();
        for i in 0..n {
            for j in 0..n {
                m.entries[j * n + i] = self.entries[i * n + j].clone();
            }
        }
        m
    }

    pub fn det(&self) -> FieldElement {
        let n = self.n;
        let mut m: Vec<FieldElement> = self.entries.clone();
        let mut det = FieldElement::one(&self.field);
        for col in 0..n {
            let Some(piv) = (col..n).find(|&r| !m[r * n + col].is_zero()) else {
                return FieldElement::zero(&self.field);
            };
            if piv != col {
                for j in 0..n {
                    m.swap(piv * n + j, col * n + j);
                }
                det = det.neg();
            }
            det = det.mul(&m[col * n + col]);
            let inv = m[col * n + col].inv().expect("nonzero pivot");
            for r in (col + 1)..n {
                if m[r * n + col].is_zero() {
                    continue;
                }
                let f = m[r * n + col].mul(&inv);
                for c in col..n {
                    let sub = f.mul(&m[col * n + c]);
                    m[r * n + c] = m[r * n + c].sub(&sub);
                }
            }
        }
        det
    }

    pub fn inverse(&self) -> Result<MatrixK> {
        let n = self.n;
        let mut m = self.entries.clone();
        let mut inv = MatrixK::identity(&self.field, n).entries;
        for col in 0..n {
            let Some(piv) = (col..n).find(|&r| !m[r * n + col].is_zero()) else {
                return Err(Error::Singular);
            };
            if piv != col {
                for j in 0..n {
                    m.swap(piv * n + j, col * n + j);
                    inv.swap(piv * n + j, col * n + j);
                }
            }
            let p = m[col * n + col].inv().expect("nonzero pivot");
            for j in 0..n {
                m[col * n + j] = m[col * n + j].mul(&p);
                inv[col * n + j] = inv[col * n + j].mul(&p);
            }
            for r in 0..n {
                if r != col && !m[r * n + col].is_zero() {
                    let f = m[r * n + col].clone();
                    for j in 0..n {
                        let s1 = f.mul(&m[col * n + j]);
                        m[r * n + j] = m[r * n + j].sub(&s1);
                        let s2 = f.mul(&inv[col * n + j]);
                        inv[r * n + j] = inv[r * n + j].sub(&s2);
                    }
                }
            }
        }
        Ok(MatrixK::new(self.field.clone(), n, inv))
    }

    pub fn is_identity(&self) -> bool {
        (0..self.n).all(|i| {
            (0..self.n).all(|j| {
                if i == j {
                    self.at(i, j).is_one()
                } else {
                    self.at(i, j).is_zero()
                }
            })
        })
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| i == j || self.at(i, j).is_zero()))
    }

    pub fn is_monomial(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).filter(|&j| !self.at(i, j).is_zero()).count() == 1)
            && (0..self.n).all(|j| (0..self.n).filter(|&i| !self.at(i, j).is_zero()).count() == 1)
    }

    pub fn is_block_diagonal(&self, psi: &PsiSet) -> bool {
        let b = |i: usize| psi.block_of(i);
        (0..self.n).all(|i| (0..self.n).all(|j| b(i) == b(j) || self.at(i, j).is_zero()))
    }

    pub fn is_block_upper_unipotent(&self, psi: &PsiSet) -> bool {
        let b = |i: usize| psi.block_of(i);
        (0..self.n).all(|i| {
            (0..self.n).all(|j| {
                if b(i) == b(j) {
                    if i == j { self.at(i, j).is_one() } else { self.at(i, j).is_zero() }
                } else if b(i) > b(j) {
                    self.at(i, j).is_zero()
                } else {
                    true
                }
            })
        })
    }

    pub fn is_block_lower_unipotent(&self, psi: &PsiSet) -> bool {
        self.transpose().is_block_upper_unipotent(psi)
    }

    /// Conjugate by a Weyl representative: w g w^{-1}.
    pub fn conjugate_by_weyl(&self, w: &WeylPerm) -> MatrixK {
        let wm = MatrixK::weyl(&self.field, w);
        let wi = wm.inverse().expect("weyl representatives are invertible");
        wm.mul(self).mul(&wi)
    }
}

/// Bruhat decomposition g = b1 * w * b2 with b1, b2 upper triangular and w
/// the canonical signed permutation representative. The permutation is the
/// unique one with g in B w B.
pub fn bruhat(g: &MatrixK) -> Result<(MatrixK, WeylPerm, MatrixK)> {
    if !g.det().is_one() {
        return Err(Error::Singular);
    }
    let n = g.n;
    let field = g.field.clone();
    let mut m = g.clone();
    let mut b1 = MatrixK::identity(&field, n);
    let mut b2 = MatrixK::identity(&field, n);
    let mut used = vec![false; n];
    let mut perm = vec![0usize; n];
    for row in (0..n).rev() {
        let col = (0..n)
            .find(|&c| !used[c] && !m.at(row, c).is_zero())
            .expect("invertible matrix has a pivot in every row");
        used[col] = true;
        perm[col] = row;
        let pivot_inv = m.at(row, col).inv().expect("pivot is nonzero");
        // Clear entries above the pivot with lower-row additions
        // (left-multiplication by upper-triangular elementaries).
        for r in 0..row {
            if m.at(r, col).is_zero() {
                continue;
            }
            let f = m.at(r, col).mul(&pivot_inv);
            for c in 0..n {
                let sub = f.mul(m.at(row, c));
                *m.at_mut(r, c) = m.at(r, c).sub(&sub);
            }
            // b1 <- b1 * (I + f E_{r,row}): adds f * (column r) to column row.
            for i in 0..n {
                let add = b1.at(i, r).mul(&f);
                *b1.at_mut(i, row) = b1.at(i, row).add(&add);
            }
        }
        // Clear entries right of the pivot with earlier-column additions
        // (right-multiplication by upper-triangular elementaries).
        for c in (col + 1)..n {
            if m.at(row, c).is_zero() {
                continue;
            }
            let f = m.at(row, c).mul(&pivot_inv);
            for r in 0..n {
                let sub = f.mul(m.at(r, col));
                *m.at_mut(r, c) = m.at(r, c).sub(&sub);
            }
            // b2 <- (I + f E_{col,c}) * b2: adds f * (row c) to row col.
            for j in 0..n {
                let add = b2.at(c, j).mul(&f);
                *b2.at_mut(col, j) = b2.at(col, j).add(&add);
            }
        }
    }
    let w = WeylPerm::from_map(perm);
    // Fold the remaining monomial's diagonal part into b2.
    let wrep = MatrixK::weyl(&field, &w);
    let d = wrep.inverse()?.mul(&m);
    debug_assert!(d.is_diagonal());
    let b2 = d.mul(&b2);
    Ok((b1, w, b2))
}

#[derive(Debug, Clone)]
pub struct BigCellFactors {
    pub v_minus: MatrixK,
    pub z: MatrixK,
    pub v_plus: MatrixK,
}

/// Block LDU factorization relative to the composition of Psi: returns
/// g = v_minus * z * v_plus with v_minus block-lower unipotent, z block
/// diagonal and v_plus block-upper unipotent, when the leading principal
/// minors at every block boundary are nonzero; None otherwise.
pub fn big_cell_factor(g: &MatrixK, psi: &PsiSet) -> Option<BigCellFactors> {
    assert_eq!(g.n, psi.n);
    let n = g.n;
    let field = g.field.clone();
    let blocks = psi.blocks();
    let mut m = g.clone();
    let mut l = MatrixK::identity(&field, n);
    let mut u = MatrixK::identity(&field, n);
    let mut z = vec![FieldElement::zero(&field); n * n];
    for (k, rk) in blocks.iter().enumerate() {
        // D_k = current Schur block; must be invertible.
        let d = submatrix(&m, rk.clone(), rk.clone());
        let dinv = match grid_inverse(&field, &d) {
            Some(di) => di,
            None => return None,
        };
        for i in rk.clone() {
            for j in rk.clone() {
                z[i * n + j] = m.at(i, j).clone();
            }
        }
        for rl in blocks.iter().skip(k + 1) {
            // L block: M[rl][rk] * D^{-1}.
            let a = submatrix(&m, rl.clone(), rk.clone());
            let lb = grid_mul(&field, &a, &dinv);
            for (bi, i) in rl.clone().enumerate() {
                for (bj, j) in rk.clone().enumerate() {
                    *l.at_mut(i, j) = lb[bi][bj].clone();
                }
            }
        }
        for cl in blocks.iter().skip(k + 1) {
            // U block: D^{-1} * M[rk][cl].
            let a = submatrix(&m, rk.clone(), cl.clone());
            let ub = grid_mul(&field, &dinv, &a);
            for (bi, i) in rk.clone().enumerate() {
                for (bj, j) in cl.clone().enumerate() {
                    *u.at_mut(i, j) = ub[bi][bj].clone();
                }
            }
        }
        // Schur update of the trailing blocks:
        // M[Ri][Rj] -= M[Ri][Rk] D^{-1} M[Rk][Rj] = L[Ri][Rk] * M[Rk][Rj].
        for rl in blocks.iter().skip(k + 1) {
            for cl in blocks.iter().skip(k + 1) {
                for i in rl.clone() {
                    for j in cl.clone() {
                        let mut acc = m.at(i, j).clone();
                        for t in rk.clone() {
                            let s = l.at(i, t).mul(m.at(t, j));
                            acc = acc.sub(&s);
                        }
                        *m.at_mut(i, j) = acc;
                    }
                }
            }
        }
    }
    let z = MatrixK::new(field, n, z);
    debug_assert!(l.is_block_lower_unipotent(psi));
    debug_assert!(u.is_block_upper_unipotent(psi));
    debug_assert!(z.is_block_diagonal(psi));
    Some(BigCellFactors { v_minus: l, z, v_plus: u })
}

fn submatrix(m: &MatrixK, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Vec<Vec<FieldElement>> {
    rows.map(|i| cols.clone().map(|j| m.at(i, j).clone()).collect()).collect()
}

fn grid_mul(field: &Arc<NumberField>, a: &[Vec<FieldElement>], b: &[Vec<FieldElement>]) -> Vec<Vec<FieldElement>> {
    let n = a.len();
    let k = b.len();
    let m = b[0].len();
    let mut out = vec![vec![FieldElement::zero(field); m]; n];
    for i in 0..n {
        for t in 0..k {
            if a[i][t].is_zero() {
                continue;
            }
            for j in 0..m {
                if b[t][j].is_zero() {
                    continue;
                }
                out[i][j] = out[i][j].add(&a[i][t].mul(&b[t][j]));
            }
        }
    }
    out
}

fn grid_inverse(field: &Arc<NumberField>, a: &[Vec<FieldElement>]) -> Option<Vec<Vec<FieldElement>>> {
    let n = a.len();
    let mut m: Vec<Vec<FieldElement>> = a.to_vec();
    let mut inv = vec![vec![FieldElement::zero(field); n]; n];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = FieldElement::one(field);
    }
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(piv, col);
        inv.swap(piv, col);
        let p = m[col][col].inv().ok()?;
        for j in 0..n {
            m[col][j] = m[col][j].mul(&p);
            inv[col][j] = inv[col][j].mul(&p);
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for j in 0..n {
                    let s1 = f.mul(&m[col][j]);
                    m[r][j] = m[r][j].sub(&s1);
                    let s2 = f.mul(&inv[col][j]);
                    inv[r][j] = inv[r][j].sub(&s2);
                }
            }
        }
    }
    Some(inv)
}

/// Twisted big-cell membership: factorizes w1^{-1} g w2 relative to Psi.
/// Some(factors) exactly when g lies in w1 V_Psi^- P_Psi w2^{-1}.
pub fn generalized_membership(
    g: &MatrixK,
    w1: &WeylPerm,
    w2: &WeylPerm,
    psi: &PsiSet,
) -> Option<BigCellFactors> {
    let w1m = MatrixK::weyl(&g.field, w1);
    let w2m = MatrixK::weyl(&g.field, w2);
    let x = w1m.inverse().ok()?.mul(g).mul(&w2m);
    big_cell_factor(&x, psi)
}

#[derive(Debug, Clone)]
pub struct RelativeBruhat {
    pub w: WeylPerm,
    pub z: MatrixK,
    pub v_plus: MatrixK,
    pub v_minus: MatrixK,
}

/// Reverse both index orders (conjugation by the antidiagonal permutation,
/// implemented as an index remap).
fn reverse_grid(g: &MatrixK) -> MatrixK {
    let n = g.n;
    let mut out = g.clone();
    for i in 0..n {
        for j in 0..n {
            out.entries[i * n + j] = g.at(n - 1 - i, n - 1 - j).clone();
        }
    }
    out
}

/// All decompositions g = w z v+ v- with z in the Levi of P_Psi, v+ in
/// V_Psi, v- in V_Psi^-, one per successful Weyl element. Minimal-length
/// coset representatives are tried first, then the rest of W.
pub fn relative_bruhat_all(g: &MatrixK, psi: &PsiSet) -> Vec<RelativeBruhat> {
    let n = g.n;
    let field = g.field.clone();
    let mut order = coset_reps(psi);
    for w in WeylPerm::all(n) {
        if !order.contains(&w) {
            order.push(w);
        }
    }
    let rev_comp: Vec<usize> = psi.composition().into_iter().rev().collect();
    let psi_rev = PsiSet::from_composition(&rev_comp);
    let mut out = vec![];
    for w in order {
        let wm = MatrixK::weyl(&field, &w);
        let Ok(wi) = wm.inverse() else { continue };
        let x = wi.mul(g);
        // x in Z V+ V- iff the reversed matrix lies in the reversed big cell.
        let y = reverse_grid(&x);
        if let Some(f) = big_cell_factor(&y, &psi_rev) {
            let a = reverse_grid(&f.v_minus); // block upper unipotent
            let zc = reverse_grid(&f.z); // block diagonal
            let b = reverse_grid(&f.v_plus); // block lower unipotent
            let zinv = zc.inverse().expect("Levi factor is invertible");
            let v_plus = zinv.mul(&a).mul(&zc);
            debug_assert!(v_plus.is_block_upper_unipotent(psi));
            debug_assert!(b.is_block_lower_unipotent(psi));
            debug_assert!(zc.is_block_diagonal(psi));
            debug_assert!(wm.mul(&zc).mul(&v_plus).mul(&b) == *g);
            out.push(RelativeBruhat { w, z: zc, v_plus, v_minus: b });
        }
    }
    out
}

/// First decomposition in the canonical search order; coverage is
/// guaranteed by the Bruhat decomposition, so an empty result is a
/// theorem-violation alarm.
pub fn relative_bruhat(g: &MatrixK, psi: &PsiSet) -> Result<RelativeBruhat> {
    if !g.det().is_one() {
        return Err(Error::Singular);
    }
    relative_bruhat_all(g, psi)
        .into_iter()
        .next()
        .ok_or(Error::TheoremViolation(Alarm::RelativeBruhatCoverage))
}

/// Deterministic random SL_n sample: a product of elementary matrices with
/// small integer-combination entries.
pub fn random_sl<R: rand::Rng>(
    field: &Arc<NumberField>,
    n: usize,
    rng: &mut R,
    factors: usize,
    coord_bound: i64,
) -> MatrixK {
    let mut m = MatrixK::identity(field, n);
    for _ in 0..factors {
        let i = rng.random_range(0..n);
        let mut j = rng.random_range(0..n);
        while j == i {
            j = rng.random_range(0..n);
        }
        let coords: Vec<Q> = (0..field.degree)
            .map(|_| crate::poly::qz(rng.random_range(-coord_bound..=coord_bound)))
            .collect();
        let x = FieldElement::new(field.clone(), coords);
        if x.is_zero() {
            continue;
        }
        m = m.mul(&MatrixK::elementary(field, n, i, j, x));
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numfield::{quadratic, rationals};
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn q64() -> Arc<NumberField> {
        rationals(64)
    }

    #[test]
    fn bruhat_upper_triangular_is_identity() {
        let f = q64();
        let g = MatrixK::from_i64_rows(&f, &[vec![1, 5, -3], vec![0, 1, 2], vec![0, 0, 1]]);
        let (b1, w, b2) = bruhat(&g).unwrap();
        assert!(w.is_identity());
        assert_eq!(b1.mul(&MatrixK::weyl(&f, &w)).mul(&b2), g);
    }

    #[test]
    fn bruhat_long_element() {
        let f = q64();
        let g = MatrixK::from_i64_rows(&f, &[vec![0, -1], vec![1, 0]]);
        let (b1, w, b2) = bruhat(&g).unwrap();
        assert_eq!(w, WeylPerm::long_element(2));
        assert_eq!(b1.mul(&MatrixK::weyl(&f, &w)).mul(&b2), g);
    }

    /// Rank-pattern oracle: g lies in B w B iff for all (i, j) the rank of
    /// the lower-left submatrix g[i.., ..=j] matches that of the
    /// permutation matrix of w.
    fn bruhat_oracle(g: &MatrixK) -> WeylPerm {
        let n = g.n;
        let rank_lower_left = |m: &MatrixK, i0: usize, j0: usize| -> usize {
            let rows: Vec<Vec<FieldElement>> =
                (i0..n).map(|i| (0..=j0).map(|j| m.at(i, j).clone()).collect()).collect();
            grid_rank(&rows)
        };
        let mut candidates = vec![];
        for w in WeylPerm::all(n) {
            let wm = MatrixK::weyl(&g.field, &w);
            let ok = (0..n).all(|i| (0..n).all(|j| rank_lower_left(g, i, j) == rank_lower_left(&wm, i, j)));
            if ok {
                candidates.push(w);
            }
        }
        assert_eq!(candidates.len(), 1, "Bruhat cell is unique");
        candidates.pop().unwrap()
    }

    fn grid_rank(rows: &[Vec<FieldElement>]) -> usize {
        if rows.is_empty() {
            return 0;
        }
        let mut m = rows.to_vec();
        let cols = m[0].len();
        let mut rank = 0;
        for c in 0..cols {
            let Some(p) = (rank..m.len()).find(|&r| !m[r][c].is_zero()) else { continue };
            m.swap(rank, p);
            let inv = m[rank][c].inv().unwrap();
            for r in (rank + 1)..m.len() {
                if !m[r][c].is_zero() {
                    let f = m[r][c].mul(&inv);
                    for k in c..cols {
                        let s = f.mul(&m[rank][k]);
                        m[r][k] = m[r][k].sub(&s);
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    #[test]
    fn bruhat_random_roundtrip_and_oracle() {
        let f = quadratic(2, 96).unwrap();
        let mut rng = StdRng::seed_from_u64(42);
        for k in 0..200 {
            let g = random_sl(&f, 3, &mut rng, 6, 2);
            let (b1, w, b2) = bruhat(&g).unwrap();
            assert_eq!(b1.mul(&MatrixK::weyl(&f, &w)).mul(&b2), g);
            // Upper-triangularity of the outer factors.
            for i in 0..3 {
                for j in 0..i {
                    assert!(b1.at(i, j).is_zero());
                    assert!(b2.at(i, j).is_zero());
                }
            }
            if k < 30 {
                assert_eq!(bruhat_oracle(&g), w);
            }
        }
    }

    #[test]
    fn bruhat_invariant_under_triangular_translation() {
        let f = q64();
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..50 {
            let g = random_sl(&f, 3, &mut rng, 6, 3);
            let (_, w, _) = bruhat(&g).unwrap();
            let t = MatrixK::from_i64_rows(&f, &[vec![1, 2, -1], vec![0, 1, 3], vec![0, 0, 1]]);
            let (_, w2, _) = bruhat(&t.mul(&g)).unwrap();
            let (_, w3, _) = bruhat(&g.mul(&t)).unwrap();
            assert_eq!(w, w2);
            assert_eq!(w, w3);
        }
    }

    #[test]
    fn big_cell_examples() {
        let f = q64();
        let id = MatrixK::identity(&f, 2);
        let fac = big_cell_factor(&id, &PsiSet::empty(2)).unwrap();
        assert!(fac.v_minus.is_identity() && fac.z.is_identity() && fac.v_plus.is_identity());

        let w0 = MatrixK::from_i64_rows(&f, &[vec![0, -1], vec![1, 0]]);
        assert!(big_cell_factor(&w0, &PsiSet::empty(2)).is_none());

        let g = MatrixK::from_i64_rows(&f, &[vec![1, 1, 0], vec![1, 2, 1], vec![0, 1, 2]]);
        let fac = big_cell_factor(&g, &PsiSet::empty(3)).unwrap();
        assert_eq!(fac.v_minus.mul(&fac.z).mul(&fac.v_plus), g);
        // Existence matches the leading-minor conditions (1x1 and 2x2 are 1, 1).
        assert!(!g.at(0, 0).is_zero());
    }

    #[test]
    fn big_cell_uniqueness_via_transpose_route() {
        // The product map is injective on the big cell, so factoring the
        // transpose and transposing back must agree with direct factors.
        let f = quadratic(2, 96).unwrap();
        let mut rng = StdRng::seed_from_u64(9);
        for _ in 0..50 {
            let g = random_sl(&f, 3, &mut rng, 6, 2);
            for psi in PsiSet::all_subsets(3) {
                let Some(fac) = big_cell_factor(&g, &psi) else { continue };
                assert_eq!(fac.v_minus.mul(&fac.z).mul(&fac.v_plus), g);
                let gt = g.transpose();
                let fac_t = big_cell_factor(&gt, &psi).expect("transpose shares the minors");
                assert_eq!(fac_t.v_plus.transpose(), fac.v_minus);
                assert_eq!(fac_t.z.transpose(), fac.z);
                assert_eq!(fac_t.v_minus.transpose(), fac.v_plus);
            }
        }
    }

    #[test]
    fn generalized_membership_consistency() {
        let f = q64();
        let g = MatrixK::from_i64_rows(&f, &[vec![1, 1], vec![1, 2]]);
        let e = WeylPerm::identity(2);
        let w0 = WeylPerm::long_element(2);
        // w1 = w2 = e reduces to the plain big cell.
        let psi0 = PsiSet::empty(2);
        assert!(generalized_membership(&g, &e, &e, &psi0).is_some());
        // Membership iff the twisted leading minor is nonzero; all entries
        // of g are nonzero so all four pairs succeed.
        for w1 in [e.clone(), w0.clone()] {
            for w2 in [e.clone(), w0.clone()] {
                assert!(generalized_membership(&g, &w1, &w2, &psi0).is_some());
            }
        }
        // g = w1 * w2^{-1} with Psi = Pi factors trivially.
        let w1m = MatrixK::weyl(&f, &w0);
        let prod = w1m.mul(&MatrixK::weyl(&f, &e).inverse().unwrap());
        let fac = generalized_membership(&prod, &w0, &e, &PsiSet::full(2)).unwrap();
        assert!(fac.v_minus.is_identity() && fac.v_plus.is_identity());
    }

    #[test]
    fn relative_bruhat_examples() {
        let f = q64();
        let d = MatrixK::from_i64_rows(&f, &[vec![1, 0], vec![0, 1]]);
        let r = relative_bruhat(&d, &PsiSet::empty(2)).unwrap();
        assert!(r.w.is_identity());
        assert!(r.v_plus.is_identity() && r.v_minus.is_identity());

        let w0 = MatrixK::from_i64_rows(&f, &[vec![0, -1], vec![1, 0]]);
        let r = relative_bruhat(&w0, &PsiSet::empty(2)).unwrap();
        assert_eq!(r.w, WeylPerm::long_element(2));
        assert!(r.z.is_diagonal());
    }

    #[test]
    fn relative_bruhat_random_reconstruction() {
        let f = q64();
        let mut rng = StdRng::seed_from_u64(17);
        for _ in 0..60 {
            let g = random_sl(&f, 3, &mut rng, 6, 3);
            for psi in PsiSet::all_subsets(3) {
                let r = relative_bruhat(&g, &psi).expect("coverage");
                let w = MatrixK::weyl(&f, &r.w);
                assert_eq!(w.mul(&r.z).mul(&r.v_plus).mul(&r.v_minus), g);
            }
        }
    }
}
