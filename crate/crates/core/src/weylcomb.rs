//! Type A_{n-1} root-system combinatorics: the Weyl group as signed
//! permutation matrices in SL_n, standard parabolic subgroups P_Psi as
//! compositions of n, flag refinement, conjugacy-class counts, the
//! boundedness-criterion equivalence at the combinatorial level, and the
//! rational cone-splitting lemma.

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};

use crate::error::{Alarm, Error, Result};
use crate::poly::{qz, Q};

/// A Weyl group element: a permutation of {0..n-1}. Its SL_n representative
/// is the monomial 0/+-1 matrix with the entry of column j in row map[j];
/// the sign sits on the last column when the permutation is odd, so the
/// determinant is exactly +1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WeylPerm {
    pub map: Vec<usize>,
}

impl WeylPerm {
    pub fn identity(n: usize) -> Self {
        WeylPerm { map: (0..n).collect() }
    }

    pub fn long_element(n: usize) -> Self {
        WeylPerm { map: (0..n).rev().collect() }
    }

    pub fn from_map(map: Vec<usize>) -> Self {
        let n = map.len();
        let mut seen = vec![false; n];
        for &i in &map {
            assert!(i < n && !seen[i], "not a permutation");
            seen[i] = true;
        }
        WeylPerm { map }
    }

    pub fn n(&self) -> usize {
        self.map.len()
    }

    pub fn apply(&self, j: usize) -> usize {
        self.map[j]
    }

    /// self after other: (self*other)(j) = self(other(j)).
    pub fn compose(&self, other: &WeylPerm) -> WeylPerm {
        WeylPerm { map: other.map.iter().map(|&j| self.map[j]).collect() }
    }

    pub fn inverse(&self) -> WeylPerm {
        let mut inv = vec![0; self.n()];
        for (j, &i) in self.map.iter().enumerate() {
            inv[i] = j;
        }
        WeylPerm { map: inv }
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(j, &i)| i == j)
    }

    pub fn sign(&self) -> i64 {
        let mut inversions = 0;
        for a in 0..self.n() {
            for b in (a + 1)..self.n() {
                if self.map[a] > self.map[b] {
                    inversions += 1;
                }
            }
        }
        if inversions % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// Entries (row, col, sign) of the SL_n representative.
    pub fn rep_entries(&self) -> Vec<(usize, usize, i64)> {
        let n = self.n();
        let s = self.sign();
        (0..n)
            .map(|j| {
                let sign = if j == n - 1 { s } else { 1 };
                (self.map[j], j, sign)
            })
            .collect()
    }

    pub fn all(n: usize) -> Vec<WeylPerm> {
        let mut out = vec![];
        let mut cur = (0..n).collect::<Vec<_>>();
        permute_rec(&mut cur, 0, &mut out);
        out.sort();
        out
    }
}

fn permute_rec(cur: &mut Vec<usize>, k: usize, out: &mut Vec<WeylPerm>) {
    if k == cur.len() {
        out.push(WeylPerm { map: cur.clone() });
        return;
    }
    for i in k..cur.len() {
        cur.swap(k, i);
        permute_rec(cur, k + 1, out);
        cur.swap(k, i);
    }
}

/// A subset of the simple roots {1..n-1}, equivalently the composition of n
/// whose block boundaries sit after every position NOT in the subset.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PsiSet {
    pub n: usize,
    pub simple: BTreeSet<usize>,
}

impl PsiSet {
    pub fn new(n: usize, simple: impl IntoIterator<Item = usize>) -> Self {
        let simple: BTreeSet<usize> = simple.into_iter().collect();
        assert!(simple.iter().all(|&i| i >= 1 && i < n), "simple roots are 1..n-1");
        PsiSet { n, simple }
    }

    pub fn empty(n: usize) -> Self {
        PsiSet { n, simple: BTreeSet::new() }
    }

    pub fn full(n: usize) -> Self {
        PsiSet { n, simple: (1..n).collect() }
    }

    pub fn is_full(&self) -> bool {
        self.simple.len() == self.n - 1
    }

    pub fn is_empty_set(&self) -> bool {
        self.simple.is_empty()
    }

    pub fn from_composition(comp: &[usize]) -> Self {
        let n: usize = comp.iter().sum();
        let mut simple = BTreeSet::new();
        let mut pos = 0;
        for (k, &c) in comp.iter().enumerate() {
            assert!(c >= 1);
            for i in 1..c {
                simple.insert(pos + i);
            }
            pos += c;
            let _ = k;
        }
        PsiSet { n, simple }
    }

    pub fn composition(&self) -> Vec<usize> {
        let mut comp = vec![];
        let mut size = 0;
        for i in 1..=self.n {
            size += 1;
            if i == self.n || !self.simple.contains(&i) {
                comp.push(size);
                size = 0;
            }
        }
        comp
    }

    /// Half-open index ranges of the blocks (0-indexed).
    pub fn blocks(&self) -> Vec<std::ops::Range<usize>> {
        let mut out = vec![];
        let mut start = 0;
        for c in self.composition() {
            out.push(start..start + c);
            start += c;
        }
        out
    }

    pub fn block_of(&self, idx: usize) -> usize {
        let mut start = 0;
        for (k, c) in self.composition().iter().enumerate() {
            if idx < start + c {
                return k;
            }
            start += c;
        }
        unreachable!("index out of range")
    }

    pub fn all_subsets(n: usize) -> Vec<PsiSet> {
        let mut out = vec![];
        for mask in 0u32..(1 << (n - 1)) {
            let simple = (1..n).filter(|i| mask >> (i - 1) & 1 == 1);
            out.push(PsiSet::new(n, simple));
        }
        out
    }
}

/// An ordered partition of {0..n-1}; names a parabolic subgroup containing
/// the diagonal torus (the stabilizer of the induced partial coordinate flag).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FlagType {
    pub blocks: Vec<Vec<usize>>,
}

impl FlagType {
    /// Flag of w P_Psi w^{-1}; `opposite` gives w P_Psi^- w^{-1}.
    pub fn from_parabolic(psi: &PsiSet, w: &WeylPerm, opposite: bool) -> FlagType {
        let mut blocks: Vec<Vec<usize>> = psi
            .blocks()
            .into_iter()
            .map(|r| {
                let mut b: Vec<usize> = r.map(|i| w.apply(i)).collect();
                b.sort();
                b
            })
            .collect();
        if opposite {
            blocks.reverse();
        }
        FlagType { blocks }
    }

    pub fn n(&self) -> usize {
        self.blocks.iter().map(|b| b.len()).sum()
    }

    /// True when `self` contains `other`, i.e. the ordered partition of
    /// `self` is obtained by merging consecutive blocks of `other`.
    pub fn contains(&self, other: &FlagType) -> bool {
        let mut k = 0;
        for target in &self.blocks {
            let mut acc: Vec<usize> = vec![];
            while acc.len() < target.len() {
                if k >= other.blocks.len() {
                    return false;
                }
                acc.extend(other.blocks[k].iter().copied());
                k += 1;
            }
            acc.sort();
            if &acc != target {
                return false;
            }
        }
        k == other.blocks.len()
    }

    /// All ordered partitions of {0..n-1}.
    pub fn enumerate_all(n: usize) -> Vec<FlagType> {
        let mut out = vec![];
        for psi in PsiSet::all_subsets(n) {
            let mut seen = BTreeSet::new();
            for w in WeylPerm::all(n) {
                let f = FlagType::from_parabolic(&psi, &w, false);
                if seen.insert(f.clone()) {
                    out.push(f);
                }
            }
        }
        out
    }
}

/// Number of parabolic subgroups containing the diagonal torus and
/// conjugate to P_Psi: n! / prod(c_i!).
pub fn n_psi_count(psi: &PsiSet) -> u64 {
    let fact = |k: usize| -> u64 { (1..=k as u64).product::<u64>().max(1) };
    let mut count = fact(psi.n);
    for c in psi.composition() {
        count /= fact(c);
    }
    count
}

/// The two decidable conditions of the density equivalence for a Weyl
/// element and a standard parabolic: (i) membership of w0*w in W_Psi, and
/// (iii) the root-set inclusion (w0 w) V_Psi (w0 w)^{-1} in V_0. They are
/// provably equivalent; the pair is returned and equality is asserted.
pub fn main1_tests(w: &WeylPerm, psi: &PsiSet) -> (bool, bool) {
    let n = w.n();
    assert_eq!(n, psi.n);
    let pi = WeylPerm::long_element(n).compose(w);
    let cond_i = (0..n).all(|j| psi.block_of(pi.apply(j)) == psi.block_of(j));
    let mut cond_iii = true;
    'outer: for i in 0..n {
        for j in 0..n {
            if psi.block_of(i) < psi.block_of(j) && pi.apply(i) >= pi.apply(j) {
                cond_iii = false;
                break 'outer;
            }
        }
    }
    assert_eq!(cond_i, cond_iii, "the two conditions must agree");
    (cond_i, cond_iii)
}

/// Minimal-length (lexicographically smallest) representative of the left
/// coset w * W_Psi: values sorted increasingly inside each block segment.
pub fn coset_min_rep(w: &WeylPerm, psi: &PsiSet) -> WeylPerm {
    let mut map = w.map.clone();
    for r in psi.blocks() {
        map[r.clone()].sort();
    }
    WeylPerm { map }
}

/// All minimal-length coset representatives of W / W_Psi, lexicographic.
pub fn coset_reps(psi: &PsiSet) -> Vec<WeylPerm> {
    let n = psi.n;
    let blocks = psi.blocks();
    let mut out: Vec<WeylPerm> = vec![];
    let mut current = vec![0usize; n];
    let mut used = vec![false; n];
    distribute(&blocks, 0, &mut current, &mut used, &mut out);
    out.sort();
    out
}

fn distribute(
    blocks: &[std::ops::Range<usize>],
    b: usize,
    current: &mut Vec<usize>,
    used: &mut Vec<bool>,
    out: &mut Vec<WeylPerm>,
) {
    if b == blocks.len() {
        out.push(WeylPerm { map: current.clone() });
        return;
    }
    let n = current.len();
    let size = blocks[b].len();
    // Choose an increasing sequence of unused values for this block.
    let free: Vec<usize> = (0..n).filter(|&v| !used[v]).collect();
    let mut idx: Vec<usize> = (0..size).collect();
    loop {
        for (slot, &fi) in blocks[b].clone().zip(idx.iter()) {
            current[slot] = free[fi];
        }
        for &fi in &idx {
            used[free[fi]] = true;
        }
        distribute(blocks, b + 1, current, used, out);
        for &fi in &idx {
            used[free[fi]] = false;
        }
        // Next combination.
        let mut k = size;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            if idx[k] + (size - k) < free.len() {
                idx[k] += 1;
                for j in (k + 1)..size {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

// ---- rational cone splitting ----

fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).map(|(x, y)| x * y).fold(Q::zero(), |acc, t| acc + t)
}

fn proportional(a: &[Q], b: &[Q]) -> bool {
    for i in 0..a.len() {
        for j in (i + 1)..a.len() {
            if &a[i] * &b[j] != &a[j] * &b[i] {
                return false;
            }
        }
    }
    true
}

fn rank(vectors: &[Vec<Q>]) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let mut m: Vec<Vec<Q>> = vectors.to_vec();
    let cols = m[0].len();
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][c].is_zero()) else { continue };
        m.swap(rank, p);
        let inv = Q::one() / m[rank][c].clone();
        for r in 0..m.len() {
            if r != rank && !m[r][c].is_zero() {
                let f = &m[r][c] * &inv;
                for k in c..cols {
                    let sub = &f * &m[rank][k];
                    m[r][k] -= sub;
                }
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

/// Feasibility witness for the strict homogeneous system A w > 0 by
/// Fourier-Motzkin elimination over exact rationals.
fn strict_feasible(rows: &[Vec<Q>]) -> Option<Vec<Q>> {
    let n = rows[0].len();
    // layers[k] holds inequalities mentioning only variables 0..=k.
    let mut layers: Vec<Vec<Vec<Q>>> = vec![vec![]; n];
    let mut current: Vec<Vec<Q>> = rows.to_vec();
    for var in (0..n).rev() {
        let mut pos = vec![];
        let mut neg = vec![];
        let mut rest = vec![];
        for r in current {
            if r[var].is_positive() {
                pos.push(r);
            } else if r[var].is_negative() {
                neg.push(r);
            } else {
                rest.push(r);
            }
        }
        layers[var] = pos.clone();
        layers[var].extend(neg.clone());
        // Combine: p1 * q + (-q1) * p has no `var` component.
        for p in &pos {
            for q in &neg {
                let a = p[var].clone();
                let b = -q[var].clone();
                let mut combined: Vec<Q> = (0..n).map(|j| &a * &q[j] + &b * &p[j]).collect();
                combined[var] = Q::zero();
                if combined.iter().all(|c| c.is_zero()) {
                    return None; // derived 0 > 0
                }
                rest.push(combined);
            }
        }
        // Constant rows cannot appear in a homogeneous system except as all-zero.
        current = rest;
    }
    // Any remaining rows are all-zero contradictions (caught above).
    if !current.is_empty() {
        return None;
    }
    // Back-substitute from variable 0 upward.
    let mut w = vec![Q::zero(); n];
    for var in 0..n {
        let mut lower: Option<Q> = None; // w[var] > lower
        let mut upper: Option<Q> = None; // w[var] < upper
        let mut strict_sign: Option<bool> = None;
        for r in &layers[var] {
            let partial = (0..var).map(|j| &r[j] * &w[j]).fold(Q::zero(), |a, t| a + t);
            if r[var].is_positive() {
                let bound = -partial / r[var].clone();
                if lower.as_ref().map_or(true, |l| bound > *l) {
                    lower = Some(bound);
                }
            } else {
                let bound = -partial / r[var].clone();
                if upper.as_ref().map_or(true, |u| bound < *u) {
                    upper = Some(bound);
                }
            }
            let _ = &mut strict_sign;
        }
        w[var] = match (&lower, &upper) {
            (None, None) => Q::zero(),
            (Some(l), None) => l + Q::one(),
            (None, Some(u)) => u - Q::one(),
            (Some(l), Some(u)) => {
                if l >= u {
                    return None;
                }
                (l + u) / qz(2)
            }
        };
    }
    // Verify (guards rational edge cases in the bound bookkeeping).
    if rows.iter().all(|r| dot(r, &w).is_positive()) {
        Some(w)
    } else {
        None
    }
}

/// Splits a spanning family of pairwise non-proportional rational vectors:
/// returns an index i0 and a vector w with (w, v_i0) < 0, (w, v_i) > 0 for
/// i != i0, and a basis among the remaining vectors. The underlying lemma
/// guarantees existence; failure raises a theorem-violation alarm.
pub fn cone_split(v_list: &[Vec<Q>], v: &[Q]) -> Result<(usize, Vec<Q>)> {
    let m = v_list.len();
    let n = v.len();
    if m <= n {
        return Err(Error::HypothesisViolated(format!("need m > n, got m={} n={}", m, n)));
    }
    for vi in v_list {
        if vi.len() != n {
            return Err(Error::HypothesisViolated("dimension mismatch".into()));
        }
        if !dot(vi, v).is_positive() {
            return Err(Error::HypothesisViolated("(v_i, v) > 0 fails".into()));
        }
    }
    for i in 0..m {
        for j in (i + 1)..m {
            if proportional(&v_list[i], &v_list[j]) {
                return Err(Error::HypothesisViolated(format!(
                    "vectors {} and {} are proportional",
                    i, j
                )));
            }
        }
    }
    if rank(v_list) != n {
        return Err(Error::HypothesisViolated("vectors do not span Q^n".into()));
    }
    for i0 in 0..m {
        let remaining: Vec<Vec<Q>> = (0..m).filter(|&i| i != i0).map(|i| v_list[i].clone()).collect();
        if rank(&remaining) != n {
            continue;
        }
        let mut rows = remaining;
        rows.push(v_list[i0].iter().map(|c| -c.clone()).collect());
        if let Some(w) = strict_feasible(&rows) {
            // Exact re-verification of all three output conditions.
            debug_assert!(dot(&w, &v_list[i0]).is_negative());
            debug_assert!((0..m).filter(|&i| i != i0).all(|i| dot(&w, &v_list[i]).is_positive()));
            return Ok((i0, w));
        }
    }
    Err(Error::TheoremViolation(Alarm::NoSplitFound))
}

/// For a diagonal torus element t with entries in K and a place v, returns
/// the stable sort of indices by decreasing |t_i|_v as a Weyl element w and
/// the composition Psi grouping equal values, so that w P_Psi w^{-1}(K_v)
/// has unipotent radical contracted by conjugation by t.
pub fn horospherical_data(
    t: &crate::exactlin::MatrixK,
    v: &crate::numfield::Place,
) -> Result<(PsiSet, WeylPerm)> {
    use crate::numfield::cmp_abs_at_place;
    if !t.is_diagonal() {
        return Err(Error::Invalid("torus element must be diagonal".into()));
    }
    let n = t.n;
    let diag: Vec<crate::numfield::FieldElement> = (0..n).map(|i| t.at(i, i).clone()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| cmp_abs_at_place(&diag[b], &diag[a], v).then(a.cmp(&b)));
    let mut comp = vec![];
    let mut size = 1;
    for k in 1..n {
        if cmp_abs_at_place(&diag[order[k - 1]], &diag[order[k]], v) == std::cmp::Ordering::Equal {
            size += 1;
        } else {
            comp.push(size);
            size = 1;
        }
    }
    comp.push(size);
    Ok((PsiSet::from_composition(&comp), WeylPerm::from_map(order)))
}
