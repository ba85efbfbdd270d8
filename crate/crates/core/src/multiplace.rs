//! The theory for more than two places: centralizer-partition
//! maximization over Weyl twists, homogeneous-closure and density
//! prediction for SL_n, the sequence-boundedness predicate, limit
//! representatives, and a numerical systole harness for divergence along
//! torus paths.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactlin::{big_cell_factor, MatrixK};
use crate::numfield::{CmVerdict, Place, PlaceSet};
use crate::strata::{orbit_rep, OrbitRep, ParabolicPair};
use crate::weylcomb::{PsiSet, WeylPerm};

/// A set partition of {0..n-1}: blocks sorted internally and by leading
/// element.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IndexPartition {
    pub blocks: Vec<Vec<usize>>,
}

impl IndexPartition {
    pub fn from_blocks(mut blocks: Vec<Vec<usize>>) -> Self {
        for b in &mut blocks {
            b.sort();
        }
        blocks.sort_by_key(|b| b[0]);
        IndexPartition { blocks }
    }

    pub fn singletons(n: usize) -> Self {
        IndexPartition { blocks: (0..n).map(|i| vec![i]).collect() }
    }

    pub fn n(&self) -> usize {
        self.blocks.iter().map(|b| b.len()).sum()
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_of(&self, i: usize) -> usize {
        self.blocks.iter().position(|b| b.contains(&i)).expect("index in range")
    }

    /// Dimension of the diagonal torus in SL_n commuting blockwise.
    pub fn torus_dim(&self) -> usize {
        self.block_count() - 1
    }

    /// self refines other: every block of self sits inside a block of other.
    pub fn refines(&self, other: &IndexPartition) -> bool {
        self.blocks.iter().all(|b| {
            let target = other.block_of(b[0]);
            b.iter().all(|&i| other.block_of(i) == target)
        })
    }

    /// Least upper bound in the refinement order.
    pub fn join(&self, other: &IndexPartition) -> IndexPartition {
        let n = self.n();
        let mut uf = UnionFind::new(n);
        for p in [self, other] {
            for b in &p.blocks {
                for w in b.windows(2) {
                    uf.union(w[0], w[1]);
                }
            }
        }
        uf.partition()
    }

    /// All set partitions of {0..n-1}.
    pub fn enumerate_all(n: usize) -> Vec<IndexPartition> {
        let mut out = vec![];
        let mut assign = vec![0usize; n];
        fn rec(i: usize, max_used: usize, assign: &mut Vec<usize>, out: &mut Vec<IndexPartition>) {
            let n = assign.len();
            if i == n {
                let blocks_count = max_used;
                let mut blocks = vec![vec![]; blocks_count];
                for (idx, &b) in assign.iter().enumerate() {
                    blocks[b].push(idx);
                }
                out.push(IndexPartition::from_blocks(blocks));
                return;
            }
            for b in 0..=max_used {
                assign[i] = b;
                rec(i + 1, max_used.max(b + 1), assign, out);
            }
        }
        rec(1, 1, &mut assign, &mut out);
        out
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, i: usize) -> usize {
        if self.parent[i] != i {
            let root = self.find(self.parent[i]);
            self.parent[i] = root;
        }
        self.parent[i]
    }

    fn union(&mut self, a: usize, b: usize) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }

    fn partition(&mut self) -> IndexPartition {
        let n = self.parent.len();
        let mut blocks: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for i in 0..n {
            let r = self.find(i);
            blocks.entry(r).or_default().push(i);
        }
        IndexPartition::from_blocks(blocks.into_values().collect())
    }
}

/// Partition generated by i ~ j whenever x_ij != 0 off the diagonal; a
/// diagonal torus element commutes with x exactly when it is constant on
/// the blocks, so dim Z_T(x) = block count - 1.
pub fn centralizer_partition(x: &MatrixK) -> IndexPartition {
    let n = x.n;
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        for j in 0..n {
            if i != j && !x.at(i, j).is_zero() {
                uf.union(i, j);
            }
        }
    }
    uf.partition()
}

#[derive(Debug, Clone)]
pub struct ClosurePrediction {
    pub partition: IndexPartition,
    pub omegas: Vec<WeylPerm>,
    /// (omega_1^{-1} g_r, ..., omega_{r-1}^{-1} g_r, g_r).
    pub h: Vec<MatrixK>,
    pub dense: bool,
    pub cm_guard: CmVerdict,
    /// Maximal joint torus dimension over all Weyl twists.
    pub max_torus_dim: usize,
    /// Set when every difference is monomial, i.e. the base orbit itself is
    /// closed and the block-stabilizer description degenerates.
    pub closed_orbit: bool,
}

fn zero_pattern(m: &MatrixK) -> Vec<u32> {
    (0..m.n)
        .map(|i| {
            let mut row = 0u32;
            for j in 0..m.n {
                if !m.at(i, j).is_zero() {
                    row |= 1 << j;
                }
            }
            row
        })
        .collect()
}

fn joint_blocks(patterns: &[&Vec<u32>], perms: &[&WeylPerm], n: usize) -> usize {
    let mut parent: [usize; 8] = [0, 1, 2, 3, 4, 5, 6, 7];
    fn find(parent: &mut [usize; 8], i: usize) -> usize {
        let mut i = i;
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for (pat, w) in patterns.iter().zip(perms) {
        let winv = w.inverse();
        for k in 0..n {
            let row = pat[winv.apply(k)];
            for j in 0..n {
                if j != k && row >> j & 1 == 1 {
                    let a = find(&mut parent, k);
                    let b = find(&mut parent, j);
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
    }
    (0..n).filter(|&i| find(&mut parent, i) == i).count()
}

/// Exhaustive maximization of dim of the joint diagonal centralizer of
/// (omega_i g_i g_r^{-1}) over Weyl twists omega_i. Density of the base
/// orbit is equivalent to the maximum being zero-dimensional. Only the
/// permutation part of each omega matters, so the search runs over W^(r-1)
/// with the lexicographically smallest maximizer reported.
pub fn maximize_centralizer(g: &[MatrixK], cm_guard: CmVerdict) -> Result<ClosurePrediction> {
    let r = g.len();
    if r < 3 {
        return Err(Error::Invalid("prediction needs more than two places".into()));
    }
    let n = g[0].n;
    if n > 5 || r > 4 {
        return Err(Error::SearchBudgetExceeded(format!(
            "omega search is (n!)^(r-1) = {}^{}; supported up to n = 5, r = 4",
            (1..=n).product::<usize>(),
            r - 1
        )));
    }
    let gr_inv = g[r - 1].inverse().map_err(|_| Error::Singular)?;
    let diffs: Vec<MatrixK> = g[..r - 1].iter().map(|gi| gi.mul(&gr_inv)).collect();
    let patterns: Vec<Vec<u32>> = diffs.iter().map(zero_pattern).collect();
    let perms = WeylPerm::all(n);
    let k = r - 1;
    let total: usize = perms.len().pow(k as u32);
    // Lexicographic scan over tuples, parallel over the leading index.
    let best = (0..perms.len())
        .into_par_iter()
        .map(|first| {
            let mut local_best: (usize, Vec<usize>) = (0, vec![]);
            let inner = perms.len().pow((k - 1) as u32);
            for rest in 0..inner {
                let mut idx = vec![first];
                let mut t = rest;
                for _ in 1..k {
                    idx.push(t % perms.len());
                    t /= perms.len();
                }
                // Decode in lexicographic order of the remaining digits.
                let mut digits = vec![first];
                let mut tt = rest;
                let mut stack = vec![];
                for _ in 1..k {
                    stack.push(tt % perms.len());
                    tt /= perms.len();
                }
                stack.reverse();
                digits.extend(stack);
                let chosen: Vec<&WeylPerm> = digits.iter().map(|&i| &perms[i]).collect();
                let pats: Vec<&Vec<u32>> = patterns.iter().collect();
                let blocks = joint_blocks(&pats, &chosen, n);
                if blocks > local_best.0 || (blocks == local_best.0 && local_best.1.is_empty()) {
                    local_best = (blocks, digits);
                }
                let _ = idx;
            }
            local_best
        })
        .reduce(
            || (0usize, vec![]),
            |a, b| {
                if b.0 > a.0 || (b.0 == a.0 && !b.1.is_empty() && (a.1.is_empty() || b.1 < a.1)) {
                    b
                } else {
                    a
                }
            },
        );
    let _ = total;
    let omegas: Vec<WeylPerm> = best.1.iter().map(|&i| perms[i].clone()).collect();
    // Partition of the winning tuple, recomputed exactly.
    let joined = omegas
        .iter()
        .zip(&diffs)
        .map(|(w, d)| centralizer_partition(&MatrixK::weyl(&d.field, w).mul(d)))
        .fold(IndexPartition::singletons(n), |acc, p| acc.join(&p));
    debug_assert_eq!(joined.block_count(), best.0);
    let field = g[0].field.clone();
    let mut h: Vec<MatrixK> = omegas
        .iter()
        .map(|w| {
            MatrixK::weyl(&field, w)
                .inverse()
                .expect("weyl representatives are invertible")
                .mul(&g[r - 1])
        })
        .collect();
    h.push(g[r - 1].clone());
    let closed_orbit = diffs.iter().all(|d| d.is_monomial());
    Ok(ClosurePrediction {
        dense: joined.block_count() == 1,
        max_torus_dim: joined.torus_dim(),
        partition: joined,
        omegas,
        h,
        cm_guard,
        closed_orbit,
    })
}

/// Structural data of the block-stabilizer subgroup attached to a
/// partition: dimension and the derived-part dimensions (products of
/// block special linear groups).
pub fn block_subgroup_dims(p: &IndexPartition) -> (usize, Vec<usize>) {
    let dim = p.blocks.iter().map(|b| b.len() * b.len()).sum::<usize>() - 1;
    let derived = p.blocks.iter().map(|b| b.len() * b.len() - 1).collect();
    (dim, derived)
}

// ---- sequence boundedness ----

/// Per-simple-root exponential rates of a torus sequence pair: the value of
/// |alpha(s_k)| at the first place grows like exp(k * rate1) and
/// |alpha(t_k)| at the second like exp(k * rate2).
#[derive(Debug, Clone, Serialize)]
pub struct SeqSpec {
    pub rates: Vec<(f64, f64)>,
}

/// Boundedness of (s_k, t_k, e, ..., e) pi(g) for a sequence matching the
/// hypotheses: true iff g1 g2^{-1} lies in V_Psi^- P_Psi (exact test) and
/// every simple root has pinched product of rates.
pub fn prop_bounded(g1: &MatrixK, g2: &MatrixK, psi: &PsiSet, spec: &SeqSpec) -> Result<bool> {
    let n = g1.n;
    if spec.rates.len() != n - 1 {
        return Err(Error::SpecViolatesHypotheses(format!(
            "need one rate pair per simple root ({}), got {}",
            n - 1,
            spec.rates.len()
        )));
    }
    for (alpha, &(a, b)) in spec.rates.iter().enumerate() {
        let root_index = alpha + 1;
        if a < 0.0 {
            return Err(Error::SpecViolatesHypotheses(format!(
                "|alpha_{}(s)| must stay bounded below at the first place",
                root_index
            )));
        }
        if psi.simple.contains(&root_index) {
            if b.abs() > 1e-12 {
                return Err(Error::SpecViolatesHypotheses(format!(
                    "alpha_{} lies in Psi so |alpha(t)| must stay pinched",
                    root_index
                )));
            }
        } else if b >= 0.0 {
            return Err(Error::SpecViolatesHypotheses(format!(
                "alpha_{} lies off Psi so |alpha(t)| must tend to zero",
                root_index
            )));
        }
    }
    let diff = g1.mul(&g2.inverse().map_err(|_| Error::Singular)?);
    let in_cell = big_cell_factor(&diff, psi).is_some();
    let pinched = spec.rates.iter().all(|&(a, b)| (a + b).abs() < 1e-12);
    Ok(in_cell && pinched)
}

/// Limit representative along a converging torus sequence: the limit lies
/// on the orbit attached to the admissible pair, modulo the torus factors.
pub fn limit_representative(
    g1: &MatrixK,
    g2: &MatrixK,
    w1: &WeylPerm,
    w2: &WeylPerm,
    psi: &PsiSet,
) -> Result<OrbitRep> {
    let pair = ParabolicPair::new(w1, psi.clone(), w2);
    orbit_rep(g1, g2, &pair)
}

// ---- systole harness ----

/// A torus path in log coordinates: rates[v][i] is the per-step log rate of
/// the normalized scaling applied to coordinate i at place v. Rows must sum
/// to zero (determinant one per place).
#[derive(Debug, Clone, Serialize)]
pub struct TorusPath {
    pub rates: Vec<Vec<f64>>,
}

impl TorusPath {
    pub fn validate(&self, r: usize, n: usize) -> Result<()> {
        if self.rates.len() != r {
            return Err(Error::Invalid("one rate row per place required".into()));
        }
        for row in &self.rates {
            if row.len() != n {
                return Err(Error::Invalid("one rate per coordinate required".into()));
            }
            if row.iter().sum::<f64>().abs() > 1e-9 {
                return Err(Error::Invalid("rates must sum to zero per place".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SystoleReport {
    pub step: usize,
    pub parameter: f64,
    pub systole: f64,
    pub argmin: Vec<String>,
    pub search_height: i64,
}

enum PlaceData {
    Real { m: Vec<f64>, theta: f64 },
    Complex { m: Vec<num_complex::Complex64>, theta: num_complex::Complex64 },
    /// K = Q only: integer matrix with a common denominator for exact
    /// p-adic evaluation.
    Finite { p: u64, m_num: Vec<i128>, m_den: i128 },
}

fn vp_i128(mut x: i128, p: u64) -> i64 {
    debug_assert!(x != 0);
    let p = p as i128;
    let mut v = 0;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    v
}

/// Shortest-vector scan of the module t(s) g O^n under the max-over-places
/// normalized norm, for each sampled path parameter. Enumerates candidate
/// vectors of coordinate height at most `height` (numerators bounded by the
/// height, denominator exponents by log_p of the height) and reports the
/// minimum with its minimizer; a decreasing sequence witnesses divergence.
pub fn systole_scan(
    s: &PlaceSet,
    g: &[MatrixK],
    path: &TorusPath,
    params: &[f64],
    height: i64,
    budget: usize,
) -> Result<Vec<SystoleReport>> {
    let r = s.len();
    let n = g[0].n;
    if g.len() != r {
        return Err(Error::Invalid("one matrix per place required".into()));
    }
    path.validate(r, n)?;
    let field = &s.field;
    let degree = field.degree;
    if degree > 2 {
        return Err(Error::Invalid("systole enumeration supports degree at most 2".into()));
    }
    let primes = s.finite_primes();
    let gen_elt = if degree == 2 { Some(crate::numfield::FieldElement::generator(field)) } else { None };
    let places: Vec<PlaceData> = s
        .places
        .iter()
        .zip(g)
        .map(|(v, gv)| match v {
            Place::Real(i) => PlaceData::Real {
                m: gv.entries.iter().map(|e| field.real_value(e, *i).value).collect(),
                theta: gen_elt.as_ref().map_or(0.0, |t| field.real_value(t, *i).value),
            },
            Place::Complex(i) => PlaceData::Complex {
                m: gv.entries.iter().map(|e| field.complex_value_c64(e, *i)).collect(),
                theta: gen_elt
                    .as_ref()
                    .map_or(num_complex::Complex64::new(0.0, 0.0), |t| field.complex_value_c64(t, *i)),
            },
            Place::Finite(p) => {
                // Degree 1: entries are plain rationals; clear denominators.
                let mut den: num_bigint::BigInt = 1.into();
                for e in &gv.entries {
                    den = num_integer::Integer::lcm(&den, e.coords[0].denom());
                }
                let m_num: Vec<i128> = gv
                    .entries
                    .iter()
                    .map(|e| {
                        let v = &e.coords[0] * crate::poly::Q::from_integer(den.clone());
                        i128::try_from(v.to_integer()).expect("desk-scale entries")
                    })
                    .collect();
                PlaceData::Finite {
                    p: *p,
                    m_num,
                    m_den: i128::try_from(den).expect("desk-scale denominator"),
                }
            }
        })
        .collect();

    // Shared denominators over the finite primes (numerator-height bounded).
    let mut denominators: Vec<i64> = vec![1];
    for &p in &primes {
        let mut extended = vec![];
        for &d in &denominators {
            let mut cur = d;
            while cur.checked_mul(p as i64).map_or(false, |v| v <= height) {
                cur *= p as i64;
                extended.push(cur);
            }
        }
        denominators.extend(extended);
    }
    denominators.sort();
    denominators.dedup();

    let mut reports = vec![];
    for (step, &param) in params.iter().enumerate() {
        let scales: Vec<Vec<f64>> = path
            .rates
            .iter()
            .map(|row| row.iter().map(|&rate| (param * rate).exp()).collect())
            .collect();
        let mut best = f64::INFINITY;
        let mut best_arg: Vec<String> = vec![];
        let mut visited = 0usize;
        let digits = n * degree;
        let mut coords = vec![-height; digits];
        loop {
            let nonzero = coords.iter().any(|&c| c != 0);
            // Sign symmetry: keep representatives whose first nonzero is positive.
            let canonical = coords.iter().find(|&&c| c != 0).map_or(false, |&c| c > 0);
            if nonzero && canonical {
                for &den in &denominators {
                    visited += 1;
                    if visited > budget {
                        return Err(Error::BudgetExceeded(format!(
                            "systole step {} exceeded {} candidates",
                            step, budget
                        )));
                    }
                    let value = candidate_norm(&coords, den, n, degree, &places, &scales, best);
                    if value < best {
                        best = value;
                        best_arg = render_vector(&coords, den, n, degree);
                    }
                }
            }
            // Odometer increment over [-height, height]^digits.
            let mut done = true;
            for c in coords.iter_mut() {
                if *c < height {
                    *c += 1;
                    done = false;
                    break;
                }
                *c = -height;
            }
            if done {
                break;
            }
        }
        reports.push(SystoleReport {
            step,
            parameter: param,
            systole: best,
            argmin: best_arg,
            search_height: height,
        });
    }
    Ok(reports)
}

fn candidate_norm(
    coords: &[i64],
    den: i64,
    n: usize,
    degree: usize,
    places: &[PlaceData],
    scales: &[Vec<f64>],
    prune_at: f64,
) -> f64 {
    let mut norm = 0.0f64;
    for (place, scale) in places.iter().zip(scales) {
        match place {
            PlaceData::Real { m, theta } => {
                for i in 0..n {
                    let mut acc = 0.0;
                    for j in 0..n {
                        let mut zj = coords[j * degree] as f64;
                        if degree == 2 {
                            zj += coords[j * degree + 1] as f64 * theta;
                        }
                        acc += m[i * n + j] * zj;
                    }
                    let v = (acc / den as f64).abs() * scale[i];
                    if v > norm {
                        norm = v;
                        if norm >= prune_at {
                            return f64::INFINITY;
                        }
                    }
                }
            }
            PlaceData::Complex { m, theta } => {
                for i in 0..n {
                    let mut acc = num_complex::Complex64::new(0.0, 0.0);
                    for j in 0..n {
                        let mut zj = num_complex::Complex64::new(coords[j * degree] as f64, 0.0);
                        if degree == 2 {
                            zj += theta * coords[j * degree + 1] as f64;
                        }
                        acc += m[i * n + j] * zj;
                    }
                    // Normalized value at a complex place: squared modulus.
                    let v = acc.norm_sqr() / (den as f64 * den as f64) * scale[i];
                    if v > norm {
                        norm = v;
                        if norm >= prune_at {
                            return f64::INFINITY;
                        }
                    }
                }
            }
            PlaceData::Finite { p, m_num, m_den } => {
                for i in 0..n {
                    let mut num: i128 = 0;
                    for j in 0..n {
                        num += m_num[i * n + j] * coords[j] as i128;
                    }
                    let v = if num == 0 {
                        0.0
                    } else {
                        let val = vp_i128(num, *p)
                            - vp_i128(*m_den, *p).max(0)
                            - vp_i128(den as i128, *p);
                        (*p as f64).powi(-val as i32) * scale[i]
                    };
                    if v > norm {
                        norm = v;
                        if norm >= prune_at {
                            return f64::INFINITY;
                        }
                    }
                }
            }
        }
    }
    norm
}

fn render_vector(coords: &[i64], den: i64, n: usize, degree: usize) -> Vec<String> {
    (0..n)
        .map(|j| {
            let mut s = coords[j * degree].to_string();
            if degree == 2 && coords[j * degree + 1] != 0 {
                s = format!("{}{}{}t", s, if coords[j * degree + 1] >= 0 { "+" } else { "" }, coords[j * degree + 1]);
            }
            if den != 1 {
                s = format!("({})/{}", s, den);
            }
            s
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numfield::{quadratic, rationals, PlaceSet};

    #[test]
    fn partition_lattice_axioms() {
        for n in 2..=5 {
            let all = IndexPartition::enumerate_all(n);
            for a in &all {
                assert!(a.refines(a));
                for b in &all {
                    let j = a.join(b);
                    assert!(a.refines(&j) && b.refines(&j));
                    assert_eq!(j, b.join(a));
                    for c in &all {
                        if a.refines(c) && b.refines(c) {
                            assert!(j.refines(c), "join is the least upper bound");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn centralizer_examples() {
        let f = rationals(64);
        let id = MatrixK::identity(&f, 3);
        let p = centralizer_partition(&id);
        assert_eq!(p.block_count(), 3);
        assert_eq!(p.torus_dim(), 2);

        let dense = MatrixK::from_i64_rows(&f, &[vec![1, 1, 1], vec![1, 1, 1], vec![1, 1, 1]]);
        assert_eq!(centralizer_partition(&dense).block_count(), 1);

        let block = MatrixK::from_i64_rows(
            &f,
            &[vec![1, 1, 0, 0], vec![1, 2, 0, 0], vec![0, 0, 1, 1], vec![0, 0, 1, 2]],
        );
        let p = centralizer_partition(&block);
        assert_eq!(p.blocks, vec![vec![0, 1], vec![2, 3]]);
        assert_eq!(p.torus_dim(), 1);
    }

    /// Exact oracle: dim of diagonal solutions of t x = x t equals the
    /// block count minus one.
    fn centralizer_dim_oracle(x: &MatrixK) -> usize {
        let n = x.n;
        // Equivalence forced by t_i = t_j for nonzero x_ij; count classes.
        let mut classes: Vec<usize> = (0..n).collect();
        loop {
            let mut changed = false;
            for i in 0..n {
                for j in 0..n {
                    if i != j && !x.at(i, j).is_zero() && classes[i] != classes[j] {
                        let m = classes[i].min(classes[j]);
                        classes[i] = m;
                        classes[j] = m;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let mut distinct: Vec<usize> = classes.clone();
        distinct.sort();
        distinct.dedup();
        distinct.len() - 1
    }

    #[test]
    fn centralizer_matches_exact_solver() {
        use rand::rngs::StdRng;
        use rand::SeedableRng;
        let f = rationals(64);
        let mut rng = StdRng::seed_from_u64(77);
        for _ in 0..100 {
            let x = crate::exactlin::random_sl(&f, 4, &mut rng, 5, 2);
            let p = centralizer_partition(&x);
            assert_eq!(p.torus_dim(), centralizer_dim_oracle(&x));
        }
    }

    #[test]
    fn maximize_block_fixture() {
        let f = rationals(64);
        let g1 = MatrixK::from_i64_rows(
            &f,
            &[vec![1, 1, 0, 0], vec![1, 2, 0, 0], vec![0, 0, 1, 1], vec![0, 0, 1, 2]],
        );
        let e = MatrixK::identity(&f, 4);
        let pred = maximize_centralizer(&[g1, e.clone(), e], CmVerdict::No).unwrap();
        assert_eq!(pred.partition.blocks, vec![vec![0, 1], vec![2, 3]]);
        assert!(!pred.dense);
        assert_eq!(pred.max_torus_dim, 1);
        let (dim, derived) = block_subgroup_dims(&pred.partition);
        assert_eq!(dim, 7);
        assert_eq!(derived, vec![3, 3]);
    }

    #[test]
    fn maximize_dense_fixture() {
        let f = rationals(64);
        let g1 = MatrixK::from_i64_rows(&f, &[vec![1, 1], vec![1, 2]]);
        let g2 = MatrixK::from_i64_rows(&f, &[vec![2, 1], vec![1, 1]]);
        let e = MatrixK::identity(&f, 2);
        let pred = maximize_centralizer(&[g1, g2, e], CmVerdict::No).unwrap();
        assert!(pred.dense);
        assert_eq!(pred.max_torus_dim, 0);
        assert!(!pred.closed_orbit);
    }

    #[test]
    fn maximize_identity_is_degenerate() {
        let f = rationals(64);
        let e = MatrixK::identity(&f, 3);
        let pred = maximize_centralizer(&[e.clone(), e.clone(), e], CmVerdict::No).unwrap();
        assert!(!pred.dense);
        assert!(pred.closed_orbit);
        assert_eq!(pred.max_torus_dim, 2);
    }

    #[test]
    fn maximize_invariant_under_monomial_translation() {
        use rand::rngs::StdRng;
        use rand::SeedableRng;
        let f = rationals(64);
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..10 {
            let g1 = crate::exactlin::random_sl(&f, 3, &mut rng, 5, 2);
            let g2 = crate::exactlin::random_sl(&f, 3, &mut rng, 5, 2);
            let e = MatrixK::identity(&f, 3);
            let base = maximize_centralizer(&[g1.clone(), g2.clone(), e.clone()], CmVerdict::No).unwrap();
            for w in crate::weylcomb::WeylPerm::all(3).into_iter().take(3) {
                let wm = MatrixK::weyl(&f, &w);
                let moved =
                    maximize_centralizer(&[wm.mul(&g1), g2.clone(), e.clone()], CmVerdict::No).unwrap();
                assert_eq!(base.partition, moved.partition);
                assert_eq!(base.dense, moved.dense);
            }
        }
    }

    #[test]
    fn bounded_predicate_examples() {
        let f = rationals(64);
        let e = MatrixK::identity(&f, 2);
        let psi = PsiSet::empty(2);
        // Pinched product, identity difference: bounded.
        let spec = SeqSpec { rates: vec![(1.0, -1.0)] };
        assert!(prop_bounded(&e, &e, &psi, &spec).unwrap());
        // Long-element difference: the leading minor vanishes.
        let w0 = MatrixK::from_i64_rows(&f, &[vec![0, -1], vec![1, 0]]);
        assert!(!prop_bounded(&w0, &e, &psi, &spec).unwrap());
        // Product escaping to infinity: unbounded.
        let g = MatrixK::from_i64_rows(&f, &[vec![1, 1], vec![1, 2]]);
        let spec_up = SeqSpec { rates: vec![(2.0, -1.0)] };
        assert!(!prop_bounded(&g, &e, &psi, &spec_up).unwrap());
        // Hypothesis violations are rejected.
        let bad = SeqSpec { rates: vec![(-1.0, -1.0)] };
        assert!(matches!(
            prop_bounded(&g, &e, &psi, &bad),
            Err(Error::SpecViolatesHypotheses(_))
        ));
    }

    #[test]
    fn limit_rep_delegates() {
        let f = quadratic(2, 96).unwrap();
        let g1 = MatrixK::from_i64_rows(&f, &[vec![1, 1], vec![1, 2]]);
        let g2 = MatrixK::identity(&f, 2);
        let e = WeylPerm::identity(2);
        let rep = limit_representative(&g1, &g2, &e, &e, &PsiSet::empty(2)).unwrap();
        assert_eq!(rep.left_factor, MatrixK::from_i64_rows(&f, &[vec![1, 0], vec![-1, 1]]));
    }

    #[test]
    fn systole_hyperbolic_flow() {
        let q = rationals(64);
        let s = PlaceSet::new(q.clone(), vec![Place::Real(0)]).unwrap();
        let e = MatrixK::identity(&q, 2);
        let path = TorusPath { rates: vec![vec![1.0, -1.0]] };
        let reports =
            systole_scan(&s, &[e], &path, &[1.0, 2.0, 3.0], 1000, 50_000_000).unwrap();
        for (k, rep) in reports.iter().enumerate() {
            let sexp = (k + 1) as f64;
            assert!((rep.systole - (-sexp).exp()).abs() < 1e-9, "systole {}", rep.systole);
        }
        // Monotone in the height: growing the box never increases the value.
        let small = systole_scan(&s, &[MatrixK::identity(&q, 2)], &path, &[2.0], 10, 1_000_000).unwrap();
        assert!(reports[1].systole <= small[0].systole + 1e-15);
    }

    #[test]
    fn systole_standard_lattice() {
        let q = rationals(64);
        let s = PlaceSet::new(q.clone(), vec![Place::Real(0)]).unwrap();
        let e = MatrixK::identity(&q, 2);
        let path = TorusPath { rates: vec![vec![0.0, 0.0]] };
        let reports = systole_scan(&s, &[e], &path, &[0.0], 50, 1_000_000).unwrap();
        assert!((reports[0].systole - 1.0).abs() < 1e-12);
    }

    #[test]
    fn systole_s_unit_path_decay() {
        // SL_2 over Z[1/6], expansion applied at the real place only; the
        // direct enumeration shows power-of-two decay with exponent ~ s/3.
        let q = rationals(64);
        let s = PlaceSet::new(
            q.clone(),
            vec![Place::Real(0), Place::Finite(2), Place::Finite(3)],
        )
        .unwrap();
        let e = MatrixK::identity(&q, 2);
        let ln2 = 2f64.ln();
        let path = TorusPath {
            rates: vec![vec![ln2, -ln2], vec![0.0, 0.0], vec![0.0, 0.0]],
        };
        let reports = systole_scan(
            &s,
            &[e.clone(), e.clone(), e],
            &path,
            &[0.0, 3.0, 6.0, 9.0],
            100,
            50_000_000,
        )
        .unwrap();
        for w in reports.windows(2) {
            assert!(w[1].systole <= w[0].systole + 1e-12, "decay along the path");
        }
        // Continuous optimum is 2^{-s/3}; the integer-exponent minimizer at
        // s = 9 is z = (0, 72) with value 9/64.
        let s9 = reports[3].systole;
        assert!(s9 <= 9.0 / 64.0 + 1e-9, "systole at s=9 is {}", s9);
        assert!(reports[0].systole >= 0.999, "unit ball of the standard module");
    }

    #[test]
    fn systole_monotone_in_height() {
        let q = rationals(64);
        let s = PlaceSet::new(q.clone(), vec![Place::Real(0), Place::Finite(2)]).unwrap();
        let g = MatrixK::from_rational_rows(
            &q,
            &[
                vec![crate::poly::qr(1, 2), crate::poly::qz(1)],
                vec![crate::poly::qz(1), crate::poly::qz(4)],
            ],
        );
        assert!(g.det().is_one());
        let path = TorusPath { rates: vec![vec![0.7, -0.7], vec![0.0, 0.0]] };
        let mut last = f64::INFINITY;
        for h in [2, 4, 8, 16] {
            let rep = systole_scan(&s, &[g.clone(), g.clone()], &path, &[1.0], h, 10_000_000)
                .unwrap();
            assert!(rep[0].systole <= last + 1e-15);
            last = rep[0].systole;
        }
    }

    #[test]
    fn systole_budget_guard() {
        let q = rationals(64);
        let s = PlaceSet::new(q.clone(), vec![Place::Real(0)]).unwrap();
        let e = MatrixK::identity(&q, 2);
        let path = TorusPath { rates: vec![vec![1.0, -1.0]] };
        assert!(matches!(
            systole_scan(&s, &[e], &path, &[1.0], 1000, 100),
            Err(Error::BudgetExceeded(_))
        ));
    }
}
