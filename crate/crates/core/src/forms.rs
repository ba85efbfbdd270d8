//! Decomposable forms at S-integral points: per-place products of linear
//! forms over K, reduction of the variable count to the number of factors,
//! the correspondence between a square form and a group element tuple,
//! density probing of the value set, the quantitative lower-bound
//! dichotomy over CM fields, and a qualitative two-place diagnostic.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Alarm, Error, Result};
use crate::exactlin::MatrixK;
use crate::numfield::{FieldElement, NumberField, Place, PlaceSet};
use crate::poly::{ratio_to_f64, Q};

#[derive(Debug, Clone)]
pub struct PlaceForms {
    /// m coefficient rows of n entries over K.
    pub rows: Vec<Vec<FieldElement>>,
    /// Scalar pulled out by normalizations; the place form is
    /// alpha * prod_i <rows_i, x>.
    pub alpha: FieldElement,
}

#[derive(Debug, Clone)]
pub struct DecomposableForm {
    pub place_set: PlaceSet,
    pub n_vars: usize,
    pub m: usize,
    pub per_place: Vec<PlaceForms>,
}

type Expansion = BTreeMap<Vec<u16>, FieldElement>;

fn rank_rows(rows: &[Vec<FieldElement>]) -> usize {
    let mut m: Vec<Vec<FieldElement>> = rows.to_vec();
    if m.is_empty() {
        return 0;
    }
    let cols = m[0].len();
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][c].is_zero()) else { continue };
        m.swap(rank, p);
        let inv = m[rank][c].inv().expect("pivot");
        for r in 0..m.len() {
            if r != rank && !m[r][c].is_zero() {
                let f = m[r][c].mul(&inv);
                for k in c..cols {
                    let s = f.mul(&m[rank][k]);
                    m[r][k] = m[r][k].sub(&s);
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

fn proportional_rows(a: &[FieldElement], b: &[FieldElement]) -> bool {
    for i in 0..a.len() {
        for j in (i + 1)..a.len() {
            if a[i].mul(&b[j]) != a[j].mul(&b[i]) {
                return false;
            }
        }
    }
    true
}

impl DecomposableForm {
    /// Validates the defining invariants: per place exactly m linearly
    /// independent rows of length n_vars, with m <= n_vars.
    pub fn new(place_set: PlaceSet, per_place_rows: Vec<Vec<Vec<FieldElement>>>) -> Result<Self> {
        if per_place_rows.len() != place_set.len() {
            return Err(Error::Invalid("one family of forms per place required".into()));
        }
        let m = per_place_rows[0].len();
        if m == 0 {
            return Err(Error::Invalid("at least one linear form required".into()));
        }
        let n_vars = per_place_rows[0][0].len();
        if m > n_vars {
            return Err(Error::Invalid(
                "more factors than variables: independent linear forms need m <= n".into(),
            ));
        }
        let field = place_set.field.clone();
        let mut per_place = vec![];
        for rows in per_place_rows {
            if rows.len() != m || rows.iter().any(|r| r.len() != n_vars) {
                return Err(Error::Invalid("inconsistent form dimensions across places".into()));
            }
            if rank_rows(&rows) != m {
                return Err(Error::Invalid("linear forms must be independent at every place".into()));
            }
            per_place.push(PlaceForms { rows, alpha: FieldElement::one(&field) });
        }
        Ok(DecomposableForm { place_set, n_vars, m, per_place })
    }

    /// Exact expansion of the place form as a polynomial over K.
    pub fn expand(&self, place_idx: usize) -> Expansion {
        let pf = &self.per_place[place_idx];
        let field = &self.place_set.field;
        let mut acc: Expansion = BTreeMap::new();
        acc.insert(vec![0u16; self.n_vars], pf.alpha.clone());
        for row in &pf.rows {
            let mut next: Expansion = BTreeMap::new();
            for (exp, coeff) in &acc {
                for (j, c) in row.iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    let mut e = exp.clone();
                    e[j] += 1;
                    let add = coeff.mul(c);
                    next.entry(e)
                        .and_modify(|cur| *cur = cur.add(&add))
                        .or_insert(add);
                }
            }
            next.retain(|_, c| !c.is_zero());
            acc = next;
        }
        let _ = field;
        acc
    }

    /// Numeric evaluation of the place form at a rational point, under the
    /// matching embedding.
    pub fn eval_place(&self, place_idx: usize, z: &[Q]) -> num_complex::Complex64 {
        let field = &self.place_set.field;
        let pf = &self.per_place[place_idx];
        let place = &self.place_set.places[place_idx];
        let lin = |row: &Vec<FieldElement>| -> FieldElement {
            let mut acc = FieldElement::zero(field);
            for (c, zj) in row.iter().zip(z) {
                acc = acc.add(&c.scale(zj));
            }
            acc
        };
        let embed = |x: &FieldElement| -> num_complex::Complex64 {
            match place {
                Place::Real(i) => num_complex::Complex64::new(field.real_value(x, *i).value, 0.0),
                Place::Complex(i) => field.complex_value_c64(x, *i),
                Place::Finite(_) => {
                    num_complex::Complex64::new(ratio_to_f64(&x.coords[0]), 0.0)
                }
            }
        };
        let mut acc = embed(&pf.alpha);
        for row in &pf.rows {
            acc *= embed(&lin(row));
        }
        acc
    }

    /// Exact rational value of the place form (degree-1 fields).
    pub fn eval_place_exact(&self, place_idx: usize, z: &[Q]) -> Q {
        assert_eq!(self.place_set.field.degree, 1);
        let pf = &self.per_place[place_idx];
        let mut acc = pf.alpha.coords[0].clone();
        for row in &pf.rows {
            let mut lin = Q::new(0.into(), 1.into());
            for (c, zj) in row.iter().zip(z) {
                lin += &c.coords[0] * zj;
            }
            acc *= lin;
        }
        acc
    }
}

/// True exactly when all place forms are proportional over K to a common
/// polynomial, decided by comparing the normalized exact expansions.
pub fn proportionality_test(f: &DecomposableForm) -> bool {
    let normalize = |e: Expansion| -> Option<Expansion> {
        let lead = e.iter().find(|(_, c)| !c.is_zero())?.1.clone();
        let inv = lead.inv().ok()?;
        Some(e.into_iter().map(|(k, c)| (k, c.mul(&inv))).collect())
    };
    let mut normalized: Option<Expansion> = None;
    for idx in 0..f.place_set.len() {
        let Some(cur) = normalize(f.expand(idx)) else { return false };
        match &normalized {
            None => normalized = Some(cur),
            Some(first) => {
                if first != &cur {
                    return false;
                }
            }
        }
    }
    true
}

/// Reduces an m-factor form in n > m variables to m variables by a small
/// random rational substitution, preserving independence at every place and
/// a designated non-proportionality witness.
pub fn reduce_to_square<R: rand::Rng>(
    f: &DecomposableForm,
    trials: u32,
    rng: &mut R,
) -> Result<DecomposableForm> {
    if f.m == f.n_vars {
        return Ok(f.clone());
    }
    let field = f.place_set.field.clone();
    // Witness: a row at place v not proportional to any row at place w.
    let mut witness: Option<(usize, usize, usize)> = None;
    'search: for v in 0..f.per_place.len() {
        for (i, row) in f.per_place[v].rows.iter().enumerate() {
            for w in 0..f.per_place.len() {
                if w == v {
                    continue;
                }
                if f.per_place[w].rows.iter().all(|r| !proportional_rows(row, r)) {
                    witness = Some((v, i, w));
                    break 'search;
                }
            }
        }
    }
    let Some((wv, wi, ww)) = witness else {
        return Err(Error::NoWitness);
    };
    for _ in 0..trials {
        // phi: K^n -> K^m with small integer entries; new row = phi * row.
        let phi: Vec<Vec<i64>> = (0..f.m)
            .map(|_| (0..f.n_vars).map(|_| rng.random_range(-3..=3)).collect())
            .collect();
        let apply = |row: &Vec<FieldElement>| -> Vec<FieldElement> {
            (0..f.m)
                .map(|k| {
                    let mut acc = FieldElement::zero(&field);
                    for (j, c) in row.iter().enumerate() {
                        if phi[k][j] != 0 {
                            acc = acc.add(&c.scale(&crate::poly::qz(phi[k][j])));
                        }
                    }
                    acc
                })
                .collect()
        };
        let new_rows: Vec<Vec<Vec<FieldElement>>> =
            f.per_place.iter().map(|pf| pf.rows.iter().map(apply).collect()).collect();
        let ok_rank = new_rows.iter().all(|rows| rank_rows(rows) == f.m);
        if !ok_rank {
            continue;
        }
        let survives = new_rows[ww]
            .iter()
            .all(|r| !proportional_rows(&new_rows[wv][wi], r));
        if !survives {
            continue;
        }
        let mut out = DecomposableForm::new(f.place_set.clone(), new_rows)?;
        for (pf_new, pf_old) in out.per_place.iter_mut().zip(&f.per_place) {
            pf_new.alpha = pf_old.alpha.clone();
        }
        return Ok(out);
    }
    Err(Error::TrialsExhausted)
}

/// Writes a square form as a per-place scalar and a tuple of SL_n matrices:
/// the first row absorbs the determinant, and the identity
/// f_v = alpha_v * prod <h_v rows, x> is re-verified by exact expansion.
pub fn form_to_group(f: &DecomposableForm) -> Result<(Vec<FieldElement>, Vec<MatrixK>)> {
    if f.m != f.n_vars {
        return Err(Error::Invalid("the form must be square; reduce it first".into()));
    }
    let field = f.place_set.field.clone();
    let mut alphas = vec![];
    let mut gs = vec![];
    for (idx, pf) in f.per_place.iter().enumerate() {
        let h = MatrixK::from_rows(&field, pf.rows.clone());
        let det = h.det();
        if det.is_zero() {
            return Err(Error::NotUnimodularizable);
        }
        let mut rows = pf.rows.clone();
        let dinv = det.inv().expect("nonzero");
        for c in rows[0].iter_mut() {
            *c = c.mul(&dinv);
        }
        let g = MatrixK::from_rows(&field, rows.clone());
        debug_assert!(g.det().is_one());
        let alpha = pf.alpha.mul(&det);
        // Exact verification: alpha * prod(normalized rows) = original form.
        let mut check = DecomposableForm {
            place_set: f.place_set.clone(),
            n_vars: f.n_vars,
            m: f.m,
            per_place: vec![PlaceForms { rows, alpha: alpha.clone() }],
        };
        check.place_set = f.place_set.clone();
        let lhs = check.expand(0);
        let rhs = f.expand(idx);
        if lhs != rhs {
            return Err(Error::Internal("normalization changed the form".into()));
        }
        alphas.push(alpha);
        gs.push(g);
    }
    Ok((alphas, gs))
}

// ---- density probing ----

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetValue {
    Real { value: f64 },
    Complex { re: f64, im: f64 },
    Padic { value: String },
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeOutcome {
    pub witness: Option<Vec<String>>,
    pub best_point: Vec<String>,
    pub best_distance: f64,
    pub candidates: usize,
    /// Emitted when the density theorem's hypotheses do not hold (two
    /// places, or a CM or undetermined coefficient field): the probe is
    /// best-effort only.
    pub warning: Option<String>,
}

fn padic_target(t: &TargetValue) -> Option<Q> {
    match t {
        TargetValue::Padic { value } => value.parse::<Q>().ok(),
        _ => None,
    }
}

/// Distance of f_v(z) to the target in the normalized metric of the place.
fn place_distance(f: &DecomposableForm, idx: usize, z: &[Q], target: &TargetValue) -> f64 {
    match (&f.place_set.places[idx], target) {
        (Place::Real(_), TargetValue::Real { value }) => {
            (f.eval_place(idx, z).re - value).abs()
        }
        (Place::Complex(_), TargetValue::Complex { re, im }) => {
            let v = f.eval_place(idx, z) - num_complex::Complex64::new(*re, *im);
            v.norm_sqr()
        }
        (Place::Finite(p), TargetValue::Padic { .. }) => {
            let t = padic_target(target).expect("validated earlier");
            let diff = f.eval_place_exact(idx, z) - t;
            if diff == Q::new(0.into(), 1.into()) {
                0.0
            } else {
                (*p as f64).powi(-crate::numfield::padic_valuation(&diff, *p) as i32)
            }
        }
        _ => f64::INFINITY,
    }
}

/// Enumerates S-integral points of coordinate height at most `height`
/// (numerators bounded by the height, denominator exponents by log_p) in a
/// deterministic order and returns the first point within every per-place
/// tolerance, or the best point found. Supported over K = Q.
pub fn density_probe(
    f: &DecomposableForm,
    targets: &[TargetValue],
    eps: &[f64],
    height: i64,
    warning: Option<String>,
) -> Result<ProbeOutcome> {
    let field: &Arc<NumberField> = &f.place_set.field;
    if field.degree != 1 {
        return Err(Error::Invalid("density probing is implemented over the rationals".into()));
    }
    if targets.len() != f.place_set.len() || eps.len() != targets.len() {
        return Err(Error::Invalid("one target and tolerance per place required".into()));
    }
    for (v, t) in f.place_set.places.iter().zip(targets) {
        let ok = matches!(
            (v, t),
            (Place::Real(_), TargetValue::Real { .. })
                | (Place::Complex(_), TargetValue::Complex { .. })
                | (Place::Finite(_), TargetValue::Padic { .. })
        );
        if !ok {
            return Err(Error::Invalid("target kind must match its place".into()));
        }
        if let TargetValue::Padic { value } = t {
            if value.parse::<Q>().is_err() {
                return Err(Error::Invalid(format!("bad p-adic target {}", value)));
            }
        }
    }
    let primes = f.place_set.finite_primes();
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

    let n = f.n_vars;
    let mut best = f64::INFINITY;
    let mut best_z: Vec<Q> = vec![Q::new(0.into(), 1.into()); n];
    let mut candidates = 0usize;
    // Order places so cheap f64 rejections happen first.
    let mut order: Vec<usize> = (0..targets.len()).collect();
    order.sort_by_key(|&i| matches!(f.place_set.places[i], Place::Finite(_)) as u8);
    for &den in &denominators {
        let dq = Q::new(den.into(), 1.into());
        let mut coords = vec![-height; n];
        loop {
            candidates += 1;
            let z: Vec<Q> = coords.iter().map(|&a| Q::new(a.into(), 1.into()) / &dq).collect();
            let mut worst: f64 = 0.0;
            let mut hit = true;
            for &i in &order {
                let d = place_distance(f, i, &z, &targets[i]);
                worst = worst.max(d / eps[i]);
                if d >= eps[i] {
                    hit = false;
                    // On a miss the remaining places only matter for the
                    // best-distance record; skip them when already worse.
                    if worst > best {
                        break;
                    }
                }
            }
            if hit {
                return Ok(ProbeOutcome {
                    witness: Some(z.iter().map(|q| q.to_string()).collect()),
                    best_point: z.iter().map(|q| q.to_string()).collect(),
                    best_distance: worst,
                    candidates,
                    warning,
                });
            }
            if worst < best {
                best = worst;
                best_z = z;
            }
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
    }
    Ok(ProbeOutcome {
        witness: None,
        best_point: best_z.iter().map(|q| q.to_string()).collect(),
        best_distance: best,
        candidates,
        warning,
    })
}

// ---- the CM lower-bound dichotomy ----

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CmOutcome {
    /// The product of normalized values clears the explicit constant.
    Artin1 { product: f64 },
    /// All place values lie on one real line through a common direction.
    Artin2 { direction_re: f64, direction_im: f64 },
    /// Neither branch holds: a theorem-violation alarm.
    Violation,
}

/// Data of a form over a totally real field F sitting inside K = F(sqrt(-d)):
/// the places of K correspond to the real embeddings of F.
#[derive(Debug, Clone)]
pub struct CmFormData {
    pub base_field: Arc<NumberField>,
    /// Totally positive element d of F.
    pub d: FieldElement,
    /// Index bound [O_K : O_F(sqrt(-d))].
    pub l: u32,
    /// Per real embedding of F: m rows of n coefficients over F.
    pub per_place_rows: Vec<Vec<Vec<FieldElement>>>,
}

impl CmFormData {
    pub fn validate(&self) -> Result<()> {
        let f = &self.base_field;
        if !f.complex_embeddings.is_empty() {
            return Err(Error::NotOverF);
        }
        if self.per_place_rows.len() != f.real_embeddings.len() {
            return Err(Error::Invalid("one form family per real embedding of F".into()));
        }
        for i in 0..f.real_embeddings.len() {
            if crate::numfield::real_sign(&self.d, i) <= 0 {
                return Err(Error::BadWitness("d must be totally positive".into()));
            }
        }
        for rows in &self.per_place_rows {
            if rank_rows(rows) != rows.len() {
                return Err(Error::Invalid("independent rows required per place".into()));
            }
        }
        Ok(())
    }

    pub fn constant(&self) -> f64 {
        let f = &self.base_field;
        let r = f.real_embeddings.len();
        let mut c = 1.0;
        for j in 0..r {
            c *= f.real_value(&self.d, j).value / (4.0 * (self.l as f64).powi(4));
        }
        c
    }
}

/// Evaluates the dichotomy at z = gamma + sqrt(-d) delta with gamma, delta
/// over O_F: either the product of normalized values meets the explicit
/// constant, or all values share a real direction. Anything else is a
/// theorem-violation alarm (and z with a vanishing value is rejected, the
/// hypothesis being f(z) invertible).
pub fn cm_bound_check(
    data: &CmFormData,
    gamma: &[FieldElement],
    delta: &[FieldElement],
) -> Result<CmOutcome> {
    let f = &data.base_field;
    let r = f.real_embeddings.len();
    let mut values = Vec::with_capacity(r);
    for j in 0..r {
        let sqrt_d = f.real_value(&data.d, j).value.sqrt();
        let mut acc = num_complex::Complex64::new(1.0, 0.0);
        for row in &data.per_place_rows[j] {
            let mut re = 0.0;
            let mut im = 0.0;
            for (c, (g, dl)) in row.iter().zip(gamma.iter().zip(delta)) {
                let cv = f.real_value(c, j).value;
                re += cv * f.real_value(g, j).value;
                im += cv * f.real_value(dl, j).value * sqrt_d;
            }
            acc *= num_complex::Complex64::new(re, im);
        }
        if acc.norm_sqr() == 0.0 {
            return Err(Error::Invalid("f(z) must be invertible at every place".into()));
        }
        values.push(acc);
    }
    let product: f64 = values.iter().map(|v| v.norm_sqr()).product();
    let c = data.constant();
    if product >= c * (1.0 - 1e-9) {
        return Ok(CmOutcome::Artin1 { product });
    }
    // Common real direction within 1e-9 relative.
    let w = values[0];
    let aligned = values.iter().all(|v| {
        let q = v / w;
        q.im.abs() <= 1e-9 * q.norm().max(1.0)
    });
    if aligned {
        let dir = w / w.norm();
        return Ok(CmOutcome::Artin2 { direction_re: dir.re, direction_im: dir.im });
    }
    Ok(CmOutcome::Violation)
}

#[derive(Debug, Clone, Serialize)]
pub struct CmScanSummary {
    pub artin1: u64,
    pub artin2: u64,
    pub violations: u64,
    pub skipped_zero: u64,
    pub constant: f64,
}

/// Exhaustive scan of z = gamma + sqrt(-d) delta over integer coordinate
/// boxes of the given height. Violations trip the alarm error.
pub fn cm_bound_scan(data: &CmFormData, height: i64, n_vars: usize) -> Result<CmScanSummary> {
    data.validate()?;
    let f = &data.base_field;
    let deg = f.degree;
    let digits = 2 * n_vars * deg;
    let mut coords = vec![-height; digits];
    let mut summary = CmScanSummary {
        artin1: 0,
        artin2: 0,
        violations: 0,
        skipped_zero: 0,
        constant: data.constant(),
    };
    // Fast path: precompute embedded rows per place.
    let r = f.real_embeddings.len();
    let rows_num: Vec<Vec<Vec<f64>>> = (0..r)
        .map(|j| {
            data.per_place_rows[j]
                .iter()
                .map(|row| row.iter().map(|c| f.real_value(c, j).value).collect())
                .collect()
        })
        .collect();
    let theta: Vec<f64> = (0..r)
        .map(|j| {
            if deg == 2 {
                f.real_value(&FieldElement::generator(f), j).value
            } else {
                0.0
            }
        })
        .collect();
    let sqrt_d: Vec<f64> = (0..r).map(|j| f.real_value(&data.d, j).value.sqrt()).collect();
    let c_const = summary.constant;
    loop {
        // gamma coords first, then delta coords.
        let mut product = 1.0f64;
        let mut values: Vec<num_complex::Complex64> = Vec::with_capacity(r);
        let mut zero = false;
        for j in 0..r {
            let mut acc = num_complex::Complex64::new(1.0, 0.0);
            for row in &rows_num[j] {
                let mut re = 0.0;
                let mut im = 0.0;
                for (v, rc) in row.iter().enumerate() {
                    let g = coords[v * deg] as f64
                        + if deg == 2 { coords[v * deg + 1] as f64 * theta[j] } else { 0.0 };
                    let doff = n_vars * deg;
                    let dl = coords[doff + v * deg] as f64
                        + if deg == 2 { coords[doff + v * deg + 1] as f64 * theta[j] } else { 0.0 };
                    re += rc * g;
                    im += rc * dl * sqrt_d[j];
                }
                acc *= num_complex::Complex64::new(re, im);
            }
            if acc.norm_sqr() == 0.0 {
                zero = true;
                break;
            }
            product *= acc.norm_sqr();
            values.push(acc);
        }
        if zero {
            summary.skipped_zero += 1;
        } else if product >= c_const * (1.0 - 1e-9) {
            summary.artin1 += 1;
        } else {
            let w = values[0];
            let aligned = values.iter().all(|v| {
                let q = v / w;
                q.im.abs() <= 1e-9 * q.norm().max(1.0)
            });
            if aligned {
                summary.artin2 += 1;
            } else {
                summary.violations += 1;
            }
        }
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
    if summary.violations > 0 {
        return Err(Error::TheoremViolation(Alarm::CmBoundViolation));
    }
    Ok(summary)
}

// ---- two-place diagnostic ----

#[derive(Debug, Clone, Serialize)]
pub struct TwoPlaceReport {
    pub values: usize,
    pub min_gap: f64,
    pub median_gap: f64,
    /// Qualitative only: countability of the closure is not decidable from
    /// a finite scan, so no assertion is attached.
    pub assertion: Option<String>,
}

/// Tabulates nonzero value vectors of a two-place form up to the height and
/// reports clustering statistics of pairwise max-metric gaps.
pub fn two_place_diagnostic(f: &DecomposableForm, height: i64) -> Result<TwoPlaceReport> {
    if f.place_set.len() != 2 {
        return Err(Error::Invalid("the diagnostic needs exactly two places".into()));
    }
    let field = &f.place_set.field;
    let deg = field.degree;
    if deg > 2 {
        return Err(Error::Invalid("enumeration supports degree at most 2".into()));
    }
    let digits = f.n_vars * deg;
    let mut coords = vec![-height; digits];
    let mut values: Vec<(f64, f64)> = vec![];
    let cap = 4000usize;
    loop {
        if coords.iter().any(|&c| c != 0) && values.len() < cap {
            let z: Vec<FieldElement> = (0..f.n_vars)
                .map(|j| {
                    let mut cs = vec![Q::new(coords[j * deg].into(), 1.into())];
                    if deg == 2 {
                        cs.push(Q::new(coords[j * deg + 1].into(), 1.into()));
                    }
                    FieldElement::new(field.clone(), cs)
                })
                .collect();
            let mut vv = [0.0f64; 2];
            let mut zero = false;
            for idx in 0..2 {
                let pf = &f.per_place[idx];
                let place = &f.place_set.places[idx];
                let mut acc = num_complex::Complex64::new(1.0, 0.0);
                let embed = |x: &FieldElement| match place {
                    Place::Real(i) => num_complex::Complex64::new(field.real_value(x, *i).value, 0.0),
                    Place::Complex(i) => field.complex_value_c64(x, *i),
                    Place::Finite(_) => num_complex::Complex64::new(ratio_to_f64(&x.coords[0]), 0.0),
                };
                acc *= embed(&pf.alpha);
                for row in &pf.rows {
                    let mut lin = FieldElement::zero(field);
                    for (c, zj) in row.iter().zip(&z) {
                        lin = lin.add(&c.mul(zj));
                    }
                    acc *= embed(&lin);
                }
                if acc.norm_sqr() == 0.0 {
                    zero = true;
                    break;
                }
                vv[idx] = if matches!(place, Place::Complex(_)) { acc.norm_sqr() } else { acc.re };
            }
            if !zero {
                values.push((vv[0], vv[1]));
            }
        }
        let mut done = true;
        for c in coords.iter_mut() {
            if *c < height {
                *c += 1;
                done = false;
                break;
            }
            *c = -height;
        }
        if done || values.len() >= cap {
            break;
        }
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12);
    let mut gaps: Vec<f64> = vec![];
    for i in 0..values.len() {
        let mut nearest = f64::INFINITY;
        for j in 0..values.len() {
            if i != j {
                let d = (values[i].0 - values[j].0).abs().max((values[i].1 - values[j].1).abs());
                nearest = nearest.min(d);
            }
        }
        if nearest.is_finite() {
            gaps.push(nearest);
        }
    }
    gaps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(TwoPlaceReport {
        values: values.len(),
        min_gap: gaps.first().copied().unwrap_or(f64::INFINITY),
        median_gap: gaps.get(gaps.len() / 2).copied().unwrap_or(f64::INFINITY),
        assertion: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numfield::{quadratic, rationals, PlaceSet};
    use crate::poly::qz;

    fn q_field() -> Arc<NumberField> {
        rationals(64)
    }

    fn fe(field: &Arc<NumberField>, v: i64) -> FieldElement {
        FieldElement::from_int(field, v)
    }

    /// f = (xy, x(x+y), y(x+y)) over Q with S = {inf, 2, 3}.
    fn fixture_three_places() -> DecomposableForm {
        let f = q_field();
        let s = PlaceSet::new(f.clone(), vec![Place::Real(0), Place::Finite(2), Place::Finite(3)])
            .unwrap();
        DecomposableForm::new(
            s,
            vec![
                vec![vec![fe(&f, 1), fe(&f, 0)], vec![fe(&f, 0), fe(&f, 1)]],
                vec![vec![fe(&f, 1), fe(&f, 0)], vec![fe(&f, 1), fe(&f, 1)]],
                vec![vec![fe(&f, 0), fe(&f, 1)], vec![fe(&f, 1), fe(&f, 1)]],
            ],
        )
        .unwrap()
    }

    #[test]
    fn proportionality_examples() {
        let f = q_field();
        let s = PlaceSet::new(f.clone(), vec![Place::Real(0), Place::Finite(2)]).unwrap();
        let same = DecomposableForm::new(
            s.clone(),
            vec![
                vec![vec![fe(&f, 1), fe(&f, 0)], vec![fe(&f, 0), fe(&f, 1)]],
                vec![vec![fe(&f, 1), fe(&f, 0)], vec![fe(&f, 0), fe(&f, 1)]],
            ],
        )
        .unwrap();
        assert!(proportionality_test(&same));

        let mut scaled = same.clone();
        scaled.per_place[0].alpha = fe(&f, 2);
        scaled.per_place[1].alpha = fe(&f, 3);
        assert!(proportionality_test(&scaled), "2xy and 3xy are proportional to xy");

        let different = DecomposableForm::new(
            s,
            vec![
                vec![vec![fe(&f, 1), fe(&f, 0)], vec![fe(&f, 0), fe(&f, 1)]],
                vec![vec![fe(&f, 1), fe(&f, 0)], vec![fe(&f, 1), fe(&f, 1)]],
            ],
        )
        .unwrap();
        assert!(!proportionality_test(&different));
    }

    #[test]
    fn form_to_group_examples() {
        let f = q_field();
        let s = PlaceSet::new(f.clone(), vec![Place::Real(0), Place::Finite(2)]).unwrap();
        // x1 x2 at both places: identity matrices, alpha 1.
        let prod = DecomposableForm::new(
            s.clone(),
            vec![
                vec![vec![fe(&f, 1), fe(&f, 0)], vec![fe(&f, 0), fe(&f, 1)]],
                vec![vec![fe(&f, 1), fe(&f, 0)], vec![fe(&f, 0), fe(&f, 1)]],
            ],
        )
        .unwrap();
        let (alphas, gs) = form_to_group(&prod).unwrap();
        assert!(alphas.iter().all(|a| a.is_one()));
        assert!(gs.iter().all(|g| g.is_identity()));

        // (x)(x+y): read-off h = [[1,0],[1,1]], alpha 1.
        let xxy = DecomposableForm::new(
            s,
            vec![
                vec![vec![fe(&f, 1), fe(&f, 0)], vec![fe(&f, 1), fe(&f, 1)]],
                vec![vec![fe(&f, 1), fe(&f, 0)], vec![fe(&f, 1), fe(&f, 1)]],
            ],
        )
        .unwrap();
        let (alphas, gs) = form_to_group(&xxy).unwrap();
        assert!(alphas[0].is_one());
        assert_eq!(gs[0], MatrixK::from_i64_rows(&f, &[vec![1, 0], vec![1, 1]]));
    }

    #[test]
    fn form_to_group_random_expansion_oracle() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let f = q_field();
        let s = PlaceSet::new(f.clone(), vec![Place::Real(0), Place::Finite(2)]).unwrap();
        let mut rng = StdRng::seed_from_u64(5);
        let mut tried = 0;
        while tried < 25 {
            let rows: Vec<Vec<Vec<FieldElement>>> = (0..2)
                .map(|_| {
                    (0..2)
                        .map(|_| (0..2).map(|_| fe(&f, rng.random_range(-4..=4))).collect())
                        .collect()
                })
                .collect();
            let Ok(form) = DecomposableForm::new(s.clone(), rows) else { continue };
            tried += 1;
            // form_to_group verifies the expansion identity internally.
            form_to_group(&form).unwrap();
        }
    }

    #[test]
    fn reduce_examples() {
        use rand::rngs::StdRng;
        use rand::SeedableRng;
        let f = q_field();
        let s = PlaceSet::new(f.clone(), vec![Place::Real(0), Place::Finite(2)]).unwrap();
        let mut rng = StdRng::seed_from_u64(11);
        // m = n already: unchanged.
        let square = DecomposableForm::new(
            s.clone(),
            vec![
                vec![vec![fe(&f, 1), fe(&f, 0)], vec![fe(&f, 0), fe(&f, 1)]],
                vec![vec![fe(&f, 1), fe(&f, 0)], vec![fe(&f, 1), fe(&f, 1)]],
            ],
        )
        .unwrap();
        let out = reduce_to_square(&square, 10, &mut rng).unwrap();
        assert_eq!(out.n_vars, 2);

        // Two forms in three variables: xy and x(x+y) embedded.
        let wide = DecomposableForm::new(
            s.clone(),
            vec![
                vec![vec![fe(&f, 1), fe(&f, 0), fe(&f, 0)], vec![fe(&f, 0), fe(&f, 1), fe(&f, 0)]],
                vec![vec![fe(&f, 1), fe(&f, 0), fe(&f, 0)], vec![vec![fe(&f, 1), fe(&f, 1), fe(&f, 0)][0].clone(), fe(&f, 1), fe(&f, 0)]],
            ],
        )
        .unwrap();
        let out = reduce_to_square(&wide, 50, &mut rng).unwrap();
        assert_eq!(out.n_vars, 2);
        assert_eq!(rank_rows(&out.per_place[0].rows), 2);
        assert_eq!(rank_rows(&out.per_place[1].rows), 2);
        assert!(!proportionality_test(&out));

        // All places proportional: no witness.
        let prop = DecomposableForm::new(
            s,
            vec![
                vec![vec![fe(&f, 1), fe(&f, 0), fe(&f, 0)], vec![fe(&f, 0), fe(&f, 1), fe(&f, 0)]],
                vec![vec![fe(&f, 2), fe(&f, 0), fe(&f, 0)], vec![fe(&f, 0), fe(&f, 3), fe(&f, 0)]],
            ],
        )
        .unwrap();
        assert!(matches!(reduce_to_square(&prop, 10, &mut rng), Err(Error::NoWitness)));
    }

    #[test]
    fn density_probe_realizable_target() {
        let form = fixture_three_places();
        // Target the exact value at z0 = (1/2, 3).
        let z0 = [crate::poly::qr(1, 2), qz(3)];
        let t_inf = form.eval_place(0, &z0).re;
        let t2 = form.eval_place_exact(1, &z0);
        let t3 = form.eval_place_exact(2, &z0);
        let targets = vec![
            TargetValue::Real { value: t_inf },
            TargetValue::Padic { value: t2.to_string() },
            TargetValue::Padic { value: t3.to_string() },
        ];
        let out = density_probe(&form, &targets, &[0.25, 0.26, 0.34], 20, None).unwrap();
        assert!(out.witness.is_some());
    }

    #[test]
    fn density_probe_zero_target() {
        let form = fixture_three_places();
        let targets = vec![
            TargetValue::Real { value: 0.0 },
            TargetValue::Padic { value: "0".into() },
            TargetValue::Padic { value: "0".into() },
        ];
        let out = density_probe(&form, &targets, &[0.25, 0.25, 0.25], 20, None).unwrap();
        assert!(out.witness.is_some(), "a rational zero exists in range");
    }

    #[test]
    fn density_probe_monotone_in_height() {
        let form = fixture_three_places();
        let targets = vec![
            TargetValue::Real { value: 0.37 },
            TargetValue::Padic { value: "1/3".into() },
            TargetValue::Padic { value: "1/2".into() },
        ];
        let eps = [0.05, 0.12, 0.16];
        let mut last = f64::INFINITY;
        for h in [5, 10, 20] {
            let out = density_probe(&form, &targets, &eps, h, None).unwrap();
            assert!(out.best_distance <= last + 1e-12);
            last = out.best_distance;
        }
    }

    #[test]
    fn cm_bound_fixture() {
        // F = Q(sqrt2) inside K = Q(sqrt2, i), d = 1, l = 1, r = 2,
        // forms xy at both places.
        let f = quadratic(2, 128).unwrap();
        let data = CmFormData {
            base_field: f.clone(),
            d: fe(&f, 1),
            l: 1,
            per_place_rows: vec![
                vec![vec![fe(&f, 1), fe(&f, 0)], vec![fe(&f, 0), fe(&f, 1)]],
                vec![vec![fe(&f, 1), fe(&f, 0)], vec![fe(&f, 0), fe(&f, 1)]],
            ],
        };
        data.validate().unwrap();
        assert!((data.constant() - 1.0 / 16.0).abs() < 1e-12);
        // z = (1, i): gamma = (1, 0), delta = (0, 1): value i at both
        // places, common direction.
        let gamma = vec![fe(&f, 1), fe(&f, 0)];
        let delta = vec![fe(&f, 0), fe(&f, 1)];
        match cm_bound_check(&data, &gamma, &delta).unwrap() {
            CmOutcome::Artin2 { direction_re, direction_im } => {
                assert!(direction_re.abs() < 1e-9 && (direction_im.abs() - 1.0).abs() < 1e-9);
            }
            // The product here is exactly 1 >= 1/16, so either branch is a
            // correct dichotomy outcome; the first branch wins.
            CmOutcome::Artin1 { product } => assert!(product >= 1.0 / 16.0),
            CmOutcome::Violation => panic!("dichotomy must hold"),
        }
    }

    #[test]
    fn cm_scan_small_is_clean() {
        let f = quadratic(2, 128).unwrap();
        let data = CmFormData {
            base_field: f.clone(),
            d: fe(&f, 1),
            l: 1,
            per_place_rows: vec![
                vec![vec![fe(&f, 1), fe(&f, 0)], vec![fe(&f, 1), fe(&f, 1)]],
                vec![vec![fe(&f, 1), fe(&f, 0)], vec![fe(&f, 1), fe(&f, 1)]],
            ],
        };
        let summary = cm_bound_scan(&data, 1, 2).unwrap();
        assert_eq!(summary.violations, 0);
        assert!(summary.artin1 + summary.artin2 > 0);
    }

    #[test]
    fn two_place_report_smoke() {
        let k = quadratic(2, 96).unwrap();
        let s = PlaceSet::new(k.clone(), vec![Place::Real(0), Place::Real(1)]).unwrap();
        let form = DecomposableForm::new(
            s,
            vec![
                vec![
                    vec![FieldElement::from_int(&k, 1), FieldElement::from_int(&k, 0)],
                    vec![FieldElement::from_int(&k, 0), FieldElement::from_int(&k, 1)],
                ],
                vec![
                    vec![FieldElement::from_int(&k, 1), FieldElement::from_int(&k, 0)],
                    vec![FieldElement::from_int(&k, 1), FieldElement::from_int(&k, 1)],
                ],
            ],
        )
        .unwrap();
        let report = two_place_diagnostic(&form, 3).unwrap();
        assert!(report.values > 10);
        assert!(report.min_gap >= 0.0);
        assert!(report.assertion.is_none());

        let empty = two_place_diagnostic(&form, 0).unwrap();
        assert_eq!(empty.values, 0);
    }
}
