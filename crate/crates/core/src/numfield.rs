//! Exact arithmetic in a number field K = Q[x]/(m(x)), its archimedean
//! embeddings, and normalized valuations for a place set S.
//!
//! Elements carry exact rational coordinates in the power basis; all
//! logical decisions (equality, invertibility, signs through embeddings)
//! are exact. Embeddings are certified enclosures: real roots as rational
//! intervals, complex pairs as dyadic disks. A complex place evaluates
//! |x|_v as the square of the complex absolute value, a real place as the
//! absolute value, and a finite place p (only over K = Q) as p^(-v_p(x)).

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::dyadic::{eval_poly, poly_coeffs_dyadic, CDyadic, ComplexEnclosure};
use crate::error::{Error, Result};
use crate::poly::{self, Poly, Q};

#[derive(Debug, Clone)]
pub struct NumberField {
    pub degree: usize,
    pub minpoly: Poly,
    pub real_embeddings: Vec<(Q, Q)>,
    pub complex_embeddings: Vec<ComplexEnclosure>,
    pub precision_bits: u32,
    /// Full irreducibility is certified only up to degree 4; above that the
    /// field is accepted after squarefreeness and rational-root checks.
    pub irreducibility_verified: bool,
    pub integral_basis: Option<Vec<Vec<Q>>>,
}

impl PartialEq for NumberField {
    fn eq(&self, other: &Self) -> bool {
        self.minpoly == other.minpoly
    }
}

pub fn nf_create(minpoly: Vec<Q>, precision_bits: u32) -> Result<Arc<NumberField>> {
    nf_create_with_basis(minpoly, precision_bits, None)
}

pub fn nf_create_with_basis(
    minpoly: Vec<Q>,
    precision_bits: u32,
    integral_basis: Option<Vec<Vec<Q>>>,
) -> Result<Arc<NumberField>> {
    let p = Poly::new(minpoly);
    if p.deg() < 1 {
        return Err(Error::ConfigInvalid("minimal polynomial must have degree >= 1".into()));
    }
    if !p.is_monic() {
        return Err(Error::NotMonic);
    }
    let deg = p.deg() as usize;
    if !p.is_squarefree() {
        return Err(Error::Reducible("polynomial is not squarefree".into()));
    }
    if deg >= 2 {
        let roots = poly::rational_roots(&p);
        if !roots.is_empty() {
            return Err(Error::Reducible(format!("rational root {} found", roots[0])));
        }
    }
    let mut verified = deg <= 3;
    if deg == 4 {
        if poly::quartic_quadratic_factors(&p).is_some() {
            return Err(Error::Reducible("quartic splits into two rational quadratics".into()));
        }
        verified = true;
    }
    let roots = crate::dyadic::isolate_roots(&p, precision_bits)?;
    debug_assert_eq!(roots.real.len() + 2 * roots.complex.len(), deg);
    if deg > 4 {
        verified = false;
    }
    Ok(Arc::new(NumberField {
        degree: deg,
        minpoly: p,
        real_embeddings: roots.real,
        complex_embeddings: roots.complex,
        precision_bits,
        irreducibility_verified: verified,
        integral_basis,
    }))
}

/// The rational field as a degree-1 "extension".
pub fn rationals(precision_bits: u32) -> Arc<NumberField> {
    nf_create(vec![Q::zero(), Q::one()], precision_bits).expect("x is a valid minimal polynomial")
}

/// Q(sqrt(d)) for a nonsquare integer d.
pub fn quadratic(d: i64, precision_bits: u32) -> Result<Arc<NumberField>> {
    nf_create(vec![poly::qz(-d), Q::zero(), Q::one()], precision_bits)
}

#[derive(Clone, PartialEq)]
pub struct FieldElement {
    pub field: Arc<NumberField>,
    pub coords: Vec<Q>,
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.coords.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", "))
    }
}

impl FieldElement {
    pub fn new(field: Arc<NumberField>, mut coords: Vec<Q>) -> Self {
        assert!(coords.len() <= field.degree, "coordinate vector longer than the degree");
        coords.resize(field.degree, Q::zero());
        FieldElement { field, coords }
    }

    pub fn zero(field: &Arc<NumberField>) -> Self {
        FieldElement::new(field.clone(), vec![])
    }

    pub fn one(field: &Arc<NumberField>) -> Self {
        FieldElement::new(field.clone(), vec![Q::one()])
    }

    pub fn from_int(field: &Arc<NumberField>, n: i64) -> Self {
        FieldElement::new(field.clone(), vec![poly::qz(n)])
    }

    pub fn from_ratio(field: &Arc<NumberField>, q: Q) -> Self {
        FieldElement::new(field.clone(), vec![q])
    }

    pub fn generator(field: &Arc<NumberField>) -> Self {
        assert!(field.degree >= 2, "the rational field has no generator");
        FieldElement::new(field.clone(), vec![Q::zero(), Q::one()])
    }

    pub fn from_i64_coords(field: &Arc<NumberField>, coords: &[i64]) -> Self {
        FieldElement::new(field.clone(), coords.iter().map(|&c| poly::qz(c)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.coords[0].is_one() && self.coords[1..].iter().all(|c| c.is_zero())
    }

    pub fn is_rational(&self) -> bool {
        self.coords[1..].iter().all(|c| c.is_zero())
    }

    pub fn as_poly(&self) -> Poly {
        Poly::new(self.coords.clone())
    }

    fn same_field(&self, other: &FieldElement) {
        assert!(self.field == other.field, "elements of different fields");
    }

    pub fn add(&self, other: &FieldElement) -> FieldElement {
        self.same_field(other);
        FieldElement::new(
            self.field.clone(),
            self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect(),
        )
    }

    pub fn sub(&self, other: &FieldElement) -> FieldElement {
        self.same_field(other);
        FieldElement::new(
            self.field.clone(),
            self.coords.iter().zip(&other.coords).map(|(a, b)| a - b).collect(),
        )
    }

    pub fn neg(&self) -> FieldElement {
        FieldElement::new(self.field.clone(), self.coords.iter().map(|c| -c.clone()).collect())
    }

    pub fn mul(&self, other: &FieldElement) -> FieldElement {
        self.same_field(other);
        let prod = self.as_poly().mul(&other.as_poly()).rem(&self.field.minpoly);
        FieldElement::new(self.field.clone(), prod.coeffs)
    }

    pub fn scale(&self, c: &Q) -> FieldElement {
        FieldElement::new(self.field.clone(), self.coords.iter().map(|a| a * c).collect())
    }

    pub fn inv(&self) -> Result<FieldElement> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let (g, s, _t) = self.as_poly().ext_gcd(&self.field.minpoly);
        if g.deg() != 0 {
            // Only possible when the modulus is reducible (unverified high degree).
            return Err(Error::Reducible(
                "element shares a factor with the modulus; the field is not a field".into(),
            ));
        }
        let s = s.rem(&self.field.minpoly);
        Ok(FieldElement::new(self.field.clone(), s.coeffs))
    }

    pub fn div(&self, other: &FieldElement) -> Result<FieldElement> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn pow(&self, k: i64) -> Result<FieldElement> {
        let mut base = if k < 0 { self.inv()? } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = FieldElement::one(&self.field);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        Ok(acc)
    }

    /// Exact field norm N_{K/Q} via the multiplication matrix determinant.
    pub fn norm(&self) -> Q {
        let n = self.field.degree;
        if n == 1 {
            return self.coords[0].clone();
        }
        // Columns: coordinates of x * theta^j.
        let mut cols = Vec::with_capacity(n);
        let mut cur = self.clone();
        cols.push(cur.coords.clone());
        for _ in 1..n {
            cur = cur.mul(&FieldElement::generator(&self.field));
            cols.push(cur.coords.clone());
        }
        // Determinant by exact elimination.
        let mut m: Vec<Vec<Q>> = (0..n).map(|i| (0..n).map(|j| cols[j][i].clone()).collect()).collect();
        let mut det = Q::one();
        for col in 0..n {
            let Some(piv) = (col..n).find(|&r| !m[r][col].is_zero()) else {
                return Q::zero();
            };
            if piv != col {
                m.swap(piv, col);
                det = -det;
            }
            det *= &m[col][col];
            let inv = Q::one() / m[col][col].clone();
            for r in (col + 1)..n {
                if m[r][col].is_zero() {
                    continue;
                }
                let f = &m[r][col] * &inv;
                for c in col..n {
                    let sub = &f * &m[col][c];
                    m[r][c] -= sub;
                }
            }
        }
        det
    }

    /// All power-basis coordinates are integers.
    pub fn is_integral(&self) -> bool {
        self.coords.iter().all(|c| c.denom().is_one())
    }

    /// Coordinates are integral away from the given primes.
    pub fn is_integral_outside(&self, primes: &[u64]) -> bool {
        self.coords.iter().all(|c| {
            let mut d = c.denom().magnitude().clone();
            for &p in primes {
                let bp = num_bigint::BigUint::from(p);
                while (&d % &bp).is_zero() {
                    d /= &bp;
                }
            }
            d.is_one()
        })
    }
}

pub fn fe_arith(a: &FieldElement, b: &FieldElement, op: ArithOp) -> Result<FieldElement> {
    match op {
        ArithOp::Add => Ok(a.add(b)),
        ArithOp::Sub => Ok(a.sub(b)),
        ArithOp::Mul => Ok(a.mul(b)),
        ArithOp::Div => a.div(b),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

// ---- places ----

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Place {
    /// Index into the field's real embeddings.
    Real(usize),
    /// Index into the field's complex-conjugate pairs.
    Complex(usize),
    /// Rational prime; permitted only when the degree is 1.
    Finite(u64),
}

impl Place {
    pub fn is_archimedean(&self) -> bool {
        !matches!(self, Place::Finite(_))
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Real(i) => write!(f, "real{}", i),
            Place::Complex(i) => write!(f, "complex{}", i),
            Place::Finite(p) => write!(f, "p{}", p),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlaceSet {
    pub field: Arc<NumberField>,
    pub places: Vec<Place>,
    pub ring_label: String,
}

impl PlaceSet {
    /// Validates that S contains every archimedean place exactly once, that
    /// places are pairwise distinct, and that finite places only appear over Q.
    pub fn new(field: Arc<NumberField>, places: Vec<Place>) -> Result<PlaceSet> {
        let mut reals = vec![false; field.real_embeddings.len()];
        let mut pairs = vec![false; field.complex_embeddings.len()];
        let mut primes: Vec<u64> = vec![];
        for p in &places {
            match p {
                Place::Real(i) => {
                    if *i >= reals.len() || reals[*i] {
                        return Err(Error::ConfigInvalid(format!("bad or repeated real place {}", i)));
                    }
                    reals[*i] = true;
                }
                Place::Complex(i) => {
                    if *i >= pairs.len() || pairs[*i] {
                        return Err(Error::ConfigInvalid(format!("bad or repeated complex place {}", i)));
                    }
                    pairs[*i] = true;
                }
                Place::Finite(p) => {
                    if field.degree != 1 {
                        return Err(Error::ConfigInvalid(
                            "finite places are supported only over the rationals".into(),
                        ));
                    }
                    if primes.contains(p) {
                        return Err(Error::ConfigInvalid(format!("repeated finite place {}", p)));
                    }
                    if *p < 2 || !is_prime_u64(*p) {
                        return Err(Error::ConfigInvalid(format!("{} is not prime", p)));
                    }
                    primes.push(*p);
                }
            }
        }
        if !reals.iter().all(|&b| b) || !pairs.iter().all(|&b| b) {
            return Err(Error::ConfigInvalid(
                "the place set must contain every archimedean place".into(),
            ));
        }
        let ring_label = if primes.is_empty() {
            if field.degree == 1 { "Z".to_string() } else { "Z[theta]".to_string() }
        } else {
            let ps: Vec<String> = primes.iter().map(|p| p.to_string()).collect();
            if field.degree == 1 {
                format!("Z[1/({})]", ps.join("*"))
            } else {
                format!("Z[theta][1/({})]", ps.join("*"))
            }
        };
        Ok(PlaceSet { field, places, ring_label })
    }

    pub fn finite_primes(&self) -> Vec<u64> {
        self.places
            .iter()
            .filter_map(|p| if let Place::Finite(q) = p { Some(*q) } else { None })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.places.len()
    }

    pub fn is_empty(&self) -> bool {
        self.places.is_empty()
    }
}

fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

// ---- numeric evaluation ----

fn interval_mul(a: &(Q, Q), b: &(Q, Q)) -> (Q, Q) {
    let cands = [&a.0 * &b.0, &a.0 * &b.1, &a.1 * &b.0, &a.1 * &b.1];
    let mut lo = cands[0].clone();
    let mut hi = cands[0].clone();
    for c in &cands[1..] {
        if c < &lo {
            lo = c.clone();
        }
        if c > &hi {
            hi = c.clone();
        }
    }
    (lo, hi)
}

/// Exact interval Horner evaluation of p over [a, b].
pub fn eval_interval(p: &Poly, x: &(Q, Q)) -> (Q, Q) {
    let mut acc = (Q::zero(), Q::zero());
    for c in p.coeffs.iter().rev() {
        let prod = interval_mul(&acc, x);
        acc = (prod.0 + c, prod.1 + c);
    }
    acc
}

/// A numeric value with a tracked absolute error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tracked {
    pub value: f64,
    pub err: f64,
}

impl NumberField {
    /// Signed numeric value of x under a real embedding (exact enclosure midpoint).
    pub fn real_value(&self, x: &FieldElement, i: usize) -> Tracked {
        let iv = eval_interval(&x.as_poly(), &self.real_embeddings[i]);
        let lo = poly::ratio_to_f64(&iv.0);
        let hi = poly::ratio_to_f64(&iv.1);
        Tracked { value: 0.5 * (lo + hi), err: 0.5 * (hi - lo).abs() + 1e-300 }
    }

    /// Complex numeric value of x under the upper-half-plane member of pair i.
    pub fn complex_value(&self, x: &FieldElement, i: usize) -> (CDyadic, f64) {
        let work = self.precision_bits + 32;
        let enc = &self.complex_embeddings[i];
        let coeffs = poly_coeffs_dyadic(&x.as_poly(), work);
        let val = eval_poly(&coeffs, &enc.center, work);
        // Error: radius * sup |p'| over the disk, slack factor 4.
        let z = enc.center.to_c64();
        let r = 2f64.powi(enc.radius_log2.max(-1000) as i32);
        let zb = z.norm() + r;
        let dp = x.as_poly().derivative();
        let mut sup = 0.0;
        for (k, c) in dp.coeffs.iter().enumerate() {
            sup += poly::ratio_to_f64(&c.abs()) * zb.powi(k as i32);
        }
        (val, 4.0 * sup * r + 1e-300)
    }

    pub fn complex_value_c64(&self, x: &FieldElement, i: usize) -> num_complex::Complex64 {
        self.complex_value(x, i).0.to_c64()
    }
}

/// Normalized absolute value |x|_v with a tracked error bound: plain
/// absolute value at a real place, the SQUARE of the modulus at a complex
/// place, p^(-v_p) at a finite place.
pub fn abs_value(x: &FieldElement, v: &Place) -> Tracked {
    match v {
        Place::Real(i) => {
            let t = x.field.real_value(x, *i);
            Tracked { value: t.value.abs(), err: t.err }
        }
        Place::Complex(i) => {
            let (val, err) = x.field.complex_value(x, *i);
            let m = val.to_c64().norm();
            Tracked { value: m * m, err: 2.0 * m * err + err * err + 1e-300 }
        }
        Place::Finite(p) => {
            assert_eq!(x.field.degree, 1, "finite places only over the rationals");
            let q = &x.coords[0];
            if q.is_zero() {
                return Tracked { value: 0.0, err: 0.0 };
            }
            let v = padic_valuation(q, *p);
            Tracked { value: (*p as f64).powi(-v as i32), err: 0.0 }
        }
    }
}

pub fn padic_valuation(q: &Q, p: u64) -> i64 {
    let bp = BigInt::from(p);
    let mut v = 0i64;
    let mut n = q.numer().clone();
    while !n.is_zero() && (&n % &bp).is_zero() {
        n /= &bp;
        v += 1;
    }
    let mut d = q.denom().clone();
    while !d.is_zero() && (&d % &bp).is_zero() {
        d /= &bp;
        v -= 1;
    }
    v
}

/// Product of normalized absolute values over S. Equals 1 for S-units;
/// returned as a diagnostic in general.
pub fn product_formula_check(x: &FieldElement, s: &PlaceSet) -> f64 {
    s.places.iter().map(|v| abs_value(x, v).value).product()
}

// ---- CM detection ----

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmVerdict {
    Yes,
    No,
    Unknown,
}

#[derive(Debug, Clone)]
pub struct CmWitness {
    /// Monic minimal polynomial of the totally real subfield F.
    pub subfield_minpoly: Vec<Q>,
    /// Element d of F (power-basis coordinates) with K = F(sqrt(-d)).
    pub d: Vec<Q>,
}

/// Exact sign of x under the i-th real embedding of its field.
pub fn real_sign(x: &FieldElement, i: usize) -> i32 {
    if x.is_zero() {
        return 0;
    }
    let field = &x.field;
    let p = x.as_poly();
    let mut interval = field.real_embeddings[i].clone();
    let mut width = &interval.1 - &interval.0;
    loop {
        let iv = eval_interval(&p, &interval);
        if iv.0.is_positive() {
            return 1;
        }
        if iv.1.is_negative() {
            return -1;
        }
        // x is nonzero and the embedding is injective, so refinement terminates.
        width = width / poly::qz(1 << 16);
        interval = poly::refine_root(&field.minpoly, interval, &width);
    }
}

/// Decides whether K is a CM field. With a witness (F, d) such that
/// K = F(sqrt(-d)): verifies F totally real, d totally positive and nonzero,
/// and degree doubling. Without a witness: yes for imaginary quadratics, no
/// whenever K has a real embedding, unknown otherwise.
pub fn is_cm_field(k: &Arc<NumberField>, witness: Option<&CmWitness>) -> Result<CmVerdict> {
    if !k.real_embeddings.is_empty() {
        return Ok(CmVerdict::No);
    }
    match witness {
        None => {
            if k.degree == 2 {
                Ok(CmVerdict::Yes)
            } else {
                Ok(CmVerdict::Unknown)
            }
        }
        Some(w) => {
            let f = nf_create(w.subfield_minpoly.clone(), k.precision_bits)
                .map_err(|e| Error::BadWitness(format!("subfield polynomial invalid: {}", e)))?;
            if !f.complex_embeddings.is_empty() {
                return Err(Error::BadWitness("subfield is not totally real".into()));
            }
            if 2 * f.degree != k.degree {
                return Err(Error::BadWitness(format!(
                    "degree doubling fails: 2*{} != {}",
                    f.degree, k.degree
                )));
            }
            let d = FieldElement::new(f.clone(), w.d.clone());
            if d.is_zero() {
                return Err(Error::BadWitness("d must be nonzero".into()));
            }
            for i in 0..f.real_embeddings.len() {
                if real_sign(&d, i) <= 0 {
                    return Err(Error::BadWitness("d is not totally positive".into()));
                }
            }
            Ok(CmVerdict::Yes)
        }
    }
}

/// Compare |a|_v and |b|_v; exact when the values coincide as elements
/// (a = +-b), otherwise resolved through certified enclosures.
pub fn cmp_abs_at_place(a: &FieldElement, b: &FieldElement, v: &Place) -> std::cmp::Ordering {
    use std::cmp::Ordering;
    if a == b || *a == b.neg() {
        return Ordering::Equal;
    }
    match v {
        Place::Finite(_) => {
            let va = abs_value(a, v).value;
            let vb = abs_value(b, v).value;
            va.partial_cmp(&vb).unwrap()
        }
        Place::Real(i) => {
            // |a| vs |b| exactly: sign of (a-b)(a+b) under the embedding.
            let diff = a.sub(b).mul(&a.add(b));
            if diff.is_zero() {
                return Ordering::Equal;
            }
            match real_sign(&diff, *i) {
                1 => Ordering::Greater,
                -1 => Ordering::Less,
                _ => Ordering::Equal,
            }
        }
        Place::Complex(_) => {
            let ta = abs_value(a, v);
            let tb = abs_value(b, v);
            if (ta.value - tb.value).abs() <= ta.err + tb.err {
                Ordering::Equal
            } else {
                ta.value.partial_cmp(&tb.value).unwrap()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{qr, qz};

    fn sqrt2_field() -> Arc<NumberField> {
        quadratic(2, 128).unwrap()
    }

    #[test]
    fn create_classifies_embeddings() {
        let k = sqrt2_field();
        assert_eq!(k.degree, 2);
        assert_eq!(k.real_embeddings.len(), 2);
        assert!(k.complex_embeddings.is_empty());
        let hi = k.real_value(&FieldElement::generator(&k), 1);
        assert!((hi.value - std::f64::consts::SQRT_2).abs() < 1e-12);

        let gauss = quadratic(-1, 64).unwrap();
        assert_eq!(gauss.real_embeddings.len(), 0);
        assert_eq!(gauss.complex_embeddings.len(), 1);
        let z = gauss.complex_embeddings[0].center.to_c64();
        assert!((z.im - 1.0).abs() < 1e-15 && z.re.abs() < 1e-15);

        // The quartic has two real embeddings and one complex pair, matching
        // its factorization over R into a split and a definite quadratic.
        let k4 = nf_create(vec![qz(1), qz(-2), qz(1), qz(-2), qz(1)], 128).unwrap();
        assert_eq!(k4.real_embeddings.len(), 2);
        assert_eq!(k4.complex_embeddings.len(), 1);
        assert!(k4.irreducibility_verified);
    }

    #[test]
    fn create_rejections() {
        assert!(matches!(nf_create(vec![qz(-2), qz(0), qz(2)], 64), Err(Error::NotMonic)));
        // (x-1)(x-2)
        assert!(matches!(
            nf_create(vec![qz(2), qz(-3), qz(1)], 64),
            Err(Error::Reducible(_))
        ));
        // (x^2+1)^2 is not squarefree.
        assert!(matches!(
            nf_create(vec![qz(1), qz(0), qz(2), qz(0), qz(1)], 64),
            Err(Error::Reducible(_))
        ));
        // (x^2+1)(x^2+x+1): squarefree, no rational roots, caught by the quartic split.
        assert!(matches!(
            nf_create(vec![qz(1), qz(1), qz(2), qz(1), qz(1)], 64),
            Err(Error::Reducible(_))
        ));
    }

    #[test]
    fn arithmetic_identities() {
        let k = sqrt2_field();
        let theta = FieldElement::generator(&k);
        assert_eq!(theta.mul(&theta), FieldElement::from_int(&k, 2));
        let one_plus = FieldElement::from_i64_coords(&k, &[1, 1]);
        let inv = one_plus.inv().unwrap();
        assert_eq!(inv, FieldElement::from_i64_coords(&k, &[-1, 1]));
        assert!(one_plus.mul(&inv).is_one());
        let a = FieldElement::from_i64_coords(&k, &[3, -2]);
        assert_eq!(a.add(&FieldElement::zero(&k)), a);
    }

    #[test]
    fn absolute_values() {
        let k = sqrt2_field();
        let x = FieldElement::from_i64_coords(&k, &[1, 1]);
        // At the positive embedding: 1 + sqrt2.
        let t = abs_value(&x, &Place::Real(1));
        assert!((t.value - 2.414213562373095).abs() < 1e-12);
        assert!(t.err < 1e-30);

        let gauss = quadratic(-1, 64).unwrap();
        let z = FieldElement::from_i64_coords(&gauss, &[1, 1]);
        let t = abs_value(&z, &Place::Complex(0));
        assert!((t.value - 2.0).abs() < 1e-12, "complex places use the squared modulus");

        let q = rationals(64);
        let twelve = FieldElement::from_int(&q, 12);
        let t = abs_value(&twelve, &Place::Finite(2));
        assert_eq!(t.value, 0.25);
    }

    #[test]
    fn product_formula() {
        let k = sqrt2_field();
        let s = PlaceSet::new(k.clone(), vec![Place::Real(0), Place::Real(1)]).unwrap();
        let u = FieldElement::from_i64_coords(&k, &[1, 1]);
        assert!((product_formula_check(&u, &s) - 1.0).abs() < 1e-12);

        let q = rationals(64);
        let s = PlaceSet::new(q.clone(), vec![Place::Real(0), Place::Finite(2)]).unwrap();
        assert!((product_formula_check(&FieldElement::from_int(&q, 2), &s) - 1.0).abs() < 1e-12);
        assert!((product_formula_check(&FieldElement::from_int(&q, 3), &s) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn norm_matches_embeddings() {
        let k = sqrt2_field();
        let x = FieldElement::from_i64_coords(&k, &[3, 5]);
        // N(3 + 5 sqrt2) = 9 - 50 = -41.
        assert_eq!(x.norm(), qz(-41));
        let prod: f64 = (0..2).map(|i| abs_value(&x, &Place::Real(i)).value).product();
        assert!((prod - 41.0).abs() / 41.0 < 1e-9);
    }

    #[test]
    fn cm_detection() {
        let gauss = quadratic(-1, 64).unwrap();
        assert_eq!(is_cm_field(&gauss, None).unwrap(), CmVerdict::Yes);
        let k = sqrt2_field();
        assert_eq!(is_cm_field(&k, None).unwrap(), CmVerdict::No);
        // Q(sqrt2, i): x^4 - 2x^2 + 9 is the minimal polynomial of sqrt2 + i.
        let k4 = nf_create(vec![qz(9), qz(0), qz(-2), qz(0), qz(1)], 128).unwrap();
        assert_eq!(is_cm_field(&k4, None).unwrap(), CmVerdict::Unknown);
        let w = CmWitness { subfield_minpoly: vec![qz(-2), qz(0), qz(1)], d: vec![qz(1)] };
        assert_eq!(is_cm_field(&k4, Some(&w)).unwrap(), CmVerdict::Yes);
        let bad = CmWitness { subfield_minpoly: vec![qz(-2), qz(0), qz(1)], d: vec![qz(-1)] };
        assert!(matches!(is_cm_field(&k4, Some(&bad)), Err(Error::BadWitness(_))));
    }

    #[test]
    fn place_set_validation() {
        let k = sqrt2_field();
        assert!(PlaceSet::new(k.clone(), vec![Place::Real(0)]).is_err());
        assert!(PlaceSet::new(k.clone(), vec![Place::Real(0), Place::Real(1), Place::Finite(2)]).is_err());
        let q = rationals(64);
        let s = PlaceSet::new(q, vec![Place::Real(0), Place::Finite(2), Place::Finite(3)]).unwrap();
        assert_eq!(s.ring_label, "Z[1/(2*3)]");
        assert_eq!(s.finite_primes(), vec![2, 3]);
    }

    #[test]
    fn exactness_random() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let k = nf_create(vec![qz(1), qz(-2), qz(1), qz(-2), qz(1)], 128).unwrap();
        let mut rng = StdRng::seed_from_u64(7);
        let sample = |rng: &mut StdRng| {
            FieldElement::new(
                k.clone(),
                (0..4).map(|_| qr(rng.random_range(-9..10), rng.random_range(1..5))).collect(),
            )
        };
        for _ in 0..1000 {
            let a = sample(&mut rng);
            let b = sample(&mut rng);
            let c = sample(&mut rng);
            assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
            assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        }
    }

    #[test]
    fn embedding_consistency_random() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let fields = [sqrt2_field(), nf_create(vec![qz(1), qz(-2), qz(1), qz(-2), qz(1)], 128).unwrap()];
        let mut rng = StdRng::seed_from_u64(11);
        for k in &fields {
            for _ in 0..50 {
                let x = FieldElement::new(
                    k.clone(),
                    (0..k.degree).map(|_| qz(rng.random_range(-6..7))).collect(),
                );
                if x.is_zero() {
                    continue;
                }
                let mut prod = 1.0;
                for i in 0..k.real_embeddings.len() {
                    prod *= abs_value(&x, &Place::Real(i)).value;
                }
                for i in 0..k.complex_embeddings.len() {
                    prod *= abs_value(&x, &Place::Complex(i)).value;
                }
                let nrm = poly::ratio_to_f64(&x.norm()).abs();
                assert!((prod - nrm).abs() <= 1e-9 * nrm.max(1.0), "prod {} vs norm {}", prod, nrm);
            }
        }
    }
}
