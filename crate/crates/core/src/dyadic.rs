//! Fixed-point big floats (mantissa times a power of two) and certified
//! root isolation.
//!
//! Real roots are isolated by Sturm chains and bisected over exact
//! rationals, so their enclosures are unconditionally correct. Complex
//! pairs start from a Durand-Kerner pass in f64, are polished by Newton in
//! dyadic arithmetic, and are certified a posteriori with Weierstrass-type
//! disks: the disks D(x_i, n*w_i) with w_i = |p(x_i)| / prod |x_i - x_j|
//! jointly cover the root set, and pairwise disjoint disks each contain
//! exactly one root.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::poly::{ratio_to_f64, Poly, Q};

/// x * 2^e staying clear of powi overflow for large |e|.
fn mul_pow2(x: f64, e: i64) -> f64 {
    let mut x = x;
    let mut e = e;
    while e > 500 {
        x *= 2f64.powi(500);
        e -= 500;
        if x.is_infinite() {
            return x;
        }
    }
    while e < -500 {
        x *= 2f64.powi(-500);
        e += 500;
        if x == 0.0 {
            return x;
        }
    }
    x * 2f64.powi(e as i32)
}

/// m * 2^e with truncating arithmetic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dyadic {
    pub m: BigInt,
    pub e: i64,
}

impl Dyadic {
    pub fn zero() -> Self {
        Dyadic { m: BigInt::zero(), e: 0 }
    }

    pub fn from_int(n: i64) -> Self {
        Dyadic { m: BigInt::from(n), e: 0 }
    }

    pub fn is_zero(&self) -> bool {
        self.m.is_zero()
    }

    pub fn from_ratio(q: &Q, prec: u32) -> Self {
        if q.is_zero() {
            return Dyadic::zero();
        }
        let m = (q.numer() << prec) / q.denom();
        Dyadic { m, e: -(prec as i64) }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            return Dyadic::zero();
        }
        let bits = x.to_bits();
        let sign = if bits >> 63 == 1 { -1i64 } else { 1 };
        let exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, e) = if exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), exp - 1075)
        };
        Dyadic { m: BigInt::from(mant) * sign, e }
    }

    pub fn to_f64(&self) -> f64 {
        if self.m.is_zero() {
            return 0.0;
        }
        let bits = self.m.bits() as i64;
        if bits <= 52 {
            return mul_pow2(self.m.to_f64().unwrap(), self.e);
        }
        let shift = bits - 53;
        let top = (&self.m >> shift).to_f64().unwrap();
        mul_pow2(top, self.e + shift)
    }

    /// log2 of |value|, approximate; -inf for zero.
    pub fn log2_abs(&self) -> f64 {
        if self.m.is_zero() {
            return f64::NEG_INFINITY;
        }
        let bits = self.m.bits() as i64;
        let shift = (bits - 53).max(0);
        let top = (self.m.magnitude() >> shift).to_f64().unwrap();
        top.log2() + (self.e + shift) as f64
    }

    pub fn neg(&self) -> Self {
        Dyadic { m: -self.m.clone(), e: self.e }
    }

    pub fn abs(&self) -> Self {
        Dyadic { m: self.m.abs(), e: self.e }
    }

    pub fn add(&self, other: &Dyadic) -> Dyadic {
        if self.m.is_zero() {
            return other.clone();
        }
        if other.m.is_zero() {
            return self.clone();
        }
        let e = self.e.min(other.e);
        let a = &self.m << (self.e - e) as u32;
        let b = &other.m << (other.e - e) as u32;
        Dyadic { m: a + b, e }
    }

    pub fn sub(&self, other: &Dyadic) -> Dyadic {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Dyadic) -> Dyadic {
        Dyadic { m: &self.m * &other.m, e: self.e + other.e }
    }

    pub fn mul_i64(&self, k: i64) -> Dyadic {
        Dyadic { m: &self.m * k, e: self.e }
    }

    /// Quotient with roughly `prec` significant bits.
    pub fn div(&self, other: &Dyadic, prec: u32) -> Dyadic {
        assert!(!other.m.is_zero(), "dyadic division by zero");
        if self.m.is_zero() {
            return Dyadic::zero();
        }
        let shift = prec as i64 + other.m.bits() as i64 - self.m.bits() as i64 + 2;
        let shift = shift.max(0);
        let m = (&self.m << shift as u32) / &other.m;
        Dyadic { m, e: self.e - other.e - shift }
    }

    /// Truncate the mantissa to at most `prec` bits (toward zero).
    pub fn truncate(&self, prec: u32) -> Dyadic {
        let bits = self.m.bits();
        if bits <= prec as u64 {
            return self.clone();
        }
        let shift = bits - prec as u64;
        Dyadic { m: &self.m >> shift, e: self.e + shift as i64 }
    }

    pub fn cmp_abs(&self, other: &Dyadic) -> std::cmp::Ordering {
        let d = self.abs().sub(&other.abs());
        if d.m.is_zero() {
            std::cmp::Ordering::Equal
        } else if d.m.is_negative() {
            std::cmp::Ordering::Less
        } else {
            std::cmp::Ordering::Greater
        }
    }

    /// 2^k as a dyadic.
    pub fn pow2(k: i64) -> Dyadic {
        Dyadic { m: BigInt::one(), e: k }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CDyadic {
    pub re: Dyadic,
    pub im: Dyadic,
}

impl CDyadic {
    pub fn new(re: Dyadic, im: Dyadic) -> Self {
        CDyadic { re, im }
    }

    pub fn zero() -> Self {
        CDyadic { re: Dyadic::zero(), im: Dyadic::zero() }
    }

    pub fn from_c64(z: Complex64) -> Self {
        CDyadic { re: Dyadic::from_f64(z.re), im: Dyadic::from_f64(z.im) }
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    pub fn conj(&self) -> Self {
        CDyadic { re: self.re.clone(), im: self.im.neg() }
    }

    pub fn add(&self, o: &CDyadic) -> CDyadic {
        CDyadic { re: self.re.add(&o.re), im: self.im.add(&o.im) }
    }

    pub fn sub(&self, o: &CDyadic) -> CDyadic {
        CDyadic { re: self.re.sub(&o.re), im: self.im.sub(&o.im) }
    }

    pub fn mul(&self, o: &CDyadic, prec: u32) -> CDyadic {
        let re = self.re.mul(&o.re).sub(&self.im.mul(&o.im)).truncate(prec);
        let im = self.re.mul(&o.im).add(&self.im.mul(&o.re)).truncate(prec);
        CDyadic { re, im }
    }

    pub fn norm_sqr(&self) -> Dyadic {
        self.re.mul(&self.re).add(&self.im.mul(&self.im))
    }

    pub fn div(&self, o: &CDyadic, prec: u32) -> CDyadic {
        let d = o.norm_sqr();
        let num = self.mul(&o.conj(), prec + 8);
        CDyadic { re: num.re.div(&d, prec), im: num.im.div(&d, prec) }
    }

    pub fn log2_abs(&self) -> f64 {
        0.5 * self.norm_sqr().log2_abs()
    }
}

/// Evaluate a rational polynomial at a complex dyadic point.
pub fn eval_poly(coeffs: &[Dyadic], z: &CDyadic, prec: u32) -> CDyadic {
    let mut acc = CDyadic::zero();
    for c in coeffs.iter().rev() {
        acc = acc.mul(z, prec);
        acc.re = acc.re.add(c).truncate(prec);
    }
    acc
}

pub fn poly_coeffs_dyadic(p: &Poly, prec: u32) -> Vec<Dyadic> {
    p.coeffs.iter().map(|c| Dyadic::from_ratio(c, prec)).collect()
}

/// One certified complex-pair enclosure: center in the upper half plane
/// and a radius bound (as a power of two).
#[derive(Debug, Clone)]
pub struct ComplexEnclosure {
    pub center: CDyadic,
    pub radius_log2: i64,
}

#[derive(Debug, Clone)]
pub struct IsolatedRoots {
    /// Exact rational enclosures (a, b] per real root, increasing order.
    pub real: Vec<(Q, Q)>,
    /// One representative per conjugate pair, Im > 0.
    pub complex: Vec<ComplexEnclosure>,
}

fn durand_kerner_f64(p: &Poly) -> Vec<Complex64> {
    let n = p.deg() as usize;
    let lc = ratio_to_f64(&p.lc());
    let coeffs: Vec<f64> = p.coeffs.iter().map(|c| ratio_to_f64(c) / lc).collect();
    let eval = |z: Complex64| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    };
    let bound = ratio_to_f64(&p.cauchy_bound());
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32 + 1) * bound).collect();
    for _ in 0..800 {
        let mut max_step = 0.0f64;
        for i in 0..n {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    denom *= roots[i] - roots[j];
                }
            }
            if denom.norm() == 0.0 {
                // perturb collision
                roots[i] += Complex64::new(1e-7, 1e-7);
                continue;
            }
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
            max_step = max_step.max(step.norm());
        }
        if max_step < 1e-14 {
            break;
        }
    }
    roots
}

fn newton_refine(coeffs: &[Dyadic], dcoeffs: &[Dyadic], z0: &CDyadic, prec: u32, iters: u32) -> CDyadic {
    let mut z = z0.clone();
    for _ in 0..iters {
        let f = eval_poly(coeffs, &z, prec);
        let df = eval_poly(dcoeffs, &z, prec);
        if df.norm_sqr().is_zero() {
            break;
        }
        let step = f.div(&df, prec);
        z = z.sub(&step);
        z.re = z.re.truncate(prec);
        z.im = z.im.truncate(prec);
    }
    z
}

/// Isolate and certify all roots of a squarefree polynomial so that every
/// enclosure has radius at most 2^-target_bits and the enclosures are
/// pairwise disjoint.
pub fn isolate_roots(p: &Poly, target_bits: u32) -> Result<IsolatedRoots> {
    let deg = p.deg();
    if deg < 1 {
        return Err(Error::RootIsolationFailed("constant polynomial".into()));
    }
    if !p.is_squarefree() {
        return Err(Error::RootIsolationFailed("polynomial is not squarefree".into()));
    }
    let width = Q::new(BigInt::one(), BigInt::one() << (target_bits + 2) as usize);
    let real: Vec<(Q, Q)> = crate::poly::isolate_real_roots(p)
        .into_iter()
        .map(|iv| crate::poly::refine_root(p, iv, &width))
        .collect();
    let n_real = real.len();
    let n_pairs = (deg as usize - n_real) / 2;
    debug_assert_eq!(n_real + 2 * n_pairs, deg as usize);
    if n_pairs == 0 {
        return Ok(IsolatedRoots { real, complex: vec![] });
    }

    let work = target_bits + 96;
    let coeffs = poly_coeffs_dyadic(p, work);
    let dcoeffs = poly_coeffs_dyadic(&p.derivative(), work);

    // f64 seed pass; keep upper-half-plane candidates farthest from R.
    let mut cands: Vec<Complex64> = durand_kerner_f64(p).into_iter().filter(|z| z.im > 0.0).collect();
    cands.sort_by(|a, b| b.im.partial_cmp(&a.im).unwrap());
    cands.truncate(n_pairs);
    if cands.len() < n_pairs {
        return Err(Error::RootIsolationFailed("seed pass lost a conjugate pair".into()));
    }

    for attempt in 0..4 {
        let iters = 6 + 4 * attempt;
        let refined: Vec<CDyadic> = cands
            .iter()
            .map(|z| newton_refine(&coeffs, &dcoeffs, &CDyadic::from_c64(*z), work, iters))
            .collect();
        if let Some(out) = certify(p, &coeffs, &real, &refined, target_bits, work) {
            return Ok(IsolatedRoots { real, complex: out });
        }
    }
    Err(Error::RootIsolationFailed(
        "could not certify complex enclosures at the requested precision".into(),
    ))
}

/// Weierstrass-type a posteriori bound. Returns certified enclosures, or
/// None if radii exceed the target or disks are not pairwise disjoint.
fn certify(
    p: &Poly,
    coeffs: &[Dyadic],
    real: &[(Q, Q)],
    complex: &[CDyadic],
    target_bits: u32,
    work: u32,
) -> Option<Vec<ComplexEnclosure>> {
    let deg = p.deg() as usize;
    let lc_log2 = Dyadic::from_ratio(&p.lc(), work).log2_abs();
    // Full approximate root list: real midpoints, pairs and conjugates.
    let mut all: Vec<CDyadic> = real
        .iter()
        .map(|(a, b)| {
            let mid = (a + b) / crate::poly::qz(2);
            CDyadic::new(Dyadic::from_ratio(&mid, work), Dyadic::zero())
        })
        .collect();
    for z in complex {
        all.push(z.clone());
        all.push(z.conj());
    }
    debug_assert_eq!(all.len(), deg);
    let mut radii_log2 = vec![0f64; all.len()];
    for i in 0..all.len() {
        let num = eval_poly(coeffs, &all[i], work).log2_abs();
        let mut den = lc_log2;
        for j in 0..all.len() {
            if i != j {
                den += all[i].sub(&all[j]).log2_abs();
            }
        }
        // radius = deg * |p(x)| / (|lc| prod |x_i - x_j|), doubled for slop.
        radii_log2[i] = num - den + (deg as f64).log2() + 1.0;
    }
    // Complex radii must meet the target (real roots carry exact intervals).
    for (k, _z) in complex.iter().enumerate() {
        let r = radii_log2[real.len() + 2 * k];
        if !(r <= -(target_bits as f64)) {
            return None;
        }
    }
    // Pairwise disjointness of all enclosures.
    for i in 0..all.len() {
        for j in (i + 1)..all.len() {
            let dist = all[i].sub(&all[j]).log2_abs();
            let rmax = radii_log2[i].max(radii_log2[j]);
            if !(dist > rmax + 1.0) {
                return None;
            }
        }
    }
    Some(
        complex
            .iter()
            .enumerate()
            .map(|(k, z)| ComplexEnclosure {
                center: z.clone(),
                radius_log2: radii_log2[real.len() + 2 * k].ceil() as i64,
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::qz;

    #[test]
    fn dyadic_arith() {
        let a = Dyadic::from_ratio(&crate::poly::qr(1, 3), 100);
        let b = Dyadic::from_ratio(&crate::poly::qr(2, 3), 100);
        let s = a.add(&b).to_f64();
        assert!((s - 1.0).abs() < 1e-15);
        let p = a.mul(&b).to_f64();
        assert!((p - 2.0 / 9.0).abs() < 1e-15);
        let d = a.div(&b, 100).to_f64();
        assert!((d - 0.5).abs() < 1e-15);
    }

    #[test]
    fn roundtrip_f64() {
        for x in [0.0, 1.5, -3.25, 1e-300, 123456.789] {
            assert_eq!(Dyadic::from_f64(x).to_f64(), x);
        }
    }

    #[test]
    fn isolate_gaussian() {
        // x^2 + 1: one conjugate pair at +-i.
        let p = Poly::from_i64(&[1, 0, 1]);
        let r = isolate_roots(&p, 128).unwrap();
        assert!(r.real.is_empty());
        assert_eq!(r.complex.len(), 1);
        let z = r.complex[0].center.to_c64();
        assert!((z.re).abs() < 1e-30);
        assert!((z.im - 1.0).abs() < 1e-30);
        assert!(r.complex[0].radius_log2 <= -128);
    }

    #[test]
    fn isolate_salem_quartic() {
        // Two real roots and one pair on the unit circle.
        let p = Poly::from_i64(&[1, -2, 1, -2, 1]);
        let r = isolate_roots(&p, 128).unwrap();
        assert_eq!(r.real.len(), 2);
        assert_eq!(r.complex.len(), 1);
        let z = r.complex[0].center.to_c64();
        assert!((z.norm() - 1.0).abs() < 1e-12);
        // Real roots multiply to 1 (they are reciprocal).
        let m0 = crate::poly::ratio_to_f64(&((&r.real[0].0 + &r.real[0].1) / qz(2)));
        let m1 = crate::poly::ratio_to_f64(&((&r.real[1].0 + &r.real[1].1) / qz(2)));
        assert!((m0 * m1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn isolate_totally_real_cubic() {
        let p = Poly::from_i64(&[-1, -3, 0, 1]);
        let r = isolate_roots(&p, 160).unwrap();
        assert_eq!(r.real.len(), 3);
        assert!(r.complex.is_empty());
    }
}
