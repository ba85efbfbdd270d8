//! Exact univariate polynomial arithmetic over Q.
//!
//! Coefficients are stored low degree first with no trailing zeros. These
//! routines back the number-field layer: squarefreeness and gcds decide
//! logical questions exactly, Sturm chains count and isolate real roots,
//! and low-degree factor searches certify irreducibility where the
//! contract requires it.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Q = BigRational;

pub fn qz(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qr(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    pub coeffs: Vec<Q>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Q>) -> Self {
        while coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: vec![] }
    }

    pub fn one() -> Self {
        Poly { coeffs: vec![Q::one()] }
    }

    pub fn x() -> Self {
        Poly { coeffs: vec![Q::zero(), Q::one()] }
    }

    pub fn constant(c: Q) -> Self {
        Poly::new(vec![c])
    }

    pub fn from_i64(cs: &[i64]) -> Self {
        Poly::new(cs.iter().map(|&c| qz(c)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports -1.
    pub fn deg(&self) -> isize {
        self.coeffs.len() as isize - 1
    }

    pub fn lc(&self) -> Q {
        self.coeffs.last().cloned().unwrap_or_else(Q::zero)
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last().map_or(false, |c| c.is_one())
    }

    pub fn coeff(&self, k: usize) -> Q {
        self.coeffs.get(k).cloned().unwrap_or_else(Q::zero)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            out.push(self.coeff(k) + other.coeff(k));
        }
        Poly::new(out)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            out.push(self.coeff(k) - other.coeff(k));
        }
        Poly::new(out)
    }

    pub fn neg(&self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }

    pub fn scale(&self, c: &Q) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Q::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    /// Euclidean division: self = q * div + r with deg r < deg div.
    pub fn divmod(&self, div: &Poly) -> (Poly, Poly) {
        assert!(!div.is_zero(), "division by zero polynomial");
        let mut rem = self.coeffs.clone();
        let dn = div.coeffs.len();
        if rem.len() < dn {
            return (Poly::zero(), Poly::new(rem));
        }
        let mut quot = vec![Q::zero(); rem.len() - dn + 1];
        let inv_lc = Q::one() / div.lc();
        for k in (0..quot.len()).rev() {
            let c = &rem[k + dn - 1] * &inv_lc;
            if !c.is_zero() {
                for (j, d) in div.coeffs.iter().enumerate() {
                    rem[k + j] -= &c * d;
                }
            }
            quot[k] = c;
        }
        (Poly::new(quot), Poly::new(rem))
    }

    pub fn rem(&self, div: &Poly) -> Poly {
        self.divmod(div).1
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        Poly::new(
            self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(i, c)| c * qz(i as i64 + 1))
                .collect(),
        )
    }

    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let inv = Q::one() / self.lc();
        self.scale(&inv)
    }

    pub fn gcd(&self, other: &Poly) -> Poly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            a
        } else {
            a.monic()
        }
    }

    /// Extended gcd: returns (g, s, t) with s*self + t*other = g, g monic.
    pub fn ext_gcd(&self, other: &Poly) -> (Poly, Poly, Poly) {
        let (mut r0, mut r1) = (self.clone(), other.clone());
        let (mut s0, mut s1) = (Poly::one(), Poly::zero());
        let (mut t0, mut t1) = (Poly::zero(), Poly::one());
        while !r1.is_zero() {
            let (q, r) = r0.divmod(&r1);
            let s = s0.sub(&q.mul(&s1));
            let t = t0.sub(&q.mul(&t1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s;
            t0 = t1;
            t1 = t;
        }
        if r0.is_zero() {
            return (r0, s0, t0);
        }
        let inv = Q::one() / r0.lc();
        (r0.scale(&inv), s0.scale(&inv), t0.scale(&inv))
    }

    pub fn is_squarefree(&self) -> bool {
        if self.deg() <= 1 {
            return true;
        }
        self.gcd(&self.derivative()).deg() == 0
    }

    pub fn eval(&self, x: &Q) -> Q {
        let mut acc = Q::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * x + ratio_to_f64(c);
        }
        acc
    }

    /// Substitute x -> x + c.
    pub fn shift(&self, c: &Q) -> Poly {
        let mut out = Poly::zero();
        let lin = Poly::new(vec![c.clone(), Q::one()]);
        for co in self.coeffs.iter().rev() {
            out = out.mul(&lin).add(&Poly::constant(co.clone()));
        }
        out
    }

    /// Clears denominators and the integer content; keeps the sign of the
    /// leading coefficient.
    pub fn primitive_integer(&self) -> Vec<BigInt> {
        if self.is_zero() {
            return vec![];
        }
        let mut den = BigInt::one();
        for c in &self.coeffs {
            den = den.lcm(c.denom());
        }
        let ints: Vec<BigInt> = self.coeffs.iter().map(|c| (c * Q::from_integer(den.clone())).to_integer()).collect();
        let mut g = BigInt::zero();
        for c in &ints {
            g = g.gcd(c);
        }
        if g.is_zero() {
            return ints;
        }
        let sign = if ints.last().unwrap().is_negative() { -BigInt::one() } else { BigInt::one() };
        let g = g * sign;
        ints.iter().map(|c| c / &g).collect()
    }

    /// Cauchy root bound: all complex roots have |z| <= bound.
    pub fn cauchy_bound(&self) -> Q {
        let lc = self.lc();
        let mut m = Q::zero();
        for c in &self.coeffs[..self.coeffs.len() - 1] {
            let r = (c / &lc).abs();
            if r > m {
                m = r;
            }
        }
        m + Q::one()
    }
}

pub fn ratio_to_f64(q: &Q) -> f64 {
    // num-rational's ToPrimitive handles large numerators/denominators.
    num_traits::ToPrimitive::to_f64(q).unwrap_or(f64::NAN)
}

/// Sturm chain of a squarefree polynomial.
pub struct Sturm {
    chain: Vec<Poly>,
}

impl Sturm {
    pub fn new(p: &Poly) -> Sturm {
        let mut chain = vec![p.clone(), p.derivative()];
        loop {
            let k = chain.len();
            if chain[k - 1].is_zero() {
                chain.pop();
                break;
            }
            let r = chain[k - 2].rem(&chain[k - 1]).neg();
            if r.is_zero() {
                break;
            }
            chain.push(r);
        }
        Sturm { chain }
    }

    fn sign_changes(&self, x: &Q) -> usize {
        let mut changes = 0;
        let mut last = 0i8;
        for p in &self.chain {
            let v = p.eval(x);
            let s = if v.is_zero() {
                0
            } else if v.is_positive() {
                1
            } else {
                -1
            };
            if s != 0 {
                if last != 0 && s != last {
                    changes += 1;
                }
                last = s;
            }
        }
        changes
    }

    /// Number of real roots in the half-open interval (a, b].
    pub fn count_roots(&self, a: &Q, b: &Q) -> usize {
        self.sign_changes(a) - self.sign_changes(b)
    }
}

/// Exact count of real roots of a squarefree polynomial.
pub fn real_root_count(p: &Poly) -> usize {
    if p.deg() <= 0 {
        return 0;
    }
    let b = p.cauchy_bound();
    let s = Sturm::new(p);
    s.count_roots(&-b.clone(), &b)
}

/// Isolating intervals (a, b] for every real root, each containing exactly
/// one root, returned in increasing order.
pub fn isolate_real_roots(p: &Poly) -> Vec<(Q, Q)> {
    if p.deg() <= 0 {
        return vec![];
    }
    let bound = p.cauchy_bound();
    let sturm = Sturm::new(p);
    let mut out = vec![];
    let mut stack = vec![(-bound.clone(), bound)];
    while let Some((a, b)) = stack.pop() {
        let n = sturm.count_roots(&a, &b);
        if n == 0 {
            continue;
        }
        if n == 1 {
            out.push((a, b));
            continue;
        }
        let mid = (&a + &b) / qz(2);
        stack.push((a, mid.clone()));
        stack.push((mid, b));
    }
    out.sort_by(|x, y| x.0.cmp(&y.0));
    out
}

/// Bisect an isolating interval until its width is at most `width`.
/// The root stays in (a, b]; endpoints are exact rationals.
pub fn refine_root(p: &Poly, interval: (Q, Q), width: &Q) -> (Q, Q) {
    let sturm = Sturm::new(p);
    let (mut a, mut b) = interval;
    debug_assert_eq!(sturm.count_roots(&a, &b), 1);
    while &(&b - &a) > width {
        let mid = (&a + &b) / qz(2);
        if sturm.count_roots(&a, &mid) == 1 {
            b = mid;
        } else {
            a = mid;
        }
    }
    (a, b)
}

// ---- integer factorization for the rational root test ----

fn is_probable_prime(n: &BigUint) -> bool {
    use num_traits::FromPrimitive;
    if n < &BigUint::from_u64(2).unwrap() {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let bp = BigUint::from_u64(p).unwrap();
        if n == &bp {
            return true;
        }
        if (n % &bp).is_zero() {
            return false;
        }
    }
    // Miller-Rabin with fixed witnesses (deterministic for n < 3.3e24).
    let one = BigUint::one();
    let two = &one + &one;
    let nm1 = n - &one;
    let s = nm1.trailing_zeros().unwrap_or(0);
    let d = &nm1 >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = BigUint::from_u64(a).unwrap().modpow(&d, n);
        if x == one || x == nm1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == nm1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn pollard_rho(n: &BigUint) -> BigUint {
    use num_traits::FromPrimitive;
    let one = BigUint::one();
    let mut c = BigUint::from_u64(1).unwrap();
    loop {
        let mut x = BigUint::from_u64(2).unwrap();
        let mut y = x.clone();
        let mut d = one.clone();
        while d == one {
            x = (&x * &x + &c) % n;
            y = (&y * &y + &c) % n;
            y = (&y * &y + &c) % n;
            let diff = if x > y { &x - &y } else { &y - &x };
            if diff.is_zero() {
                break;
            }
            d = diff.gcd(n);
        }
        if d != one && &d != n {
            return d;
        }
        c += 1u32;
    }
}

fn factorize(n: &BigUint, out: &mut Vec<BigUint>) {
    use num_traits::FromPrimitive;
    if n.is_one() {
        return;
    }
    let mut m = n.clone();
    let mut p = 2u64;
    while p < 100_000 && BigUint::from_u64(p).unwrap().pow(2) <= m {
        let bp = BigUint::from_u64(p).unwrap();
        while (&m % &bp).is_zero() {
            out.push(bp.clone());
            m /= &bp;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if m.is_one() {
        return;
    }
    if is_probable_prime(&m) {
        out.push(m);
        return;
    }
    let d = pollard_rho(&m);
    let q = &m / &d;
    factorize(&d, out);
    factorize(&q, out);
}

fn divisors(n: &BigInt) -> Vec<BigInt> {
    let mag = n.magnitude().clone();
    if mag.is_zero() {
        return vec![];
    }
    let mut primes = vec![];
    factorize(&mag, &mut primes);
    primes.sort();
    let mut divs: Vec<BigUint> = vec![BigUint::one()];
    let mut i = 0;
    while i < primes.len() {
        let p = primes[i].clone();
        let mut e = 0;
        while i < primes.len() && primes[i] == p {
            e += 1;
            i += 1;
        }
        let base = divs.clone();
        let mut pe = BigUint::one();
        let mut extended = base.clone();
        for _ in 0..e {
            pe *= &p;
            extended.extend(base.iter().map(|d| d * &pe));
        }
        divs = extended;
    }
    divs.into_iter().map(BigInt::from).collect()
}

/// All rational roots of a nonzero polynomial, found exactly.
pub fn rational_roots(p: &Poly) -> Vec<Q> {
    let ints = p.primitive_integer();
    if ints.is_empty() {
        return vec![];
    }
    let mut poly = ints;
    let mut roots = vec![];
    // Strip x = 0 roots (recorded once).
    if poly.first().map_or(false, |c| c.is_zero()) {
        roots.push(Q::zero());
        while poly.first().map_or(false, |c| c.is_zero()) {
            poly.remove(0);
        }
    }
    if poly.len() <= 1 {
        return roots;
    }
    let a0 = poly[0].clone();
    let an = poly.last().unwrap().clone();
    let p_poly = Poly::new(poly.iter().map(|c| Q::from_integer(c.clone())).collect());
    for num in divisors(&a0) {
        for den in divisors(&an) {
            for sign in [1i64, -1] {
                let cand = Q::new(num.clone() * BigInt::from(sign), den.clone());
                if p_poly.eval(&cand).is_zero() && !roots.contains(&cand) {
                    roots.push(cand);
                }
            }
        }
    }
    roots.sort();
    roots
}

/// Checks whether a rational square root exists; returns it if so.
pub fn rational_sqrt(q: &Q) -> Option<Q> {
    if q.is_negative() {
        return None;
    }
    if q.is_zero() {
        return Some(Q::zero());
    }
    let num = q.numer().magnitude().sqrt();
    let den = q.denom().magnitude().sqrt();
    let cand = Q::new(BigInt::from(num), BigInt::from(den));
    if &(&cand * &cand) == q {
        Some(cand)
    } else {
        None
    }
}

/// Splits a monic quartic into two monic rational quadratics if possible.
/// Assumes no rational root (linear factors are handled separately).
pub fn quartic_quadratic_factors(p: &Poly) -> Option<(Poly, Poly)> {
    assert_eq!(p.deg(), 4);
    let p = p.monic();
    let a = p.coeff(3);
    let b = p.coeff(2);
    let c = p.coeff(1);
    let d = p.coeff(0);
    // Resolvent cubic in y = q + s for a factorization
    //   (x^2 + px + q)(x^2 + rx + s).
    let resolvent = Poly::new(vec![
        -(&a * &a * &d) + qz(4) * &b * &d - &c * &c,
        &a * &c - qz(4) * &d,
        -b.clone(),
        Q::one(),
    ]);
    for y in rational_roots(&resolvent) {
        // p + r = a, pr = b - y.
        let disc1 = &a * &a - qz(4) * (&b - &y);
        let Some(s1) = rational_sqrt(&disc1) else { continue };
        let pp = (&a + &s1) / qz(2);
        let rr = (&a - &s1) / qz(2);
        let candidates: Vec<(Q, Q)> = if pp != rr {
            // q (r - p) = c - p y.
            let qq = (&c - &pp * &y) / (&rr - &pp);
            let ss = &y - &qq;
            vec![(qq, ss)]
        } else {
            let disc2 = &y * &y - qz(4) * &d;
            match rational_sqrt(&disc2) {
                Some(s2) => {
                    let qq = (&y + &s2) / qz(2);
                    let ss = (&y - &s2) / qz(2);
                    vec![(qq, ss)]
                }
                None => vec![],
            }
        };
        for (qq, ss) in candidates {
            let f1 = Poly::new(vec![qq, pp.clone(), Q::one()]);
            let f2 = Poly::new(vec![ss, rr.clone(), Q::one()]);
            if f1.mul(&f2) == p {
                return Some((f1, f2));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn divmod_roundtrip() {
        let p = Poly::from_i64(&[1, -2, 0, 3, 1]);
        let d = Poly::from_i64(&[2, 1, 1]);
        let (q, r) = p.divmod(&d);
        assert_eq!(q.mul(&d).add(&r), p);
        assert!(r.deg() < d.deg());
    }

    #[test]
    fn sturm_counts() {
        // x^2 - 2: two real roots.
        assert_eq!(real_root_count(&Poly::from_i64(&[-2, 0, 1])), 2);
        // x^2 + 1: none.
        assert_eq!(real_root_count(&Poly::from_i64(&[1, 0, 1])), 0);
        // x^4 - 2x^3 + x^2 - 2x + 1: exactly two (plus one complex pair).
        assert_eq!(real_root_count(&Poly::from_i64(&[1, -2, 1, -2, 1])), 2);
        // x^3 - 3x - 1: totally real.
        assert_eq!(real_root_count(&Poly::from_i64(&[-1, -3, 0, 1])), 3);
    }

    #[test]
    fn rational_root_test() {
        // (x - 1/2)(x + 3) * 2 = 2x^2 + 5x - 3
        let p = Poly::from_i64(&[-3, 5, 2]);
        let roots = rational_roots(&p);
        assert_eq!(roots, vec![qz(-3), qr(1, 2)]);
        assert!(rational_roots(&Poly::from_i64(&[-2, 0, 1])).is_empty());
    }

    #[test]
    fn quartic_split() {
        // (x^2+1)(x^2+x+1) = x^4 + x^3 + 2x^2 + x + 1
        let p = Poly::from_i64(&[1, 1, 2, 1, 1]);
        let (f1, f2) = quartic_quadratic_factors(&p).expect("splits");
        assert_eq!(f1.mul(&f2), p);
        // The main quartic fixture is irreducible.
        assert!(quartic_quadratic_factors(&Poly::from_i64(&[1, -2, 1, -2, 1])).is_none());
        // x^4 + 4 = (x^2-2x+2)(x^2+2x+2)
        let p = Poly::from_i64(&[4, 0, 0, 0, 1]);
        assert!(quartic_quadratic_factors(&p).is_some());
    }

    #[test]
    fn refine_keeps_root() {
        let p = Poly::from_i64(&[-2, 0, 1]);
        let ivs = isolate_real_roots(&p);
        assert_eq!(ivs.len(), 2);
        let w = qr(1, 1 << 30);
        let (a, b) = refine_root(&p, ivs[1].clone(), &w);
        assert!(&b - &a <= w);
        let sqrt2 = ratio_to_f64(&((&a + &b) / qz(2)));
        assert!((sqrt2 - std::f64::consts::SQRT_2).abs() < 1e-8);
    }
}
