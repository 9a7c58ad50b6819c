//! Univariate polynomials over F_q: the ring A = F_q[t].
//!
//! Coefficients are stored ascending as encoded bytes with no trailing zeros;
//! the zero polynomial has an empty coefficient vector. The canonical
//! enumeration order is the base-q counter: polynomial number n has the base-q
//! digits of n as coefficients (constant term least significant). `Ord`
//! agrees with that order.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use crate::algebra::fq::{FqElem, FqField};
use crate::error::{Error, Result};

#[derive(Clone)]
pub struct FqPoly {
    field: Arc<FqField>,
    coeffs: Vec<u8>,
}

impl FqPoly {
    pub fn zero(field: &Arc<FqField>) -> FqPoly {
        FqPoly {
            field: Arc::clone(field),
            coeffs: Vec::new(),
        }
    }

    pub fn one(field: &Arc<FqField>) -> FqPoly {
        FqPoly {
            field: Arc::clone(field),
            coeffs: vec![1],
        }
    }

    /// The variable t.
    pub fn var(field: &Arc<FqField>) -> FqPoly {
        FqPoly {
            field: Arc::clone(field),
            coeffs: vec![0, 1],
        }
    }

    pub fn constant(c: &FqElem) -> FqPoly {
        let mut p = FqPoly::zero(c.field());
        if !c.is_zero() {
            p.coeffs.push(c.encoded() as u8);
        }
        p
    }

    /// From encoded coefficient values, ascending. Values must be < q.
    pub fn from_encoded(field: &Arc<FqField>, coeffs: &[u32]) -> FqPoly {
        let q = field.order();
        let mut v = Vec::with_capacity(coeffs.len());
        for &c in coeffs {
            assert!(c < q, "encoded coefficient {c} out of range for F_{q}");
            v.push(c as u8);
        }
        let mut p = FqPoly {
            field: Arc::clone(field),
            coeffs: v,
        };
        p.trim();
        p
    }

    /// From integer coefficients reduced mod p (prime-subfield embedding), ascending.
    pub fn from_ints(field: &Arc<FqField>, coeffs: &[i64]) -> FqPoly {
        let vals: Vec<u32> = coeffs
            .iter()
            .map(|&c| field.from_int(c).encoded())
            .collect();
        FqPoly::from_encoded(field, &vals)
    }

    /// c * t^e.
    pub fn monomial(c: &FqElem, e: usize) -> FqPoly {
        if c.is_zero() {
            return FqPoly::zero(c.field());
        }
        let mut coeffs = vec![0u8; e + 1];
        coeffs[e] = c.encoded() as u8;
        FqPoly {
            field: Arc::clone(c.field()),
            coeffs,
        }
    }

    fn trim(&mut self) {
        while self.coeffs.last() == Some(&0) {
            self.coeffs.pop();
        }
    }

    pub fn field(&self) -> &Arc<FqField> {
        &self.field
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs == [1]
    }

    /// None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> FqElem {
        match self.coeffs.get(i) {
            Some(&c) => self.field.elem(c as u32),
            None => self.field.zero(),
        }
    }

    pub fn leading(&self) -> FqElem {
        match self.coeffs.last() {
            Some(&c) => self.field.elem(c as u32),
            None => self.field.zero(),
        }
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last() == Some(&1)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn make_monic(&self) -> FqPoly {
        if self.is_zero() || self.is_monic() {
            return self.clone();
        }
        let inv = self.leading().inv().unwrap();
        self.scale(&inv)
    }

    pub fn scale(&self, c: &FqElem) -> FqPoly {
        if c.is_zero() {
            return FqPoly::zero(&self.field);
        }
        let mut out = self.clone();
        for v in out.coeffs.iter_mut() {
            *v = (&self.field.elem(*v as u32) * c).encoded() as u8;
        }
        out.trim();
        out
    }

    fn check(&self, other: &FqPoly) {
        assert!(
            self.field.same_field(&other.field),
            "field mismatch in polynomial arithmetic"
        );
    }

    /// Euclidean division: self = q*g + r with deg r < deg g.
    pub fn divmod(&self, g: &FqPoly) -> Result<(FqPoly, FqPoly)> {
        self.check(g);
        if g.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let dg = g.degree().unwrap();
        let mut r = self.clone();
        let mut q = FqPoly::zero(&self.field);
        let lead_inv = g.leading().inv().unwrap();
        while let Some(dr) = r.degree() {
            if dr < dg {
                break;
            }
            let c = &r.leading() * &lead_inv;
            let shift = dr - dg;
            // r -= c * t^shift * g; q += c * t^shift
            if q.coeffs.len() < shift + 1 {
                q.coeffs.resize(shift + 1, 0);
            }
            let qc = &self.field.elem(q.coeffs[shift] as u32) + &c;
            q.coeffs[shift] = qc.encoded() as u8;
            for i in 0..=dg {
                let sub = &c * &g.coeff(i);
                let cur = r.coeff(shift + i);
                r.coeffs[shift + i] = (&cur - &sub).encoded() as u8;
            }
            r.trim();
        }
        q.trim();
        Ok((q, r))
    }

    pub fn rem(&self, g: &FqPoly) -> Result<FqPoly> {
        Ok(self.divmod(g)?.1)
    }

    pub fn divides(&self, other: &FqPoly) -> bool {
        !self.is_zero() && other.rem(self).map(|r| r.is_zero()).unwrap_or(false)
    }

    /// Monic gcd.
    pub fn gcd(&self, other: &FqPoly) -> FqPoly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b).unwrap();
            a = b;
            b = r;
        }
        a.make_monic()
    }

    /// Extended gcd: returns (g, s, u) with g = s*self + u*other, g monic.
    pub fn xgcd(&self, other: &FqPoly) -> (FqPoly, FqPoly, FqPoly) {
        let (mut r0, mut r1) = (self.clone(), other.clone());
        let (mut s0, mut s1) = (FqPoly::one(&self.field), FqPoly::zero(&self.field));
        let (mut u0, mut u1) = (FqPoly::zero(&self.field), FqPoly::one(&self.field));
        while !r1.is_zero() {
            let (q, r) = r0.divmod(&r1).unwrap();
            let s = &s0 - &(&q * &s1);
            let u = &u0 - &(&q * &u1);
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s;
            u0 = u1;
            u1 = u;
        }
        if r0.is_zero() {
            return (r0, s0, u0);
        }
        let c = r0.leading().inv().unwrap();
        (r0.scale(&c), s0.scale(&c), u0.scale(&c))
    }

    pub fn eval(&self, x: &FqElem) -> FqElem {
        let mut acc = self.field.zero();
        for &c in self.coeffs.iter().rev() {
            acc = &(&acc * x) + &self.field.elem(c as u32);
        }
        acc
    }

    pub fn pow(&self, e: u64) -> FqPoly {
        let mut result = FqPoly::one(&self.field);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// self^(p^e): Frobenius power by coefficient powering and index dilation.
    pub fn frobenius_pow(&self, e: u32) -> FqPoly {
        if self.is_zero() || e == 0 {
            return self.clone();
        }
        let p = self.field.p() as usize;
        let mut cur = self.clone();
        for _ in 0..e {
            let mut coeffs = vec![0u8; (cur.coeffs.len() - 1) * p + 1];
            for (i, &c) in cur.coeffs.iter().enumerate() {
                if c != 0 {
                    coeffs[i * p] = cur.field.elem(c as u32).pow(p as u64).encoded() as u8;
                }
            }
            cur = FqPoly {
                field: Arc::clone(&cur.field),
                coeffs,
            };
        }
        cur
    }

    /// self^(q^e) = Frobenius to the k*e.
    pub fn q_power(&self, e: u32) -> FqPoly {
        self.frobenius_pow(e * self.field.extension_degree())
    }

    /// Multiplicity of the factor `pi` in self (0 for coprime; self nonzero).
    pub fn multiplicity(&self, pi: &FqPoly) -> u32 {
        assert!(!self.is_zero() && !pi.is_constant());
        let mut n = 0;
        let mut cur = self.clone();
        loop {
            let (q, r) = cur.divmod(pi).unwrap();
            if !r.is_zero() {
                return n;
            }
            n += 1;
            cur = q;
        }
    }

    /// Rabin irreducibility test over F_q.
    pub fn is_irreducible(&self) -> bool {
        let d = match self.degree() {
            None | Some(0) => return false,
            Some(d) => d as u32,
        };
        if d == 1 {
            return true;
        }
        let q = self.field.order() as u128;
        let me = self.make_monic();
        let xq = |e: u32| -> FqPoly {
            let mut exp: u128 = 1;
            for _ in 0..e {
                exp *= q;
            }
            let mut result = FqPoly::one(&self.field);
            let mut base = FqPoly::var(&self.field).rem(&me).unwrap();
            let mut exp = exp;
            while exp > 0 {
                if exp & 1 == 1 {
                    result = (&result * &base).rem(&me).unwrap();
                }
                base = (&base * &base).rem(&me).unwrap();
                exp >>= 1;
            }
            result
        };
        let x_red = FqPoly::var(&self.field).rem(&me).unwrap();
        if xq(d) != x_red {
            return false;
        }
        let mut rem = d;
        let mut l = 2u32;
        let mut prime_divs = Vec::new();
        while l * l <= rem {
            if rem % l == 0 {
                prime_divs.push(l);
                while rem % l == 0 {
                    rem /= l;
                }
            }
            l += 1;
        }
        if rem > 1 {
            prime_divs.push(rem);
        }
        for l in prime_divs {
            let g = &xq(d / l) - &x_red;
            if !g.gcd(&me).is_one() {
                return false;
            }
        }
        true
    }

    /// Position in the canonical base-q enumeration.
    pub fn counter_index(&self) -> u128 {
        let q = self.field.order() as u128;
        let mut n: u128 = 0;
        for &c in self.coeffs.iter().rev() {
            n = n
                .checked_mul(q)
                .and_then(|n| n.checked_add(c as u128))
                .expect("counter index overflow");
        }
        n
    }

    /// Inverse of `counter_index`.
    pub fn from_counter_index(field: &Arc<FqField>, mut n: u128) -> FqPoly {
        let q = field.order() as u128;
        let mut coeffs = Vec::new();
        while n > 0 {
            coeffs.push((n % q) as u8);
            n /= q;
        }
        FqPoly {
            field: Arc::clone(field),
            coeffs,
        }
    }
}

/// All q^(max_deg+1) polynomials of degree <= max_deg, in counter order.
pub fn enumerate_polys(field: &Arc<FqField>, max_deg: usize) -> impl Iterator<Item = FqPoly> {
    let q = field.order() as u128;
    let count = q
        .checked_pow((max_deg + 1) as u32)
        .expect("enumeration bound overflow");
    let field = Arc::clone(field);
    (0..count).map(move |n| FqPoly::from_counter_index(&field, n))
}

/// All monic polynomials of degree exactly d, in counter order of the lower part.
pub fn monic_polys(field: &Arc<FqField>, d: usize) -> impl Iterator<Item = FqPoly> {
    let q = field.order() as u128;
    let count = q.checked_pow(d as u32).expect("enumeration bound overflow");
    let field = Arc::clone(field);
    (0..count).map(move |n| {
        let mut p = FqPoly::from_counter_index(&field, n);
        p.coeffs.resize(d + 1, 0);
        p.coeffs[d] = 1;
        p
    })
}

/// The monic irreducible polynomials of degree d, sorted canonically.
pub fn irreducible_monics(field: &Arc<FqField>, d: usize) -> Result<Vec<FqPoly>> {
    if d == 0 {
        return Err(Error::InvalidArgument(
            "irreducible_monics requires degree >= 1".into(),
        ));
    }
    Ok(monic_polys(field, d).filter(|p| p.is_irreducible()).collect())
}

/// Factor a nonzero polynomial into monic irreducibles with multiplicities,
/// sorted canonically, together with the leading unit.
///
/// Trial division in enumeration order: once all factors of smaller degree
/// are stripped, any monic divisor of the remainder is automatically
/// irreducible, so no irreducibility filter is needed.
pub fn factor(poly: &FqPoly) -> (FqElem, Vec<(FqPoly, u32)>) {
    assert!(!poly.is_zero(), "cannot factor the zero polynomial");
    let unit = poly.leading();
    let mut rest = poly.make_monic();
    let mut factors = Vec::new();
    let mut d = 1usize;
    while rest.degree().unwrap_or(0) >= 2 * d {
        for cand in monic_polys(poly.field(), d) {
            if cand.divides(&rest) {
                let mut mult = 0;
                loop {
                    let (q, r) = rest.divmod(&cand).unwrap();
                    if !r.is_zero() {
                        break;
                    }
                    rest = q;
                    mult += 1;
                }
                factors.push((cand, mult));
            }
            if rest.degree().unwrap_or(0) < 2 * d {
                break;
            }
        }
        d += 1;
    }
    if !rest.is_one() {
        factors.push((rest, 1));
    }
    factors.sort_by(|a, b| a.0.cmp(&b.0));
    (unit, factors)
}

impl PartialEq for FqPoly {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs && self.field.same_field(&other.field)
    }
}
impl Eq for FqPoly {}

impl Hash for FqPoly {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.coeffs.hash(state);
    }
}

impl PartialOrd for FqPoly {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FqPoly {
    /// Canonical order: degree first, then coefficients from the top down.
    /// Agrees with `counter_index`.
    fn cmp(&self, other: &Self) -> Ordering {
        self.coeffs
            .len()
            .cmp(&other.coeffs.len())
            .then_with(|| self.coeffs.iter().rev().cmp(other.coeffs.iter().rev()))
    }
}

impl Add for &FqPoly {
    type Output = FqPoly;
    fn add(self, rhs: &FqPoly) -> FqPoly {
        self.check(rhs);
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut coeffs = Vec::with_capacity(n);
        for i in 0..n {
            coeffs.push((&self.coeff(i) + &rhs.coeff(i)).encoded() as u8);
        }
        let mut out = FqPoly {
            field: Arc::clone(&self.field),
            coeffs,
        };
        out.trim();
        out
    }
}

impl Sub for &FqPoly {
    type Output = FqPoly;
    fn sub(self, rhs: &FqPoly) -> FqPoly {
        self + &(-rhs)
    }
}

impl Neg for &FqPoly {
    type Output = FqPoly;
    fn neg(self) -> FqPoly {
        let mut out = self.clone();
        for v in out.coeffs.iter_mut() {
            *v = (-&self.field.elem(*v as u32)).encoded() as u8;
        }
        out
    }
}

impl Mul for &FqPoly {
    type Output = FqPoly;
    fn mul(self, rhs: &FqPoly) -> FqPoly {
        self.check(rhs);
        if self.is_zero() || rhs.is_zero() {
            return FqPoly::zero(&self.field);
        }
        let mut coeffs = vec![0u8; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            let ae = self.field.elem(a as u32);
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                if b == 0 {
                    continue;
                }
                let prod = &ae * &self.field.elem(b as u32);
                let cur = self.field.elem(coeffs[i + j] as u32);
                coeffs[i + j] = (&cur + &prod).encoded() as u8;
            }
        }
        let mut out = FqPoly {
            field: Arc::clone(&self.field),
            coeffs,
        };
        out.trim();
        out
    }
}

macro_rules! forward_poly_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for FqPoly {
            type Output = FqPoly;
            fn $method(self, rhs: FqPoly) -> FqPoly {
                (&self).$method(&rhs)
            }
        }
    };
}
forward_poly_binop!(Add, add);
forward_poly_binop!(Sub, sub);
forward_poly_binop!(Mul, mul);

impl Neg for FqPoly {
    type Output = FqPoly;
    fn neg(self) -> FqPoly {
        -&self
    }
}

impl fmt::Debug for FqPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for FqPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for i in (0..self.coeffs.len()).rev() {
            let c = self.coeff(i);
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, "+")?;
            }
            first = false;
            match (i, c.is_one()) {
                (0, _) => write!(f, "{c}")?,
                (1, true) => write!(f, "t")?,
                (1, false) => write!(f, "{c}*t")?,
                (_, true) => write!(f, "t^{i}")?,
                (_, false) => write!(f, "{c}*t^{i}")?,
            }
        }
        Ok(())
    }
}
