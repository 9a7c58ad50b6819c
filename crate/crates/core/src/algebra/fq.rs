//! The coefficient field F_q, q = p^k.
//!
//! Elements are encoded as a single byte: the polynomial
//! c_0 + c_1 x + ... + c_{k-1} x^{k-1} over F_p (reduced modulo a fixed monic
//! irreducible conductor of degree k) is stored as the integer
//! sum c_i p^i < q <= 256. All arithmetic is table lookup; the tables are
//! built once per field and shared behind an `Arc`.
//!
//! For k = 1 the field is the prime field and the conductor is just `x`.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use crate::error::{Error, Result};

/// Fixed conductor choices for the extension fields with p^k <= 256.
///
/// Coefficients are listed ascending, c_0 ..= c_k, over F_p. Each entry is
/// re-checked for irreducibility at construction time.
const CONDUCTORS: &[(u32, u32, &[u32])] = &[
    (2, 2, &[1, 1, 1]),
    (2, 3, &[1, 1, 0, 1]),
    (2, 4, &[1, 1, 0, 0, 1]),
    (2, 5, &[1, 0, 1, 0, 0, 1]),
    (2, 6, &[1, 1, 0, 1, 1, 0, 1]),
    (2, 7, &[1, 1, 0, 0, 0, 0, 0, 1]),
    (2, 8, &[1, 0, 1, 1, 1, 0, 0, 0, 1]),
    (3, 2, &[2, 2, 1]),
    (3, 3, &[1, 2, 0, 1]),
    (3, 4, &[2, 0, 0, 2, 1]),
    (3, 5, &[1, 2, 0, 0, 0, 1]),
    (5, 2, &[2, 4, 1]),
    (5, 3, &[3, 3, 0, 1]),
    (7, 2, &[3, 6, 1]),
    (11, 2, &[2, 7, 1]),
    (13, 2, &[2, 12, 1]),
];

/// A finite field of order q = p^k <= 256 with fixed representation.
pub struct FqField {
    p: u32,
    k: u32,
    q: u32,
    conductor: Vec<u32>,
    add_table: Vec<u8>,
    mul_table: Vec<u8>,
    neg_table: Vec<u8>,
    inv_table: Vec<u8>,
    /// Multiplicative generator (encoded); powers g^0 .. g^{q-2}.
    gen_val: u8,
    gen_pows: Vec<u8>,
    /// dlog[v] = i with g^i = v for v != 0; dlog[0] unused.
    dlog: Vec<u16>,
}

impl fmt::Debug for FqField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FqField(q={}, p={}, k={})", self.q, self.p, self.k)
    }
}

impl PartialEq for FqField {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.k == other.k && self.conductor == other.conductor
    }
}
impl Eq for FqField {}

impl Hash for FqField {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.p.hash(state);
        self.k.hash(state);
        self.conductor.hash(state);
    }
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

// ---- polynomial helpers over F_p used only for field construction ----

fn fp_trim(v: &mut Vec<u32>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn fp_mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u32; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + ai * bj) % p;
        }
    }
    fp_trim(&mut out);
    out
}

fn fp_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r: Vec<u32> = a.to_vec();
    fp_trim(&mut r);
    let dm = m.len() - 1;
    let lead_inv = fp_inv_scalar(m[dm], p);
    while r.len() > dm {
        let dr = r.len() - 1;
        let c = (r[dr] * lead_inv) % p;
        for i in 0..=dm {
            let idx = dr - dm + i;
            r[idx] = (r[idx] + p - (c * m[i]) % p) % p;
        }
        fp_trim(&mut r);
    }
    r
}

fn fp_inv_scalar(a: u32, p: u32) -> u32 {
    // Fermat; p is small.
    let mut r = 1u32;
    let mut base = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = (r * base) % p;
        }
        base = (base * base) % p;
        e >>= 1;
    }
    r
}

fn fp_gcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    fp_trim(&mut a);
    fp_trim(&mut b);
    while !b.is_empty() {
        let r = fp_rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

/// x^(p^e) mod m, by square-and-multiply with exponent p^e as u128.
fn fp_xpow(p: u32, e: u32, m: &[u32], modulus_p: u32) -> Vec<u32> {
    let mut exp: u128 = 1;
    for _ in 0..e {
        exp *= p as u128;
    }
    let mut result = vec![1u32];
    let mut base = fp_rem(&[0, 1], m, modulus_p);
    while exp > 0 {
        if exp & 1 == 1 {
            result = fp_rem(&fp_mul(&result, &base, modulus_p), m, modulus_p);
        }
        base = fp_rem(&fp_mul(&base, &base, modulus_p), m, modulus_p);
        exp >>= 1;
    }
    result
}

/// Rabin irreducibility test for a monic polynomial over F_p.
fn fp_is_irreducible(f: &[u32], p: u32) -> bool {
    let d = (f.len() - 1) as u32;
    if d == 0 {
        return false;
    }
    if d == 1 {
        return true;
    }
    // x^(p^d) == x (mod f)
    let xpd = fp_xpow(p, d, f, p);
    let x_red = fp_rem(&[0, 1], f, p);
    if xpd != x_red {
        return false;
    }
    // gcd(x^(p^(d/l)) - x, f) = 1 for every prime l | d
    let mut rem = d;
    let mut l = 2;
    while l * l <= rem {
        if rem % l == 0 {
            let mut g = fp_xpow(p, d / l, f, p);
            // g -= x
            if g.len() < 2 {
                g.resize(2, 0);
            }
            g[1] = (g[1] + p - 1) % p;
            fp_trim(&mut g);
            let gc = fp_gcd(&g, f, p);
            if gc.len() != 1 {
                return false;
            }
            while rem % l == 0 {
                rem /= l;
            }
        }
        l += 1;
    }
    if rem > 1 {
        let mut g = fp_xpow(p, d / rem, f, p);
        if g.len() < 2 {
            g.resize(2, 0);
        }
        g[1] = (g[1] + p - 1) % p;
        fp_trim(&mut g);
        let gc = fp_gcd(&g, f, p);
        if gc.len() != 1 {
            return false;
        }
    }
    true
}

impl FqField {
    /// Build F_{p^k} from an explicit conductor (ascending coefficients c_0..c_k).
    ///
    /// `conductor = None` selects the built-in table entry (or `x` when k = 1).
    pub fn new(p: u32, k: u32, conductor: Option<Vec<u32>>) -> Result<Arc<FqField>> {
        if !is_prime(p) {
            return Err(Error::InvalidField(format!("p = {p} is not prime")));
        }
        if k == 0 || k > 8 {
            return Err(Error::InvalidField(format!("k = {k} out of range 1..=8")));
        }
        let q = (p as u64).checked_pow(k).filter(|&q| q <= 256).ok_or_else(|| {
            Error::InvalidField(format!("q = {p}^{k} exceeds 256"))
        })? as u32;

        let conductor: Vec<u32> = match conductor {
            Some(c) => {
                let mut c: Vec<u32> = c.iter().map(|&x| x % p).collect();
                fp_trim(&mut c);
                c
            }
            None => {
                if k == 1 {
                    vec![0, 1]
                } else {
                    CONDUCTORS
                        .iter()
                        .find(|&&(tp, tk, _)| tp == p && tk == k)
                        .map(|&(_, _, c)| c.to_vec())
                        .ok_or_else(|| {
                            Error::InvalidField(format!("no built-in conductor for p={p}, k={k}"))
                        })?
                }
            }
        };
        if conductor.len() != (k + 1) as usize {
            return Err(Error::InvalidField(format!(
                "conductor must have degree {k}"
            )));
        }
        if *conductor.last().unwrap() != 1 {
            return Err(Error::InvalidField("conductor must be monic".into()));
        }
        if k > 1 && !fp_is_irreducible(&conductor, p) {
            return Err(Error::InvalidField(
                "conductor is reducible over F_p".into(),
            ));
        }

        let qs = q as usize;
        let decode = |v: u32| -> Vec<u32> {
            let mut digits = Vec::with_capacity(k as usize);
            let mut v = v;
            for _ in 0..k {
                digits.push(v % p);
                v /= p;
            }
            digits
        };
        let encode = |poly: &[u32]| -> u32 {
            let mut v = 0u32;
            for (i, &c) in poly.iter().enumerate() {
                v += (c % p) * p.pow(i as u32);
            }
            v
        };

        let mut add_table = vec![0u8; qs * qs];
        let mut mul_table = vec![0u8; qs * qs];
        let mut neg_table = vec![0u8; qs];
        for a in 0..q {
            let da = decode(a);
            let neg: Vec<u32> = da.iter().map(|&c| (p - c) % p).collect();
            neg_table[a as usize] = encode(&neg) as u8;
            for b in 0..q {
                let db = decode(b);
                let sum: Vec<u32> = da.iter().zip(&db).map(|(&x, &y)| (x + y) % p).collect();
                add_table[(a * q + b) as usize] = encode(&sum) as u8;
                let mut prod = fp_mul(&da, &db, p);
                if k > 1 {
                    prod = fp_rem(&prod, &conductor, p);
                }
                prod.resize(k as usize, 0);
                mul_table[(a * q + b) as usize] = encode(&prod) as u8;
            }
        }
        let mut inv_table = vec![0u8; qs];
        for a in 1..q {
            for b in 1..q {
                if mul_table[(a * q + b) as usize] == 1 {
                    inv_table[a as usize] = b as u8;
                    break;
                }
            }
        }

        // Multiplicative generator: smallest encoded nonzero value of order q-1.
        let order = |a: u32| -> u32 {
            let mut n = 1u32;
            let mut cur = a;
            while cur != 1 {
                cur = mul_table[(cur * q + a) as usize] as u32;
                n += 1;
            }
            n
        };
        let mut gen_val = 1u32;
        for a in 1..q {
            if order(a) == q - 1 {
                gen_val = a;
                break;
            }
        }
        let mut gen_pows = Vec::with_capacity((q - 1) as usize);
        let mut dlog = vec![0u16; qs];
        let mut cur = 1u32;
        for i in 0..(q - 1) {
            gen_pows.push(cur as u8);
            dlog[cur as usize] = i as u16;
            cur = mul_table[(cur * q + gen_val) as usize] as u32;
        }

        Ok(Arc::new(FqField {
            p,
            k,
            q,
            conductor,
            add_table,
            mul_table,
            neg_table,
            inv_table,
            gen_val: gen_val as u8,
            gen_pows,
            dlog,
        }))
    }

    /// The prime field F_p.
    pub fn prime(p: u32) -> Result<Arc<FqField>> {
        FqField::new(p, 1, None)
    }

    /// F_q for a prime power q, using the built-in conductor.
    pub fn with_order(q: u32) -> Result<Arc<FqField>> {
        if q < 2 {
            return Err(Error::InvalidField(format!("q = {q} is not a prime power")));
        }
        let mut p = 2;
        while q % p != 0 {
            p += 1;
            if p * p > q {
                p = q;
                break;
            }
        }
        let mut k = 0;
        let mut rest = q;
        while rest % p == 0 {
            rest /= p;
            k += 1;
        }
        if rest != 1 {
            return Err(Error::InvalidField(format!("q = {q} is not a prime power")));
        }
        FqField::new(p, k, None)
    }

    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn extension_degree(&self) -> u32 {
        self.k
    }
    pub fn order(&self) -> u32 {
        self.q
    }
    /// Conductor coefficients, ascending, over F_p.
    pub fn conductor(&self) -> &[u32] {
        &self.conductor
    }

    pub fn elem(self: &Arc<Self>, encoded: u32) -> FqElem {
        assert!(encoded < self.q, "encoded value {} out of range", encoded);
        FqElem {
            field: Arc::clone(self),
            val: encoded as u8,
        }
    }

    pub fn zero(self: &Arc<Self>) -> FqElem {
        self.elem(0)
    }

    pub fn one(self: &Arc<Self>) -> FqElem {
        self.elem(1)
    }

    /// Integer reduced mod p, embedded via the prime subfield.
    pub fn from_int(self: &Arc<Self>, n: i64) -> FqElem {
        let r = n.rem_euclid(self.p as i64) as u32;
        self.elem(r)
    }

    /// The fixed multiplicative generator of F_q^*.
    pub fn generator(self: &Arc<Self>) -> FqElem {
        self.elem(self.gen_val as u32)
    }

    /// g^i for the fixed generator g.
    pub fn generator_pow(self: &Arc<Self>, i: u32) -> FqElem {
        let e = i % (self.q - 1);
        self.elem(self.gen_pows[e as usize] as u32)
    }

    /// All field elements in encoded order.
    pub fn elements(self: &Arc<Self>) -> impl Iterator<Item = FqElem> {
        let field = Arc::clone(self);
        (0..self.q).map(move |v| field.elem(v))
    }

    pub fn same_field(&self, other: &FqField) -> bool {
        std::ptr::eq(self, other) || self == other
    }
}

/// An element of F_q. Cheap to clone; carries its field.
#[derive(Clone)]
pub struct FqElem {
    field: Arc<FqField>,
    val: u8,
}

impl FqElem {
    pub fn field(&self) -> &Arc<FqField> {
        &self.field
    }

    /// Encoded byte value (base-p digit expansion of the representative).
    pub fn encoded(&self) -> u32 {
        self.val as u32
    }

    pub fn is_zero(&self) -> bool {
        self.val == 0
    }

    pub fn is_one(&self) -> bool {
        self.val == 1
    }

    pub fn inv(&self) -> Result<FqElem> {
        if self.val == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(FqElem {
            field: Arc::clone(&self.field),
            val: self.field.inv_table[self.val as usize],
        })
    }

    pub fn pow(&self, e: u64) -> FqElem {
        if self.val == 0 {
            return if e == 0 {
                self.field.one()
            } else {
                self.field.zero()
            };
        }
        // Reduce the exponent in the cyclic group of order q-1.
        let m = (self.field.q - 1) as u64;
        let e = (e % m) as u32;
        let i = self.field.dlog[self.val as usize] as u32;
        let idx = ((i as u64 * e as u64) % m as u64) as usize;
        FqElem {
            field: Arc::clone(&self.field),
            val: self.field.gen_pows[idx],
        }
    }

    /// Discrete log with respect to the fixed generator; None for zero.
    pub fn dlog(&self) -> Option<u32> {
        if self.val == 0 {
            None
        } else {
            Some(self.field.dlog[self.val as usize] as u32)
        }
    }

    fn check(&self, other: &FqElem) {
        assert!(
            self.field.same_field(&other.field),
            "field mismatch: {:?} vs {:?}",
            self.field,
            other.field
        );
    }
}

impl PartialEq for FqElem {
    fn eq(&self, other: &Self) -> bool {
        self.val == other.val && self.field.same_field(&other.field)
    }
}
impl Eq for FqElem {}

impl Hash for FqElem {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.val.hash(state);
    }
}

impl fmt::Debug for FqElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for FqElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.field.k == 1 {
            return write!(f, "{}", self.val);
        }
        match self.dlog() {
            None => write!(f, "0"),
            Some(0) => write!(f, "1"),
            Some(1) => write!(f, "g"),
            Some(i) => write!(f, "g^{i}"),
        }
    }
}

impl Add for &FqElem {
    type Output = FqElem;
    fn add(self, rhs: &FqElem) -> FqElem {
        self.check(rhs);
        let q = self.field.q;
        FqElem {
            field: Arc::clone(&self.field),
            val: self.field.add_table[(self.val as u32 * q + rhs.val as u32) as usize],
        }
    }
}

impl Sub for &FqElem {
    type Output = FqElem;
    fn sub(self, rhs: &FqElem) -> FqElem {
        self + &(-rhs)
    }
}

impl Mul for &FqElem {
    type Output = FqElem;
    fn mul(self, rhs: &FqElem) -> FqElem {
        self.check(rhs);
        let q = self.field.q;
        FqElem {
            field: Arc::clone(&self.field),
            val: self.field.mul_table[(self.val as u32 * q + rhs.val as u32) as usize],
        }
    }
}

impl Div for &FqElem {
    type Output = FqElem;
    fn div(self, rhs: &FqElem) -> FqElem {
        self * &rhs.inv().expect("division by zero in F_q")
    }
}

impl Neg for &FqElem {
    type Output = FqElem;
    fn neg(self) -> FqElem {
        FqElem {
            field: Arc::clone(&self.field),
            val: self.field.neg_table[self.val as usize],
        }
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for FqElem {
            type Output = FqElem;
            fn $method(self, rhs: FqElem) -> FqElem {
                (&self).$method(&rhs)
            }
        }
    };
}
forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl Neg for FqElem {
    type Output = FqElem;
    fn neg(self) -> FqElem {
        -&self
    }
}
