//! Fixed-precision arithmetic in the completion K_v.
//!
//! An element is a truncated Laurent expansion in the uniformizer (pi at a
//! finite place, u = 1/t at infinity) with digits in the residue field:
//! polynomial representatives of degree < deg(pi) at a finite place,
//! constants at infinity. Digits are known for exponents
//! `offset .. offset + digits.len()`; the absolute precision is
//! `offset + digits.len()`, meaning the element is known modulo that power of
//! the uniformizer.
//!
//! Precision propagation: addition keeps the minimum absolute precision;
//! multiplication keeps `min(prec_a + v(b), prec_b + v(a))`, i.e. the minimum
//! relative precision. An element with no known nonzero digit is
//! "zero to precision" (empty digit vector, offset = absolute precision);
//! its valuation is only bounded below.
//!
//! Because digit representatives form an additive group (coefficientwise
//! F_q sums never overflow the degree bound), addition is carry-free; only
//! multiplication generates carries, by division by pi.

use std::fmt;
use std::sync::Arc;

use crate::algebra::fq::FqField;
use crate::algebra::poly::FqPoly;
use crate::algebra::ratfunc::RatFunc;
use crate::error::{Error, Result};
use crate::places::{Place, Valuation};

/// Default number of significant digits for embeddings.
pub const DEFAULT_PRECISION: usize = 64;

#[derive(Clone, PartialEq, Eq)]
pub struct LocalElem {
    place: Place,
    offset: i64,
    digits: Vec<FqPoly>,
}

/// Reduce a polynomial into (digit, carry) at the place: digit has degree
/// < deg(pi) and poly = digit + pi * carry. At infinity digits are constants
/// and products of constants stay constant, so the carry is always zero.
fn reduce_digit(place: &Place, poly: FqPoly) -> (FqPoly, FqPoly) {
    match place {
        Place::Infinite(f) => {
            debug_assert!(poly.is_constant());
            (poly, FqPoly::zero(f))
        }
        Place::Finite(pi) => {
            if poly.degree().map_or(true, |d| d < pi.degree().unwrap()) {
                let zero = FqPoly::zero(pi.field());
                (poly, zero)
            } else {
                let (q, r) = poly.divmod(pi).unwrap();
                (r, q)
            }
        }
    }
}

/// Inverse of a nonzero digit in the residue field.
fn residue_inv(place: &Place, digit: &FqPoly) -> Result<FqPoly> {
    if digit.is_zero() {
        return Err(Error::DivisionByZero);
    }
    match place {
        Place::Infinite(_) => {
            let c = digit.leading().inv()?;
            Ok(FqPoly::constant(&c))
        }
        Place::Finite(pi) => {
            let (g, s, _) = digit.xgcd(pi);
            if !g.is_one() {
                return Err(Error::Internal(format!(
                    "digit {digit} not invertible mod {pi}"
                )));
            }
            Ok(s.rem(pi)?)
        }
    }
}

/// Digits of num/den at a finite-style expansion where pi divides neither
/// num nor den. Exact rational arithmetic; each step peels one digit.
fn expand_unit_digits(num: &FqPoly, den: &FqPoly, pi: &FqPoly, n: usize) -> Vec<FqPoly> {
    let den_inv_mod = {
        let (g, s, _) = den.rem(pi).unwrap().xgcd(pi);
        debug_assert!(g.is_one());
        s.rem(pi).unwrap()
    };
    let mut digits = Vec::with_capacity(n);
    let mut cur = num.clone();
    for _ in 0..n {
        let digit = (&cur.rem(pi).unwrap() * &den_inv_mod).rem(pi).unwrap();
        // (cur - digit*den) is divisible by pi; exact division.
        let next = &cur - &(&digit * den);
        let (q, r) = next.divmod(pi).unwrap();
        debug_assert!(r.is_zero());
        digits.push(digit);
        cur = q;
    }
    digits
}

fn reversed(p: &FqPoly) -> FqPoly {
    let d = p.degree().unwrap();
    let coeffs: Vec<u32> = (0..=d).rev().map(|i| p.coeff(i).encoded()).collect();
    FqPoly::from_encoded(p.field(), &coeffs)
}

impl LocalElem {
    /// The zero-to-precision element: nothing known below `abs_prec`.
    pub fn zero(place: Place, abs_prec: i64) -> LocalElem {
        LocalElem {
            place,
            offset: abs_prec,
            digits: Vec::new(),
        }
    }

    /// Construct from raw parts; digits are reduced and normalized.
    pub fn from_parts(place: Place, offset: i64, digits: Vec<FqPoly>) -> LocalElem {
        let mut carried: Vec<FqPoly> = Vec::with_capacity(digits.len());
        let mut carry = FqPoly::zero(place.field());
        for d in digits {
            let (digit, c) = reduce_digit(&place, &d + &carry);
            carried.push(digit);
            carry = c;
        }
        // A final carry would exceed the known window; drop it with the window.
        let mut out = LocalElem {
            place,
            offset,
            digits: carried,
        };
        out.normalize();
        out
    }

    /// The Laurent expansion of x with `n_digits` significant digits.
    ///
    /// The absolute precision is v(x) + n_digits; for x = 0 it is n_digits.
    pub fn embed(place: &Place, x: &RatFunc, n_digits: usize) -> LocalElem {
        assert!(n_digits >= 1, "embedding needs at least one digit");
        let v = match place.valuation(x) {
            Valuation::Infinity => return LocalElem::zero(place.clone(), n_digits as i64),
            Valuation::Finite(v) => v,
        };
        let digits = match place {
            Place::Finite(pi) => {
                // Peel pi^v so that pi divides neither part.
                let (num, den) = if v >= 0 {
                    let mut num = x.numerator().clone();
                    for _ in 0..v {
                        num = num.divmod(pi).unwrap().0;
                    }
                    (num, x.denominator().clone())
                } else {
                    let mut den = x.denominator().clone();
                    for _ in 0..(-v) {
                        den = den.divmod(pi).unwrap().0;
                    }
                    (x.numerator().clone(), den)
                };
                expand_unit_digits(&num, &den, pi, n_digits)
            }
            Place::Infinite(f) => {
                // Substitute t = 1/s: x becomes s^v * rev(num)/rev(den), and
                // the expansion at infinity is the (s)-adic expansion of the
                // reversed fraction. Its digits are constants.
                let num_r = reversed(x.numerator());
                let den_r = reversed(x.denominator());
                let s = FqPoly::var(f);
                expand_unit_digits(&num_r, &den_r, &s, n_digits)
            }
        };
        let mut out = LocalElem {
            place: place.clone(),
            offset: v,
            digits,
        };
        out.normalize();
        out
    }

    fn normalize(&mut self) {
        let lead = self.digits.iter().position(|d| !d.is_zero());
        match lead {
            None => {
                self.offset += self.digits.len() as i64;
                self.digits.clear();
            }
            Some(0) => {}
            Some(k) => {
                self.offset += k as i64;
                self.digits.drain(..k);
            }
        }
    }

    pub fn place(&self) -> &Place {
        &self.place
    }

    pub fn field(&self) -> &Arc<FqField> {
        self.place.field()
    }

    /// Known modulo uniformizer^abs_prec.
    pub fn abs_prec(&self) -> i64 {
        self.offset + self.digits.len() as i64
    }

    /// Number of known significant digits (0 when zero to precision).
    pub fn rel_prec(&self) -> usize {
        self.digits.len()
    }

    /// Exact valuation, or None when the element is zero to precision.
    pub fn valuation(&self) -> Option<i64> {
        if self.digits.is_empty() {
            None
        } else {
            Some(self.offset)
        }
    }

    /// Largest m with "v(self) >= m" known to hold.
    pub fn val_lower_bound(&self) -> i64 {
        self.offset
    }

    pub fn is_zero_to_prec(&self) -> bool {
        self.digits.is_empty()
    }

    /// Digit at uniformizer exponent `e` (zero below the offset).
    ///
    /// Panics if `e` is at or beyond the absolute precision.
    pub fn digit_at(&self, e: i64) -> FqPoly {
        assert!(e < self.abs_prec(), "digit beyond known precision");
        if e < self.offset {
            FqPoly::zero(self.field())
        } else {
            self.digits[(e - self.offset) as usize].clone()
        }
    }

    pub fn digits(&self) -> &[FqPoly] {
        &self.digits
    }

    fn check_place(&self, other: &LocalElem) {
        assert!(
            self.place == other.place,
            "place mismatch in local arithmetic"
        );
    }

    pub fn add(&self, other: &LocalElem) -> LocalElem {
        self.check_place(other);
        let prec = self.abs_prec().min(other.abs_prec());
        let lo = self.offset.min(other.offset).min(prec);
        let mut digits = Vec::with_capacity((prec - lo) as usize);
        let mut e = lo;
        while e < prec {
            let a = if e < self.offset || e >= self.abs_prec() {
                FqPoly::zero(self.field())
            } else {
                self.digits[(e - self.offset) as usize].clone()
            };
            let b = if e < other.offset || e >= other.abs_prec() {
                FqPoly::zero(self.field())
            } else {
                other.digits[(e - other.offset) as usize].clone()
            };
            digits.push(&a + &b);
            e += 1;
        }
        let mut out = LocalElem {
            place: self.place.clone(),
            offset: lo,
            digits,
        };
        out.normalize();
        out
    }

    pub fn neg(&self) -> LocalElem {
        LocalElem {
            place: self.place.clone(),
            offset: self.offset,
            digits: self.digits.iter().map(|d| -d).collect(),
        }
    }

    pub fn sub(&self, other: &LocalElem) -> LocalElem {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &LocalElem) -> LocalElem {
        self.check_place(other);
        // Result precision: min relative precision, placed at the sum of the
        // valuation lower bounds.
        let prec = (self.abs_prec() + other.val_lower_bound())
            .min(other.abs_prec() + self.val_lower_bound());
        let lo = self.offset + other.offset;
        if self.is_zero_to_prec() || other.is_zero_to_prec() {
            return LocalElem::zero(self.place.clone(), prec);
        }
        let window = (prec - lo) as usize;
        let zero = FqPoly::zero(self.field());
        let mut acc = vec![zero.clone(); window];
        for (i, a) in self.digits.iter().enumerate().take(window) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.digits.iter().enumerate() {
                if i + j >= window {
                    break;
                }
                if b.is_zero() {
                    continue;
                }
                acc[i + j] = &acc[i + j] + &(a * b);
            }
        }
        let mut digits = Vec::with_capacity(window);
        let mut carry = zero;
        for a in acc {
            let (digit, c) = reduce_digit(&self.place, &a + &carry);
            digits.push(digit);
            carry = c;
        }
        let mut out = LocalElem {
            place: self.place.clone(),
            offset: lo,
            digits,
        };
        out.normalize();
        out
    }

    /// Multiply by an exact element of K.
    pub fn scale(&self, k: &RatFunc) -> LocalElem {
        if k.is_zero() {
            // The product is exactly zero; keep a generous sound window.
            return LocalElem::zero(
                self.place.clone(),
                self.abs_prec() + DEFAULT_PRECISION as i64,
            );
        }
        let rel = self.rel_prec().max(1);
        let kv = LocalElem::embed(&self.place, k, rel);
        self.mul(&kv)
    }

    /// Inverse by digitwise long division against the leading digit.
    pub fn inv(&self) -> Result<LocalElem> {
        if self.is_zero_to_prec() {
            return Err(Error::PrecisionExhausted);
        }
        let rel = self.rel_prec();
        let lead_inv = residue_inv(&self.place, &self.digits[0])?;
        // Remainder starts as 1; invariant: value = (1 - a_unit * b_partial) / pi^j.
        let mut rem: Vec<FqPoly> = vec![FqPoly::zero(self.field()); rel];
        rem[0] = FqPoly::one(self.field());
        let mut digits = Vec::with_capacity(rel);
        for j in 0..rel {
            let (b_j, _) = reduce_digit(&self.place, &rem[0] * &lead_inv);
            // rem -= b_j * unit digits, with carries, then shift one digit.
            let window = rel - j;
            let mut carry = FqPoly::zero(self.field());
            let mut scaled = Vec::with_capacity(window);
            for a in self.digits.iter().take(window) {
                let (d, c) = reduce_digit(&self.place, &(a * &b_j) + &carry);
                scaled.push(d);
                carry = c;
            }
            for (r, s) in rem.iter_mut().zip(&scaled) {
                *r = &*r - s;
            }
            debug_assert!(rem[0].is_zero());
            rem.remove(0);
            digits.push(b_j);
        }
        let mut out = LocalElem {
            place: self.place.clone(),
            offset: -self.offset,
            digits,
        };
        out.normalize();
        Ok(out)
    }

    pub fn pow(&self, e: u64) -> LocalElem {
        if e == 0 {
            return LocalElem::embed(&self.place, &RatFunc::one(self.field()), self.rel_prec().max(1));
        }
        let mut result: Option<LocalElem> = None;
        let mut base = self.clone();
        let mut e = e;
        loop {
            if e & 1 == 1 {
                result = Some(match result {
                    None => base.clone(),
                    Some(r) => r.mul(&base),
                });
            }
            e >>= 1;
            if e == 0 {
                break;
            }
            base = base.mul(&base);
        }
        result.unwrap()
    }

    /// Truncate to a smaller absolute precision.
    pub fn truncate(&self, abs_prec: i64) -> LocalElem {
        if abs_prec >= self.abs_prec() {
            return self.clone();
        }
        let keep = (abs_prec - self.offset).max(0) as usize;
        let mut out = LocalElem {
            place: self.place.clone(),
            offset: if keep == 0 { abs_prec } else { self.offset },
            digits: self.digits[..keep].to_vec(),
        };
        out.normalize();
        out
    }

    /// True when the two elements have the same digits on the overlap of
    /// their precision windows.
    pub fn agrees_with(&self, other: &LocalElem) -> bool {
        self.sub(other).is_zero_to_prec()
    }
}

impl fmt::Debug for LocalElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for LocalElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sym = match &self.place {
            Place::Infinite(_) => "u".to_string(),
            Place::Finite(pi) => format!("({pi})"),
        };
        if self.digits.is_empty() {
            return write!(f, "O({sym}^{})", self.abs_prec());
        }
        write!(f, "[")?;
        for (i, d) in self.digits.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, "]*{sym}^{} + O({sym}^{})", self.offset, self.abs_prec())
    }
}
