//! The rational function field K = F_q(t), stored in reduced form.
//!
//! Invariants: denominator monic and nonzero, gcd(num, den) = 1, and the zero
//! element is 0/1. Equality is plain representation equality.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use crate::algebra::fq::{FqElem, FqField};
use crate::algebra::poly::FqPoly;
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq)]
pub struct RatFunc {
    num: FqPoly,
    den: FqPoly,
}

impl RatFunc {
    /// Canonicalize num/den: reduce by the gcd and make the denominator monic.
    pub fn new(num: FqPoly, den: FqPoly) -> Result<RatFunc> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(RatFunc {
                den: FqPoly::one(num.field()),
                num,
            });
        }
        if den.is_one() {
            return Ok(RatFunc { num, den });
        }
        let g = num.gcd(&den);
        let (num, den) = if g.is_one() {
            (num, den)
        } else {
            (num.divmod(&g)?.0, den.divmod(&g)?.0)
        };
        let lc_inv = den.leading().inv()?;
        Ok(RatFunc {
            num: num.scale(&lc_inv),
            den: den.scale(&lc_inv),
        })
    }

    pub fn from_poly(p: FqPoly) -> RatFunc {
        RatFunc {
            den: FqPoly::one(p.field()),
            num: p,
        }
    }

    pub fn from_elem(c: &FqElem) -> RatFunc {
        RatFunc::from_poly(FqPoly::constant(c))
    }

    pub fn zero(field: &Arc<FqField>) -> RatFunc {
        RatFunc::from_poly(FqPoly::zero(field))
    }

    pub fn one(field: &Arc<FqField>) -> RatFunc {
        RatFunc::from_poly(FqPoly::one(field))
    }

    /// The coordinate t.
    pub fn var(field: &Arc<FqField>) -> RatFunc {
        RatFunc::from_poly(FqPoly::var(field))
    }

    pub fn field(&self) -> &Arc<FqField> {
        self.num.field()
    }

    pub fn numerator(&self) -> &FqPoly {
        &self.num
    }

    pub fn denominator(&self) -> &FqPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    /// Some(p) when the denominator is 1.
    pub fn as_poly(&self) -> Option<&FqPoly> {
        if self.den.is_one() {
            Some(&self.num)
        } else {
            None
        }
    }

    pub fn inv(&self) -> Result<RatFunc> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        RatFunc::new(self.den.clone(), self.num.clone())
    }

    /// max(deg num, deg den) on the reduced form; 0 for the zero element.
    pub fn weil_height(&self) -> u64 {
        match self.num.degree() {
            None => 0,
            Some(dn) => dn.max(self.den.degree().unwrap()) as u64,
        }
    }

    pub fn pow(&self, e: i64) -> Result<RatFunc> {
        if e < 0 {
            return self.inv()?.pow(-e);
        }
        let mut result = RatFunc::one(self.field());
        let mut base = self.clone();
        let mut e = e as u64;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        Ok(result)
    }

    /// self^(q^e), via Frobenius dilation on numerator and denominator.
    ///
    /// The reduced form is preserved: coprimality and monicity survive the
    /// q-power Frobenius.
    pub fn q_power(&self, e: u32) -> RatFunc {
        RatFunc {
            num: self.num.q_power(e),
            den: self.den.q_power(e),
        }
    }

    pub fn scale_elem(&self, c: &FqElem) -> RatFunc {
        if c.is_zero() {
            return RatFunc::zero(self.field());
        }
        RatFunc {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }
}

impl Add for &RatFunc {
    type Output = RatFunc;
    fn add(self, rhs: &RatFunc) -> RatFunc {
        let num = &(&self.num * &rhs.den) + &(&rhs.num * &self.den);
        let den = &self.den * &rhs.den;
        RatFunc::new(num, den).unwrap()
    }
}

impl Sub for &RatFunc {
    type Output = RatFunc;
    fn sub(self, rhs: &RatFunc) -> RatFunc {
        self + &(-rhs)
    }
}

impl Mul for &RatFunc {
    type Output = RatFunc;
    fn mul(self, rhs: &RatFunc) -> RatFunc {
        // Cross-reduce before multiplying to keep intermediate degrees low.
        let g1 = self.num.gcd(&rhs.den);
        let g2 = rhs.num.gcd(&self.den);
        let (n1, d2) = if g1.is_one() {
            (self.num.clone(), rhs.den.clone())
        } else {
            (
                self.num.divmod(&g1).unwrap().0,
                rhs.den.divmod(&g1).unwrap().0,
            )
        };
        let (n2, d1) = if g2.is_one() {
            (rhs.num.clone(), self.den.clone())
        } else {
            (
                rhs.num.divmod(&g2).unwrap().0,
                self.den.divmod(&g2).unwrap().0,
            )
        };
        // After cross-reduction all four pairs are coprime, so the product
        // is already in lowest terms with a monic denominator.
        RatFunc {
            num: &n1 * &n2,
            den: &d1 * &d2,
        }
    }
}

impl Div for &RatFunc {
    type Output = RatFunc;
    fn div(self, rhs: &RatFunc) -> RatFunc {
        self * &rhs.inv().expect("division by zero in K")
    }
}

impl Neg for &RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

macro_rules! forward_rat_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for RatFunc {
            type Output = RatFunc;
            fn $method(self, rhs: RatFunc) -> RatFunc {
                (&self).$method(&rhs)
            }
        }
    };
}
forward_rat_binop!(Add, add);
forward_rat_binop!(Sub, sub);
forward_rat_binop!(Mul, mul);
forward_rat_binop!(Div, div);

impl Neg for RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        -&self
    }
}

impl Hash for RatFunc {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.num.hash(state);
        self.den.hash(state);
    }
}

impl PartialOrd for RatFunc {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Representation order (denominator, then numerator); used only to make
/// collections deterministic.
impl Ord for RatFunc {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.den
            .cmp(&other.den)
            .then_with(|| self.num.cmp(&other.num))
    }
}

impl fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> Arc<FqField> {
        FqField::prime(2).unwrap()
    }

    #[test]
    fn normalizes() {
        let f = f2();
        // (t^2 + t)/t -> t + 1
        let num = FqPoly::from_ints(&f, &[0, 1, 1]);
        let den = FqPoly::var(&f);
        let r = RatFunc::new(num, den).unwrap();
        assert_eq!(r.to_string(), "t+1");
        assert!(r.denominator().is_one());
    }

    #[test]
    fn zero_and_identity() {
        let f = f2();
        let z = RatFunc::new(FqPoly::zero(&f), FqPoly::from_ints(&f, &[1, 1])).unwrap();
        assert!(z.is_zero());
        assert!(z.denominator().is_one());
        let t = RatFunc::new(FqPoly::var(&f), FqPoly::one(&f)).unwrap();
        assert_eq!(t, RatFunc::var(&f));
    }

    #[test]
    fn zero_denominator_errors() {
        let f = f2();
        assert_eq!(
            RatFunc::new(FqPoly::var(&f), FqPoly::zero(&f)),
            Err(Error::DivisionByZero)
        );
    }

    #[test]
    fn monic_denominator() {
        let f = FqField::prime(3).unwrap();
        let r = RatFunc::new(FqPoly::one(&f), FqPoly::from_ints(&f, &[0, 2])).unwrap();
        assert!(r.denominator().is_monic());
        // 1/(2t) = 2/t since 2*2 = 1 in F_3
        assert_eq!(r.to_string(), "(2)/(t)");
    }

    #[test]
    fn weil_heights() {
        let f = f2();
        let t = RatFunc::var(&f);
        assert_eq!(t.weil_height(), 1);
        let x = RatFunc::new(FqPoly::from_ints(&f, &[1, 0, 1]), FqPoly::var(&f)).unwrap();
        assert_eq!(x.weil_height(), 2);
        assert_eq!(RatFunc::zero(&f).weil_height(), 0);
    }

    #[test]
    fn q_power_matches_pow() {
        let f = FqField::prime(3).unwrap();
        let x = RatFunc::new(
            FqPoly::from_ints(&f, &[1, 2, 1]),
            FqPoly::from_ints(&f, &[0, 1, 1]),
        )
        .unwrap();
        assert_eq!(x.q_power(1), x.pow(3).unwrap());
        assert_eq!(x.q_power(2), x.pow(9).unwrap());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_rat(q: u32) -> impl Strategy<Value = RatFunc> {
            (
                prop::collection::vec(0u32..q, 0..5),
                prop::collection::vec(0u32..q, 1..5),
            )
                .prop_filter_map("nonzero denominator", move |(n, d)| {
                    let f = FqField::with_order(q).unwrap();
                    let num = FqPoly::from_encoded(&f, &n);
                    let den = FqPoly::from_encoded(&f, &d);
                    RatFunc::new(num, den).ok()
                })
        }

        proptest! {
            #[test]
            fn field_axioms(a in arb_rat(2), b in arb_rat(2), c in arb_rat(2)) {
                prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
                prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
                prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
                prop_assert_eq!(&a + &b, &b + &a);
                if !a.is_zero() {
                    prop_assert!((&a / &a).is_one());
                    prop_assert_eq!(&(&b / &a) * &a, b.clone());
                }
                prop_assert!((&a - &a).is_zero());
            }

            #[test]
            fn frobenius_additive(a in arb_rat(3), b in arb_rat(3)) {
                prop_assert_eq!((&a + &b).q_power(1), &a.q_power(1) + &b.q_power(1));
            }

            #[test]
            fn height_invariant_under_unreduced_forms(a in arb_rat(3), m in 1u32..3) {
                // multiplying num and den by the same polynomial cannot change h
                let f = a.field().clone();
                let extra = FqPoly::from_encoded(&f, &[m % 3, 1]);
                let blown = RatFunc::new(
                    a.numerator() * &extra,
                    a.denominator() * &extra,
                ).unwrap();
                prop_assert_eq!(blown.weil_height(), a.weil_height());
            }
        }
    }
}
