//! Places of K = F_q(t): the finite places, one per monic irreducible
//! polynomial, and the place at infinity with v(f/g) = deg g - deg f.
//!
//! The absolute value at a place v is normalized as |x|_v = q^(-deg(v)·v(x)),
//! the unique choice making the product over all places equal 1 with exponent
//! one. Absolute values are kept as integer exponents of q throughout.

pub mod local;

use std::fmt;
use std::sync::Arc;

use crate::algebra::fq::FqField;
use crate::algebra::poly::{factor, FqPoly};
use crate::algebra::ratfunc::RatFunc;
use crate::error::{Error, Result};

pub use local::LocalElem;

/// A valuation value: an integer, or +infinity for the zero element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Valuation {
    Finite(i64),
    Infinity,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinity => None,
        }
    }

    pub fn is_infinity(self) -> bool {
        matches!(self, Valuation::Infinity)
    }

    /// v >= bound, with +infinity above everything.
    pub fn at_least(self, bound: i64) -> bool {
        match self {
            Valuation::Finite(v) => v >= bound,
            Valuation::Infinity => true,
        }
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        match (self, other) {
            (Valuation::Infinity, Valuation::Infinity) => std::cmp::Ordering::Equal,
            (Valuation::Infinity, _) => std::cmp::Ordering::Greater,
            (_, Valuation::Infinity) => std::cmp::Ordering::Less,
            (Valuation::Finite(a), Valuation::Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinity => write!(f, "+inf"),
        }
    }
}

/// A place of F_q(t).
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Place {
    /// The place at infinity (uniformizer 1/t).
    Infinite(Arc<FqField>),
    /// The place of a monic irreducible polynomial.
    Finite(FqPoly),
}

impl Place {
    pub fn infinite(field: &Arc<FqField>) -> Place {
        Place::Infinite(Arc::clone(field))
    }

    /// Validates that `pi` is monic irreducible.
    pub fn finite(pi: FqPoly) -> Result<Place> {
        if !pi.is_monic() {
            return Err(Error::InvalidPlace(format!("{pi} is not monic")));
        }
        if !pi.is_irreducible() {
            return Err(Error::InvalidPlace(format!("{pi} is not irreducible")));
        }
        Ok(Place::Finite(pi))
    }

    pub fn field(&self) -> &Arc<FqField> {
        match self {
            Place::Infinite(f) => f,
            Place::Finite(pi) => pi.field(),
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Place::Infinite(_))
    }

    /// Residue degree: deg(pi) for finite places, 1 at infinity.
    pub fn degree(&self) -> usize {
        match self {
            Place::Infinite(_) => 1,
            Place::Finite(pi) => pi.degree().unwrap(),
        }
    }

    /// The valuation of x at this place.
    pub fn valuation(&self, x: &RatFunc) -> Valuation {
        if x.is_zero() {
            return Valuation::Infinity;
        }
        match self {
            Place::Infinite(_) => {
                let dn = x.numerator().degree().unwrap() as i64;
                let dd = x.denominator().degree().unwrap() as i64;
                Valuation::Finite(dd - dn)
            }
            Place::Finite(pi) => {
                let vn = x.numerator().multiplicity(pi) as i64;
                // num and den are coprime, so at most one multiplicity is nonzero.
                if vn > 0 {
                    return Valuation::Finite(vn);
                }
                Valuation::Finite(-(x.denominator().multiplicity(pi) as i64))
            }
        }
    }

    /// |x|_v as the exponent e with |x|_v = q^e; None encodes |0|_v = 0.
    pub fn abs_exponent(&self, x: &RatFunc) -> Option<i64> {
        match self.valuation(x) {
            Valuation::Infinity => None,
            Valuation::Finite(v) => Some(-(self.degree() as i64) * v),
        }
    }
}

impl fmt::Debug for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Infinite(_) => write!(f, "inf"),
            Place::Finite(pi) => write!(f, "{pi}"),
        }
    }
}

/// The finitely many places where |x|_v != 1, with their valuations.
///
/// Sorted: finite places in canonical polynomial order, then infinity.
pub fn support(x: &RatFunc) -> Result<Vec<(Place, i64)>> {
    if x.is_zero() {
        return Err(Error::ZeroArgument("support of zero"));
    }
    let mut out: Vec<(Place, i64)> = Vec::new();
    let (_, num_factors) = factor(x.numerator());
    for (pi, m) in num_factors {
        out.push((Place::Finite(pi), m as i64));
    }
    let (_, den_factors) = factor(x.denominator());
    for (pi, m) in den_factors {
        out.push((Place::Finite(pi), -(m as i64)));
    }
    out.sort_by(|a, b| match (&a.0, &b.0) {
        (Place::Finite(p), Place::Finite(q)) => p.cmp(q),
        _ => unreachable!(),
    });
    let vinf = Place::infinite(x.field()).valuation(x).finite().unwrap();
    if vinf != 0 {
        out.push((Place::infinite(x.field()), vinf));
    }
    Ok(out)
}

/// Checks sum_v deg(v)·v(x) = 0 over the support, i.e. prod_v |x|_v = 1.
pub fn product_formula_check(x: &RatFunc) -> Result<bool> {
    let total: i64 = support(x)?
        .iter()
        .map(|(place, v)| place.degree() as i64 * v)
        .sum();
    Ok(total == 0)
}
