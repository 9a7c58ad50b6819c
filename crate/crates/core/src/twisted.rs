//! The twisted polynomial ring K{tau} and the module structures it induces.
//!
//! tau is the q-power Frobenius; multiplication is composition of additive
//! polynomials, so tau·c = c^q·tau and the product rule for
//! a = sum a_i tau^i, b = sum b_j tau^j reads
//! (ab)_n = sum_{i+j=n} a_i · b_j^(q^i).
//!
//! A module is determined by the image of t: a twisted polynomial with
//! constant coefficient t and positive tau-degree. Ring elements act on K by
//! evaluation of the associated additive polynomial.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::algebra::fq::{FqElem, FqField};
use crate::algebra::poly::FqPoly;
use crate::algebra::ratfunc::RatFunc;
use crate::error::{Error, Result};
use crate::places::{LocalElem, Place, Valuation};

/// Element of K{tau}: coefficients c_0..c_r of sum c_i tau^i, no trailing zeros.
#[derive(Clone, PartialEq, Eq)]
pub struct TwistedPoly {
    field: Arc<FqField>,
    coeffs: Vec<RatFunc>,
}

impl TwistedPoly {
    pub fn zero(field: &Arc<FqField>) -> TwistedPoly {
        TwistedPoly {
            field: Arc::clone(field),
            coeffs: Vec::new(),
        }
    }

    pub fn one(field: &Arc<FqField>) -> TwistedPoly {
        TwistedPoly::constant(RatFunc::one(field))
    }

    pub fn constant(c: RatFunc) -> TwistedPoly {
        let field = Arc::clone(c.field());
        let mut p = TwistedPoly {
            field,
            coeffs: vec![c],
        };
        p.trim();
        p
    }

    /// The Frobenius tau itself.
    pub fn tau(field: &Arc<FqField>) -> TwistedPoly {
        TwistedPoly {
            field: Arc::clone(field),
            coeffs: vec![RatFunc::zero(field), RatFunc::one(field)],
        }
    }

    pub fn from_coeffs(field: &Arc<FqField>, coeffs: Vec<RatFunc>) -> TwistedPoly {
        let mut p = TwistedPoly {
            field: Arc::clone(field),
            coeffs,
        };
        p.trim();
        p
    }

    fn trim(&mut self) {
        while self.coeffs.last().map_or(false, |c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn field(&self) -> &Arc<FqField> {
        &self.field
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// None for the zero element.
    pub fn tau_degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> RatFunc {
        self.coeffs
            .get(i)
            .cloned()
            .unwrap_or_else(|| RatFunc::zero(&self.field))
    }

    pub fn coeffs(&self) -> &[RatFunc] {
        &self.coeffs
    }

    /// Evaluate the additive polynomial: sum c_i x^(q^i).
    pub fn eval(&self, x: &RatFunc) -> RatFunc {
        let mut acc = RatFunc::zero(&self.field);
        let mut xq = x.clone();
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                xq = xq.q_power(1);
            }
            if !c.is_zero() {
                acc = &acc + &(c * &xq);
            }
        }
        acc
    }

    /// Evaluate on a completion element with tracked precision.
    pub fn eval_local(&self, x: &LocalElem) -> LocalElem {
        let q = self.field.order() as u64;
        let mut acc = LocalElem::zero(x.place().clone(), x.abs_prec() + 1);
        let mut xq = x.clone();
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                xq = xq.pow(q);
            }
            if !c.is_zero() {
                acc = acc.add(&xq.scale(c));
            }
        }
        acc
    }
}

impl Add for &TwistedPoly {
    type Output = TwistedPoly;
    fn add(self, rhs: &TwistedPoly) -> TwistedPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|i| &self.coeff(i) + &rhs.coeff(i)).collect();
        TwistedPoly::from_coeffs(&self.field, coeffs)
    }
}

impl Sub for &TwistedPoly {
    type Output = TwistedPoly;
    fn sub(self, rhs: &TwistedPoly) -> TwistedPoly {
        self + &(-rhs)
    }
}

impl Neg for &TwistedPoly {
    type Output = TwistedPoly;
    fn neg(self) -> TwistedPoly {
        TwistedPoly {
            field: Arc::clone(&self.field),
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

/// Twisted product: composition of the additive polynomials.
impl Mul for &TwistedPoly {
    type Output = TwistedPoly;
    fn mul(self, rhs: &TwistedPoly) -> TwistedPoly {
        if self.is_zero() || rhs.is_zero() {
            return TwistedPoly::zero(&self.field);
        }
        let n = self.coeffs.len() + rhs.coeffs.len() - 1;
        let mut coeffs = vec![RatFunc::zero(&self.field); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let term = a * &b.q_power(i as u32);
                coeffs[i + j] = &coeffs[i + j] + &term;
            }
        }
        TwistedPoly::from_coeffs(&self.field, coeffs)
    }
}

macro_rules! forward_tw_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for TwistedPoly {
            type Output = TwistedPoly;
            fn $method(self, rhs: TwistedPoly) -> TwistedPoly {
                (&self).$method(&rhs)
            }
        }
    };
}
forward_tw_binop!(Add, add);
forward_tw_binop!(Sub, sub);
forward_tw_binop!(Mul, mul);

impl Neg for TwistedPoly {
    type Output = TwistedPoly;
    fn neg(self) -> TwistedPoly {
        -&self
    }
}

impl fmt::Debug for TwistedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for TwistedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 if c.is_one() => write!(f, "tau")?,
                1 => write!(f, "({c}) tau")?,
                _ if c.is_one() => write!(f, "tau^{i}")?,
                _ => write!(f, "({c}) tau^{i}")?,
            }
        }
        Ok(())
    }
}

/// A module structure on the additive group, given by the image of t.
#[derive(Clone, PartialEq, Eq)]
pub struct DrinfeldModule {
    phi_t: TwistedPoly,
}

impl DrinfeldModule {
    /// Requires constant coefficient exactly t and tau-degree >= 1.
    pub fn new(phi_t: TwistedPoly) -> Result<DrinfeldModule> {
        let t = RatFunc::var(phi_t.field());
        if phi_t.coeff(0) != t {
            return Err(Error::InvalidModule(
                "constant coefficient of phi_t must be t".into(),
            ));
        }
        if phi_t.tau_degree().unwrap_or(0) < 1 {
            return Err(Error::InvalidModule(
                "phi_t must have tau-degree >= 1".into(),
            ));
        }
        Ok(DrinfeldModule { phi_t })
    }

    /// phi_t = t + tau.
    pub fn carlitz(field: &Arc<FqField>) -> DrinfeldModule {
        let phi_t = TwistedPoly::from_coeffs(
            field,
            vec![RatFunc::var(field), RatFunc::one(field)],
        );
        DrinfeldModule { phi_t }
    }

    pub fn phi_t(&self) -> &TwistedPoly {
        &self.phi_t
    }

    pub fn field(&self) -> &Arc<FqField> {
        self.phi_t.field()
    }

    pub fn rank(&self) -> usize {
        self.phi_t.tau_degree().unwrap()
    }

    /// The image of P under the ring homomorphism: P(phi_t) by Horner.
    ///
    /// Constants in F_q are central in K{tau}, so the evaluation is
    /// well-defined.
    pub fn phi_of(&self, p: &FqPoly) -> TwistedPoly {
        let field = self.field();
        if p.is_zero() {
            return TwistedPoly::zero(field);
        }
        let d = p.degree().unwrap();
        let mut acc = TwistedPoly::constant(RatFunc::from_elem(&p.coeff(d)));
        for i in (0..d).rev() {
            acc = &acc * &self.phi_t;
            let c = p.coeff(i);
            if !c.is_zero() {
                acc = &acc + &TwistedPoly::constant(RatFunc::from_elem(&c));
            }
        }
        acc
    }

    /// One application of phi_t to a point.
    pub fn act_t(&self, x: &RatFunc) -> RatFunc {
        self.phi_t.eval(x)
    }

    /// The action of P: evaluates phi_P at x.
    ///
    /// Computed through the iterates phi_{t^i}(x) and an F_q-linear
    /// combination, which avoids expanding phi_P itself.
    pub fn act(&self, p: &FqPoly, x: &RatFunc) -> RatFunc {
        let field = self.field();
        let mut acc = RatFunc::zero(field);
        let mut y = x.clone();
        let d = match p.degree() {
            None => return acc,
            Some(d) => d,
        };
        for i in 0..=d {
            if i > 0 {
                y = self.act_t(&y);
            }
            let c = p.coeff(i);
            if !c.is_zero() {
                acc = &acc + &y.scale_elem(&c);
            }
        }
        acc
    }

    /// The action of P on a completion element.
    pub fn act_local(&self, p: &FqPoly, x: &LocalElem) -> LocalElem {
        let mut acc = LocalElem::zero(x.place().clone(), x.abs_prec() + 1);
        let mut y = x.clone();
        let d = match p.degree() {
            None => return acc,
            Some(d) => d,
        };
        for i in 0..=d {
            if i > 0 {
                y = self.phi_t.eval_local(&y);
            }
            let c = p.coeff(i);
            if !c.is_zero() {
                acc = acc.add(&y.scale(&RatFunc::from_elem(&c)));
            }
        }
        acc
    }

    /// Monic generator of the annihilator ideal of x, searched up to the
    /// given degree; None if no annihilator of degree <= deg_bound exists.
    ///
    /// None is evidence, not proof, of non-torsion; pair it with
    /// [`DrinfeldModule::canonical_height_estimate`].
    ///
    /// The search finds the first F_q-linear dependence among the iterates
    /// x, phi_t(x), phi_{t^2}(x), ...: the annihilator ideal is generated by
    /// the minimal polynomial of that sequence.
    pub fn is_torsion(&self, x: &RatFunc, deg_bound: usize) -> Option<FqPoly> {
        let field = self.field();
        let mut iterates = vec![x.clone()];
        for n in 0..=deg_bound {
            if let Some(combo) = fq_linear_combination(&iterates[..n], &iterates[n]) {
                // Q = t^n - sum c_i t^i
                let mut coeffs: Vec<u32> = combo.iter().map(|c| (-c).encoded()).collect();
                coeffs.resize(n + 1, 0);
                coeffs[n] = 1;
                return Some(FqPoly::from_encoded(field, &coeffs));
            }
            let next = self.act_t(iterates.last().unwrap());
            iterates.push(next);
        }
        None
    }

    /// Exhaustive cross-check for small bounds: scans every monic Q of degree
    /// <= deg_bound in canonical order and returns the first annihilator.
    pub fn is_torsion_exhaustive(&self, x: &RatFunc, deg_bound: usize) -> Option<FqPoly> {
        let field = self.field();
        for d in 0..=deg_bound {
            for q in crate::algebra::poly::monic_polys(field, d) {
                if self.act(&q, x).is_zero() {
                    return Some(q);
                }
            }
        }
        None
    }

    /// Cheap torsion detector: iterate phi_t and report a cycle. Torsion
    /// orbits are finite, so they cycle within `max_steps` when small;
    /// non-torsion orbits escape the height cap almost immediately, keeping
    /// the scan inexpensive. A false return is evidence, not proof.
    pub fn detect_torsion_by_cycle(&self, x: &RatFunc, max_steps: usize) -> bool {
        let height_cap = 32 * (x.weil_height() + 2);
        let mut seen = vec![x.clone()];
        let mut y = x.clone();
        for _ in 0..max_steps {
            y = self.act_t(&y);
            if seen.contains(&y) {
                return true;
            }
            if y.weil_height() > height_cap {
                return false;
            }
            seen.push(y.clone());
        }
        false
    }

    /// h(phi_{t^n}(x)) / q^(rank·n), the n-th canonical-height quotient.
    ///
    /// When the iterates revisit a value the orbit is finite, the point is
    /// torsion, and the limit is exactly zero, so zero is returned.
    pub fn canonical_height_estimate(&self, x: &RatFunc, n: usize) -> BigRational {
        assert!(n >= 1, "height estimate needs n >= 1");
        let mut seen = vec![x.clone()];
        let mut y = x.clone();
        for _ in 0..n {
            y = self.act_t(&y);
            if seen.contains(&y) {
                return BigRational::zero();
            }
            seen.push(y.clone());
        }
        let h = BigInt::from(y.weil_height());
        let denom = BigInt::from(self.field().order()).pow((self.rank() * n) as u32);
        BigRational::new(h, denom)
    }

    /// True when the height quotient exceeds the threshold at n and n+1.
    pub fn looks_nontorsion(&self, x: &RatFunc, n: usize, threshold: &BigRational) -> bool {
        self.canonical_height_estimate(x, n) > *threshold
            && self.canonical_height_estimate(x, n + 1) > *threshold
    }

    /// Good reduction at v: every coefficient of phi_t is v-integral and the
    /// leading coefficient is a v-unit.
    pub fn good_reduction(&self, v: &Place) -> bool {
        let r = self.rank();
        for (i, c) in self.phi_t.coeffs().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            match v.valuation(c) {
                Valuation::Finite(val) => {
                    if val < 0 || (i == r && val != 0) {
                        return false;
                    }
                }
                Valuation::Infinity => unreachable!("nonzero coefficient"),
            }
        }
        true
    }
}

impl fmt::Debug for DrinfeldModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for DrinfeldModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.phi_t)
    }
}

/// Solve target = sum c_i · basis_i over F_q, viewing elements of K as
/// F_q-vectors via a common denominator. Returns the coefficients.
fn fq_linear_combination(basis: &[RatFunc], target: &RatFunc) -> Option<Vec<FqElem>> {
    let field = target.field();
    if basis.is_empty() {
        return if target.is_zero() { Some(Vec::new()) } else { None };
    }
    // Common denominator via repeated lcm.
    let mut common = FqPoly::one(field);
    for y in basis.iter().chain(std::iter::once(target)) {
        let den = y.denominator();
        let g = common.gcd(den);
        common = &common.divmod(&g).unwrap().0 * den;
    }
    let lift = |y: &RatFunc| -> FqPoly {
        let cof = common.divmod(y.denominator()).unwrap().0;
        y.numerator() * &cof
    };
    let cols: Vec<FqPoly> = basis.iter().map(lift).collect();
    let rhs = lift(target);
    let rows = cols
        .iter()
        .chain(std::iter::once(&rhs))
        .filter_map(|p| p.degree())
        .max()
        .map_or(0, |d| d + 1);

    // Gaussian elimination on the (rows) x (cols+1) system over F_q.
    let ncols = cols.len();
    let mut m: Vec<Vec<FqElem>> = (0..rows)
        .map(|r| {
            let mut row: Vec<FqElem> = cols.iter().map(|c| c.coeff(r)).collect();
            row.push(rhs.coeff(r));
            row
        })
        .collect();
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; ncols];
    let mut next_row = 0;
    for col in 0..ncols {
        let Some(pr) = (next_row..rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(next_row, pr);
        let inv = m[next_row][col].inv().unwrap();
        for v in m[next_row].iter_mut() {
            *v = &*v * &inv;
        }
        for r in 0..rows {
            if r != next_row && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                for cc in 0..=ncols {
                    let sub = &factor * &m[next_row][cc];
                    m[r][cc] = &m[r][cc] - &sub;
                }
            }
        }
        pivot_of_col[col] = Some(next_row);
        next_row += 1;
        if next_row == rows {
            break;
        }
    }
    // Consistency: no pivot in the rhs column.
    for r in 0..rows {
        if m[r][..ncols].iter().all(|v| v.is_zero()) && !m[r][ncols].is_zero() {
            return None;
        }
    }
    let mut combo = vec![field.zero(); ncols];
    for (col, pivot) in pivot_of_col.iter().enumerate() {
        if let Some(r) = pivot {
            combo[col] = m[*r][ncols].clone();
        }
    }
    // Free columns default to zero; underdetermined systems need the
    // verification below.
    let mut acc = RatFunc::zero(field);
    for (c, y) in combo.iter().zip(basis) {
        acc = &acc + &y.scale_elem(c);
    }
    if &acc == target {
        Some(combo)
    } else {
        None
    }
}

/// Coordinate-wise action of a tuple of modules on the product group.
#[derive(Clone)]
pub struct ProductAction {
    modules: Vec<DrinfeldModule>,
}

impl ProductAction {
    pub fn new(modules: Vec<DrinfeldModule>) -> Result<ProductAction> {
        if modules.is_empty() {
            return Err(Error::InvalidModule(
                "a product action needs at least one module".into(),
            ));
        }
        let field = modules[0].field();
        if !modules.iter().all(|m| m.field().same_field(field)) {
            return Err(Error::InvalidModule(
                "all modules must share the coefficient field".into(),
            ));
        }
        Ok(ProductAction { modules })
    }

    pub fn g(&self) -> usize {
        self.modules.len()
    }

    pub fn field(&self) -> &Arc<FqField> {
        self.modules[0].field()
    }

    pub fn module(&self, i: usize) -> &DrinfeldModule {
        &self.modules[i]
    }

    pub fn modules(&self) -> &[DrinfeldModule] {
        &self.modules
    }

    pub fn act(&self, p: &FqPoly, point: &[RatFunc]) -> Result<Vec<RatFunc>> {
        if point.len() != self.g() {
            return Err(Error::DimensionMismatch {
                expected: self.g(),
                actual: point.len(),
            });
        }
        Ok(self
            .modules
            .iter()
            .zip(point)
            .map(|(m, x)| m.act(p, x))
            .collect())
    }

    pub fn good_reduction(&self, v: &Place) -> bool {
        self.modules.iter().all(|m| m.good_reduction(v))
    }

    /// Reorder the coordinates; used to bring a chosen lead coordinate first.
    pub fn permuted(&self, perm: &[usize]) -> ProductAction {
        ProductAction {
            modules: perm.iter().map(|&i| self.modules[i].clone()).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::poly::enumerate_polys;

    fn f2() -> Arc<FqField> {
        FqField::prime(2).unwrap()
    }

    fn rf(f: &Arc<FqField>, coeffs: &[i64]) -> RatFunc {
        RatFunc::from_poly(FqPoly::from_ints(f, coeffs))
    }

    #[test]
    fn identity_multiplication() {
        let f = f2();
        let b = TwistedPoly::from_coeffs(&f, vec![rf(&f, &[0, 1]), rf(&f, &[1, 1])]);
        assert_eq!(&TwistedPoly::one(&f) * &b, b);
    }

    #[test]
    fn commutation_rule() {
        // tau · t = t^q · tau over F_2
        let f = f2();
        let tau = TwistedPoly::tau(&f);
        let t_const = TwistedPoly::constant(RatFunc::var(&f));
        let prod = &tau * &t_const;
        assert!(prod.coeff(0).is_zero());
        assert_eq!(prod.coeff(1), rf(&f, &[0, 0, 1])); // t^2
    }

    #[test]
    fn carlitz_square() {
        // (t + tau)^2 = t^2 + (t + t^2) tau + tau^2 over F_2
        let f = f2();
        let phi = DrinfeldModule::carlitz(&f).phi_t().clone();
        let sq = &phi * &phi;
        assert_eq!(sq.coeff(0), rf(&f, &[0, 0, 1]));
        assert_eq!(sq.coeff(1), rf(&f, &[0, 1, 1]));
        assert!(sq.coeff(2).is_one());
        assert_eq!(sq.tau_degree(), Some(2));
    }

    #[test]
    fn module_constructor_constraints() {
        let f = f2();
        // constant coefficient 1 instead of t
        let bad = TwistedPoly::from_coeffs(&f, vec![rf(&f, &[1]), rf(&f, &[1])]);
        assert!(DrinfeldModule::new(bad).is_err());
        // no tau part
        let flat = TwistedPoly::constant(RatFunc::var(&f));
        assert!(DrinfeldModule::new(flat).is_err());
        assert!(DrinfeldModule::new(DrinfeldModule::carlitz(&f).phi_t().clone()).is_ok());
    }

    #[test]
    fn phi_of_examples() {
        let f = f2();
        let m = DrinfeldModule::carlitz(&f);
        let t = FqPoly::var(&f);
        assert_eq!(&m.phi_of(&t), m.phi_t());
        assert!(m.phi_of(&FqPoly::zero(&f)).is_zero());
        let t2 = &t * &t;
        let sq = m.phi_of(&t2);
        assert_eq!(sq, m.phi_t() * m.phi_t());
    }

    #[test]
    fn act_examples() {
        let f = f2();
        let m = DrinfeldModule::carlitz(&f);
        let t = FqPoly::var(&f);
        // phi_t(1) = t + 1
        assert_eq!(m.act(&t, &RatFunc::one(&f)), rf(&f, &[1, 1]));
        // phi_t(t) = t·t + t^2 = 0 in characteristic 2
        assert!(m.act(&t, &RatFunc::var(&f)).is_zero());
        // phi_P(0) = 0
        let p = FqPoly::from_ints(&f, &[1, 0, 1]);
        assert!(m.act(&p, &RatFunc::zero(&f)).is_zero());
    }

    #[test]
    fn torsion_of_one() {
        let f = f2();
        let m = DrinfeldModule::carlitz(&f);
        let one = RatFunc::one(&f);
        let ann = m.is_torsion(&one, 4).expect("1 is torsion");
        assert_eq!(ann.to_string(), "t^2+t");
        // minimality witnesses
        let t = FqPoly::var(&f);
        assert!(!m.act(&t, &one).is_zero());
        assert!(!m.act(&FqPoly::from_ints(&f, &[1, 1]), &one).is_zero());
        assert!(m.act(&ann, &one).is_zero());
        assert_eq!(m.is_torsion_exhaustive(&one, 4), Some(ann));
    }

    #[test]
    fn torsion_of_zero_is_unit_ideal() {
        let f = f2();
        let m = DrinfeldModule::carlitz(&f);
        assert_eq!(
            m.is_torsion(&RatFunc::zero(&f), 3),
            Some(FqPoly::one(&f))
        );
    }

    #[test]
    fn t_squared_is_not_torsion() {
        let f = f2();
        let m = DrinfeldModule::carlitz(&f);
        let x = rf(&f, &[0, 0, 1]);
        assert_eq!(m.is_torsion(&x, 4), None);
        assert_eq!(m.is_torsion_exhaustive(&x, 4), None);
    }

    #[test]
    fn height_estimates() {
        let f = f2();
        let m = DrinfeldModule::carlitz(&f);
        // torsion point: orbit cycles, estimate exactly zero
        assert!(m
            .canonical_height_estimate(&RatFunc::one(&f), 4)
            .is_zero());
        assert!(m
            .canonical_height_estimate(&RatFunc::zero(&f), 3)
            .is_zero());
        // free point t^2: h(phi_{t^n}(t^2)) = 2^(n+1), quotient 2
        let x = rf(&f, &[0, 0, 1]);
        let est = m.canonical_height_estimate(&x, 4);
        assert_eq!(est, BigRational::new(BigInt::from(2), BigInt::from(1)));
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        assert!(m.looks_nontorsion(&x, 3, &half));
    }

    #[test]
    fn reduction_types() {
        let f = f2();
        let m = DrinfeldModule::carlitz(&f);
        let vt = Place::finite(FqPoly::var(&f)).unwrap();
        let vt1 = Place::finite(FqPoly::from_ints(&f, &[1, 1])).unwrap();
        assert!(m.good_reduction(&vt));
        assert!(m.good_reduction(&vt1));
        assert!(!m.good_reduction(&Place::infinite(&f)));
        // t + (1/t) tau + tau^2 fails at (t)
        let bad = DrinfeldModule::new(TwistedPoly::from_coeffs(
            &f,
            vec![
                RatFunc::var(&f),
                RatFunc::var(&f).inv().unwrap(),
                RatFunc::one(&f),
            ],
        ))
        .unwrap();
        assert!(!bad.good_reduction(&vt));
        assert!(bad.good_reduction(&vt1));
    }

    #[test]
    fn act_local_matches_exact() {
        let f = f2();
        let m = DrinfeldModule::carlitz(&f);
        let v = Place::finite(FqPoly::from_ints(&f, &[1, 1])).unwrap();
        let x = rf(&f, &[0, 0, 1]);
        let p = FqPoly::from_ints(&f, &[0, 1, 1]);
        let exact = m.act(&p, &x);
        let local = m.act_local(&p, &LocalElem::embed(&v, &x, 20));
        assert!(local.agrees_with(&LocalElem::embed(&v, &exact, 20)));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_module(q: u32) -> impl Strategy<Value = DrinfeldModule> {
            prop::collection::vec((0u32..q, 0u32..q, 0usize..3), 1..=2).prop_map(move |raw| {
                let f = FqField::with_order(q).unwrap();
                let mut coeffs = vec![RatFunc::var(&f)];
                for (n, d, dd) in raw {
                    // small rational coefficient n·t^dd / (t+d') style
                    let num = FqPoly::from_encoded(&f, &[n]);
                    let num = &num * &FqPoly::var(&f).pow(dd as u64);
                    coeffs.push(RatFunc::new(num, FqPoly::from_encoded(&f, &[d, 1])).unwrap());
                }
                if coeffs.last().unwrap().is_zero() {
                    *coeffs.last_mut().unwrap() = RatFunc::one(&f);
                }
                DrinfeldModule::new(TwistedPoly::from_coeffs(&f, coeffs)).unwrap()
            })
        }

        fn arb_poly(q: u32, max_deg: usize) -> impl Strategy<Value = FqPoly> {
            prop::collection::vec(0u32..q, 0..=max_deg + 1).prop_map(move |coeffs| {
                let f = FqField::with_order(q).unwrap();
                FqPoly::from_encoded(&f, &coeffs)
            })
        }

        fn arb_point(q: u32) -> impl Strategy<Value = RatFunc> {
            (prop::collection::vec(0u32..q, 1..4), 0u32..q).prop_map(move |(n, d)| {
                let f = FqField::with_order(q).unwrap();
                RatFunc::new(
                    FqPoly::from_encoded(&f, &n),
                    FqPoly::from_encoded(&f, &[d, 1]),
                )
                .unwrap()
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            #[test]
            fn tw_mul_is_function_composition(m in arb_module(2), x in arb_point(2),
                                              p in arb_poly(2, 2), r in arb_poly(2, 2)) {
                let (a, b) = (m.phi_of(&p), m.phi_of(&r));
                let prod = &a * &b;
                prop_assert_eq!(prod.eval(&x), a.eval(&b.eval(&x)));
                // tau-degrees add for nonzero factors
                if !a.is_zero() && !b.is_zero() {
                    prop_assert_eq!(
                        prod.tau_degree().unwrap(),
                        a.tau_degree().unwrap() + b.tau_degree().unwrap()
                    );
                }
            }

            #[test]
            fn phi_is_ring_homomorphism(m in arb_module(3),
                                        p in arb_poly(3, 4), r in arb_poly(3, 4)) {
                // Coefficient degrees grow like q^(rank·deg); cap the product
                // degree per rank to keep the expansion tractable.
                let cap = if m.rank() == 1 { 4 } else { 2 };
                let p = if p.degree().unwrap_or(0) > cap { p.rem(&FqPoly::var(m.field()).pow(cap as u64 + 1)).unwrap() } else { p };
                let r = if r.degree().unwrap_or(0) > cap { r.rem(&FqPoly::var(m.field()).pow(cap as u64 + 1)).unwrap() } else { r };
                let sum = m.phi_of(&(&p + &r));
                prop_assert_eq!(sum, &m.phi_of(&p) + &m.phi_of(&r));
                let prod = m.phi_of(&(&p * &r));
                prop_assert_eq!(prod, &m.phi_of(&p) * &m.phi_of(&r));
            }

            #[test]
            fn action_compatibility(m in arb_module(2), x in arb_point(2),
                                    p in arb_poly(2, 2), r in arb_poly(2, 2)) {
                prop_assert_eq!(
                    m.act(&(&p * &r), &x),
                    m.act(&p, &m.act(&r, &x))
                );
                // additivity in the point
                let y = RatFunc::var(&x.field().clone());
                prop_assert_eq!(
                    m.act(&p, &(&x + &y)),
                    &m.act(&p, &x) + &m.act(&p, &y)
                );
            }

            #[test]
            fn fq_linearity(m in arb_module(3), x in arb_point(3), p in arb_poly(3, 3),
                            c in 0u32..3) {
                let f = m.field().clone();
                let c = f.elem(c);
                prop_assert_eq!(
                    m.act(&p, &x.scale_elem(&c)),
                    m.act(&p, &x).scale_elem(&c)
                );
            }

            #[test]
            fn annihilator_is_ideal(m in arb_module(2), r in arb_poly(2, 2)) {
                // 1 over the Carlitz-like random module need not be torsion;
                // use x = 0 and x = 1 and check ideal closure when present.
                for x in [RatFunc::zero(m.field()), RatFunc::one(m.field())] {
                    if let Some(q0) = m.is_torsion(&x, 3) {
                        prop_assert!(m.act(&(&r * &q0), &x).is_zero());
                        // the linear-algebra and exhaustive searches agree
                        prop_assert_eq!(m.is_torsion_exhaustive(&x, 3), Some(q0));
                    }
                }
            }
        }

        #[test]
        fn orbit_values_of_one() {
            let f = FqField::prime(2).unwrap();
            let m = DrinfeldModule::carlitz(&f);
            let vals: Vec<String> = enumerate_polys(&f, 1)
                .map(|p| m.act(&p, &RatFunc::one(&f)).to_string())
                .collect();
            assert_eq!(vals, ["0", "1", "t+1", "t"]);
        }
    }
}
