//! Affine varieties inside the g-fold product of the additive group, given
//! by sparse multivariate polynomials over K.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::algebra::fq::FqField;
use crate::algebra::ratfunc::RatFunc;
use crate::error::{Error, Result};
use crate::places::{LocalElem, Place};

/// Sparse polynomial in X_1..X_g with coefficients in K. Terms are keyed by
/// exponent vectors in a BTreeMap, so iteration order is canonical.
#[derive(Clone, PartialEq, Eq)]
pub struct MultiPoly {
    g: usize,
    field: Arc<FqField>,
    terms: BTreeMap<Vec<u32>, RatFunc>,
}

impl MultiPoly {
    pub fn zero(field: &Arc<FqField>, g: usize) -> MultiPoly {
        MultiPoly {
            g,
            field: Arc::clone(field),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(field: &Arc<FqField>, g: usize, c: RatFunc) -> MultiPoly {
        let mut p = MultiPoly::zero(field, g);
        if !c.is_zero() {
            p.terms.insert(vec![0; g], c);
        }
        p
    }

    /// The coordinate X_{i+1} (zero-based index i).
    pub fn var(field: &Arc<FqField>, g: usize, i: usize) -> MultiPoly {
        assert!(i < g, "variable index out of range");
        let mut exps = vec![0u32; g];
        exps[i] = 1;
        let mut p = MultiPoly::zero(field, g);
        p.terms.insert(exps, RatFunc::one(field));
        p
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn field(&self) -> &Arc<FqField> {
        &self.field
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &RatFunc)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Total degree; None for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    fn insert_term(&mut self, exps: Vec<u32>, coeff: RatFunc) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.get_mut(&exps) {
            Some(existing) => {
                let sum = &*existing + &coeff;
                if sum.is_zero() {
                    self.terms.remove(&exps);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(exps, coeff);
            }
        }
    }

    pub fn add(&self, other: &MultiPoly) -> MultiPoly {
        assert_eq!(self.g, other.g, "mixed ambient dimensions");
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.insert_term(e.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> MultiPoly {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = -&*c;
        }
        out
    }

    pub fn sub(&self, other: &MultiPoly) -> MultiPoly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &MultiPoly) -> MultiPoly {
        assert_eq!(self.g, other.g, "mixed ambient dimensions");
        let mut out = MultiPoly::zero(&self.field, self.g);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let exps: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.insert_term(exps, ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, c: &RatFunc) -> MultiPoly {
        if c.is_zero() {
            return MultiPoly::zero(&self.field, self.g);
        }
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v = &*v * c;
        }
        out
    }

    pub fn pow(&self, e: u32) -> MultiPoly {
        let mut result = MultiPoly::constant(&self.field, self.g, RatFunc::one(&self.field));
        for _ in 0..e {
            result = result.mul(self);
        }
        result
    }

    /// Division by a constant (degree-zero) polynomial.
    pub fn div_constant(&self, other: &MultiPoly) -> Result<MultiPoly> {
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if other.total_degree() != Some(0) {
            return Err(Error::InvalidArgument(
                "division only by constants of the coefficient field".into(),
            ));
        }
        let c = other.terms.values().next().unwrap();
        Ok(self.scale(&c.inv()?))
    }

    pub fn eval(&self, point: &[RatFunc]) -> Result<RatFunc> {
        if point.len() != self.g {
            return Err(Error::DimensionMismatch {
                expected: self.g,
                actual: point.len(),
            });
        }
        let mut acc = RatFunc::zero(&self.field);
        for (exps, coeff) in &self.terms {
            let mut term = coeff.clone();
            for (x, &e) in point.iter().zip(exps) {
                if e > 0 {
                    term = &term * &x.pow(e as i64).unwrap();
                }
            }
            acc = &acc + &term;
        }
        Ok(acc)
    }

    /// Evaluate at a completion point with tracked precision.
    pub fn eval_local(&self, point: &[LocalElem], place: &Place, digits: usize) -> Result<LocalElem> {
        if point.len() != self.g {
            return Err(Error::DimensionMismatch {
                expected: self.g,
                actual: point.len(),
            });
        }
        let mut acc: Option<LocalElem> = None;
        for (exps, coeff) in &self.terms {
            let mut term = LocalElem::embed(place, coeff, digits);
            for (x, &e) in point.iter().zip(exps) {
                if e > 0 {
                    term = term.mul(&x.pow(e as u64));
                }
            }
            acc = Some(match acc {
                None => term,
                Some(a) => a.add(&term),
            });
        }
        Ok(acc.unwrap_or_else(|| LocalElem::zero(place.clone(), digits as i64)))
    }

    /// Substitute X_i -> p_i + X_i and expand.
    pub fn translate(&self, point: &[RatFunc]) -> Result<MultiPoly> {
        if point.len() != self.g {
            return Err(Error::DimensionMismatch {
                expected: self.g,
                actual: point.len(),
            });
        }
        // (p_i + X_i)^k tables per variable, up to the max exponent used.
        let mut max_exp = vec![0u32; self.g];
        for exps in self.terms.keys() {
            for (m, &e) in max_exp.iter_mut().zip(exps) {
                *m = (*m).max(e);
            }
        }
        let one = MultiPoly::constant(&self.field, self.g, RatFunc::one(&self.field));
        let shifted: Vec<Vec<MultiPoly>> = (0..self.g)
            .map(|i| {
                let base = MultiPoly::var(&self.field, self.g, i)
                    .add(&MultiPoly::constant(&self.field, self.g, point[i].clone()));
                let mut pows = vec![one.clone()];
                for k in 1..=max_exp[i] {
                    pows.push(pows[(k - 1) as usize].mul(&base));
                }
                pows
            })
            .collect();
        let mut out = MultiPoly::zero(&self.field, self.g);
        for (exps, coeff) in &self.terms {
            let mut term = MultiPoly::constant(&self.field, self.g, coeff.clone());
            for (i, &e) in exps.iter().enumerate() {
                if e > 0 {
                    term = term.mul(&shifted[i][e as usize]);
                }
            }
            out = out.add(&term);
        }
        Ok(out)
    }
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (exps, coeff) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let is_const_term = exps.iter().all(|&e| e == 0);
            if is_const_term {
                write!(f, "({coeff})")?;
                continue;
            }
            if !coeff.is_one() {
                write!(f, "({coeff})")?;
            }
            let mut first_var = coeff.is_one();
            for (i, &e) in exps.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                if !first_var {
                    write!(f, "*")?;
                }
                first_var = false;
                if e == 1 {
                    write!(f, "X{}", i + 1)?;
                } else {
                    write!(f, "X{}^{}", i + 1, e)?;
                }
            }
        }
        Ok(())
    }
}

/// A closed subvariety given by a finite list of defining polynomials.
#[derive(Clone, Debug)]
pub struct Variety {
    g: usize,
    polys: Vec<MultiPoly>,
}

impl Variety {
    pub fn new(g: usize, polys: Vec<MultiPoly>) -> Result<Variety> {
        if polys.is_empty() {
            return Err(Error::InvalidArgument(
                "a variety needs at least one defining polynomial".into(),
            ));
        }
        if let Some(p) = polys.iter().find(|p| p.g() != g) {
            return Err(Error::DimensionMismatch {
                expected: g,
                actual: p.g(),
            });
        }
        Ok(Variety { g, polys })
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn polys(&self) -> &[MultiPoly] {
        &self.polys
    }

    pub fn contains(&self, point: &[RatFunc]) -> Result<bool> {
        for p in &self.polys {
            if !p.eval(point)?.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// The translated variety: y satisfies the result iff point + y satisfies
/// the input.
pub fn translate_by(v: &Variety, point: &[RatFunc]) -> Result<Variety> {
    let polys = v
        .polys
        .iter()
        .map(|p| p.translate(point))
        .collect::<Result<Vec<_>>>()?;
    Variety::new(v.g, polys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::FqPoly;

    fn f2() -> Arc<FqField> {
        FqField::prime(2).unwrap()
    }

    fn rf(f: &Arc<FqField>, coeffs: &[i64]) -> RatFunc {
        RatFunc::from_poly(FqPoly::from_ints(f, coeffs))
    }

    #[test]
    fn translate_by_zero_is_identity() {
        let f = f2();
        let x1 = MultiPoly::var(&f, 2, 0);
        let x2 = MultiPoly::var(&f, 2, 1);
        let p = x1.mul(&x1).add(&x2.scale(&rf(&f, &[1, 1])));
        let v = Variety::new(2, vec![p.clone()]).unwrap();
        let vt = translate_by(&v, &[RatFunc::zero(&f), RatFunc::zero(&f)]).unwrap();
        assert_eq!(vt.polys()[0], p);
    }

    #[test]
    fn translate_linear() {
        // X1 - X2 translated by (a, b) gives X1 - X2 + (a - b)
        let f = f2();
        let x1 = MultiPoly::var(&f, 2, 0);
        let x2 = MultiPoly::var(&f, 2, 1);
        let p = x1.sub(&x2);
        let (a, b) = (rf(&f, &[0, 1]), rf(&f, &[1, 1]));
        let tp = p.translate(&[a.clone(), b.clone()]).unwrap();
        let expected = x1.sub(&x2).add(&MultiPoly::constant(&f, 2, &a - &b));
        assert_eq!(tp, expected);
    }

    #[test]
    fn translate_square_characteristic_two() {
        // X1^2 translated by (a): X1^2 + a^2, the cross term vanishes
        let f = f2();
        let x1 = MultiPoly::var(&f, 1, 0);
        let p = x1.mul(&x1);
        let a = rf(&f, &[0, 1]);
        let tp = p.translate(&[a.clone()]).unwrap();
        let expected = x1.mul(&x1).add(&MultiPoly::constant(&f, 1, &a * &a));
        assert_eq!(tp, expected);
    }

    #[test]
    fn eval_exact_and_local_agree() {
        let f = f2();
        let x1 = MultiPoly::var(&f, 2, 0);
        let x2 = MultiPoly::var(&f, 2, 1);
        let p = x1.mul(&x1).add(&x2.scale(&rf(&f, &[1, 1]))).add(
            &MultiPoly::constant(&f, 2, rf(&f, &[0, 0, 1])),
        );
        let pt = [rf(&f, &[0, 1, 1]), rf(&f, &[1, 0, 1])];
        let exact = p.eval(&pt).unwrap();
        let place = Place::finite(FqPoly::var(&f)).unwrap();
        let local_pt: Vec<LocalElem> =
            pt.iter().map(|x| LocalElem::embed(&place, x, 20)).collect();
        let local = p.eval_local(&local_pt, &place, 20).unwrap();
        assert!(local.agrees_with(&LocalElem::embed(&place, &exact, 20)));
    }

    #[test]
    fn membership_vs_translation() {
        // y in translate_by(V, p) iff p + y in V
        let f = f2();
        let x1 = MultiPoly::var(&f, 1, 0);
        let c = rf(&f, &[1, 1, 1]);
        let p = x1.mul(&x1).add(&MultiPoly::constant(&f, 1, c));
        let v = Variety::new(1, vec![p]).unwrap();
        let shift = [rf(&f, &[0, 1])];
        let vt = translate_by(&v, &shift).unwrap();
        for coeffs in [[0i64, 0], [1, 0], [0, 1], [1, 1]] {
            let y = rf(&f, &coeffs);
            let translated_point = [&shift[0] + &y];
            assert_eq!(
                vt.contains(&[y]).unwrap(),
                v.contains(&translated_point).unwrap()
            );
        }
    }

    #[test]
    fn variety_requires_polys_and_matching_dims() {
        let f = f2();
        assert!(Variety::new(2, vec![]).is_err());
        let p1 = MultiPoly::var(&f, 1, 0);
        assert!(Variety::new(2, vec![p1]).is_err());
    }
}
