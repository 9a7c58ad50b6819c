//! Greedy inference of the residue-class structure of an intersection set.
//!
//! A class d + (Q) is accepted when every enumerated P congruent to d below
//! the evidence bound lies in the set; accepted classes never nest, and the
//! remainder of the set is listed as isolated points. The emitted structure
//! re-expands exactly to the input set below the bound.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::algebra::fq::FqField;
use crate::algebra::poly::{enumerate_polys, monic_polys, FqPoly};
use crate::error::{Error, Result};

/// A finite union of residue classes d + (Q) plus isolated points, valid as
/// a description of a set of polynomials of degree < search_bound.
#[derive(Clone, PartialEq, Eq)]
pub struct CosetStructure {
    cosets: Vec<(FqPoly, FqPoly)>,
    isolated: Vec<FqPoly>,
    search_bound: usize,
}

impl CosetStructure {
    /// Accepted classes as (representative, modulus), in detection order.
    pub fn cosets(&self) -> &[(FqPoly, FqPoly)] {
        &self.cosets
    }

    pub fn isolated(&self) -> &[FqPoly] {
        &self.isolated
    }

    pub fn search_bound(&self) -> usize {
        self.search_bound
    }

    pub fn is_empty(&self) -> bool {
        self.cosets.is_empty() && self.isolated.is_empty()
    }

    pub fn membership(&self, p: &FqPoly) -> bool {
        self.cosets
            .iter()
            .any(|(d, q)| p.rem(q).map(|r| &r == d).unwrap_or(false))
            || self.isolated.contains(p)
    }

    /// All members of degree < bound, canonically ordered.
    pub fn expand(&self, degree_bound: usize) -> Vec<FqPoly> {
        let field = self
            .cosets
            .first()
            .map(|(d, _)| d.field())
            .or_else(|| self.isolated.first().map(|p| p.field()));
        let field = match field {
            Some(f) => Arc::clone(f),
            None => return Vec::new(),
        };
        enumerate_polys(&field, degree_bound.saturating_sub(1))
            .filter(|p| (degree_bound > 0) && self.membership(p))
            .collect()
    }
}

impl fmt::Debug for CosetStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cosets: [")?;
        for (i, (d, q)) in self.cosets.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{d} + ({q})")?;
        }
        write!(f, "], isolated: {:?}", self.isolated)
    }
}

/// Infer a coset structure covering exactly the set s below the bound.
///
/// Moduli are scanned monic by increasing degree then canonical order;
/// residues in canonical order. Ties therefore resolve to the smallest
/// modulus degree first.
pub fn infer_cosets(
    s: &[FqPoly],
    field: &Arc<FqField>,
    degree_bound: usize,
    max_mod_deg: usize,
) -> Result<CosetStructure> {
    if max_mod_deg >= degree_bound {
        return Err(Error::ModulusExceedsEvidence {
            max_mod_deg,
            degree_bound,
        });
    }
    let sset: BTreeSet<FqPoly> = s.iter().cloned().collect();
    for p in &sset {
        if p.degree().map_or(false, |d| d >= degree_bound) {
            return Err(Error::InvalidArgument(format!(
                "set member {p} exceeds the enumeration bound"
            )));
        }
    }

    let mut accepted: Vec<(FqPoly, FqPoly)> = Vec::new();
    for mod_deg in 0..=max_mod_deg {
        for q in monic_polys(field, mod_deg) {
            let residues: Vec<FqPoly> = if mod_deg == 0 {
                vec![FqPoly::zero(field)]
            } else {
                enumerate_polys(field, mod_deg - 1).collect()
            };
            for d in residues {
                // Skip classes nested inside an accepted coset.
                let nested = accepted.iter().any(|(d0, q0)| {
                    q0.divides(&q) && d.rem(q0).map(|r| &r == d0).unwrap_or(false)
                });
                if nested {
                    continue;
                }
                // Class members below the bound: d + R·Q, deg R < bound - deg Q.
                let span = degree_bound - mod_deg;
                let members_in_s = enumerate_polys(field, span.saturating_sub(1))
                    .all(|r| sset.contains(&(&d + &(&r * &q))));
                let class_size = (field.order() as u128).pow(span as u32);
                if members_in_s && class_size >= 2 {
                    accepted.push((d.clone(), q.clone()));
                }
            }
        }
    }

    let isolated: Vec<FqPoly> = sset
        .iter()
        .filter(|p| {
            !accepted
                .iter()
                .any(|(d, q)| p.rem(q).map(|r| &r == d).unwrap_or(false))
        })
        .cloned()
        .collect();

    let out = CosetStructure {
        cosets: accepted,
        isolated,
        search_bound: degree_bound,
    };
    // Exactness: the structure re-expands to s below the bound.
    for p in enumerate_polys(field, degree_bound.saturating_sub(1)) {
        if out.membership(&p) != sset.contains(&p) {
            return Err(Error::Internal(format!(
                "coset inference mismatch at {p}"
            )));
        }
    }
    Ok(out)
}

/// Echo of the asymptotic guarantee: a set this large at this depth is
/// expected to carry at least one full class. Returns a warning line when
/// the expectation fails; the caller logs it without failing.
pub fn stronger_echo(structure: &CosetStructure, set_len: usize) -> Option<String> {
    if set_len >= 8 && structure.search_bound() >= 4 && structure.cosets().is_empty() {
        Some(format!(
            "counterexample candidate: {set_len} members below degree {} but no full class detected",
            structure.search_bound()
        ))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> Arc<FqField> {
        FqField::prime(2).unwrap()
    }

    #[test]
    fn full_set_is_the_unit_class() {
        let f = f2();
        let s: Vec<FqPoly> = enumerate_polys(&f, 3).collect();
        let st = infer_cosets(&s, &f, 4, 2).unwrap();
        assert_eq!(st.cosets().len(), 1);
        let (d, q) = &st.cosets()[0];
        assert!(d.is_zero() && q.is_one());
        assert!(st.isolated().is_empty());
    }

    #[test]
    fn multiples_of_t_form_one_class() {
        let f = f2();
        let t = FqPoly::var(&f);
        let s: Vec<FqPoly> = enumerate_polys(&f, 4).filter(|p| t.divides(p)).collect();
        let st = infer_cosets(&s, &f, 5, 2).unwrap();
        assert_eq!(st.cosets().len(), 1);
        let (d, q) = &st.cosets()[0];
        assert!(d.is_zero());
        assert_eq!(q, &t);
        assert!(st.isolated().is_empty());
        // re-expansion oracle
        assert_eq!(st.expand(5), s);
    }

    #[test]
    fn singleton_is_isolated() {
        let f = f2();
        let s = vec![FqPoly::var(&f)];
        let st = infer_cosets(&s, &f, 4, 2).unwrap();
        assert!(st.cosets().is_empty());
        assert_eq!(st.isolated(), &s[..]);
    }

    #[test]
    fn modulus_cap_must_stay_below_evidence() {
        let f = f2();
        let s = vec![FqPoly::var(&f)];
        assert!(matches!(
            infer_cosets(&s, &f, 3, 3),
            Err(Error::ModulusExceedsEvidence { .. })
        ));
    }

    #[test]
    fn union_with_isolated_point() {
        let f = f2();
        let t = FqPoly::var(&f);
        // multiples of t+1, plus the stray point t^2
        let t1 = FqPoly::from_ints(&f, &[1, 1]);
        let stray = &t * &t;
        let mut s: Vec<FqPoly> = enumerate_polys(&f, 3)
            .filter(|p| t1.divides(p))
            .collect();
        s.push(stray.clone());
        s.sort();
        let st = infer_cosets(&s, &f, 4, 2).unwrap();
        assert_eq!(st.cosets().len(), 1);
        assert_eq!(st.cosets()[0].1, t1);
        assert_eq!(st.isolated(), &[stray][..]);
        assert_eq!(st.expand(4), s);
    }

    #[test]
    fn no_nested_cosets_emitted() {
        let f = f2();
        let t = FqPoly::var(&f);
        let s: Vec<FqPoly> = enumerate_polys(&f, 5).filter(|p| t.divides(p)).collect();
        let st = infer_cosets(&s, &f, 6, 3).unwrap();
        // (0, t) accepted; (0, t^2), (0, t^2+t) etc are nested and skipped
        assert_eq!(st.cosets().len(), 1);
    }

    #[test]
    fn echo_flags_large_uncovered_sets() {
        let f = f2();
        // 8 scattered points that form no class
        let s: Vec<FqPoly> = enumerate_polys(&f, 4).take(40).step_by(5).collect();
        let st = infer_cosets(&s, &f, 5, 1);
        if let Ok(st) = st {
            if st.cosets().is_empty() && s.len() >= 8 {
                assert!(stronger_echo(&st, s.len()).is_some());
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]

            /// Planted unions of classes re-expand exactly.
            #[test]
            fn reexpansion_oracle(qidx in 1u128..8, didx in 0u128..4, noise in 0u128..16) {
                let f = FqField::prime(2).unwrap();
                let bound = 5usize;
                let q = {
                    let mut p = FqPoly::from_counter_index(&f, qidx);
                    if p.degree().map_or(true, |d| d == 0 || d > 2) {
                        p = FqPoly::var(&f);
                    }
                    p.make_monic()
                };
                let d = FqPoly::from_counter_index(&f, didx).rem(&q).unwrap();
                let noise_pt = FqPoly::from_counter_index(&f, noise);
                let mut s: BTreeSet<FqPoly> = enumerate_polys(&f, bound - 1)
                    .filter(|p| p.rem(&q).unwrap() == d)
                    .collect();
                s.insert(noise_pt);
                let sv: Vec<FqPoly> = s.iter().cloned().collect();
                let st = infer_cosets(&sv, &f, bound, 2).unwrap();
                prop_assert_eq!(st.expand(bound), sv);
            }
        }
    }
}
