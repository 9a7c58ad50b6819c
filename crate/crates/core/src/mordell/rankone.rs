//! Rank-one extension: a finitely generated module splits as its finite
//! torsion part plus a free cyclic part, so intersecting reduces to one
//! translated cyclic intersection per torsion element.

use std::collections::HashSet;

use crate::algebra::poly::FqPoly;
use crate::algebra::ratfunc::RatFunc;
use crate::error::{Error, Result};
use crate::mordell::coset::{infer_cosets, CosetStructure};
use crate::mordell::cyclic::{intersect, CyclicModule};
use crate::mordell::variety::{translate_by, Variety};

/// Cap on the enumerated torsion subgroup.
const MAX_TORSION_SUBGROUP: usize = 4096;

/// A rank-one module: torsion generators plus one free cyclic generator.
#[derive(Clone)]
pub struct RankOneModule {
    torsion_generators: Vec<Vec<RatFunc>>,
    free: CyclicModule,
}

impl RankOneModule {
    pub fn new(torsion_generators: Vec<Vec<RatFunc>>, free: CyclicModule) -> Result<RankOneModule> {
        let g = free.g();
        for t in &torsion_generators {
            if t.len() != g {
                return Err(Error::DimensionMismatch {
                    expected: g,
                    actual: t.len(),
                });
            }
        }
        Ok(RankOneModule {
            torsion_generators,
            free,
        })
    }

    pub fn free(&self) -> &CyclicModule {
        &self.free
    }

    pub fn torsion_generators(&self) -> &[Vec<RatFunc>] {
        &self.torsion_generators
    }

    /// Annihilator of a torsion tuple: the lcm of the coordinate
    /// annihilators. Errors when a coordinate has none up to the bound.
    fn tuple_annihilator(&self, point: &[RatFunc], deg_bound: usize) -> Result<FqPoly> {
        let field = self.free.action().field();
        let mut ann = FqPoly::one(field);
        for (module, x) in self.free.action().modules().iter().zip(point) {
            let q = module
                .is_torsion(x, deg_bound)
                .ok_or(Error::UnverifiedTorsionGenerator)?;
            let g = ann.gcd(&q);
            ann = (&ann.divmod(&g)?.0 * &q).make_monic();
        }
        Ok(ann)
    }

    /// The full finite torsion subgroup generated by the torsion tuples,
    /// closed under the action and addition, deterministically ordered.
    pub fn torsion_subgroup(&self, deg_bound: usize) -> Result<Vec<Vec<RatFunc>>> {
        let action = self.free.action();
        let field = action.field();
        let zero: Vec<RatFunc> = vec![RatFunc::zero(field); self.free.g()];
        let mut set: HashSet<Vec<RatFunc>> = HashSet::new();
        set.insert(zero.clone());
        for gen in &self.torsion_generators {
            let ann = self.tuple_annihilator(gen, deg_bound)?;
            let span = ann.degree().unwrap();
            // All phi_P(gen) with deg P < deg(ann) hit every multiple once.
            let orbit: Vec<Vec<RatFunc>> = if span == 0 {
                vec![zero.clone()]
            } else {
                crate::algebra::poly::enumerate_polys(field, span - 1)
                    .map(|p| action.act(&p, gen))
                    .collect::<Result<_>>()?
            };
            let mut next: HashSet<Vec<RatFunc>> = HashSet::new();
            for s in &set {
                for o in &orbit {
                    let sum: Vec<RatFunc> = s.iter().zip(o).map(|(a, b)| a + b).collect();
                    next.insert(sum);
                    if next.len() > MAX_TORSION_SUBGROUP {
                        return Err(Error::InvalidArgument(
                            "torsion subgroup exceeds the enumeration cap".into(),
                        ));
                    }
                }
            }
            set = next;
        }
        let mut out: Vec<Vec<RatFunc>> = set.into_iter().collect();
        out.sort();
        Ok(out)
    }
}

/// Intersection of a variety with a rank-one module: one translated cyclic
/// structure per torsion element, keyed by the torsion translate.
pub fn intersect_rank_one(
    variety: &Variety,
    module: &RankOneModule,
    degree_bound: usize,
    max_mod_deg: usize,
    torsion_deg_bound: usize,
    threads: usize,
) -> Result<Vec<(Vec<RatFunc>, CosetStructure)>> {
    let subgroup = module.torsion_subgroup(torsion_deg_bound)?;
    let field = module.free().action().field();
    let mut out = Vec::with_capacity(subgroup.len());
    for gamma in subgroup {
        let shifted = translate_by(variety, &gamma)?;
        let s = intersect(&shifted, module.free(), degree_bound, threads)?;
        let structure = infer_cosets(&s, field, degree_bound, max_mod_deg)?;
        out.push((gamma, structure));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{FqField, FqPoly};
    use crate::mordell::variety::MultiPoly;
    use crate::twisted::{DrinfeldModule, ProductAction};

    fn setup() -> (RankOneModule, Variety) {
        let f = FqField::prime(2).unwrap();
        let c = DrinfeldModule::carlitz(&f);
        let action = ProductAction::new(vec![c.clone(), c]).unwrap();
        let free = CyclicModule::new(
            action,
            vec![
                RatFunc::from_poly(FqPoly::from_ints(&f, &[0, 0, 1])),
                RatFunc::var(&f),
            ],
        )
        .unwrap();
        // torsion tuple (0, t): t is t-torsion
        let torsion = vec![vec![RatFunc::zero(&f), RatFunc::var(&f)]];
        let module = RankOneModule::new(torsion, free).unwrap();
        let variety = Variety::new(
            2,
            vec![MultiPoly::var(&module.free().action().field().clone(), 2, 1)],
        )
        .unwrap();
        (module, variety)
    }

    #[test]
    fn torsion_subgroup_closure() {
        let (module, _) = setup();
        let sub = module.torsion_subgroup(4).unwrap();
        // {(0,0), (0,t)}
        assert_eq!(sub.len(), 2);
        assert!(sub[0].iter().all(|x| x.is_zero()));
        assert!(sub[1][0].is_zero());
        assert_eq!(sub[1][1], RatFunc::var(module.free().action().field()));
    }

    #[test]
    fn empty_torsion_equals_plain_cyclic() {
        let (module, variety) = setup();
        let plain = RankOneModule::new(vec![], module.free().clone()).unwrap();
        let results = intersect_rank_one(&variety, &plain, 5, 2, 4, 1).unwrap();
        assert_eq!(results.len(), 1);
        let s = intersect(&variety, module.free(), 5, 1).unwrap();
        let expected = infer_cosets(&s, module.free().action().field(), 5, 2).unwrap();
        assert_eq!(results[0].1.cosets(), expected.cosets());
    }

    #[test]
    fn torsion_translates_produce_structures() {
        let (module, variety) = setup();
        let results = intersect_rank_one(&variety, &module, 5, 2, 4, 1).unwrap();
        assert_eq!(results.len(), 2);
        // gamma = (0,0): X2 = 0 on the free orbit gives the class (0, t)
        let (gamma0, st0) = &results[0];
        assert!(gamma0.iter().all(|x| x.is_zero()));
        assert_eq!(st0.cosets().len(), 1);
        // gamma = (0,t): needs phi_P(t) = t, i.e. X2 - t = 0 translated;
        // the odd residues mod t work: P = 1 + multiples of t
        let (gamma1, st1) = &results[1];
        assert!(!gamma1[1].is_zero());
        let f = module.free().action().field().clone();
        let members = st1.expand(5);
        // oracle: those P with phi_P(t) + t = 0, i.e. phi_P(t) = t
        let mut expected = Vec::new();
        for (p, pt) in module.free().orbit(5) {
            if &pt[1] + &gamma1[1] == RatFunc::zero(&f) {
                expected.push(p);
            }
        }
        assert_eq!(members, expected);
        assert!(!members.is_empty());
    }

    #[test]
    fn unverified_generator_rejected() {
        let (module, variety) = setup();
        // t^2 is not torsion
        let bad = RankOneModule::new(
            vec![vec![
                RatFunc::from_poly(FqPoly::from_ints(
                    module.free().action().field(),
                    &[0, 0, 1],
                )),
                RatFunc::zero(module.free().action().field()),
            ]],
            module.free().clone(),
        )
        .unwrap();
        assert!(matches!(
            intersect_rank_one(&variety, &bad, 4, 2, 4, 1),
            Err(Error::UnverifiedTorsionGenerator)
        ));
    }

    #[test]
    fn unsatisfiable_variety_gives_empty_structures() {
        let (module, _) = setup();
        let f = module.free().action().field().clone();
        // X1^2 + X2^2 + 1/(t+1) has no orbit solutions: heights stay integral
        let c = RatFunc::new(FqPoly::one(&f), FqPoly::from_ints(&f, &[1, 1])).unwrap();
        let p = MultiPoly::var(&f, 2, 0)
            .mul(&MultiPoly::var(&f, 2, 0))
            .add(&MultiPoly::var(&f, 2, 1).mul(&MultiPoly::var(&f, 2, 1)))
            .add(&MultiPoly::constant(&f, 2, c));
        let v = Variety::new(2, vec![p]).unwrap();
        let results = intersect_rank_one(&v, &module, 4, 2, 4, 1).unwrap();
        for (_, st) in results {
            assert!(st.is_empty());
        }
    }
}
