//! The cyclic orbit module of a point under a coordinate-wise action, and
//! its exact intersection with a variety.

use std::sync::Arc;

use crate::algebra::poly::FqPoly;
use crate::algebra::ratfunc::RatFunc;
use crate::error::{Error, Result};
use crate::mordell::variety::Variety;
use crate::twisted::ProductAction;

/// Guard against runaway enumerations; q^degree_bound points are visited.
const MAX_ENUMERATION: u128 = 1 << 24;

/// The orbit {phi_P(x) : P in A} of a generator point.
#[derive(Clone)]
pub struct CyclicModule {
    action: ProductAction,
    generator: Vec<RatFunc>,
}

impl CyclicModule {
    pub fn new(action: ProductAction, generator: Vec<RatFunc>) -> Result<CyclicModule> {
        if generator.len() != action.g() {
            return Err(Error::DimensionMismatch {
                expected: action.g(),
                actual: generator.len(),
            });
        }
        Ok(CyclicModule { action, generator })
    }

    pub fn action(&self) -> &ProductAction {
        &self.action
    }

    pub fn generator(&self) -> &[RatFunc] {
        &self.generator
    }

    pub fn g(&self) -> usize {
        self.action.g()
    }

    /// Iterates of phi_{t^i} applied to the generator, for i < count.
    ///
    /// Every orbit point is an F_q-combination of these rows, so the t-power
    /// images are computed once and shared.
    pub fn power_table(&self, count: usize) -> Vec<Vec<RatFunc>> {
        let mut table = Vec::with_capacity(count);
        if count == 0 {
            return table;
        }
        table.push(self.generator.clone());
        for i in 1..count {
            let prev = &table[i - 1];
            let next: Vec<RatFunc> = self
                .action
                .modules()
                .iter()
                .zip(prev)
                .map(|(m, y)| m.act_t(y))
                .collect();
            table.push(next);
        }
        table
    }

    /// The orbit point phi_P(x) assembled from a power table.
    pub fn point_from_table(&self, table: &[Vec<RatFunc>], p: &FqPoly) -> Vec<RatFunc> {
        let field = self.action.field();
        let mut out = vec![RatFunc::zero(field); self.g()];
        let d = match p.degree() {
            None => return out,
            Some(d) => d,
        };
        assert!(d < table.len(), "power table too short");
        for i in 0..=d {
            let c = p.coeff(i);
            if c.is_zero() {
                continue;
            }
            for (acc, y) in out.iter_mut().zip(&table[i]) {
                *acc = &*acc + &y.scale_elem(&c);
            }
        }
        out
    }

    /// All (P, phi_P(x)) with deg P < degree_bound, in canonical order.
    pub fn orbit(
        &self,
        degree_bound: usize,
    ) -> impl Iterator<Item = (FqPoly, Vec<RatFunc>)> + '_ {
        let field = Arc::clone(self.action.field());
        let count = (field.order() as u128)
            .checked_pow(degree_bound as u32)
            .filter(|&c| c <= MAX_ENUMERATION)
            .expect("orbit enumeration bound too large");
        let table = self.power_table(degree_bound.max(1));
        (0..count).map(move |n| {
            let p = FqPoly::from_counter_index(&field, n);
            let point = self.point_from_table(&table, &p);
            (p, point)
        })
    }
}

/// Exact intersection: all P with deg P < degree_bound whose orbit point
/// satisfies every defining polynomial. Canonically ordered.
///
/// With threads > 1 the enumeration is split into contiguous index chunks
/// evaluated on scoped threads; the chunk results are concatenated in
/// order, so the output is identical to the sequential run.
pub fn intersect(
    variety: &Variety,
    module: &CyclicModule,
    degree_bound: usize,
    threads: usize,
) -> Result<Vec<FqPoly>> {
    if variety.g() != module.g() {
        return Err(Error::DimensionMismatch {
            expected: module.g(),
            actual: variety.g(),
        });
    }
    let field = module.action().field();
    let count = (field.order() as u128)
        .checked_pow(degree_bound as u32)
        .filter(|&c| c <= MAX_ENUMERATION)
        .ok_or_else(|| {
            Error::InvalidArgument(format!(
                "enumeration bound q^{degree_bound} is too large"
            ))
        })?;
    let table = module.power_table(degree_bound.max(1));

    let check = |n: u128| -> Result<Option<FqPoly>> {
        let p = FqPoly::from_counter_index(field, n);
        let point = module.point_from_table(&table, &p);
        for f in variety.polys() {
            if !f.eval(&point)?.is_zero() {
                return Ok(None);
            }
        }
        Ok(Some(p))
    };

    if threads <= 1 || count < 2 {
        let mut out = Vec::new();
        for n in 0..count {
            if let Some(p) = check(n)? {
                out.push(p);
            }
        }
        return Ok(out);
    }

    let workers = threads.min(count as usize);
    let chunk = count.div_euclid(workers as u128) + 1;
    let results: Vec<Result<Vec<FqPoly>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let lo = chunk * w as u128;
                let hi = (lo + chunk).min(count);
                let check = &check;
                scope.spawn(move || -> Result<Vec<FqPoly>> {
                    let mut out = Vec::new();
                    for n in lo..hi {
                        if let Some(p) = check(n)? {
                            out.push(p);
                        }
                    }
                    Ok(out)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut out = Vec::new();
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}
