//! Orbit enumeration, exact intersection with affine varieties, inference
//! of the residue-class structure, and its analytic certification.

pub mod coset;
pub mod cyclic;
pub mod rankone;
pub mod variety;
pub mod verify;

pub use coset::{infer_cosets, stronger_echo, CosetStructure};
pub use cyclic::{intersect, CyclicModule};
pub use rankone::{intersect_rank_one, RankOneModule};
pub use variety::{translate_by, MultiPoly, Variety};
pub use verify::{
    verify_coset_analytic, ResidualEntry, SampleKind, SampleReport, VerifyOptions, VerifyReport,
};

use crate::algebra::poly::FqPoly;
use crate::error::Result;

/// Intersection plus inference, with a stability probe: the run is repeated
/// one evidence level lower and the coset lists are compared. A mismatch
/// (or a bound too small to probe) reports instability; callers should
/// increase the bound.
pub fn intersect_with_stability(
    variety: &Variety,
    module: &CyclicModule,
    degree_bound: usize,
    max_mod_deg: usize,
    threads: usize,
) -> Result<(Vec<FqPoly>, CosetStructure, bool)> {
    let field = module.action().field();
    let s = intersect(variety, module, degree_bound, threads)?;
    let structure = infer_cosets(&s, field, degree_bound, max_mod_deg)?;
    let stable = if degree_bound >= 2 && max_mod_deg + 1 < degree_bound {
        let lower_cap = max_mod_deg.min(degree_bound - 2);
        let s_lower = intersect(variety, module, degree_bound - 1, threads)?;
        let lower = infer_cosets(&s_lower, field, degree_bound - 1, lower_cap)?;
        lower.cosets() == structure.cosets()
    } else {
        false
    };
    Ok((s, structure, stable))
}
