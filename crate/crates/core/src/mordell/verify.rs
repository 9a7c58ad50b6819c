//! Analytic certification of a detected coset.
//!
//! The exact search certifies a class d + (Q) only below the enumeration
//! bound. The analytic step upgrades the evidence: translate the variety to
//! phi_d(x), find a witness multiple P0 of Q whose orbit point lands in the
//! certified ball, extract the ratio invariants there, and check that every
//! defining polynomial vanishes along the parametrized curve
//! u -> (u, exp_2(lambda_2 log_1 u), ...) — both at fresh orbit multiples of
//! Q and at random ball points.
//!
//! Witness search: the residues of phi_{Q·t^k}(x) live in a finite set, so
//! either some t-power multiple lands in the ball directly or two iterates
//! collide to the ball depth and their difference P0 = Q(t^b - t^a) does.

use std::fmt;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::algebra::poly::FqPoly;
use crate::analytic::ProductAnalytic;
use crate::error::{Error, Result};
use crate::mordell::cyclic::CyclicModule;
use crate::mordell::variety::{translate_by, Variety};
use crate::places::{LocalElem, Place, Valuation};
use crate::twisted::ProductAction;

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    /// Working digits for embeddings and local arithmetic.
    pub precision: i64,
    /// Fresh orbit multiples and random ball points to sample, each.
    pub extra_samples: usize,
    /// Seed for the random ball samples.
    pub seed: u64,
    /// Highest t-power tried in the witness search.
    pub witness_cap: usize,
    /// Residuals must vanish to at least this valuation.
    pub residual_floor: i64,
}

impl VerifyOptions {
    pub fn new(precision: i64) -> VerifyOptions {
        VerifyOptions {
            precision,
            extra_samples: 5,
            seed: 0,
            witness_cap: 32,
            residual_floor: precision - 5,
        }
    }
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions::new(crate::places::local::DEFAULT_PRECISION as i64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleKind {
    /// u is the lead coordinate of a fresh orbit multiple of the modulus.
    OrbitMultiple,
    /// u is a pseudo-random point of the ball.
    RandomBall,
}

impl fmt::Display for SampleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SampleKind::OrbitMultiple => write!(f, "orbit"),
            SampleKind::RandomBall => write!(f, "random"),
        }
    }
}

/// Residual of one defining polynomial at one sample.
#[derive(Debug, Clone)]
pub struct ResidualEntry {
    pub poly_index: usize,
    /// Lower bound on the residual valuation (its absolute precision when it
    /// vanishes to precision, its exact valuation otherwise).
    pub valuation_bound: i64,
    /// True when no nonzero digit is visible at the working precision.
    pub vanishes: bool,
}

#[derive(Debug, Clone)]
pub struct SampleReport {
    pub kind: SampleKind,
    pub label: String,
    pub u_valuation: Option<i64>,
    pub residuals: Vec<ResidualEntry>,
    pub pass: bool,
}

/// Full audit trail of one coset verification.
pub struct VerifyReport {
    pub coset: (FqPoly, FqPoly),
    pub place: Place,
    pub precision: i64,
    pub residual_floor: i64,
    pub ball_min: i64,
    /// Valuation of the last computed series term at the ball boundary;
    /// the truncation tail is accepted heuristically past this margin.
    pub tail_margin: i64,
    pub witness: FqPoly,
    /// Coordinate valuations of the witness orbit point (original order).
    pub witness_valuations: Vec<Option<i64>>,
    /// Coordinate permutation placing the lead first.
    pub lead_permutation: Vec<usize>,
    /// Ratio invariants in permuted order (one per non-lead coordinate).
    pub lambdas: Vec<LocalElem>,
    pub samples: Vec<SampleReport>,
    pub pass: bool,
}

fn act_local_point(action: &ProductAction, p: &FqPoly, point: &[LocalElem]) -> Vec<LocalElem> {
    action
        .modules()
        .iter()
        .zip(point)
        .map(|(m, x)| m.act_local(p, x))
        .collect()
}

fn point_in_ball(point: &[LocalElem], min_val: i64) -> bool {
    point.iter().all(|x| x.val_lower_bound() >= min_val)
}

fn point_all_zero(point: &[LocalElem]) -> bool {
    point.iter().all(|x| x.is_zero_to_prec())
}

/// Find P0 in (Q) with phi_{P0}(x) inside the ball, together with the local
/// orbit point. Tries Q·t^k first, then differences Q·(t^b - t^a) via
/// residue collisions.
fn find_witness(
    action: &ProductAction,
    base: &[LocalElem],
    q_poly: &FqPoly,
    min_val: i64,
    cap: usize,
) -> Result<(FqPoly, Vec<LocalElem>)> {
    let field = action.field();
    let t = FqPoly::var(field);
    let mut iterates: Vec<Vec<LocalElem>> = Vec::with_capacity(cap + 1);
    iterates.push(act_local_point(action, q_poly, base));
    for k in 0..=cap {
        if k > 0 {
            let next = act_local_point(action, &t, iterates.last().unwrap());
            iterates.push(next);
        }
        let w = &iterates[k];
        if point_in_ball(w, min_val) && !point_all_zero(w) {
            return Ok((q_poly * &t.pow(k as u64), w.clone()));
        }
    }
    // Collision pass: phi_{Q(t^b - t^a)}(x) = w_b - w_a by additivity.
    for b in 1..iterates.len() {
        for a in 0..b {
            let diff: Vec<LocalElem> = iterates[b]
                .iter()
                .zip(&iterates[a])
                .map(|(wb, wa)| wb.sub(wa))
                .collect();
            if point_in_ball(&diff, min_val) && !point_all_zero(&diff) {
                let p0 = q_poly * &(&t.pow(b as u64) - &t.pow(a as u64));
                return Ok((p0, diff));
            }
        }
    }
    // A fully torsion orbit leaves only zero-to-precision differences.
    for b in 1..iterates.len() {
        for a in 0..b {
            let diff: Vec<LocalElem> = iterates[b]
                .iter()
                .zip(&iterates[a])
                .map(|(wb, wa)| wb.sub(wa))
                .collect();
            if point_in_ball(&diff, min_val) {
                return Err(Error::LambdaUndefined);
            }
        }
    }
    Err(Error::NoAnalyticWitness)
}

/// Random element with valuation >= min_val and the given digit budget.
fn random_ball_point(
    rng: &mut StdRng,
    place: &Place,
    min_val: i64,
    digits: usize,
) -> LocalElem {
    let field = place.field();
    let q = field.order();
    let res_deg = place.degree();
    loop {
        let digit_vec: Vec<FqPoly> = (0..digits)
            .map(|_| {
                let coeffs: Vec<u32> = (0..res_deg).map(|_| rng.gen_range(0..q)).collect();
                FqPoly::from_encoded(field, &coeffs)
            })
            .collect();
        if digit_vec.iter().any(|d| !d.is_zero()) {
            return LocalElem::from_parts(place.clone(), min_val, digit_vec);
        }
    }
}

/// Verify one detected coset analytically. See the module docs for the
/// pipeline; the report records every residual valuation.
pub fn verify_coset_analytic(
    variety: &Variety,
    module: &CyclicModule,
    coset: &(FqPoly, FqPoly),
    place: &Place,
    degree_bound: usize,
    opts: &VerifyOptions,
) -> Result<VerifyReport> {
    let action = module.action();
    let g = action.g();
    if variety.g() != g {
        return Err(Error::DimensionMismatch {
            expected: g,
            actual: variety.g(),
        });
    }
    let (d_rep, q_mod) = coset;
    if q_mod.is_zero() {
        return Err(Error::ZeroArgument("coset modulus"));
    }
    if !action.good_reduction(place) {
        return Err(Error::BadReduction(format!(
            "verification place {place} must be one of good reduction"
        )));
    }
    for (i, x) in module.generator().iter().enumerate() {
        if !place.valuation(x).at_least(0) {
            return Err(Error::InvalidArgument(format!(
                "generator coordinate {} is not integral at {place}",
                i + 1
            )));
        }
    }

    let ctx0 = ProductAnalytic::new(action, place, opts.precision)?;
    let ball_min = ctx0.ball_min();

    // Witness in the ideal (Q), as a local orbit point.
    let base: Vec<LocalElem> = module
        .generator()
        .iter()
        .map(|x| LocalElem::embed(place, x, opts.precision as usize))
        .collect();
    let (witness_p, witness_pt) =
        find_witness(action, &base, q_mod, ball_min, opts.witness_cap)?;
    let witness_vals: Vec<Option<i64>> = witness_pt.iter().map(|x| x.valuation()).collect();

    // Lead normalization from the witness logarithms.
    let logs = ctx0.logs_of(&witness_pt)?;
    let perm = ProductAnalytic::normalize_lead(&logs)?;
    let action_p = action.permuted(&perm);
    let ctx = ProductAnalytic::new(&action_p, place, opts.precision)?;
    let witness_perm: Vec<LocalElem> = perm.iter().map(|&i| witness_pt[i].clone()).collect();
    let logs_perm: Vec<LocalElem> = perm.iter().map(|&i| logs[i].clone()).collect();
    let lambdas = ctx.lambdas_from_logs(&logs_perm)?;

    // Translated polynomials at phi_d(x), in the original coordinate order.
    let base_pt = action.act(d_rep, module.generator())?;
    let translated = translate_by(variety, &base_pt)?;

    let evaluate_sample = |kind: SampleKind,
                           label: String,
                           u: &LocalElem|
     -> Result<SampleReport> {
        let z_perm = ctx.zu(&lambdas, u)?;
        // Un-permute back to the variety's coordinate order.
        let mut z = vec![LocalElem::zero(place.clone(), 0); g];
        for (new_idx, &old_idx) in perm.iter().enumerate() {
            z[old_idx] = z_perm[new_idx].clone();
        }
        let mut residuals = Vec::with_capacity(translated.polys().len());
        let mut pass = true;
        for (j, f) in translated.polys().iter().enumerate() {
            let r = f.eval_local(&z, place, opts.precision as usize)?;
            let vanishes = r.is_zero_to_prec();
            let bound = if vanishes {
                r.abs_prec()
            } else {
                r.valuation().unwrap()
            };
            if !(vanishes && bound >= opts.residual_floor) {
                pass = false;
            }
            residuals.push(ResidualEntry {
                poly_index: j,
                valuation_bound: bound,
                vanishes,
            });
        }
        Ok(SampleReport {
            kind,
            label,
            u_valuation: u.valuation(),
            residuals,
            pass,
        })
    };

    let mut samples = Vec::new();

    // Fresh multiples of Q beyond the detection bound: P = P0·R.
    let field = action.field();
    let p0_deg = witness_p.degree().unwrap_or(0);
    let mut taken = 0usize;
    let mut ridx: u128 = 1;
    while taken < opts.extra_samples {
        let r = FqPoly::from_counter_index(field, ridx);
        ridx += 1;
        if r.is_zero() {
            continue;
        }
        if p0_deg + r.degree().unwrap() < degree_bound {
            continue;
        }
        let moved = act_local_point(&action_p, &r, &witness_perm);
        let u = moved[0].clone();
        let label = format!("P = ({witness_p})*({r})");
        samples.push(evaluate_sample(SampleKind::OrbitMultiple, label, &u)?);
        taken += 1;
    }

    // Random ball points.
    let mut rng = StdRng::seed_from_u64(opts.seed);
    for k in 0..opts.extra_samples {
        let u = random_ball_point(&mut rng, place, ball_min, opts.precision as usize);
        let label = format!("random #{}", k + 1);
        samples.push(evaluate_sample(SampleKind::RandomBall, label, &u)?);
    }

    let pass = samples.iter().all(|s| s.pass);
    Ok(VerifyReport {
        coset: coset.clone(),
        place: place.clone(),
        precision: opts.precision,
        residual_floor: opts.residual_floor,
        ball_min,
        tail_margin: ctx.tail_margin(),
        witness: witness_p,
        witness_valuations: witness_vals,
        lead_permutation: perm,
        lambdas,
        samples,
        pass,
    })
}

/// Orbit membership of the witness valuations, for reports.
pub fn valuation_string(v: &Option<i64>) -> String {
    match v {
        Some(v) => v.to_string(),
        None => Valuation::Infinity.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{FqField, RatFunc};
    use crate::mordell::variety::MultiPoly;
    use crate::twisted::DrinfeldModule;
    use std::sync::Arc;

    fn carlitz_pair_instance() -> (CyclicModule, Variety, Place) {
        let f = FqField::prime(2).unwrap();
        let c = DrinfeldModule::carlitz(&f);
        let action = ProductAction::new(vec![c.clone(), c]).unwrap();
        let gen = vec![
            RatFunc::from_poly(FqPoly::from_ints(&f, &[0, 0, 1])),
            RatFunc::var(&f),
        ];
        let module = CyclicModule::new(action, gen).unwrap();
        let v = Variety::new(2, vec![MultiPoly::var(&f, 2, 1)]).unwrap();
        let place = Place::finite(FqPoly::from_ints(&f, &[1, 1])).unwrap();
        (module, v, place)
    }

    #[test]
    fn verifies_the_detected_class() {
        let (module, variety, place) = carlitz_pair_instance();
        let f = module.action().field().clone();
        let coset = (FqPoly::zero(&f), FqPoly::var(&f));
        let opts = VerifyOptions {
            precision: 40,
            extra_samples: 5,
            seed: 0,
            witness_cap: 32,
            residual_floor: 35,
        };
        let report =
            verify_coset_analytic(&variety, &module, &coset, &place, 6, &opts).unwrap();
        assert!(report.pass, "report: {:?}", report
            .samples
            .iter()
            .map(|s| (s.label.clone(), s.pass))
            .collect::<Vec<_>>());
        assert_eq!(report.samples.len(), 10);
        for s in &report.samples {
            for r in &s.residuals {
                assert!(r.vanishes && r.valuation_bound >= 35, "{}: {:?}", s.label, r);
            }
        }
        // the witness must be a multiple of t landing in the ball
        assert!(FqPoly::var(&f).divides(&report.witness));
        assert!(report.ball_min >= 1);
        // second coordinate is torsion: lambda vanishes to precision
        assert_eq!(report.lambdas.len(), 1);
        assert!(report.lambdas[0].is_zero_to_prec());
    }

    #[test]
    fn wrong_coset_is_flagged() {
        let (module, _, place) = carlitz_pair_instance();
        let f = module.action().field().clone();
        // X2 = t^4: phi_d(x) misses this variety off the detected class, so
        // residuals at orbit samples stay visibly nonzero.
        let v = Variety::new(
            2,
            vec![MultiPoly::var(&f, 2, 1).sub(&MultiPoly::constant(
                &f,
                2,
                RatFunc::from_poly(FqPoly::from_ints(&f, &[0, 0, 0, 0, 1])),
            ))],
        )
        .unwrap();
        let coset = (FqPoly::zero(&f), FqPoly::var(&f));
        let opts = VerifyOptions {
            precision: 40,
            extra_samples: 3,
            seed: 0,
            witness_cap: 32,
            residual_floor: 35,
        };
        let report = verify_coset_analytic(&v, &module, &coset, &place, 6, &opts).unwrap();
        assert!(!report.pass);
        assert!(report
            .samples
            .iter()
            .any(|s| s.residuals.iter().any(|r| !r.vanishes)));
    }

    #[test]
    fn diagonal_identity_lambda() {
        // identical coordinates: lambda = 1, Z_u = (u, u), residuals vanish
        let f = FqField::prime(2).unwrap();
        let c = DrinfeldModule::carlitz(&f);
        let action = ProductAction::new(vec![c.clone(), c]).unwrap();
        let x = RatFunc::from_poly(FqPoly::from_ints(&f, &[0, 0, 1]));
        let module = CyclicModule::new(action, vec![x.clone(), x]).unwrap();
        let diag = MultiPoly::var(&f, 2, 0).sub(&MultiPoly::var(&f, 2, 1));
        let v = Variety::new(2, vec![diag]).unwrap();
        let place = Place::finite(FqPoly::from_ints(&f, &[1, 1])).unwrap();
        // the whole orbit satisfies the diagonal: coset (0, 1)
        let coset = (FqPoly::zero(&f), FqPoly::one(&f));
        let opts = VerifyOptions {
            precision: 40,
            extra_samples: 4,
            seed: 7,
            witness_cap: 32,
            residual_floor: 35,
        };
        let report = verify_coset_analytic(&v, &module, &coset, &place, 5, &opts).unwrap();
        assert!(report.pass);
        let one = LocalElem::embed(&place, &RatFunc::one(&f), 40);
        assert!(report.lambdas[0].agrees_with(&one));
    }

    #[test]
    fn bad_reduction_place_rejected() {
        let (module, variety, _) = carlitz_pair_instance();
        let f = module.action().field().clone();
        let coset = (FqPoly::zero(&f), FqPoly::var(&f));
        let inf = Place::infinite(&f);
        assert!(matches!(
            verify_coset_analytic(
                &variety,
                &module,
                &coset,
                &inf,
                6,
                &VerifyOptions::new(40)
            ),
            Err(Error::BadReduction(_))
        ));
    }

    #[test]
    fn non_integral_generator_rejected() {
        let f: Arc<FqField> = FqField::prime(2).unwrap();
        let c = DrinfeldModule::carlitz(&f);
        let action = ProductAction::new(vec![c]).unwrap();
        let gen = vec![RatFunc::var(&f).inv().unwrap()];
        let module = CyclicModule::new(action, gen).unwrap();
        let v = Variety::new(1, vec![MultiPoly::var(&f, 1, 0)]).unwrap();
        let place = Place::finite(FqPoly::var(&f)).unwrap();
        let coset = (FqPoly::zero(&f), FqPoly::var(&f));
        assert!(matches!(
            verify_coset_analytic(&v, &module, &coset, &place, 4, &VerifyOptions::new(40)),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn deterministic_across_runs() {
        let (module, variety, place) = carlitz_pair_instance();
        let f = module.action().field().clone();
        let coset = (FqPoly::zero(&f), FqPoly::var(&f));
        let opts = VerifyOptions {
            precision: 40,
            extra_samples: 3,
            seed: 5,
            witness_cap: 32,
            residual_floor: 35,
        };
        let r1 = verify_coset_analytic(&variety, &module, &coset, &place, 6, &opts).unwrap();
        let r2 = verify_coset_analytic(&variety, &module, &coset, &place, 6, &opts).unwrap();
        assert_eq!(r1.witness, r2.witness);
        let labels1: Vec<String> = r1.samples.iter().map(|s| s.label.clone()).collect();
        let labels2: Vec<String> = r2.samples.iter().map(|s| s.label.clone()).collect();
        assert_eq!(labels1, labels2);
        for (a, b) in r1.samples.iter().zip(&r2.samples) {
            assert_eq!(a.u_valuation, b.u_valuation);
            for (x, y) in a.residuals.iter().zip(&b.residuals) {
                assert_eq!(x.valuation_bound, y.valuation_bound);
            }
        }
    }
}
