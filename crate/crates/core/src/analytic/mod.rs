//! The exponential and logarithm series of a module, convergence balls, the
//! v-adic ratio invariants, and the analytic parametrization of orbits.
//!
//! Both series have coefficients in K and are place-independent; only the
//! convergence domain depends on the place. Writing phi_t = t + a_1 tau +
//! ... + a_r tau^r, the defining compositions phi_t·exp = exp·t and
//! log·phi_t = t·log pin the coefficients:
//!
//!   e_0 = 1,   e_n (t^(q^n) - t) = sum_{j=1}^{min(r,n)} a_j e_{n-j}^(q^j)
//!   l_0 = 1,   l_n (t - t^(q^n)) = sum_{i=0}^{n-1} l_i a_{n-i}^(q^i)
//!
//! A ball certificate is an integer m >= 1 such that for every point with
//! v(x) >= m the term valuations v(c_n) + q^n v(x) strictly increase along
//! the nonzero terms and exceed v(x) from n = 1 on; the linear term then
//! dominates and evaluation is an isometry. Terms beyond the truncation are
//! accepted on the strength of the increase pattern, which reports flag as
//! heuristic.

pub mod newton;

pub use newton::isolated_zero_bound;

use std::sync::Arc;

use crate::algebra::fq::FqField;
use crate::algebra::poly::FqPoly;
use crate::algebra::ratfunc::RatFunc;
use crate::error::{Error, Result};
use crate::places::{LocalElem, Place, Valuation};
use crate::twisted::{DrinfeldModule, ProductAction};

/// Hard cap on series truncation; term valuations grow like q^n, so this is
/// far beyond any digit budget the tool accepts.
pub const TRUNCATION_CAP: usize = 12;

/// Search cap for the ball parameter.
const BALL_SEARCH_CAP: i64 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKind {
    Exp,
    Log,
}

/// Truncated coefficient list of exp or log for one module.
#[derive(Clone)]
pub struct ExpLogSeries {
    kind: SeriesKind,
    module: DrinfeldModule,
    coeffs: Vec<RatFunc>,
}

impl ExpLogSeries {
    pub fn kind(&self) -> SeriesKind {
        self.kind
    }

    pub fn module(&self) -> &DrinfeldModule {
        &self.module
    }

    pub fn field(&self) -> &Arc<FqField> {
        self.module.field()
    }

    /// Coefficients c_0 ..= c_N.
    pub fn coeffs(&self) -> &[RatFunc] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> &RatFunc {
        &self.coeffs[n]
    }

    pub fn truncation(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Evaluate sum c_n x^(q^n) inside a certified ball.
    ///
    /// Terms whose valuation provably exceeds the accumulated precision are
    /// skipped; the ball's increase certificate covers the remainder.
    pub fn eval(&self, ball: &ConvergenceBall, x: &LocalElem) -> Result<LocalElem> {
        if self.truncation() < ball.truncation {
            return Err(Error::InvalidArgument(format!(
                "series truncated at {} cannot serve a ball certified to {}",
                self.truncation(),
                ball.truncation
            )));
        }
        assert!(
            x.place() == &ball.place,
            "place mismatch between point and ball"
        );
        if !ball.contains(x) {
            return Err(Error::OutsideBall {
                required: ball.min_valuation,
                actual: x.valuation(),
            });
        }
        let q = self.field().order() as u64;
        let mut acc = x.scale(&self.coeffs[0]);
        let mut xq = x.clone();
        for c in self.coeffs.iter().skip(1) {
            xq = xq.pow(q);
            if c.is_zero() {
                continue;
            }
            let cv = match ball.place.valuation(c) {
                Valuation::Finite(v) => v,
                Valuation::Infinity => unreachable!("nonzero coefficient"),
            };
            if xq.val_lower_bound() + cv >= acc.abs_prec() {
                // This and all later terms sit beyond the known window.
                break;
            }
            acc = acc.add(&xq.scale(c));
        }
        // The certificate forces the linear term to dominate.
        if let (Some(vx), Some(va)) = (x.valuation(), acc.valuation()) {
            if vx != va {
                return Err(Error::Internal(format!(
                    "isometry violated: v(x) = {vx} but v(series(x)) = {va}"
                )));
            }
        }
        Ok(acc)
    }
}

/// Exponential coefficients e_0 ..= e_n for the module.
pub fn exp_coeffs(module: &DrinfeldModule, n: usize) -> ExpLogSeries {
    let field = module.field();
    let t = RatFunc::var(field);
    let r = module.rank();
    let a: Vec<RatFunc> = (0..=r).map(|j| module.phi_t().coeff(j)).collect();
    let mut e = vec![RatFunc::one(field)];
    for k in 1..=n {
        let mut rhs = RatFunc::zero(field);
        for j in 1..=r.min(k) {
            if a[j].is_zero() {
                continue;
            }
            rhs = &rhs + &(&a[j] * &e[k - j].q_power(j as u32));
        }
        let denom = &t.q_power(k as u32) - &t;
        e.push(&rhs / &denom);
    }
    ExpLogSeries {
        kind: SeriesKind::Exp,
        module: module.clone(),
        coeffs: e,
    }
}

/// Logarithm coefficients l_0 ..= l_n for the module.
pub fn log_coeffs(module: &DrinfeldModule, n: usize) -> ExpLogSeries {
    let field = module.field();
    let t = RatFunc::var(field);
    let r = module.rank();
    let a: Vec<RatFunc> = (0..=r).map(|j| module.phi_t().coeff(j)).collect();
    let mut l = vec![RatFunc::one(field)];
    for k in 1..=n {
        let mut rhs = RatFunc::zero(field);
        for i in k.saturating_sub(r)..k {
            let aj = &a[k - i];
            if aj.is_zero() {
                continue;
            }
            rhs = &rhs + &(&l[i] * &aj.q_power(i as u32));
        }
        let denom = &t - &t.q_power(k as u32);
        l.push(&rhs / &denom);
    }
    ExpLogSeries {
        kind: SeriesKind::Log,
        module: module.clone(),
        coeffs: l,
    }
}

/// Twisted composition of coefficient lists, truncated: coefficient n of
/// a∘b is sum_{i+j=n} a_i b_j^(q^i), kept for n <= trunc.
pub fn compose_truncated(a: &[RatFunc], b: &[RatFunc], trunc: usize) -> Vec<RatFunc> {
    let field = a
        .first()
        .or_else(|| b.first())
        .expect("composition of empty series")
        .field();
    let mut out = vec![RatFunc::zero(field); trunc + 1];
    for (i, ai) in a.iter().enumerate().take(trunc + 1) {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            if i + j > trunc {
                break;
            }
            if bj.is_zero() {
                continue;
            }
            out[i + j] = &out[i + j] + &(ai * &bj.q_power(i as u32));
        }
    }
    out
}

/// A certified isometry ball: membership is v(x) >= min_valuation.
#[derive(Debug, Clone)]
pub struct ConvergenceBall {
    place: Place,
    min_valuation: i64,
    truncation: usize,
    /// Valuation of the last computed term at the ball boundary; the
    /// higher above the working precision, the safer the truncation.
    tail_margin: i64,
}

impl ConvergenceBall {
    pub fn place(&self) -> &Place {
        &self.place
    }

    pub fn min_valuation(&self) -> i64 {
        self.min_valuation
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn tail_margin(&self) -> i64 {
        self.tail_margin
    }

    pub fn contains(&self, x: &LocalElem) -> bool {
        x.place() == &self.place && x.val_lower_bound() >= self.min_valuation
    }
}

/// Valuations of nonzero coefficients as (index, valuation), for one series.
fn coeff_valuations(series: &ExpLogSeries, place: &Place) -> Vec<(usize, i64)> {
    series
        .coeffs()
        .iter()
        .enumerate()
        .filter_map(|(n, c)| match place.valuation(c) {
            Valuation::Finite(v) => Some((n, v)),
            Valuation::Infinity => None,
        })
        .collect()
}

/// Minimal m >= 1 making the term valuations v(c_n) + q^n·m strictly
/// increase along nonzero terms and exceed m from the first nonzero
/// positive-index term on.
fn minimal_ball_param(q: i128, vals: &[(usize, i64)]) -> i64 {
    let mut m: i128 = 1;
    let qpow = |n: usize| -> i128 { q.pow(n as u32) };
    for w in vals.windows(2) {
        let (n1, v1) = w[0];
        let (n2, v2) = w[1];
        let gap = qpow(n2) - qpow(n1);
        // need m > (v1 - v2) / gap
        let need = (v1 as i128 - v2 as i128).div_euclid(gap) + 1;
        m = m.max(need);
    }
    for &(n, v) in vals.iter().filter(|&&(n, _)| n >= 1) {
        let gap = qpow(n) - 1;
        // need m > -v / gap
        let need = (-(v as i128)).div_euclid(gap) + 1;
        m = m.max(need);
    }
    m.min(i64::MAX as i128) as i64
}

/// Certify a ball for both series at truncation `n`.
///
/// Finite places require good reduction; the infinite place is always one of
/// bad reduction but is admitted, with the certificate carrying the burden.
pub fn ball(module: &DrinfeldModule, place: &Place, n: usize) -> Result<ConvergenceBall> {
    if !place.is_infinite() && !module.good_reduction(place) {
        return Err(Error::BadReduction(format!(
            "module has bad reduction at {place}"
        )));
    }
    let q = module.field().order() as i128;
    let exp = exp_coeffs(module, n);
    let log = log_coeffs(module, n);
    let ev = coeff_valuations(&exp, place);
    let lv = coeff_valuations(&log, place);
    let m = minimal_ball_param(q, &ev).max(minimal_ball_param(q, &lv));
    if m > BALL_SEARCH_CAP {
        return Err(Error::NoCertifiedBall { truncation: n });
    }
    // Verification pass over both chains.
    for vals in [&ev, &lv] {
        let mut prev: Option<i128> = None;
        for &(k, v) in vals.iter() {
            let term = v as i128 + q.pow(k as u32) * m as i128;
            if let Some(p) = prev {
                if term <= p {
                    return Err(Error::NoCertifiedBall { truncation: n });
                }
            }
            if k >= 1 && term <= m as i128 {
                return Err(Error::NoCertifiedBall { truncation: n });
            }
            prev = Some(term);
        }
    }
    let margin_of = |vals: &[(usize, i64)]| -> i128 {
        vals.last()
            .map(|&(k, v)| v as i128 + q.pow(k as u32) * m as i128)
            .unwrap_or(i64::MAX as i128)
    };
    let tail_margin = margin_of(&ev).min(margin_of(&lv)).min(i64::MAX as i128) as i64;
    Ok(ConvergenceBall {
        place: place.clone(),
        min_valuation: m,
        truncation: n,
        tail_margin,
    })
}

pub fn eval_exp(series: &ExpLogSeries, ball: &ConvergenceBall, x: &LocalElem) -> Result<LocalElem> {
    assert!(series.kind() == SeriesKind::Exp, "expected an exp series");
    series.eval(ball, x)
}

pub fn eval_log(series: &ExpLogSeries, ball: &ConvergenceBall, x: &LocalElem) -> Result<LocalElem> {
    assert!(series.kind() == SeriesKind::Log, "expected a log series");
    series.eval(ball, x)
}

/// Analytic context for one module at one place: series pair plus ball,
/// with the truncation chosen so the tail clears the digit budget.
#[derive(Clone)]
pub struct ModuleAnalytic {
    pub exp: ExpLogSeries,
    pub log: ExpLogSeries,
    pub ball: ConvergenceBall,
}

impl ModuleAnalytic {
    pub fn new(module: &DrinfeldModule, place: &Place, precision: i64) -> Result<ModuleAnalytic> {
        for n in 1..=TRUNCATION_CAP {
            let b = ball(module, place, n)?;
            if b.tail_margin() > precision {
                return Ok(ModuleAnalytic {
                    exp: exp_coeffs(module, n),
                    log: log_coeffs(module, n),
                    ball: b,
                });
            }
        }
        Err(Error::NoCertifiedBall {
            truncation: TRUNCATION_CAP,
        })
    }
}

/// The two cross products of logarithms agree for any admissible P, Q:
/// log_theta(theta_P(x))·log_psi(psi_Q(y)) = log_theta(theta_Q(x))·log_psi(psi_P(y)).
///
/// Returns true when the products agree on the whole tracked window. A false
/// return is an implementation or precision bug, not a mathematical
/// possibility; inadmissible inputs error instead.
#[allow(clippy::too_many_arguments)]
pub fn same_ratio_check(
    theta: &DrinfeldModule,
    psi: &DrinfeldModule,
    x: &RatFunc,
    y: &RatFunc,
    p_poly: &FqPoly,
    q_poly: &FqPoly,
    place: &Place,
    precision: i64,
) -> Result<bool> {
    let ta = ModuleAnalytic::new(theta, place, precision)?;
    let pa = ModuleAnalytic::new(psi, place, precision)?;
    let embed_checked = |ctx: &ModuleAnalytic, v: &RatFunc| -> Result<LocalElem> {
        let e = LocalElem::embed(place, v, precision as usize);
        if !ctx.ball.contains(&e) {
            return Err(Error::OutsideBall {
                required: ctx.ball.min_valuation(),
                actual: e.valuation(),
            });
        }
        Ok(e)
    };
    let l_tp = ta.log.eval(&ta.ball, &embed_checked(&ta, &theta.act(p_poly, x))?)?;
    let l_tq = ta.log.eval(&ta.ball, &embed_checked(&ta, &theta.act(q_poly, x))?)?;
    let l_pp = pa.log.eval(&pa.ball, &embed_checked(&pa, &psi.act(p_poly, y))?)?;
    let l_pq = pa.log.eval(&pa.ball, &embed_checked(&pa, &psi.act(q_poly, y))?)?;
    let lhs = l_tp.mul(&l_pq);
    let rhs = l_tq.mul(&l_pp);
    Ok(lhs.agrees_with(&rhs))
}

/// Analytic context for a coordinate-wise action: per-module series and a
/// combined ball (the maximum of the per-module parameters).
pub struct ProductAnalytic {
    action: ProductAction,
    place: Place,
    precision: i64,
    modules: Vec<ModuleAnalytic>,
    ball_min: i64,
}

impl ProductAnalytic {
    pub fn new(action: &ProductAction, place: &Place, precision: i64) -> Result<ProductAnalytic> {
        let modules: Vec<ModuleAnalytic> = action
            .modules()
            .iter()
            .map(|m| ModuleAnalytic::new(m, place, precision))
            .collect::<Result<_>>()?;
        let ball_min = modules
            .iter()
            .map(|m| m.ball.min_valuation())
            .max()
            .unwrap();
        Ok(ProductAnalytic {
            action: action.clone(),
            place: place.clone(),
            precision,
            modules,
            ball_min,
        })
    }

    pub fn g(&self) -> usize {
        self.modules.len()
    }

    pub fn place(&self) -> &Place {
        &self.place
    }

    pub fn precision(&self) -> i64 {
        self.precision
    }

    pub fn action(&self) -> &ProductAction {
        &self.action
    }

    pub fn module_ctx(&self, i: usize) -> &ModuleAnalytic {
        &self.modules[i]
    }

    /// Membership valuation of the combined product ball.
    pub fn ball_min(&self) -> i64 {
        self.ball_min
    }

    /// Smallest truncation tail margin across coordinates (all are certified
    /// past the precision budget).
    pub fn tail_margin(&self) -> i64 {
        self.modules
            .iter()
            .map(|m| m.ball.tail_margin())
            .min()
            .unwrap()
    }

    fn check_in_ball(&self, x: &LocalElem) -> Result<()> {
        if x.val_lower_bound() < self.ball_min {
            return Err(Error::OutsideBall {
                required: self.ball_min,
                actual: x.valuation(),
            });
        }
        Ok(())
    }

    /// Coordinate-wise logarithms of a point in the combined ball.
    pub fn logs_of(&self, point: &[LocalElem]) -> Result<Vec<LocalElem>> {
        if point.len() != self.g() {
            return Err(Error::DimensionMismatch {
                expected: self.g(),
                actual: point.len(),
            });
        }
        point
            .iter()
            .zip(&self.modules)
            .map(|(x, ctx)| {
                self.check_in_ball(x)?;
                ctx.log.eval(&ctx.ball, x)
            })
            .collect()
    }

    /// Index of the coordinate whose logarithm has minimal valuation
    /// (maximal absolute value); errors if every logarithm vanishes to
    /// precision.
    pub fn choose_lead(logs: &[LocalElem]) -> Result<usize> {
        logs.iter()
            .enumerate()
            .filter_map(|(i, l)| l.valuation().map(|v| (i, v)))
            .min_by_key(|&(i, v)| (v, i))
            .map(|(i, _)| i)
            .ok_or(Error::LambdaUndefined)
    }

    /// Permutation bringing the lead coordinate first (others keep order).
    pub fn normalize_lead(logs: &[LocalElem]) -> Result<Vec<usize>> {
        let lead = Self::choose_lead(logs)?;
        let mut perm = vec![lead];
        perm.extend((0..logs.len()).filter(|&i| i != lead));
        Ok(perm)
    }

    /// Ratio invariants lambda_2..lambda_g from coordinate logarithms.
    pub fn lambdas_from_logs(&self, logs: &[LocalElem]) -> Result<Vec<LocalElem>> {
        if logs[0].is_zero_to_prec() {
            return Err(Error::LambdaUndefined);
        }
        let lead_inv = logs[0].inv()?;
        Ok(logs[1..].iter().map(|l| l.mul(&lead_inv)).collect())
    }

    /// lambda_i = log_i(phi_{i,P}(x_i)) / log_1(phi_{1,P}(x_1)) for i = 2..g.
    ///
    /// The orbit point is computed exactly and embedded; recomputing with a
    /// different admissible P yields the same digits on the common window.
    pub fn lambda_at(&self, point: &[RatFunc], p: &FqPoly) -> Result<Vec<LocalElem>> {
        if p.is_zero() {
            return Err(Error::ZeroArgument("lambda_at requires P != 0"));
        }
        let moved = self.action.act(p, point)?;
        if moved[0].is_zero() {
            return Err(Error::LambdaUndefined);
        }
        if self.action.module(0).detect_torsion_by_cycle(&point[0], 256) {
            return Err(Error::LambdaUndefined);
        }
        let local: Vec<LocalElem> = moved
            .iter()
            .map(|x| LocalElem::embed(&self.place, x, self.precision as usize))
            .collect();
        let logs = self.logs_of(&local)?;
        self.lambdas_from_logs(&logs)
    }

    /// The parametrized point Z_u = (u, exp_2(lambda_2 log_1 u), ...).
    ///
    /// Requires u in the combined ball and |lambda_i| <= 1; the arguments
    /// lambda_i·log_1(u) then stay in every coordinate ball.
    pub fn zu(&self, lambdas: &[LocalElem], u: &LocalElem) -> Result<Vec<LocalElem>> {
        if lambdas.len() + 1 != self.g() {
            return Err(Error::DimensionMismatch {
                expected: self.g() - 1,
                actual: lambdas.len(),
            });
        }
        self.check_in_ball(u)?;
        for l in lambdas {
            if l.val_lower_bound() < 0 {
                return Err(Error::UncertifiedLambda);
            }
        }
        let log_u = self.modules[0].log.eval(&self.modules[0].ball, u)?;
        let mut out = vec![u.clone()];
        for (l, ctx) in lambdas.iter().zip(&self.modules[1..]) {
            let arg = l.mul(&log_u);
            out.push(ctx.exp.eval(&ctx.ball, &arg)?);
        }
        Ok(out)
    }
}

/// Free-function form of [`ProductAnalytic::lambda_at`].
pub fn lambda_at(
    action: &ProductAction,
    point: &[RatFunc],
    p: &FqPoly,
    place: &Place,
    precision: i64,
) -> Result<Vec<LocalElem>> {
    ProductAnalytic::new(action, place, precision)?.lambda_at(point, p)
}

/// Free-function form of [`ProductAnalytic::zu`].
pub fn zu(
    action: &ProductAction,
    lambdas: &[LocalElem],
    place: &Place,
    u: &LocalElem,
    precision: i64,
) -> Result<Vec<LocalElem>> {
    ProductAnalytic::new(action, place, precision)?.zu(lambdas, u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::twisted::TwistedPoly;

    fn f2() -> Arc<FqField> {
        FqField::prime(2).unwrap()
    }

    fn rf(f: &Arc<FqField>, coeffs: &[i64]) -> RatFunc {
        RatFunc::from_poly(FqPoly::from_ints(f, coeffs))
    }

    fn place_t(f: &Arc<FqField>) -> Place {
        Place::finite(FqPoly::var(f)).unwrap()
    }

    fn place_t1(f: &Arc<FqField>) -> Place {
        Place::finite(FqPoly::from_ints(f, &[1, 1])).unwrap()
    }

    #[test]
    fn carlitz_exp_closed_forms() {
        for q in [2u32, 3] {
            let f = FqField::with_order(q).unwrap();
            let m = DrinfeldModule::carlitz(&f);
            let e = exp_coeffs(&m, 2);
            assert!(e.coeff(0).is_one());
            let t = RatFunc::var(&f);
            let d1 = &t.q_power(1) - &t;
            assert_eq!(e.coeff(1), &d1.inv().unwrap());
            let d2 = &d1.q_power(1) * &(&t.q_power(2) - &t);
            assert_eq!(e.coeff(2), &d2.inv().unwrap());
        }
    }

    #[test]
    fn carlitz_log_closed_form() {
        let f = FqField::prime(3).unwrap();
        let m = DrinfeldModule::carlitz(&f);
        let l = log_coeffs(&m, 1);
        assert!(l.coeff(0).is_one());
        let t = RatFunc::var(&f);
        assert_eq!(l.coeff(1), &(&t - &t.q_power(1)).inv().unwrap());
    }

    #[test]
    fn exp_log_compose_to_identity() {
        // rank 1 and rank 2, q = 2 and 3
        for q in [2u32, 3] {
            let f = FqField::with_order(q).unwrap();
            let modules = vec![
                DrinfeldModule::carlitz(&f),
                DrinfeldModule::new(TwistedPoly::from_coeffs(
                    &f,
                    vec![RatFunc::var(&f), RatFunc::var(&f), RatFunc::one(&f)],
                ))
                .unwrap(),
            ];
            for m in modules {
                let n = 4;
                let e = exp_coeffs(&m, n);
                let l = log_coeffs(&m, n);
                let comp = compose_truncated(e.coeffs(), l.coeffs(), n);
                assert!(comp[0].is_one());
                for c in &comp[1..] {
                    assert!(c.is_zero(), "exp∘log has nonzero tail {c}");
                }
                let comp2 = compose_truncated(l.coeffs(), e.coeffs(), n);
                assert!(comp2[0].is_one());
                for c in &comp2[1..] {
                    assert!(c.is_zero(), "log∘exp has nonzero tail {c}");
                }
            }
        }
    }

    #[test]
    fn ball_for_carlitz_at_t() {
        let f = f2();
        let m = DrinfeldModule::carlitz(&f);
        let v = place_t(&f);
        // truncation 0: no constraints beyond the linear term
        let b0 = ball(&m, &v, 0).unwrap();
        assert_eq!(b0.min_valuation(), 1);
        // v_t(e_n) = -(2^n - 1) and v_t(l_n) = -n: at m = 1 the exp terms all
        // have valuation 1, so the strict increase first holds at m = 2.
        for n in [1usize, 4, 6] {
            let b = ball(&m, &v, n).unwrap();
            assert_eq!(b.min_valuation(), 2, "truncation {n}");
        }
        // same shape at (t+1)
        let b = ball(&m, &place_t1(&f), 6).unwrap();
        assert_eq!(b.min_valuation(), 2);
    }

    #[test]
    fn ball_requires_good_reduction_at_finite_places() {
        let f = f2();
        let bad = DrinfeldModule::new(TwistedPoly::from_coeffs(
            &f,
            vec![
                RatFunc::var(&f),
                RatFunc::var(&f).inv().unwrap(),
                RatFunc::one(&f),
            ],
        ))
        .unwrap();
        assert!(matches!(
            ball(&bad, &place_t(&f), 3),
            Err(Error::BadReduction(_))
        ));
        // the infinite place is allowed through to certification
        assert!(ball(&DrinfeldModule::carlitz(&f), &Place::infinite(&f), 3).is_ok());
    }

    #[test]
    fn eval_is_isometry_and_exact_on_zero() {
        let f = f2();
        let m = DrinfeldModule::carlitz(&f);
        let v = place_t1(&f);
        let ctx = ModuleAnalytic::new(&m, &v, 40).unwrap();
        let zero = LocalElem::zero(v.clone(), 40);
        assert!(ctx.exp.eval(&ctx.ball, &zero).unwrap().is_zero_to_prec());

        // x = (t+1)^2 * t^2 has valuation 2 at (t+1)
        let x = &rf(&f, &[1, 0, 1]) * &rf(&f, &[0, 0, 1]);
        let e = LocalElem::embed(&v, &x, 40);
        let ex = ctx.exp.eval(&ctx.ball, &e).unwrap();
        let lx = ctx.log.eval(&ctx.ball, &e).unwrap();
        assert_eq!(ex.valuation(), Some(2));
        assert_eq!(lx.valuation(), Some(2));
        // log inverts exp to precision
        let back = ctx.log.eval(&ctx.ball, &ex).unwrap();
        assert!(back.agrees_with(&e));
    }

    #[test]
    fn eval_rejects_points_outside_ball() {
        let f = f2();
        let m = DrinfeldModule::carlitz(&f);
        let v = place_t1(&f);
        let ctx = ModuleAnalytic::new(&m, &v, 40).unwrap();
        // v(t^3 + t^4) = 1 < 2
        let x = rf(&f, &[0, 0, 0, 1, 1]);
        let e = LocalElem::embed(&v, &x, 40);
        assert!(matches!(
            ctx.exp.eval(&ctx.ball, &e),
            Err(Error::OutsideBall { .. })
        ));
    }

    #[test]
    fn functional_equation_log() {
        // a·log(x) = log(phi_a(x)) to working precision
        let f = f2();
        let m = DrinfeldModule::carlitz(&f);
        let v = place_t1(&f);
        let ctx = ModuleAnalytic::new(&m, &v, 40).unwrap();
        let x = &rf(&f, &[1, 0, 1]) * &rf(&f, &[0, 0, 1]);
        let e = LocalElem::embed(&v, &x, 40);
        for a in [
            FqPoly::var(&f),
            FqPoly::from_ints(&f, &[1, 1]),
            FqPoly::from_ints(&f, &[0, 1, 1]),
        ] {
            let lhs = ctx.log.eval(&ctx.ball, &e).unwrap().scale(
                &RatFunc::from_poly(a.clone()),
            );
            let moved = m.act(&a, &x);
            let rhs = ctx
                .log
                .eval(&ctx.ball, &LocalElem::embed(&v, &moved, 40))
                .unwrap();
            assert!(lhs.agrees_with(&rhs), "failed for a = {a}");
            assert!(lhs.sub(&rhs).abs_prec() >= 40);
        }
    }

    #[test]
    fn functional_equation_exp() {
        // exp(a·x) = phi_a(exp(x)) to working precision
        let f = f2();
        let m = DrinfeldModule::carlitz(&f);
        let v = place_t1(&f);
        let ctx = ModuleAnalytic::new(&m, &v, 40).unwrap();
        let x = &rf(&f, &[1, 0, 1]) * &rf(&f, &[0, 0, 1]);
        let a = FqPoly::var(&f);
        let e = LocalElem::embed(&v, &x, 40);
        let lhs = ctx
            .exp
            .eval(&ctx.ball, &e.scale(&RatFunc::from_poly(a.clone())))
            .unwrap();
        let rhs = m.act_local(&a, &ctx.exp.eval(&ctx.ball, &e).unwrap());
        assert!(lhs.agrees_with(&rhs));
    }

    #[test]
    fn same_ratio_trivial_and_generic() {
        let f = f2();
        let theta = DrinfeldModule::carlitz(&f);
        let psi = DrinfeldModule::new(TwistedPoly::from_coeffs(
            &f,
            vec![RatFunc::var(&f), RatFunc::var(&f)],
        ))
        .unwrap();
        let v = place_t1(&f);
        // x deep in the ball so every P is admissible
        let x = &rf(&f, &[1, 0, 1]) * &rf(&f, &[0, 0, 1]); // t^2 (t+1)^2
        let t = FqPoly::var(&f);
        let t1 = FqPoly::from_ints(&f, &[1, 1]);
        // P = Q: identical sides
        assert!(same_ratio_check(&theta, &psi, &x, &x, &t, &t, &v, 40).unwrap());
        // theta = psi, x = y: symmetric expression
        assert!(same_ratio_check(&theta, &theta, &x, &x, &t, &t1, &v, 40).unwrap());
        // generic pair
        assert!(same_ratio_check(&theta, &psi, &x, &x, &t, &t1, &v, 40).unwrap());
    }

    #[test]
    fn same_ratio_rejects_out_of_ball_points() {
        let f = f2();
        let theta = DrinfeldModule::carlitz(&f);
        let v = place_t1(&f);
        // theta_{t+1}(t^2) = t^2 + t^3 + t^4 is a unit at (t+1)
        let x = rf(&f, &[0, 0, 1]);
        let t = FqPoly::var(&f);
        let t1 = FqPoly::from_ints(&f, &[1, 1]);
        assert!(matches!(
            same_ratio_check(&theta, &theta, &x, &x, &t, &t1, &v, 40),
            Err(Error::OutsideBall { .. })
        ));
    }

    #[test]
    fn lambda_identity_zero_and_stability() {
        let f = f2();
        let carlitz = DrinfeldModule::carlitz(&f);
        let psi = DrinfeldModule::new(TwistedPoly::from_coeffs(
            &f,
            vec![RatFunc::var(&f), RatFunc::var(&f)],
        ))
        .unwrap();
        let v = place_t1(&f);
        let x = &rf(&f, &[1, 0, 1]) * &rf(&f, &[0, 0, 1]);

        // identical coordinates: lambda = 1
        let same = ProductAction::new(vec![carlitz.clone(), carlitz.clone()]).unwrap();
        let ctx = ProductAnalytic::new(&same, &v, 40).unwrap();
        let t = FqPoly::var(&f);
        let lams = ctx.lambda_at(&[x.clone(), x.clone()], &t).unwrap();
        let one = LocalElem::embed(&v, &RatFunc::one(&f), 40);
        assert!(lams[0].agrees_with(&one));

        // zero coordinate: lambda = 0
        let lams0 = ctx.lambda_at(&[x.clone(), RatFunc::zero(&f)], &t).unwrap();
        assert!(lams0[0].is_zero_to_prec());

        // mixed pair: lambda agrees across P = t and P = t^2 on >= 30 digits
        let mixed = ProductAction::new(vec![carlitz, psi]).unwrap();
        let ctx = ProductAnalytic::new(&mixed, &v, 40).unwrap();
        let l1 = ctx.lambda_at(&[x.clone(), x.clone()], &t).unwrap();
        let t2 = FqPoly::from_ints(&f, &[0, 0, 1]);
        let l2 = ctx.lambda_at(&[x.clone(), x.clone()], &t2).unwrap();
        let diff = l1[0].sub(&l2[0]);
        assert!(diff.is_zero_to_prec());
        assert!(diff.abs_prec() >= 30, "common window {}", diff.abs_prec());
    }

    #[test]
    fn lambda_rejects_torsion_lead() {
        let f = f2();
        let carlitz = DrinfeldModule::carlitz(&f);
        let action = ProductAction::new(vec![carlitz.clone(), carlitz.clone()]).unwrap();
        let v = place_t1(&f);
        let ctx = ProductAnalytic::new(&action, &v, 40).unwrap();
        // x_1 = t is t-torsion
        let res = ctx.lambda_at(&[RatFunc::var(&f), rf(&f, &[0, 0, 1])], &FqPoly::var(&f));
        assert_eq!(res.unwrap_err(), Error::LambdaUndefined);
    }

    #[test]
    fn zu_basic_shapes() {
        let f = f2();
        let carlitz = DrinfeldModule::carlitz(&f);
        let v = place_t1(&f);

        // g = 1: Z_u = (u)
        let single = ProductAction::new(vec![carlitz.clone()]).unwrap();
        let ctx1 = ProductAnalytic::new(&single, &v, 40).unwrap();
        let u = LocalElem::embed(&v, &(&rf(&f, &[1, 0, 1]) * &rf(&f, &[0, 0, 1])), 40);
        let z = ctx1.zu(&[], &u).unwrap();
        assert_eq!(z.len(), 1);
        assert!(z[0].agrees_with(&u));

        // u = 0: Z_0 = 0
        let pair = ProductAction::new(vec![carlitz.clone(), carlitz.clone()]).unwrap();
        let ctx = ProductAnalytic::new(&pair, &v, 40).unwrap();
        let zero = LocalElem::zero(v.clone(), 40);
        let one = LocalElem::embed(&v, &RatFunc::one(&f), 40);
        let z0 = ctx.zu(&[one.clone()], &zero).unwrap();
        assert!(z0[0].is_zero_to_prec() && z0[1].is_zero_to_prec());

        // |lambda| > 1 rejected
        let big = LocalElem::embed(&v, &rf(&f, &[1, 1]).inv().unwrap(), 40);
        assert!(matches!(
            ctx.zu(&[big], &u),
            Err(Error::UncertifiedLambda)
        ));
    }

    #[test]
    fn zu_equivariance_and_additivity() {
        let f = f2();
        let carlitz = DrinfeldModule::carlitz(&f);
        let psi = DrinfeldModule::new(TwistedPoly::from_coeffs(
            &f,
            vec![RatFunc::var(&f), RatFunc::var(&f)],
        ))
        .unwrap();
        let action = ProductAction::new(vec![carlitz.clone(), psi]).unwrap();
        let v = place_t1(&f);
        let ctx = ProductAnalytic::new(&action, &v, 40).unwrap();
        let x = &rf(&f, &[1, 0, 1]) * &rf(&f, &[0, 0, 1]);
        let t = FqPoly::var(&f);
        let lambdas = ctx.lambda_at(&[x.clone(), x.clone()], &t).unwrap();

        let u = LocalElem::embed(&v, &x, 40);
        let z_u = ctx.zu(&lambdas, &u).unwrap();

        // phi_P(Z_u) = Z_{phi_{1,P}(u)} for P = t
        let moved_u = carlitz.act_local(&t, &u);
        let z_moved = ctx.zu(&lambdas, &moved_u).unwrap();
        for (i, m) in action.modules().iter().enumerate() {
            let lhs = m.act_local(&t, &z_u[i]);
            assert!(lhs.agrees_with(&z_moved[i]), "coordinate {i}");
        }

        // Z_{u1+u2} = Z_{u1} + Z_{u2}
        let u2 = LocalElem::embed(&v, &(&x * &RatFunc::var(&f)), 40);
        let z_u2 = ctx.zu(&lambdas, &u2).unwrap();
        let z_sum = ctx.zu(&lambdas, &u.add(&u2)).unwrap();
        for i in 0..2 {
            assert!(z_u[i].add(&z_u2[i]).agrees_with(&z_sum[i]), "coordinate {i}");
        }
    }

    #[test]
    fn normalize_lead_picks_max_log() {
        let f = f2();
        let v = place_t1(&f);
        let mk = |val: i64| {
            LocalElem::from_parts(v.clone(), val, vec![FqPoly::one(&f); 10])
        };
        // logs with valuations 3, 2, 4: lead is index 1
        let logs = vec![mk(3), mk(2), mk(4)];
        assert_eq!(ProductAnalytic::choose_lead(&logs).unwrap(), 1);
        assert_eq!(
            ProductAnalytic::normalize_lead(&logs).unwrap(),
            vec![1, 0, 2]
        );
        // all zero: undefined
        let zeros = vec![LocalElem::zero(v.clone(), 10); 2];
        assert!(matches!(
            ProductAnalytic::choose_lead(&zeros),
            Err(Error::LambdaUndefined)
        ));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_good_module(q: u32) -> impl Strategy<Value = DrinfeldModule> {
            // polynomial coefficients, unit leading coefficient: good
            // reduction at every finite place
            prop::collection::vec(prop::collection::vec(0u32..q, 0..3), 0..=1).prop_map(
                move |mids| {
                    let f = FqField::with_order(q).unwrap();
                    let mut coeffs = vec![RatFunc::var(&f)];
                    for m in mids {
                        coeffs.push(RatFunc::from_poly(FqPoly::from_encoded(&f, &m)));
                    }
                    coeffs.push(RatFunc::one(&f));
                    DrinfeldModule::new(TwistedPoly::from_coeffs(&f, coeffs)).unwrap()
                },
            )
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(16))]

            #[test]
            fn recursion_defines_conjugation(m in arb_good_module(2)) {
                // phi_t ∘ exp = exp ∘ t and log ∘ phi_t = t ∘ log, as
                // truncated twisted series.
                let n = 4;
                let e = exp_coeffs(&m, n);
                let l = log_coeffs(&m, n);
                let f = m.field().clone();
                let t_series = vec![RatFunc::var(&f)];
                let lhs = compose_truncated(m.phi_t().coeffs(), e.coeffs(), n);
                let rhs = compose_truncated(e.coeffs(), &t_series, n);
                prop_assert_eq!(lhs, rhs);
                let lhs = compose_truncated(l.coeffs(), m.phi_t().coeffs(), n);
                let rhs = compose_truncated(&t_series, l.coeffs(), n);
                prop_assert_eq!(lhs, rhs);
            }

            #[test]
            fn isometry_on_random_ball_points(m in arb_good_module(3), w in 0u32..3,
                                              c in prop::collection::vec(0u32..3, 1..4)) {
                let f = m.field().clone();
                let v = Place::finite(FqPoly::var(&f)).unwrap();
                let ctx = ModuleAnalytic::new(&m, &v, 30).unwrap();
                let mball = ctx.ball.min_valuation();
                // x = t^(m + w) * (nonzero small poly)
                let poly = FqPoly::from_encoded(&f, &c);
                prop_assume!(!poly.is_zero());
                let x = RatFunc::from_poly(
                    &poly * &FqPoly::var(&f).pow(mball as u64 + w as u64),
                );
                let e = LocalElem::embed(&v, &x, 30);
                let vx = e.valuation().unwrap();
                let ex = ctx.exp.eval(&ctx.ball, &e).unwrap();
                let lx = ctx.log.eval(&ctx.ball, &e).unwrap();
                prop_assert_eq!(ex.valuation(), Some(vx));
                prop_assert_eq!(lx.valuation(), Some(vx));
                // round trips
                prop_assert!(ctx.log.eval(&ctx.ball, &ex).unwrap().agrees_with(&e));
                prop_assert!(ctx.exp.eval(&ctx.ball, &lx).unwrap().agrees_with(&e));
            }

            #[test]
            fn same_ratio_never_false(ma in arb_good_module(2), mb in arb_good_module(2),
                                      cx in prop::collection::vec(0u32..2, 1..3),
                                      cy in prop::collection::vec(0u32..2, 1..3),
                                      pi in 1u128..8, qi in 1u128..8) {
                let f = ma.field().clone();
                let v = Place::finite(FqPoly::from_ints(&f, &[1, 1])).unwrap();
                let ca = ModuleAnalytic::new(&ma, &v, 30).unwrap();
                let cb = ModuleAnalytic::new(&mb, &v, 30).unwrap();
                let mm = ca.ball.min_valuation().max(cb.ball.min_valuation());
                let deep = FqPoly::from_ints(&f, &[1, 1]).pow(mm as u64);
                let px = FqPoly::from_encoded(&f, &cx);
                let py = FqPoly::from_encoded(&f, &cy);
                prop_assume!(!px.is_zero() && !py.is_zero());
                let x = RatFunc::from_poly(&px * &deep);
                let y = RatFunc::from_poly(&py * &deep);
                let p = FqPoly::from_counter_index(&f, pi);
                let q = FqPoly::from_counter_index(&f, qi);
                // deep points make every P, Q admissible
                prop_assert!(same_ratio_check(&ma, &mb, &x, &y, &p, &q, &v, 30).unwrap());
            }
        }
    }
}
