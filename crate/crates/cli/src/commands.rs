//! The five subcommands. Each one builds a typed report and an exit code;
//! rendering (text or JSON) is chosen by the caller.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;

use dlang_core::algebra::{irreducible_monics, RatFunc};
use dlang_core::analytic::ModuleAnalytic;
use dlang_core::mordell::{
    intersect_with_stability, stronger_echo, translate_by, verify_coset_analytic, CyclicModule,
    Variety, VerifyOptions, VerifyReport,
};
use dlang_core::places::{LocalElem, Place, Valuation};
use dlang_core::Error as CoreError;

use crate::expr::ParseError;
use crate::problem::{auto_place, parse_value, ProblemSpec};
use crate::report::*;

#[derive(Debug)]
pub enum CmdError {
    Parse(ParseError),
    Core(CoreError),
    Other(String),
}

impl fmt::Display for CmdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CmdError::Parse(e) => write!(f, "{e}"),
            CmdError::Core(e) => write!(f, "{e}"),
            CmdError::Other(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CmdError {}

impl From<ParseError> for CmdError {
    fn from(e: ParseError) -> CmdError {
        CmdError::Parse(e)
    }
}

impl From<CoreError> for CmdError {
    fn from(e: CoreError) -> CmdError {
        CmdError::Core(e)
    }
}

pub type CmdResult = Result<(String, i32), CmdError>;

fn resolve_place(spec: &ProblemSpec) -> Result<Place, CmdError> {
    if let Some(p) = &spec.bounds.place {
        return Ok(p.clone());
    }
    auto_place(spec).ok_or_else(|| {
        CmdError::Other(
            "no place given and no finite place of good reduction found up to degree 3".into(),
        )
    })
}

fn base_config(spec: &ProblemSpec, place: &Place) -> BTreeMap<String, String> {
    let b = &spec.bounds;
    let mut cfg = BTreeMap::new();
    cfg.insert("degree".into(), b.degree.to_string());
    cfg.insert("modulus_cap".into(), b.modulus_cap.to_string());
    cfg.insert("place".into(), place.to_string());
    cfg.insert("precision".into(), b.precision.to_string());
    cfg.insert("samples".into(), b.samples.to_string());
    cfg.insert("seed".into(), b.seed.to_string());
    cfg.insert("witness_cap".into(), b.witness_cap.to_string());
    cfg.insert("torsion_bound".into(), b.torsion_bound.to_string());
    cfg
}

fn ball_info(ctx: &ModuleAnalytic) -> BallInfo {
    BallInfo {
        place: ctx.ball.place().to_string(),
        min_valuation: ctx.ball.min_valuation(),
        truncation: ctx.ball.truncation(),
        tail_margin: ctx.ball.tail_margin(),
        heuristic_tail: true,
    }
}

fn rational_string(r: &BigRational) -> String {
    use num_traits::One;
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn render<T: serde::Serialize>(report: &T, text: String, json: bool) -> String {
    if json {
        serde_json::to_string_pretty(report).expect("report serialization") + "\n"
    } else {
        text
    }
}

// ------------------------------------------------------------------ check

pub fn cmd_check(spec: &ProblemSpec, json: bool) -> CmdResult {
    let place = resolve_place(spec)?;
    let header = ReportHeader::new("check", base_config(spec, &place));
    let field = FieldInfo {
        p: spec.field.p(),
        k: spec.field.extension_degree(),
        q: spec.field.order(),
        conductor: (spec.field.extension_degree() > 1).then(|| {
            spec.field
                .conductor()
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(",")
        }),
    };
    let mut warnings = Vec::new();
    if place.is_infinite() {
        warnings.push("every infinite place is a place of bad reduction".to_string());
    }
    let mut modules = Vec::new();
    for (i, m) in spec.modules.iter().enumerate() {
        let good = m.good_reduction(&place);
        let (ball, warning) = match ModuleAnalytic::new(m, &place, spec.bounds.precision) {
            Ok(ctx) => (Some(ball_info(&ctx)), None),
            Err(e) => (None, Some(e.to_string())),
        };
        modules.push(ModuleCheck {
            index: i + 1,
            phi_t: m.phi_t().to_string(),
            rank: m.rank(),
            good_reduction: good,
            ball,
            warning,
        });
    }
    let half = BigRational::new(1.into(), 2.into());
    let mut point = Vec::new();
    for (i, (x, m)) in spec.generator.iter().zip(&spec.modules).enumerate() {
        let annihilator = m
            .is_torsion(x, spec.bounds.torsion_bound)
            .map(|q| q.to_string());
        let (e3, e4, nontorsion) = if annihilator.is_none() {
            (
                rational_string(&m.canonical_height_estimate(x, 3)),
                rational_string(&m.canonical_height_estimate(x, 4)),
                m.looks_nontorsion(x, 3, &half),
            )
        } else {
            ("0".into(), "0".into(), false)
        };
        point.push(CoordCheck {
            index: i + 1,
            value: x.to_string(),
            weil_height: x.weil_height(),
            integral_at_place: place.valuation(x).at_least(0),
            annihilator,
            height_estimate_n3: e3,
            height_estimate_n4: e4,
            looks_nontorsion: nontorsion,
        });
    }
    let report = CheckReport {
        header,
        field,
        place: place.to_string(),
        modules,
        point,
        warnings,
    };
    let text = report.render_text();
    Ok((render(&report, text, json), 0))
}

// -------------------------------------------------------------- intersect

fn coset_info(c: &(dlang_core::algebra::FqPoly, dlang_core::algebra::FqPoly)) -> CosetInfo {
    CosetInfo {
        representative: c.0.to_string(),
        modulus: c.1.to_string(),
    }
}

fn verify_info(r: &VerifyReport) -> VerifyInfo {
    VerifyInfo {
        coset: coset_info(&r.coset),
        witness: r.witness.to_string(),
        witness_valuations: r
            .witness_valuations
            .iter()
            .map(dlang_core::mordell::verify::valuation_string)
            .collect(),
        ball_min: r.ball_min,
        tail_margin: r.tail_margin,
        precision: r.precision,
        residual_floor: r.residual_floor,
        lead_permutation: r.lead_permutation.clone(),
        lambdas: r.lambdas.iter().map(|l| l.to_string()).collect(),
        samples: r
            .samples
            .iter()
            .map(|s| SampleInfo {
                kind: s.kind.to_string(),
                label: s.label.clone(),
                u_valuation: s
                    .u_valuation
                    .map(|v| v.to_string())
                    .unwrap_or_else(|| Valuation::Infinity.to_string()),
                residuals: s
                    .residuals
                    .iter()
                    .map(|e| ResidualInfo {
                        poly_index: e.poly_index,
                        valuation: if e.vanishes {
                            format!(">= {}", e.valuation_bound)
                        } else {
                            format!("= {}", e.valuation_bound)
                        },
                        provenance: format!("prec={}", r.precision),
                        pass: e.vanishes && e.valuation_bound >= r.residual_floor,
                    })
                    .collect(),
                pass: s.pass,
            })
            .collect(),
        pass: r.pass,
    }
}

const MEMBER_DISPLAY_CAP: usize = 32;

fn entry_for(
    variety: &Variety,
    module: &CyclicModule,
    spec: &ProblemSpec,
    place: &Place,
    verify: bool,
    torsion_translate: Option<Vec<String>>,
) -> Result<(TranslateEntry, bool, bool), CmdError> {
    let b = &spec.bounds;
    let (s, structure, stable) =
        intersect_with_stability(variety, module, b.degree, b.modulus_cap, b.threads)?;
    let echo = stronger_echo(&structure, s.len());
    let mut verification = Vec::new();
    let mut all_verified = true;
    if verify {
        let opts = VerifyOptions {
            precision: b.precision,
            extra_samples: b.samples,
            seed: b.seed,
            witness_cap: b.witness_cap,
            residual_floor: b.precision - 5,
        };
        for coset in structure.cosets() {
            let report =
                verify_coset_analytic(variety, module, coset, place, b.degree, &opts)?;
            all_verified &= report.pass;
            verification.push(verify_info(&report));
        }
    }
    let members: Vec<String> = s
        .iter()
        .take(MEMBER_DISPLAY_CAP)
        .map(|p| p.to_string())
        .collect();
    let entry = TranslateEntry {
        torsion_translate,
        set_size: s.len(),
        set_truncated: s.len() > MEMBER_DISPLAY_CAP,
        set_members: members,
        cosets: structure.cosets().iter().map(coset_info).collect(),
        isolated: structure.isolated().iter().map(|p| p.to_string()).collect(),
        stable,
        echo_warning: echo,
        verification,
    };
    Ok((entry, stable, all_verified))
}

pub fn cmd_intersect(spec: &ProblemSpec, verify: bool, json: bool) -> CmdResult {
    let variety = spec
        .variety()
        .ok_or_else(|| CmdError::Other("the [variety] section is required".into()))?;
    let place = resolve_place(spec)?;
    let mut config = base_config(spec, &place);
    config.insert("verify".into(), verify.to_string());
    let header = ReportHeader::new("intersect", config);

    let mut entries = Vec::new();
    let mut stable = true;
    let mut verified = true;
    if spec.torsion_generators.is_empty() {
        let module = spec.cyclic_module();
        let (entry, st, ver) = entry_for(&variety, &module, spec, &place, verify, None)?;
        entries.push(entry);
        stable &= st;
        verified &= ver;
    } else {
        let rank_one = spec.rank_one();
        let subgroup = rank_one.torsion_subgroup(spec.bounds.torsion_bound)?;
        for gamma in subgroup {
            let shifted = translate_by(&variety, &gamma)?;
            let label: Vec<String> = gamma.iter().map(|x| x.to_string()).collect();
            let (entry, st, ver) = entry_for(
                &shifted,
                rank_one.free(),
                spec,
                &place,
                verify,
                Some(label),
            )?;
            entries.push(entry);
            stable &= st;
            verified &= ver;
        }
    }
    let report = IntersectReport {
        header,
        entries,
        stable,
        verified: verify.then_some(verified),
    };
    let code = if !stable {
        2
    } else if verify && !verified {
        3
    } else {
        0
    };
    let text = report.render_text();
    Ok((render(&report, text, json), code))
}

// ----------------------------------------------------------------- explog

fn residual_string(r: &LocalElem) -> (String, bool) {
    if r.is_zero_to_prec() {
        (format!(">= {}", r.abs_prec()), true)
    } else {
        (format!("= {}", r.valuation().unwrap()), false)
    }
}

pub fn cmd_explog(
    spec: &ProblemSpec,
    module_index: usize,
    at: Option<&str>,
    json: bool,
) -> CmdResult {
    if module_index == 0 || module_index > spec.g() {
        return Err(CmdError::Other(format!(
            "module index {module_index} out of range 1..={}",
            spec.g()
        )));
    }
    let module = &spec.modules[module_index - 1];
    let place = resolve_place(spec)?;
    let precision = spec.bounds.precision;
    let ctx = ModuleAnalytic::new(module, &place, precision)?;
    let terms = spec.bounds.terms.unwrap_or_else(|| ctx.ball.truncation());
    let exp = dlang_core::analytic::exp_coeffs(module, terms);
    let log = dlang_core::analytic::log_coeffs(module, terms);
    let coeffs: Vec<CoeffRow> = (0..=terms)
        .map(|n| CoeffRow {
            n,
            exp_coeff: exp.coeff(n).to_string(),
            log_coeff: log.coeff(n).to_string(),
            provenance: "exact".into(),
        })
        .collect();

    let eval = match at {
        None => None,
        Some(text) => {
            let x = parse_value(text, &spec.field)?;
            let e = LocalElem::embed(&place, &x, precision as usize);
            let ex = ctx.exp.eval(&ctx.ball, &e)?;
            let lx = ctx.log.eval(&ctx.ball, &e)?;
            let isometry_ok = e.valuation() == ex.valuation() && e.valuation() == lx.valuation();
            let field = &spec.field;
            let mut functional = Vec::new();
            for a in [
                dlang_core::algebra::FqPoly::var(field),
                dlang_core::algebra::FqPoly::from_ints(field, &[1, 1]),
                dlang_core::algebra::FqPoly::from_ints(field, &[0, 0, 1]),
            ] {
                let a_rat = RatFunc::from_poly(a.clone());
                let lhs_log = lx.scale(&a_rat);
                let rhs_log = ctx.log.eval(
                    &ctx.ball,
                    &LocalElem::embed(&place, &module.act(&a, &x), precision as usize),
                )?;
                let (log_res, ok1) = residual_string(&lhs_log.sub(&rhs_log));
                let lhs_exp = ctx.exp.eval(&ctx.ball, &e.scale(&a_rat))?;
                let rhs_exp = module.act_local(&a, &ex);
                let (exp_res, ok2) = residual_string(&lhs_exp.sub(&rhs_exp));
                functional.push(FunctionalResidual {
                    a: a.to_string(),
                    log_residual: log_res,
                    exp_residual: exp_res,
                    pass: ok1 && ok2,
                });
            }
            Some(EvalInfo {
                at: x.to_string(),
                embedded: e.to_string(),
                exp_value: ex.to_string(),
                log_value: lx.to_string(),
                isometry_ok,
                functional_residuals: functional,
            })
        }
    };

    let mut config = base_config(spec, &place);
    config.insert("terms".into(), terms.to_string());
    config.insert("module".into(), module_index.to_string());
    let report = ExplogReport {
        header: ReportHeader::new("explog", config),
        module_index,
        place: place.to_string(),
        ball: ball_info(&ctx),
        coeffs,
        eval,
    };
    let text = report.render_text();
    Ok((render(&report, text, json), 0))
}

// ----------------------------------------------------------------- places

pub fn cmd_places(spec: &ProblemSpec, max_degree: usize, json: bool) -> CmdResult {
    let field = &spec.field;
    let mut coordinates = Vec::new();
    for (i, x) in spec.generator.iter().enumerate() {
        if x.is_zero() {
            coordinates.push(CoordSupport {
                index: i + 1,
                value: "0".into(),
                support: Vec::new(),
                weighted_sum: 0,
                product_formula_ok: true,
            });
            continue;
        }
        let support = dlang_core::places::support(x)?;
        let rows: Vec<SupportRow> = support
            .iter()
            .map(|(place, v)| SupportRow {
                place: place.to_string(),
                degree: place.degree(),
                valuation: *v,
            })
            .collect();
        let weighted: i64 = support
            .iter()
            .map(|(place, v)| place.degree() as i64 * v)
            .sum();
        coordinates.push(CoordSupport {
            index: i + 1,
            value: x.to_string(),
            support: rows,
            weighted_sum: weighted,
            product_formula_ok: dlang_core::places::product_formula_check(x)?,
        });
    }
    let mut places = Vec::new();
    for d in 1..=max_degree {
        for pi in irreducible_monics(field, d)? {
            let place = Place::finite(pi)?;
            places.push(PlaceRow {
                place: place.to_string(),
                degree: d,
                good_reduction: spec
                    .modules
                    .iter()
                    .map(|m| m.good_reduction(&place))
                    .collect(),
            });
        }
    }
    places.push(PlaceRow {
        place: "inf".into(),
        degree: 1,
        good_reduction: vec![false; spec.g()],
    });
    let place = resolve_place(spec).unwrap_or_else(|_| Place::infinite(field));
    let mut config = base_config(spec, &place);
    config.insert("max_degree".into(), max_degree.to_string());
    let report = PlacesReport {
        header: ReportHeader::new("places", config),
        coordinates,
        places,
    };
    let text = report.render_text();
    Ok((render(&report, text, json), 0))
}

// ------------------------------------------------------------------ orbit

const ORBIT_DISPLAY_CAP: usize = 64;

pub fn cmd_orbit(spec: &ProblemSpec, json: bool) -> CmdResult {
    let module = spec.cyclic_module();
    let variety = spec.variety();
    let mut rows = Vec::new();
    let mut total = 0usize;
    for (p, point) in module.orbit(spec.bounds.degree) {
        total += 1;
        if rows.len() >= ORBIT_DISPLAY_CAP {
            continue;
        }
        let on_variety = match &variety {
            Some(v) => Some(v.contains(&point)?),
            None => None,
        };
        rows.push(OrbitRow {
            p: p.to_string(),
            point: point.iter().map(|x| x.to_string()).collect(),
            on_variety,
        });
    }
    let place = resolve_place(spec).unwrap_or_else(|_| Place::infinite(&spec.field));
    let report = OrbitReport {
        header: ReportHeader::new("orbit", base_config(spec, &place)),
        total,
        truncated: total > ORBIT_DISPLAY_CAP,
        rows,
    };
    let text = report.render_text();
    Ok((render(&report, text, json), 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::parse_problem;

    const CARLITZ_PAIR: &str = "\
[field]
p = 2
k = 1

[module.1]
phi_t = t + tau

[module.2]
phi_t = t + tau

[point]
x = t^2, t

[variety]
f = X2

[bounds]
degree = 6
modulus_cap = 2
place = t+1
precision = 40
";

    #[test]
    fn intersect_detects_and_verifies() {
        let spec = parse_problem(CARLITZ_PAIR).unwrap();
        let (text, code) = cmd_intersect(&spec, true, false).unwrap();
        assert_eq!(code, 0, "report:\n{text}");
        assert!(text.contains("coset: 0 + (t)"));
        assert!(text.contains("isolated: none"));
        assert!(text.contains("[stable]"));
        assert!(text.contains("verdict: verified"));
    }

    #[test]
    fn tiny_degree_is_unstable() {
        let mut spec = parse_problem(CARLITZ_PAIR).unwrap();
        spec.bounds.degree = 1;
        spec.bounds.modulus_cap = 0;
        let (_, code) = cmd_intersect(&spec, false, false).unwrap();
        assert_eq!(code, 2);
    }

    #[test]
    fn check_reports_reduction_and_torsion() {
        let spec = parse_problem(CARLITZ_PAIR).unwrap();
        let (text, code) = cmd_check(&spec, false).unwrap();
        assert_eq!(code, 0);
        assert!(text.contains("good reduction"));
        assert!(text.contains("annihilator t"));
        assert!(text.contains("looks non-torsion"));
    }

    #[test]
    fn check_warns_at_infinity() {
        let text = CARLITZ_PAIR.replace("place = t+1", "place = inf");
        let spec = parse_problem(&text).unwrap();
        let (out, code) = cmd_check(&spec, false).unwrap();
        assert_eq!(code, 0);
        assert!(out.contains("bad reduction"));
    }

    #[test]
    fn explog_prints_coefficients_and_residuals() {
        let mut spec = parse_problem(CARLITZ_PAIR).unwrap();
        spec.bounds.terms = Some(3);
        let (text, code) = cmd_explog(&spec, 1, Some("t^2*(t+1)^2"), false).unwrap();
        assert_eq!(code, 0, "{text}");
        // e_1 = 1/(t^q - t) over F_2
        assert!(text.contains("e_n = (1)/(t^2+t)"), "{text}");
        assert!(text.contains("isometry: v preserved"));
        assert!(!text.contains("FAIL"));
    }

    #[test]
    fn explog_rejects_points_outside_ball() {
        let spec = parse_problem(CARLITZ_PAIR).unwrap();
        assert!(matches!(
            cmd_explog(&spec, 1, Some("t^2"), false),
            Err(CmdError::Core(CoreError::OutsideBall { .. }))
        ));
    }

    #[test]
    fn places_reports_product_formula() {
        let spec = parse_problem(CARLITZ_PAIR).unwrap();
        let (text, code) = cmd_places(&spec, 2, false).unwrap();
        assert_eq!(code, 0);
        assert!(text.contains("product formula holds"));
        assert!(text.contains("inf"));
    }

    #[test]
    fn orbit_lists_points() {
        let mut spec = parse_problem(CARLITZ_PAIR).unwrap();
        spec.bounds.degree = 2;
        let (text, code) = cmd_orbit(&spec, false).unwrap();
        assert_eq!(code, 0);
        assert!(text.contains("orbit: 4 point(s)"));
        assert!(text.contains("[on variety]"));
    }

    #[test]
    fn rank_one_mode_produces_translates() {
        let text = CARLITZ_PAIR.to_string() + "\n[torsion]\ngen = 0, t\n";
        let spec = parse_problem(&text).unwrap();
        let (out, code) = cmd_intersect(&spec, false, false).unwrap();
        assert_eq!(code, 0, "{out}");
        assert!(out.contains("translate gamma = (0, 0)"));
        assert!(out.contains("translate gamma = (0, t)"));
    }

    #[test]
    fn json_mode_is_structured() {
        let spec = parse_problem(CARLITZ_PAIR).unwrap();
        let (out, _) = cmd_intersect(&spec, false, true).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["header"]["tool"], "dlang");
        assert_eq!(v["entries"][0]["cosets"][0]["modulus"], "t");
    }
}
