//! The problem-file format: a line-oriented description of the coefficient
//! field, the module tuple, the generator point, the variety, optional
//! torsion generators, and run bounds.
//!
//! ```text
//! # comment
//! [field]
//! p = 2
//! k = 1
//! # conductor = t^2+t+1      (extension fields; built-in table otherwise)
//!
//! [module.1]
//! phi_t = t + tau
//!
//! [module.2]
//! phi_t = t + tau
//!
//! [point]
//! x = t^2, t
//!
//! [variety]
//! f = X2
//!
//! [torsion]                  # optional: rank-one mode
//! gen = 0, t
//!
//! [bounds]
//! degree = 6
//! modulus_cap = 2
//! place = t+1
//! precision = 40
//! ```
//!
//! `serialize` emits the canonical form; parse-then-serialize is
//! idempotent.

use std::fmt::Write as _;
use std::sync::Arc;

use dlang_core::algebra::{FqField, RatFunc};
use dlang_core::mordell::{CyclicModule, MultiPoly, RankOneModule, Variety};
use dlang_core::places::Place;
use dlang_core::twisted::{DrinfeldModule, ProductAction};

use crate::expr::{
    parse_multipoly_line, parse_place_line, parse_ratfunc_list, parse_ratfunc_line,
    parse_twisted_line, tokenize, ExprParser, ParseError,
};

/// Run bounds and knobs, file-level with CLI overrides.
#[derive(Debug, Clone)]
pub struct Bounds {
    pub degree: usize,
    pub modulus_cap: usize,
    pub place: Option<Place>,
    pub precision: i64,
    pub samples: usize,
    pub seed: u64,
    pub threads: usize,
    pub witness_cap: usize,
    pub torsion_bound: usize,
    pub terms: Option<usize>,
}

impl Default for Bounds {
    fn default() -> Bounds {
        Bounds {
            degree: 5,
            modulus_cap: 2,
            place: None,
            precision: dlang_core::places::local::DEFAULT_PRECISION as i64,
            samples: 5,
            seed: 0,
            threads: 1,
            witness_cap: 32,
            torsion_bound: 8,
            terms: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub field: Arc<FqField>,
    pub modules: Vec<DrinfeldModule>,
    pub generator: Vec<RatFunc>,
    pub variety_polys: Vec<MultiPoly>,
    pub torsion_generators: Vec<Vec<RatFunc>>,
    pub bounds: Bounds,
}

impl ProblemSpec {
    pub fn g(&self) -> usize {
        self.modules.len()
    }

    pub fn action(&self) -> ProductAction {
        ProductAction::new(self.modules.clone()).expect("validated at parse time")
    }

    pub fn cyclic_module(&self) -> CyclicModule {
        CyclicModule::new(self.action(), self.generator.clone())
            .expect("validated at parse time")
    }

    pub fn variety(&self) -> Option<Variety> {
        if self.variety_polys.is_empty() {
            None
        } else {
            Some(Variety::new(self.g(), self.variety_polys.clone()).expect("validated"))
        }
    }

    pub fn rank_one(&self) -> RankOneModule {
        RankOneModule::new(self.torsion_generators.clone(), self.cyclic_module())
            .expect("validated at parse time")
    }

    /// Canonical text form; parsing it back yields the same serialization.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "[field]");
        let _ = writeln!(out, "p = {}", self.field.p());
        let _ = writeln!(out, "k = {}", self.field.extension_degree());
        if self.field.extension_degree() > 1 {
            let cond = self
                .field
                .conductor()
                .iter()
                .enumerate()
                .rev()
                .filter(|(_, &c)| c != 0)
                .map(|(i, &c)| match (i, c) {
                    (0, c) => format!("{c}"),
                    (1, 1) => "t".to_string(),
                    (1, c) => format!("{c}*t"),
                    (i, 1) => format!("t^{i}"),
                    (i, c) => format!("{c}*t^{i}"),
                })
                .collect::<Vec<_>>()
                .join("+");
            let _ = writeln!(out, "conductor = {cond}");
        }
        for (i, m) in self.modules.iter().enumerate() {
            let _ = writeln!(out, "\n[module.{}]", i + 1);
            let _ = writeln!(out, "phi_t = {}", m.phi_t());
        }
        let _ = writeln!(out, "\n[point]");
        let coords: Vec<String> = self.generator.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(out, "x = {}", coords.join(", "));
        if !self.variety_polys.is_empty() {
            let _ = writeln!(out, "\n[variety]");
            for f in &self.variety_polys {
                let _ = writeln!(out, "f = {f}");
            }
        }
        if !self.torsion_generators.is_empty() {
            let _ = writeln!(out, "\n[torsion]");
            for t in &self.torsion_generators {
                let coords: Vec<String> = t.iter().map(|x| x.to_string()).collect();
                let _ = writeln!(out, "gen = {}", coords.join(", "));
            }
        }
        let _ = writeln!(out, "\n[bounds]");
        let _ = writeln!(out, "degree = {}", self.bounds.degree);
        let _ = writeln!(out, "modulus_cap = {}", self.bounds.modulus_cap);
        if let Some(place) = &self.bounds.place {
            let _ = writeln!(out, "place = {place}");
        }
        let _ = writeln!(out, "precision = {}", self.bounds.precision);
        let _ = writeln!(out, "samples = {}", self.bounds.samples);
        let _ = writeln!(out, "seed = {}", self.bounds.seed);
        let _ = writeln!(out, "witness_cap = {}", self.bounds.witness_cap);
        let _ = writeln!(out, "torsion_bound = {}", self.bounds.torsion_bound);
        if let Some(terms) = self.bounds.terms {
            let _ = writeln!(out, "terms = {terms}");
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Field,
    Module(usize),
    Point,
    Variety,
    Torsion,
    Bounds,
}

struct RawLine<'a> {
    no: usize,
    key: &'a str,
    value: &'a str,
}

pub fn parse_problem(text: &str) -> Result<ProblemSpec, ParseError> {
    let mut section = Section::None;
    let mut field_lines: Vec<RawLine> = Vec::new();
    let mut module_lines: Vec<(usize, RawLine)> = Vec::new();
    let mut point_lines: Vec<RawLine> = Vec::new();
    let mut variety_lines: Vec<RawLine> = Vec::new();
    let mut torsion_lines: Vec<RawLine> = Vec::new();
    let mut bounds_lines: Vec<RawLine> = Vec::new();
    let mut max_module = 0usize;

    for (idx, raw) in text.lines().enumerate() {
        let no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(inner) = line.strip_prefix('[') {
            let inner = inner
                .strip_suffix(']')
                .ok_or_else(|| ParseError::new(no, line.len(), "expected ']'"))?;
            section = match inner {
                "field" => Section::Field,
                "point" => Section::Point,
                "variety" => Section::Variety,
                "torsion" => Section::Torsion,
                "bounds" => Section::Bounds,
                other => {
                    if let Some(num) = other.strip_prefix("module.") {
                        let n: usize = num.parse().map_err(|_| {
                            ParseError::new(no, 1, format!("bad module index '{num}'"))
                        })?;
                        if n == 0 {
                            return Err(ParseError::new(no, 1, "module indices start at 1"));
                        }
                        max_module = max_module.max(n);
                        Section::Module(n)
                    } else {
                        return Err(ParseError::new(
                            no,
                            1,
                            format!("unknown section '[{other}]'"),
                        ));
                    }
                }
            };
            continue;
        }
        let eq = line
            .find('=')
            .ok_or_else(|| ParseError::new(no, 1, "expected 'key = value'"))?;
        let rl = RawLine {
            no,
            key: line[..eq].trim(),
            value: line[eq + 1..].trim(),
        };
        match section {
            Section::None => {
                return Err(ParseError::new(no, 1, "content before the first section"))
            }
            Section::Field => field_lines.push(rl),
            Section::Module(n) => module_lines.push((n, rl)),
            Section::Point => point_lines.push(rl),
            Section::Variety => variety_lines.push(rl),
            Section::Torsion => torsion_lines.push(rl),
            Section::Bounds => bounds_lines.push(rl),
        }
    }

    // --- field ---
    let mut p: Option<u32> = None;
    let mut k: u32 = 1;
    let mut conductor: Option<(Vec<u32>, usize)> = None;
    let mut field_decl_line = 1;
    for rl in &field_lines {
        match rl.key {
            "p" => {
                p = Some(parse_uint(rl)? as u32);
                field_decl_line = rl.no;
            }
            "k" => k = parse_uint(rl)? as u32,
            "conductor" => {
                // parsed below once p is known; keep the raw digits
                conductor = Some((Vec::new(), rl.no));
            }
            other => {
                return Err(ParseError::new(
                    rl.no,
                    1,
                    format!("unknown field key '{other}'"),
                ))
            }
        }
    }
    let p = p.ok_or_else(|| ParseError::new(field_decl_line, 1, "missing 'p' in [field]"))?;
    let conductor_coeffs: Option<Vec<u32>> = match conductor {
        None => None,
        Some((_, no)) => {
            let raw = field_lines
                .iter()
                .find(|rl| rl.key == "conductor")
                .unwrap()
                .value;
            let fp = FqField::prime(p)
                .map_err(|e| ParseError::new(no, 1, e.to_string()))?;
            let poly = parse_ratfunc_line(raw, no, &fp)?;
            let poly = poly
                .as_poly()
                .ok_or_else(|| ParseError::new(no, 1, "conductor must be a polynomial"))?;
            Some(
                (0..=poly.degree().unwrap_or(0))
                    .map(|i| poly.coeff(i).encoded())
                    .collect(),
            )
        }
    };
    let field = FqField::new(p, k, conductor_coeffs)
        .map_err(|e| ParseError::new(field_decl_line, 1, e.to_string()))?;

    // --- modules ---
    if max_module == 0 {
        return Err(ParseError::new(1, 1, "no [module.1] section"));
    }
    let mut modules: Vec<Option<DrinfeldModule>> = vec![None; max_module];
    for (n, rl) in &module_lines {
        if rl.key != "phi_t" {
            return Err(ParseError::new(
                rl.no,
                1,
                format!("unknown module key '{}'", rl.key),
            ));
        }
        let tw = parse_twisted_line(rl.value, rl.no, &field)?;
        let m = DrinfeldModule::new(tw)
            .map_err(|e| ParseError::new(rl.no, 1, e.to_string()))?;
        modules[n - 1] = Some(m);
    }
    let modules: Vec<DrinfeldModule> = modules
        .into_iter()
        .enumerate()
        .map(|(i, m)| {
            m.ok_or_else(|| {
                ParseError::new(1, 1, format!("missing [module.{}] / phi_t", i + 1))
            })
        })
        .collect::<Result<_, _>>()?;
    let g = modules.len();

    // --- point ---
    let mut generator: Option<Vec<RatFunc>> = None;
    for rl in &point_lines {
        if rl.key != "x" {
            return Err(ParseError::new(
                rl.no,
                1,
                format!("unknown point key '{}'", rl.key),
            ));
        }
        let coords = parse_ratfunc_list(rl.value, rl.no, &field)?;
        if coords.len() != g {
            return Err(ParseError::new(
                rl.no,
                1,
                format!("point has {} coordinates, expected {g}", coords.len()),
            ));
        }
        generator = Some(coords);
    }
    let generator =
        generator.ok_or_else(|| ParseError::new(1, 1, "missing [point] section with 'x ='"))?;

    // --- variety ---
    let mut variety_polys = Vec::new();
    for rl in &variety_lines {
        if rl.key != "f" {
            return Err(ParseError::new(
                rl.no,
                1,
                format!("unknown variety key '{}'", rl.key),
            ));
        }
        variety_polys.push(parse_multipoly_line(rl.value, rl.no, &field, g)?);
    }

    // --- torsion ---
    let mut torsion_generators = Vec::new();
    for rl in &torsion_lines {
        if rl.key != "gen" {
            return Err(ParseError::new(
                rl.no,
                1,
                format!("unknown torsion key '{}'", rl.key),
            ));
        }
        let coords = parse_ratfunc_list(rl.value, rl.no, &field)?;
        if coords.len() != g {
            return Err(ParseError::new(
                rl.no,
                1,
                format!("torsion tuple has {} coordinates, expected {g}", coords.len()),
            ));
        }
        torsion_generators.push(coords);
    }

    // --- bounds ---
    let mut bounds = Bounds::default();
    for rl in &bounds_lines {
        match rl.key {
            "degree" => bounds.degree = parse_uint(rl)? as usize,
            "modulus_cap" => bounds.modulus_cap = parse_uint(rl)? as usize,
            "precision" => bounds.precision = parse_uint(rl)? as i64,
            "samples" => bounds.samples = parse_uint(rl)? as usize,
            "seed" => bounds.seed = parse_uint(rl)?,
            "threads" => bounds.threads = (parse_uint(rl)? as usize).max(1),
            "witness_cap" => bounds.witness_cap = parse_uint(rl)? as usize,
            "torsion_bound" => bounds.torsion_bound = parse_uint(rl)? as usize,
            "terms" => bounds.terms = Some(parse_uint(rl)? as usize),
            "place" => bounds.place = Some(parse_place_line(rl.value, rl.no, &field)?),
            other => {
                return Err(ParseError::new(
                    rl.no,
                    1,
                    format!("unknown bounds key '{other}'"),
                ))
            }
        }
    }

    Ok(ProblemSpec {
        field,
        modules,
        generator,
        variety_polys,
        torsion_generators,
        bounds,
    })
}

fn parse_uint(rl: &RawLine) -> Result<u64, ParseError> {
    let toks = tokenize(rl.value, rl.no)?;
    match toks.as_slice() {
        [t] => {
            if let crate::expr::TokKind::Int(n) = t.kind {
                return Ok(n);
            }
            Err(ParseError::new(rl.no, t.col, "expected an integer"))
        }
        _ => Err(ParseError::new(rl.no, 1, "expected a single integer")),
    }
}

/// Pick the first finite place of good reduction for every module where the
/// generator is integral: irreducible monics scanned by degree then
/// canonical order.
pub fn auto_place(spec: &ProblemSpec) -> Option<Place> {
    let action = spec.action();
    for d in 1..=3usize {
        for pi in dlang_core::algebra::irreducible_monics(&spec.field, d).ok()? {
            let place = Place::finite(pi).ok()?;
            let good = action.good_reduction(&place)
                && spec
                    .generator
                    .iter()
                    .all(|x| place.valuation(x).at_least(0));
            if good {
                return Some(place);
            }
        }
    }
    None
}

/// Lightweight expression re-export for commands that accept `--at` values.
pub fn parse_value(text: &str, field: &Arc<FqField>) -> Result<RatFunc, ParseError> {
    let toks = tokenize(text, 1)?;
    let mut p = ExprParser::new(&toks, 1, field, 0);
    let r = p.parse_ratfunc()?;
    p.expect_end()?;
    Ok(r)
}
