//! Typed reports with a text renderer and a JSON form.
//!
//! Reports are deterministic: the configuration echo covers the
//! mathematical inputs only (scheduling knobs such as the thread count do
//! not change any output and are omitted), maps are ordered, and every
//! numeric is tagged with its provenance (`exact` versus `prec=N`).

use std::collections::BTreeMap;

use serde::Serialize;

pub const TOOL: &str = "dlang";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Serialize, Clone)]
pub struct ReportHeader {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: BTreeMap<String, String>,
}

impl ReportHeader {
    pub fn new(command: &str, config: BTreeMap<String, String>) -> ReportHeader {
        ReportHeader {
            tool: TOOL.into(),
            version: VERSION.into(),
            command: command.into(),
            config,
        }
    }

    fn render(&self, out: &mut String) {
        out.push_str(&format!("{} {} — {}\n", self.tool, self.version, self.command));
        let cfg: Vec<String> = self
            .config
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        out.push_str(&format!("config: {}\n", cfg.join(" ")));
    }
}

#[derive(Serialize)]
pub struct BallInfo {
    pub place: String,
    pub min_valuation: i64,
    pub truncation: usize,
    pub tail_margin: i64,
    /// The tail beyond the truncation is accepted on the strength of the
    /// increase pattern, not a closed form.
    pub heuristic_tail: bool,
}

impl BallInfo {
    fn render(&self) -> String {
        format!(
            "ball at {}: v >= {}, truncation {}, tail margin {}{}",
            self.place,
            self.min_valuation,
            self.truncation,
            self.tail_margin,
            if self.heuristic_tail { " [heuristic]" } else { "" }
        )
    }
}

// ---------------------------------------------------------------- check --

#[derive(Serialize)]
pub struct FieldInfo {
    pub p: u32,
    pub k: u32,
    pub q: u32,
    pub conductor: Option<String>,
}

#[derive(Serialize)]
pub struct ModuleCheck {
    pub index: usize,
    pub phi_t: String,
    pub rank: usize,
    pub good_reduction: bool,
    pub ball: Option<BallInfo>,
    pub warning: Option<String>,
}

#[derive(Serialize)]
pub struct CoordCheck {
    pub index: usize,
    pub value: String,
    pub weil_height: u64,
    pub integral_at_place: bool,
    /// Monic annihilator if one exists up to the torsion bound.
    pub annihilator: Option<String>,
    pub height_estimate_n3: String,
    pub height_estimate_n4: String,
    pub looks_nontorsion: bool,
}

#[derive(Serialize)]
pub struct CheckReport {
    pub header: ReportHeader,
    pub field: FieldInfo,
    pub place: String,
    pub modules: Vec<ModuleCheck>,
    pub point: Vec<CoordCheck>,
    pub warnings: Vec<String>,
}

impl CheckReport {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        self.header.render(&mut out);
        out.push_str(&format!(
            "field: F_{} (p={}, k={}{})\n",
            self.field.q,
            self.field.p,
            self.field.k,
            self.field
                .conductor
                .as_ref()
                .map(|c| format!(", conductor {c}"))
                .unwrap_or_default()
        ));
        out.push_str(&format!("place: {}\n", self.place));
        for m in &self.modules {
            out.push_str(&format!(
                "module {}: phi_t = {} (rank {}) — {} reduction\n",
                m.index,
                m.phi_t,
                m.rank,
                if m.good_reduction { "good" } else { "bad" }
            ));
            if let Some(b) = &m.ball {
                out.push_str(&format!("  {}\n", b.render()));
            }
            if let Some(w) = &m.warning {
                out.push_str(&format!("  warning: {w}\n"));
            }
        }
        for c in &self.point {
            out.push_str(&format!(
                "x_{} = {} [exact]: height {}, {} at the place\n",
                c.index,
                c.value,
                c.weil_height,
                if c.integral_at_place {
                    "integral"
                } else {
                    "not integral"
                }
            ));
            match &c.annihilator {
                Some(q) => out.push_str(&format!("  torsion, annihilator {q} [exact]\n")),
                None => out.push_str(&format!(
                    "  no annihilator up to the bound; height quotients {} , {} [exact] — {}\n",
                    c.height_estimate_n3,
                    c.height_estimate_n4,
                    if c.looks_nontorsion {
                        "looks non-torsion"
                    } else {
                        "inconclusive"
                    }
                )),
            }
        }
        for w in &self.warnings {
            out.push_str(&format!("warning: {w}\n"));
        }
        out
    }
}

// ------------------------------------------------------------ intersect --

#[derive(Serialize, Clone)]
pub struct CosetInfo {
    pub representative: String,
    pub modulus: String,
}

impl CosetInfo {
    fn render(&self) -> String {
        format!("{} + ({})", self.representative, self.modulus)
    }
}

#[derive(Serialize)]
pub struct ResidualInfo {
    pub poly_index: usize,
    /// ">= N" when the residual vanishes to precision N; "= v" otherwise.
    pub valuation: String,
    pub provenance: String,
    pub pass: bool,
}

#[derive(Serialize)]
pub struct SampleInfo {
    pub kind: String,
    pub label: String,
    pub u_valuation: String,
    pub residuals: Vec<ResidualInfo>,
    pub pass: bool,
}

#[derive(Serialize)]
pub struct VerifyInfo {
    pub coset: CosetInfo,
    pub witness: String,
    pub witness_valuations: Vec<String>,
    pub ball_min: i64,
    pub tail_margin: i64,
    pub precision: i64,
    pub residual_floor: i64,
    pub lead_permutation: Vec<usize>,
    pub lambdas: Vec<String>,
    pub samples: Vec<SampleInfo>,
    pub pass: bool,
}

#[derive(Serialize)]
pub struct TranslateEntry {
    /// The torsion translate in rank-one mode; absent for the cyclic case.
    pub torsion_translate: Option<Vec<String>>,
    pub set_size: usize,
    pub set_members: Vec<String>,
    pub set_truncated: bool,
    pub cosets: Vec<CosetInfo>,
    pub isolated: Vec<String>,
    pub stable: bool,
    pub echo_warning: Option<String>,
    pub verification: Vec<VerifyInfo>,
}

#[derive(Serialize)]
pub struct IntersectReport {
    pub header: ReportHeader,
    pub entries: Vec<TranslateEntry>,
    pub stable: bool,
    pub verified: Option<bool>,
}

impl IntersectReport {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        self.header.render(&mut out);
        for e in &self.entries {
            if let Some(gamma) = &e.torsion_translate {
                out.push_str(&format!("translate gamma = ({})\n", gamma.join(", ")));
            }
            out.push_str(&format!(
                "S: {} member(s) below the degree bound [exact]\n",
                e.set_size
            ));
            if !e.set_members.is_empty() {
                out.push_str(&format!(
                    "  members: {}{}\n",
                    e.set_members.join(", "),
                    if e.set_truncated { ", ..." } else { "" }
                ));
            }
            if e.cosets.is_empty() {
                out.push_str("cosets: none\n");
            } else {
                for c in &e.cosets {
                    out.push_str(&format!("coset: {} [exact re-expansion verified]\n", c.render()));
                }
            }
            if e.isolated.is_empty() {
                out.push_str("isolated: none\n");
            } else {
                out.push_str(&format!("isolated: {}\n", e.isolated.join(", ")));
            }
            out.push_str(&format!(
                "stability: {}\n",
                if e.stable {
                    "lower-bound run agrees [stable]"
                } else {
                    "unstable — increase D"
                }
            ));
            if let Some(w) = &e.echo_warning {
                out.push_str(&format!("note: {w}\n"));
            }
            for v in &e.verification {
                out.push_str(&format!(
                    "verify {} at ball v >= {} (precision {}, floor {}, tail margin {} [heuristic]):\n",
                    v.coset.render(),
                    v.ball_min,
                    v.precision,
                    v.residual_floor,
                    v.tail_margin,
                ));
                out.push_str(&format!(
                    "  witness P0 = {} with coordinate valuations [{}]\n",
                    v.witness,
                    v.witness_valuations.join(", ")
                ));
                out.push_str(&format!(
                    "  lead permutation {:?}, lambdas: {}\n",
                    v.lead_permutation,
                    if v.lambdas.is_empty() {
                        "(none)".to_string()
                    } else {
                        v.lambdas.join("; ")
                    }
                ));
                for s in &v.samples {
                    let residuals: Vec<String> = s
                        .residuals
                        .iter()
                        .map(|r| format!("f_{}: {} [{}]", r.poly_index + 1, r.valuation, r.provenance))
                        .collect();
                    out.push_str(&format!(
                        "  sample [{}] {} (v(u) {}): {} — {}\n",
                        s.kind,
                        s.label,
                        s.u_valuation,
                        residuals.join(", "),
                        if s.pass { "pass" } else { "FAIL" }
                    ));
                }
                out.push_str(&format!(
                    "  verdict: {}\n",
                    if v.pass { "verified" } else { "FAILED" }
                ));
            }
        }
        out.push_str(&format!(
            "overall: {}{}\n",
            if self.stable { "stable" } else { "UNSTABLE" },
            match self.verified {
                Some(true) => ", verified",
                Some(false) => ", verification FAILED",
                None => "",
            }
        ));
        out
    }
}

// --------------------------------------------------------------- explog --

#[derive(Serialize)]
pub struct CoeffRow {
    pub n: usize,
    pub exp_coeff: String,
    pub log_coeff: String,
    pub provenance: String,
}

#[derive(Serialize)]
pub struct FunctionalResidual {
    pub a: String,
    pub log_residual: String,
    pub exp_residual: String,
    pub pass: bool,
}

#[derive(Serialize)]
pub struct EvalInfo {
    pub at: String,
    pub embedded: String,
    pub exp_value: String,
    pub log_value: String,
    pub isometry_ok: bool,
    pub functional_residuals: Vec<FunctionalResidual>,
}

#[derive(Serialize)]
pub struct ExplogReport {
    pub header: ReportHeader,
    pub module_index: usize,
    pub place: String,
    pub ball: BallInfo,
    pub coeffs: Vec<CoeffRow>,
    pub eval: Option<EvalInfo>,
}

impl ExplogReport {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        self.header.render(&mut out);
        out.push_str(&format!(
            "module {} at place {}\n{}\n",
            self.module_index,
            self.place,
            self.ball.render()
        ));
        for row in &self.coeffs {
            out.push_str(&format!(
                "n={}: e_n = {} ; l_n = {} [{}]\n",
                row.n, row.exp_coeff, row.log_coeff, row.provenance
            ));
        }
        if let Some(e) = &self.eval {
            out.push_str(&format!("at x = {}\n", e.at));
            out.push_str(&format!("  x      = {}\n", e.embedded));
            out.push_str(&format!("  exp(x) = {}\n", e.exp_value));
            out.push_str(&format!("  log(x) = {}\n", e.log_value));
            out.push_str(&format!(
                "  isometry: {}\n",
                if e.isometry_ok { "v preserved" } else { "VIOLATED" }
            ));
            for r in &e.functional_residuals {
                out.push_str(&format!(
                    "  a = {}: v(a·log x − log phi_a(x)) {} ; v(exp(a·x) − phi_a(exp x)) {} — {}\n",
                    r.a,
                    r.log_residual,
                    r.exp_residual,
                    if r.pass { "pass" } else { "FAIL" }
                ));
            }
        }
        out
    }
}

// --------------------------------------------------------------- places --

#[derive(Serialize)]
pub struct SupportRow {
    pub place: String,
    pub degree: usize,
    pub valuation: i64,
}

#[derive(Serialize)]
pub struct CoordSupport {
    pub index: usize,
    pub value: String,
    pub support: Vec<SupportRow>,
    pub weighted_sum: i64,
    pub product_formula_ok: bool,
}

#[derive(Serialize)]
pub struct PlaceRow {
    pub place: String,
    pub degree: usize,
    pub good_reduction: Vec<bool>,
}

#[derive(Serialize)]
pub struct PlacesReport {
    pub header: ReportHeader,
    pub coordinates: Vec<CoordSupport>,
    pub places: Vec<PlaceRow>,
}

impl PlacesReport {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        self.header.render(&mut out);
        for c in &self.coordinates {
            out.push_str(&format!("x_{} = {} [exact]\n", c.index, c.value));
            for s in &c.support {
                out.push_str(&format!(
                    "  v at {} (deg {}): {}\n",
                    s.place, s.degree, s.valuation
                ));
            }
            out.push_str(&format!(
                "  sum deg(v)·v(x) = {} — product formula {}\n",
                c.weighted_sum,
                if c.product_formula_ok { "holds" } else { "VIOLATED" }
            ));
        }
        out.push_str("places (good reduction per module):\n");
        for p in &self.places {
            let marks: Vec<String> = p
                .good_reduction
                .iter()
                .map(|b| if *b { "good".into() } else { "bad".to_string() })
                .collect();
            out.push_str(&format!(
                "  {} (deg {}): {}\n",
                p.place,
                p.degree,
                marks.join(", ")
            ));
        }
        out
    }
}

// ---------------------------------------------------------------- orbit --

#[derive(Serialize)]
pub struct OrbitRow {
    pub p: String,
    pub point: Vec<String>,
    pub on_variety: Option<bool>,
}

#[derive(Serialize)]
pub struct OrbitReport {
    pub header: ReportHeader,
    pub total: usize,
    pub truncated: bool,
    pub rows: Vec<OrbitRow>,
}

impl OrbitReport {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        self.header.render(&mut out);
        out.push_str(&format!("orbit: {} point(s) [exact]\n", self.total));
        for r in &self.rows {
            let mark = match r.on_variety {
                Some(true) => "  [on variety]",
                Some(false) => "",
                None => "",
            };
            out.push_str(&format!(
                "P = {} -> ({}){}\n",
                r.p,
                r.point.join(", "),
                mark
            ));
        }
        if self.truncated {
            out.push_str("... (truncated)\n");
        }
        out
    }
}
