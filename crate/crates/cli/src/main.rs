//! dlang: exact and v-adic analysis of orbit modules over F_q(t).
//!
//! Usage: dlang <check|intersect|explog|places|orbit> <file> [flags]
//!
//! Exit codes: 0 success; 1 named error; 2 unstable (increase the degree
//! bound); 3 verification residual failure; 64 usage error.

use std::process::ExitCode;

use dlang_cli::commands::{
    cmd_check, cmd_explog, cmd_intersect, cmd_orbit, cmd_places, CmdError,
};
use dlang_cli::expr::parse_place_line;
use dlang_cli::problem::parse_problem;

const USAGE: &str = "\
usage: dlang <command> <file> [flags]

commands:
  check      validate the problem file, reduction type, torsion, ball
  intersect  exact intersection, coset inference, optional verification
  explog     coefficient tables and evaluations of the exp/log series
  places     valuations, supports, product formula, reduction table
  orbit      list orbit points

flags:
  --degree N        enumeration bound (deg P < N)
  --modulus-cap N   largest modulus degree for coset inference
  --place EXPR      place: 'inf' or a monic irreducible polynomial
  --precision N     working digits for local arithmetic
  --samples N       extra verification samples of each kind
  --seed N          seed for random ball samples
  --threads N       worker threads for the exact enumeration
  --witness-cap N   t-power cap in the analytic witness search
  --torsion-bound N annihilator search bound
  --terms N         series truncation for explog tables
  --module N        module index for explog (default 1)
  --at EXPR         evaluation point for explog
  --max-degree N    place-table degree bound for places (default 2)
  --verify          run the analytic verifier after intersect
  --json            machine-readable report
";

struct Flags {
    verify: bool,
    json: bool,
    at: Option<String>,
    module: usize,
    max_degree: usize,
    place: Option<String>,
    degree: Option<usize>,
    modulus_cap: Option<usize>,
    precision: Option<i64>,
    samples: Option<usize>,
    seed: Option<u64>,
    threads: Option<usize>,
    witness_cap: Option<usize>,
    torsion_bound: Option<usize>,
    terms: Option<usize>,
}

impl Default for Flags {
    fn default() -> Flags {
        Flags {
            verify: false,
            json: false,
            at: None,
            module: 1,
            max_degree: 2,
            place: None,
            degree: None,
            modulus_cap: None,
            precision: None,
            samples: None,
            seed: None,
            threads: None,
            witness_cap: None,
            torsion_bound: None,
            terms: None,
        }
    }
}

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    eprintln!("{USAGE}");
    ExitCode::from(64)
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.is_empty() {
        return usage_error("missing command");
    }
    let command = args[0].as_str();
    if !matches!(command, "check" | "intersect" | "explog" | "places" | "orbit") {
        return usage_error(&format!("unknown command '{command}'"));
    }
    if args.len() < 2 || args[1].starts_with("--") {
        return usage_error("missing problem file");
    }
    let file = &args[1];

    let mut flags = Flags::default();
    let mut i = 2;
    macro_rules! take_value {
        ($name:expr) => {{
            i += 1;
            match args.get(i) {
                Some(v) => v.clone(),
                None => return usage_error(&format!("flag {} needs a value", $name)),
            }
        }};
    }
    macro_rules! take_parsed {
        ($name:expr, $ty:ty) => {{
            let raw = take_value!($name);
            match raw.parse::<$ty>() {
                Ok(v) => v,
                Err(_) => {
                    return usage_error(&format!("flag {} has a malformed value '{raw}'", $name))
                }
            }
        }};
    }
    while i < args.len() {
        match args[i].as_str() {
            "--verify" => flags.verify = true,
            "--json" => flags.json = true,
            "--at" => flags.at = Some(take_value!("--at")),
            "--place" => flags.place = Some(take_value!("--place")),
            "--module" => flags.module = take_parsed!("--module", usize),
            "--max-degree" => flags.max_degree = take_parsed!("--max-degree", usize),
            "--degree" => flags.degree = Some(take_parsed!("--degree", usize)),
            "--modulus-cap" => flags.modulus_cap = Some(take_parsed!("--modulus-cap", usize)),
            "--precision" => flags.precision = Some(take_parsed!("--precision", i64)),
            "--samples" => flags.samples = Some(take_parsed!("--samples", usize)),
            "--seed" => flags.seed = Some(take_parsed!("--seed", u64)),
            "--threads" => flags.threads = Some(take_parsed!("--threads", usize)),
            "--witness-cap" => flags.witness_cap = Some(take_parsed!("--witness-cap", usize)),
            "--torsion-bound" => {
                flags.torsion_bound = Some(take_parsed!("--torsion-bound", usize))
            }
            "--terms" => flags.terms = Some(take_parsed!("--terms", usize)),
            other => return usage_error(&format!("unknown flag '{other}'")),
        }
        i += 1;
    }

    let text = match std::fs::read_to_string(file) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {file}: {e}");
            return ExitCode::from(1);
        }
    };
    let mut spec = match parse_problem(&text) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {file}: {e}");
            return ExitCode::from(1);
        }
    };

    // Flag overrides.
    if let Some(d) = flags.degree {
        spec.bounds.degree = d;
    }
    if let Some(c) = flags.modulus_cap {
        spec.bounds.modulus_cap = c;
    }
    if let Some(p) = flags.precision {
        spec.bounds.precision = p;
    }
    if let Some(s) = flags.samples {
        spec.bounds.samples = s;
    }
    if let Some(s) = flags.seed {
        spec.bounds.seed = s;
    }
    if let Some(t) = flags.threads {
        spec.bounds.threads = t.max(1);
    }
    if let Some(w) = flags.witness_cap {
        spec.bounds.witness_cap = w;
    }
    if let Some(t) = flags.torsion_bound {
        spec.bounds.torsion_bound = t;
    }
    if let Some(t) = flags.terms {
        spec.bounds.terms = Some(t);
    }
    if let Some(p) = &flags.place {
        match parse_place_line(p, 1, &spec.field) {
            Ok(place) => spec.bounds.place = Some(place),
            Err(e) => {
                eprintln!("error: --place: {e}");
                return ExitCode::from(1);
            }
        }
    }

    let result = match command {
        "check" => cmd_check(&spec, flags.json),
        "intersect" => cmd_intersect(&spec, flags.verify, flags.json),
        "explog" => cmd_explog(&spec, flags.module, flags.at.as_deref(), flags.json),
        "places" => cmd_places(&spec, flags.max_degree, flags.json),
        "orbit" => cmd_orbit(&spec, flags.json),
        _ => unreachable!(),
    };
    match result {
        Ok((output, code)) => {
            print!("{output}");
            ExitCode::from(code as u8)
        }
        Err(CmdError::Parse(e)) => {
            eprintln!("error: {file}: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
