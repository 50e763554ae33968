//! Command-line front end for `fillcheck-core`.
//!
//! [`run`] takes the full argument vector and writes to the given streams, so
//! the binary and the tests share one code path. Exit codes: `0` success,
//! `1` usage error, `2` malformed action spec, `3` internal or computation error.

use std::io::{self, BufRead, Write};

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use fillcheck_core::bernoulli::{self, BernoulliError};
use fillcheck_core::chenruan::{self, ChenRuanError};
use fillcheck_core::exactnum::{fmt_rat, Rat};
use fillcheck_core::genus::{self, GenusError, GenusKind};
use fillcheck_core::groups::{ActionSpec, GroupError, GroupTable, SpecParseError};
use fillcheck_core::link::{self, LinkError};
use fillcheck_core::obstruct::{self, ObstructError, ObstructionReport, RpWitness, Z3Witness};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

/// Environment variable capping batch parallelism.
pub const THREADS_VAR: &str = "FILLCHECK_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Parse(#[from] SpecParseError),
    #[error("{0}")]
    Internal(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Parse(_) => EXIT_PARSE,
            CliError::Internal(_) | CliError::Io(_) => EXIT_INTERNAL,
        }
    }
}

impl From<ObstructError> for CliError {
    fn from(e: ObstructError) -> Self {
        let usage = match &e {
            ObstructError::Domain(_) => true,
            ObstructError::Group(g) => group_is_usage(g),
            ObstructError::ChenRuan(c) => chenruan_is_usage(c),
            ObstructError::Link(LinkError::BadPrime { .. }) => true,
            ObstructError::Bernoulli(_) => true,
            ObstructError::Genus(g) => {
                !matches!(g, GenusError::NotIntegral(_) | GenusError::Exact(_))
            }
            _ => false,
        };
        if usage {
            CliError::Usage(e.to_string())
        } else {
            CliError::Internal(e.to_string())
        }
    }
}

fn group_is_usage(e: &GroupError) -> bool {
    matches!(
        e,
        GroupError::NotIsolated | GroupError::Domain(_) | GroupError::Invalid(_)
    )
}

fn chenruan_is_usage(e: &ChenRuanError) -> bool {
    match e {
        ChenRuanError::Group(g) => group_is_usage(g),
        ChenRuanError::BadClass(_) => true,
    }
}

macro_rules! via_obstruct {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                ObstructError::from(e).into()
            }
        }
    )*};
}
via_obstruct!(
    GroupError,
    ChenRuanError,
    LinkError,
    GenusError,
    BernoulliError
);

#[derive(Debug, Parser)]
#[command(
    name = "fillcheck",
    about = "Exact invariants and filling obstructions for quotient singularities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GenusArg {
    #[value(name = "L", alias = "l")]
    L,
    #[value(name = "ahat", alias = "AHat", alias = "Ahat")]
    AHat,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Full obstruction report for an action spec.
    Analyze {
        spec: String,
        #[arg(long)]
        json: bool,
    },
    /// |B_{2n}| with its N/D decomposition.
    Bernoulli {
        n: u64,
        #[arg(long)]
        json: bool,
    },
    /// Coefficients of the weight-m genus polynomial.
    Genus {
        kind: GenusArg,
        m: u32,
        /// Rewrite in Chern classes instead of Pontryagin classes.
        #[arg(long)]
        chern: bool,
        #[arg(long)]
        json: bool,
    },
    /// Total Chern class of the link's contact structure.
    Chern {
        spec: String,
        #[arg(long)]
        json: bool,
    },
    /// Chen-Ruan degrees, products and coproducts on class generators.
    Chenruan {
        spec: String,
        #[arg(long, num_args = 2, value_names = ["G", "H"], conflicts_with = "coproduct")]
        product: Option<Vec<usize>>,
        #[arg(long, value_name = "G")]
        coproduct: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Orbifold signature defect of an isolated action on even-dimensional space.
    Defect {
        spec: String,
        #[arg(long)]
        json: bool,
    },
    /// Signature pipeline for the real projective space of dimension 2^{k+1} - 1.
    RpCase {
        k: u32,
        #[arg(long)]
        json: bool,
    },
    /// Signature pipeline for Z/3 with weights (1^m, 2^m).
    Z3Case {
        m: u64,
        #[arg(long)]
        json: bool,
    },
    /// Analyze one spec per line (`-` for stdin), emitting one JSON report per line.
    Batch { file: String },
}

/// Runs the CLI on `argv` (including the program name).
pub fn run<S: AsRef<str>>(argv: &[S], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv.iter().map(|s| s.as_ref())) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let target: &mut dyn Write = if code == EXIT_OK { out } else { err };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn parse_spec(s: &str) -> Result<ActionSpec, CliError> {
    Ok(s.parse::<ActionSpec>()?)
}

fn emit_json<T: Serialize>(out: &mut dyn Write, v: &T) -> Result<(), CliError> {
    let s = serde_json::to_string_pretty(v).map_err(|e| CliError::Internal(e.to_string()))?;
    writeln!(out, "{s}")?;
    Ok(())
}

pub fn rat_json(x: &Rat) -> Value {
    json!({"num": x.numer().to_string(), "den": x.denom().to_string()})
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    match cmd {
        Command::Analyze { spec, json } => {
            let report = obstruct::analyze(&parse_spec(&spec)?)?;
            if json {
                emit_json(out, &report)?;
            } else {
                writeln!(out, "{report}")?;
            }
        }
        Command::Bernoulli { n, json } => {
            let e = bernoulli::entry(n)?;
            if json {
                emit_json(out, &e)?;
            } else {
                writeln!(out, "B_{n} = {}", fmt_rat(&e.value))?;
                writeln!(out, "N_{n} = {}", e.numerator)?;
                writeln!(out, "D_{n} = {}", e.odd_denominator)?;
            }
        }
        Command::Genus {
            kind,
            m,
            chern,
            json,
        } => {
            let kind = match kind {
                GenusArg::L => GenusKind::L,
                GenusArg::AHat => GenusKind::AHat,
            };
            let mut poly = genus::genus_in_pontryagin(kind, m)?;
            if chern {
                poly = genus::pontryagin_to_chern(&poly);
            }
            let letter = if chern { "c" } else { "p" };
            if json {
                let terms: Vec<Value> = poly
                    .terms()
                    .map(|(p, c)| json!({"monomial": p.parts(), "coeff": rat_json(c)}))
                    .collect();
                let basis = if chern { "chern" } else { "pontryagin" };
                emit_json(
                    out,
                    &json!({"kind": format!("{kind:?}"), "m": m, "basis": basis, "terms": terms}),
                )?;
            } else {
                for (p, c) in poly.terms() {
                    let mono: Vec<String> =
                        p.parts().iter().map(|i| format!("{letter}{i}")).collect();
                    writeln!(out, "{:<24} {}", mono.join("*"), fmt_rat(c))?;
                }
                writeln!(out, "{} = {}", kind_name(kind, m), poly.render(letter))?;
            }
        }
        Command::Chern { spec, json } => {
            let c = link::total_chern(&parse_spec(&spec)?)?;
            if json {
                emit_json(out, &c)?;
            } else {
                writeln!(out, "{} (generator degree {})", c.poly, c.generator_degree)?;
            }
        }
        Command::Chenruan {
            spec,
            product,
            coproduct,
            json,
        } => {
            let t = GroupTable::build(&parse_spec(&spec)?)?;
            chenruan_cmd(&t, product, coproduct, json, out)?;
        }
        Command::Defect { spec, json } => {
            let d = obstruct::orbifold_defect(&parse_spec(&spec)?)?;
            if json {
                emit_json(out, &rat_json(&d))?;
            } else {
                writeln!(out, "{}", fmt_rat(&d))?;
            }
        }
        Command::RpCase { k, json } => {
            let w = obstruct::rp_pipeline(k)?;
            if json {
                emit_json(out, &w)?;
            } else {
                write_rp(out, &w)?;
            }
        }
        Command::Z3Case { m, json } => {
            let w = obstruct::z3_pipeline(m)?;
            if json {
                emit_json(out, &w)?;
            } else {
                write_z3(out, &w)?;
            }
        }
        Command::Batch { file } => return batch(&file, out, err),
    }
    Ok(EXIT_OK)
}

fn kind_name(kind: GenusKind, m: u32) -> String {
    match kind {
        GenusKind::L => format!("L_{m}"),
        GenusKind::AHat => format!("Â_{m}"),
    }
}

fn chenruan_cmd(
    t: &GroupTable,
    product: Option<Vec<usize>>,
    coproduct: Option<usize>,
    json: bool,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    if let Some(gh) = product {
        let p = chenruan::cr_product_basis(t, gh[0], gh[1])?;
        if json {
            emit_json(out, &p)?;
        } else {
            let terms: Vec<String> = p
                .terms()
                .map(|(c, v)| format!("{}·[{c}]", fmt_rat(v)))
                .collect();
            let rhs = if terms.is_empty() {
                "0".to_string()
            } else {
                terms.join(" + ")
            };
            writeln!(out, "[{}] * [{}] = {rhs}", gh[0], gh[1])?;
        }
        return Ok(());
    }
    if let Some(g) = coproduct {
        let d = chenruan::cr_coproduct_basis(t, g)?;
        if json {
            emit_json(out, &d)?;
        } else {
            let terms: Vec<String> = d
                .terms()
                .map(|((a, b), v)| format!("{}·[{a}]⊗[{b}]", fmt_rat(v)))
                .collect();
            let rhs = if terms.is_empty() {
                "0".to_string()
            } else {
                terms.join(" + ")
            };
            writeln!(out, "Δ[{g}] = {rhs}")?;
        }
        return Ok(());
    }
    let degrees = chenruan::cr_degrees(t)?;
    if json {
        let classes: Vec<Value> = t
            .classes()
            .iter()
            .zip(&degrees)
            .map(|(c, d)| {
                json!({
                    "index": c.index,
                    "representative": c.representative.to_string(),
                    "size": c.size,
                    "degree": rat_json(d),
                })
            })
            .collect();
        emit_json(
            out,
            &json!({"spec": t.spec().to_string(), "classes": classes}),
        )?;
    } else {
        for (c, d) in t.classes().iter().zip(&degrees) {
            writeln!(
                out,
                "[{}] {} size {} degree {}",
                c.index,
                c.representative,
                c.size,
                fmt_rat(d)
            )?;
        }
    }
    Ok(())
}

fn write_rp(out: &mut dyn Write, w: &RpWitness) -> Result<(), CliError> {
    writeln!(out, "k = {}, n = {}", w.k, w.n)?;
    if let Some(x) = &w.c_half_sq_x {
        writeln!(out, "∫_X c_{}^2(X) = {}", w.n / 2, fmt_rat(x))?;
    }
    if let Some(s) = &w.small {
        writeln!(out, "∫_W c_2^2(W) = {}", fmt_rat(&s.c2_sq_w))?;
        writeln!(out, "∫_W p_1^2(W) = {}", fmt_rat(&s.p1_sq_w))?;
        writeln!(out, "∫_Y p_1^2(Y) = {}", fmt_rat(&s.p1_sq_y))?;
        writeln!(out, "∫_Y p_2(Y) = {}", fmt_rat(&s.p2_y))?;
        writeln!(out, "Â(Y) = {}", fmt_rat(&s.ahat_y))?;
    }
    if let Some(e) = &w.equation {
        writeln!(out, "K = {}", e.k_coefficient)?;
        writeln!(out, "equation: 8·{}·l^2 = {}", e.k_coefficient, e.rhs)?;
        writeln!(out, "l^2 = {}", fmt_rat(&e.l_squared))?;
    }
    if let Some(r) = &w.residues {
        writeln!(
            out,
            "N mod 64 = {}, D mod 64 = {}",
            r.numerator_mod_64, r.denominator_mod_64
        )?;
        writeln!(
            out,
            "(2m)!/2^(2m-1) mod 64 = {}",
            r.factorial_quotient_mod_64
        )?;
        writeln!(out, "binom(2m,m) mod 8 = {}", r.central_binomial_mod_8)?;
        writeln!(
            out,
            "rhs mod 64 = {}, lhs residues mod 64 = {:?}",
            r.rhs_mod_64, r.lhs_mod_64
        )?;
        writeln!(out, "residue solutions = {:?}", r.solutions)?;
    }
    writeln!(out, "contradiction: {}", w.contradiction)?;
    writeln!(out, "{}", w.reason)?;
    Ok(())
}

fn write_z3(out: &mut dyn Write, w: &Z3Witness) -> Result<(), CliError> {
    writeln!(out, "m = {} ({})", w.m, if w.odd { "3^k" } else { "2·3^k" })?;
    writeln!(out, "defect = {}", fmt_rat(&w.defect))?;
    writeln!(
        out,
        "equation: {} + {}·x = {}",
        w.constant, w.coefficient, w.rhs
    )?;
    if let Some(a) = &w.a {
        writeln!(out, "A = {a}")?;
    }
    writeln!(out, "B = {}", w.b)?;
    writeln!(out, "x = {}", fmt_rat(&w.x))?;
    writeln!(out, "3x = {}", fmt_rat(&w.three_x))?;
    writeln!(
        out,
        "gcd divisor = {} ({} rhs)",
        w.divisor,
        if w.divisor_divides_rhs {
            "divides"
        } else {
            "does not divide"
        }
    )?;
    for v in &w.valuations {
        writeln!(
            out,
            "v_{}(coefficient) = {}, v_{}(B) = {}",
            v.prime, v.coefficient, v.prime, v.b
        )?;
    }
    writeln!(
        out,
        "small primes of denominator(3x): {:?}",
        w.denominator_small_primes
    )?;
    writeln!(out, "contradiction: {}", w.contradiction)?;
    writeln!(out, "{}", w.reason)?;
    Ok(())
}

fn thread_cap() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_VAR) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!(
                "{THREADS_VAR} must be a positive integer, got `{v}`"
            ))),
        },
    }
}

/// Reads specs one per line; blank lines and `#` comments are skipped.
pub fn read_specs(reader: impl BufRead) -> io::Result<Vec<String>> {
    let mut specs = Vec::new();
    for line in reader.lines() {
        let line = line?;
        let t = line.trim();
        if !t.is_empty() && !t.starts_with('#') {
            specs.push(t.to_string());
        }
    }
    Ok(specs)
}

enum BatchItem {
    Report(Box<ObstructionReport>),
    Failed {
        spec: String,
        error: String,
        code: i32,
    },
}

fn analyze_line(s: &str) -> BatchItem {
    let r = parse_spec(s).and_then(|spec| Ok(obstruct::analyze(&spec)?));
    match r {
        Ok(rep) => BatchItem::Report(Box::new(rep)),
        Err(e) => BatchItem::Failed {
            spec: s.to_string(),
            error: e.to_string(),
            code: e.exit_code(),
        },
    }
}

/// Analyzes every spec, in parallel under an optional thread cap, keeping input order.
pub fn analyze_all(specs: &[String], threads: Option<usize>) -> Result<Vec<Value>, CliError> {
    let work = || -> Vec<BatchItem> { specs.par_iter().map(|s| analyze_line(s)).collect() };
    let items = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Internal(e.to_string()))?
            .install(work),
        None => work(),
    };
    items
        .into_iter()
        .map(|it| match it {
            BatchItem::Report(r) => {
                serde_json::to_value(&*r).map_err(|e| CliError::Internal(e.to_string()))
            }
            BatchItem::Failed { spec, error, code } => {
                Ok(json!({"spec": spec, "error": error, "exit_code": code}))
            }
        })
        .collect()
}

fn batch(file: &str, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let specs = if file == "-" {
        read_specs(io::stdin().lock())?
    } else {
        let f = std::fs::File::open(file)
            .map_err(|e| CliError::Usage(format!("cannot open `{file}`: {e}")))?;
        read_specs(io::BufReader::new(f))?
    };
    let reports = analyze_all(&specs, thread_cap()?)?;
    let mut code = EXIT_OK;
    for r in &reports {
        if let Some(c) = r.get("exit_code").and_then(Value::as_i64) {
            writeln!(err, "error: {}", r["error"].as_str().unwrap_or_default())?;
            code = code.max(c as i32);
        }
        writeln!(
            out,
            "{}",
            serde_json::to_string(r).map_err(|e| CliError::Internal(e.to_string()))?
        )?;
    }
    Ok(code)
}
