//! `desimone`: check rule files and explore their semantics from the shell.
//!
//! Exit codes: 0 on success or a passing check, 1 when a check finds a
//! violation (or a term does not fit the rule file), 2 on usage errors and
//! unreadable or unparsable rule files.

mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use desimone::analysis::distinguishing_word;
use desimone::rules::{errors, Severity};
use desimone::{
    ast_estimate, congruence_test, counterexample_search, equivalent_pairs, generate_contexts,
    parse_closed_term, parse_spec, trace_bounded, trace_direct, AnyModel, ClosedTerm, Error, Law,
    Model, NaturalityMode, RuleSpec, Semiring, SemiringKind,
};
use serde_json::{json, Value};

use render::{behaviour_json, table_json, weight_json, Out};

#[derive(Parser)]
#[command(name = "desimone", version, about = "Operational semantics for De Simone rule files")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Rule file.
    spec: PathBuf,
    /// Print machine-readable JSON.
    #[arg(long)]
    json: bool,
    /// Add decimal approximations next to exact weights.
    #[arg(long)]
    float: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    AffineOnly,
    IncludeNonaffine,
}

#[derive(Subcommand)]
enum Command {
    /// Check every rule against the rule format.
    Validate {
        #[command(flatten)]
        common: Common,
    },
    /// One-step behaviour of a closed term.
    Step {
        #[command(flatten)]
        common: Common,
        term: String,
        /// Evaluate the per-rule formula instead of the composite law.
        #[arg(long)]
        direct: bool,
    },
    /// Bounded trace table of a closed term.
    Traces {
        #[command(flatten)]
        common: Common,
        term: String,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        /// Also compute the table by path enumeration and compare.
        #[arg(long)]
        oracle: bool,
    },
    /// Compare the bounded traces of two closed terms.
    Equiv {
        #[command(flatten)]
        common: Common,
        left: String,
        right: String,
        #[arg(long, default_value_t = 4)]
        depth: usize,
    },
    /// Test that equivalent terms stay equivalent under contexts.
    Congruence {
        #[command(flatten)]
        common: Common,
        /// Largest term size for pair generation.
        #[arg(long, default_value_t = 5)]
        size: usize,
        #[arg(long, default_value_t = 5)]
        depth: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Number of contexts.
        #[arg(long, default_value_t = 200)]
        contexts: usize,
        /// Largest context size.
        #[arg(long, default_value_t = 6)]
        context_size: usize,
        /// Number of equivalent pairs.
        #[arg(long, default_value_t = 30)]
        pairs: usize,
        /// Stream all terms and stop at the first violation instead.
        #[arg(long)]
        search: bool,
    },
    /// Check naturality of the induced law on a small carrier.
    Naturality {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2)]
        carrier: usize,
        #[arg(long, value_enum, default_value_t = Mode::AffineOnly)]
        mode: Mode,
    },
    /// Termination masses and almost-sure-termination verdict.
    Ast {
        #[command(flatten)]
        common: Common,
        /// Start term; defaults to the first constant of the file.
        term: Option<String>,
        #[arg(long, default_value_t = 30)]
        depth: usize,
    },
}

/// A failure with its exit code.
struct Fail(u8, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Syntax { .. } | Error::Weight { .. } | Error::InvalidArgument(_) => 2,
            Error::CarrierTooLarge { .. } | Error::NotApplicable(_) => 2,
            _ => 1,
        };
        Fail(code, e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(Fail(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

fn load(path: &PathBuf) -> Result<RuleSpec, Fail> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Fail(2, format!("{}: {e}", path.display())))?;
    parse_spec(&text).map_err(|e| Fail(2, format!("{}:{e}", path.display())))
}

fn model(spec: &RuleSpec) -> Result<AnyModel, Fail> {
    Ok(AnyModel::new(spec)?)
}

fn closed(spec: &RuleSpec, text: &str) -> Result<ClosedTerm, Fail> {
    parse_closed_term(&spec.signature, text).map_err(|e| match e {
        Error::Syntax { .. } => Fail(2, format!("term `{text}`: {e}")),
        other => Fail(1, other.to_string()),
    })
}

macro_rules! dispatch {
    ($any:expr, $m:ident => $body:expr) => {
        match $any {
            AnyModel::Boolean($m) => $body,
            AnyModel::Rational($m) => $body,
        }
    };
}

fn run(command: Command) -> Result<u8, Fail> {
    match command {
        Command::Validate { common } => validate(&common),
        Command::Step { common, term, direct } => {
            let spec = load(&common.spec)?;
            let t = closed(&spec, &term)?;
            dispatch!(model(&spec)?, m => step(&m, &common, &t, direct))
        }
        Command::Traces { common, term, depth, oracle } => {
            let spec = load(&common.spec)?;
            let t = closed(&spec, &term)?;
            dispatch!(model(&spec)?, m => traces(&m, &common, &t, depth, oracle))
        }
        Command::Equiv { common, left, right, depth } => {
            let spec = load(&common.spec)?;
            let (l, r) = (closed(&spec, &left)?, closed(&spec, &right)?);
            dispatch!(model(&spec)?, m => equiv(&m, &common, &l, &r, depth))
        }
        Command::Congruence { common, size, depth, seed, contexts, context_size, pairs, search } => {
            let spec = load(&common.spec)?;
            let cs = generate_contexts(&spec.signature, contexts, context_size, seed)?;
            let settings = json!({
                "context_size": context_size,
                "contexts": cs.len(),
                "depth": depth,
                "seed": seed,
                "size": size,
            });
            dispatch!(model(&spec)?, m => {
                if search {
                    search_cmd(&m, &common, &cs, size, depth, settings)
                } else {
                    congruence(&m, &common, &cs, size, depth, pairs, settings)
                }
            })
        }
        Command::Naturality { common, carrier, mode } => {
            let spec = load(&common.spec)?;
            let mode = match mode {
                Mode::AffineOnly => NaturalityMode::AffineOnly,
                Mode::IncludeNonaffine => NaturalityMode::IncludeNonaffine,
            };
            match spec.semiring {
                SemiringKind::Boolean => naturality(&Law::<desimone::Boolean>::new(&spec)?, &common, carrier, mode),
                SemiringKind::Rational => naturality(&Law::<desimone::ExtRational>::new(&spec)?, &common, carrier, mode),
            }
        }
        Command::Ast { common, term, depth } => {
            let spec = load(&common.spec)?;
            let t = match term {
                Some(text) => closed(&spec, &text)?,
                None => spec
                    .signature
                    .ops()
                    .iter()
                    .find(|(_, n)| *n == 0)
                    .map(|(op, _)| desimone::Term::node(op.clone(), vec![]))
                    .ok_or_else(|| Fail(2, "the rule file declares no constant; pass a term".into()))?,
            };
            match model(&spec)? {
                AnyModel::Rational(m) => ast(&m, &common, &t, depth),
                AnyModel::Boolean(_) => Err(Fail(2, "ast needs a rational rule file".into())),
            }
        }
    }
}

fn validate(common: &Common) -> Result<u8, Fail> {
    let spec = load(&common.spec)?;
    let violations = desimone::validate_format(&spec);
    let valid = errors(&violations).next().is_none();
    let mut out = Out::new(common);
    out.json(json!({
        "valid": valid,
        "rules": spec.rules.len(),
        "violations": violations.iter().map(|v| json!({
            "clause": v.condition.clause(),
            "condition": v.condition.describe(),
            "fragment": v.fragment,
            "rule": v.rule + 1,
            "rule_text": v.rule_text,
            "severity": match v.severity { Severity::Error => "error", Severity::Warning => "warning" },
        })).collect::<Vec<_>>(),
    }));
    for v in &violations {
        out.line(format!("rule {}: {v}", v.rule + 1));
    }
    out.line(if valid { "valid".to_string() } else { "invalid".to_string() });
    out.finish();
    Ok(if valid { 0 } else { 1 })
}

fn step<W: Semiring>(m: &Model<W>, common: &Common, t: &ClosedTerm, direct: bool) -> Result<u8, Fail> {
    let result = if direct { m.step_direct(t)? } else { (*m.step(t)?).clone() };
    let mut out = Out::new(common);
    out.json(json!({
        "entries": behaviour_json(&result, common.float),
        "term": t.to_string(),
        "total": weight_json(&result.total(), common.float),
    }));
    for (e, w) in result.iter() {
        out.line(format!("{}  {e}", render::weight_text(w, common.float)));
    }
    if result.is_empty() {
        out.line("(no behaviour)".to_string());
    }
    out.finish();
    Ok(0)
}

fn traces<W: Semiring>(
    m: &Model<W>,
    common: &Common,
    t: &ClosedTerm,
    depth: usize,
    oracle: bool,
) -> Result<u8, Fail> {
    let table = trace_bounded(m, t, depth)?;
    let mut out = Out::new(common);
    let mut doc = table_json(&table, common.float);
    doc["depth"] = json!(depth);
    doc["term"] = json!(t.to_string());
    out.table_lines(&table, common.float);
    let mut agree = true;
    if oracle {
        let direct = if depth == 0 {
            Default::default()
        } else {
            trace_direct(m, t, depth - 1)?
        };
        agree = *table == direct;
        doc["oracle"] = table_json(&direct, common.float);
        doc["agree"] = json!(agree);
        out.line("path enumeration:".to_string());
        out.table_lines(&direct, common.float);
        out.line(format!("agree: {agree}"));
    }
    out.json(doc);
    out.finish();
    Ok(if agree { 0 } else { 1 })
}

fn equiv<W: Semiring>(
    m: &Model<W>,
    common: &Common,
    l: &ClosedTerm,
    r: &ClosedTerm,
    depth: usize,
) -> Result<u8, Fail> {
    let a = trace_bounded(m, l, depth)?;
    let b = trace_bounded(m, r, depth)?;
    let diff = distinguishing_word(&a, &b);
    let mut out = Out::new(common);
    let mut doc = json!({
        "depth": depth,
        "equivalent": diff.is_none(),
        "left": l.to_string(),
        "right": r.to_string(),
    });
    match &diff {
        None => out.line(format!("equivalent up to depth {depth}")),
        Some((word, x, y)) => {
            doc["word"] = json!(render::word_json(word));
            doc["left_weight"] = weight_json(x, common.float);
            doc["right_weight"] = weight_json(y, common.float);
            out.line(format!(
                "not equivalent: word {word} has weight {} vs {}",
                render::weight_text(x, common.float),
                render::weight_text(y, common.float)
            ));
        }
    }
    out.json(doc);
    out.finish();
    Ok(if diff.is_none() { 0 } else { 1 })
}

fn violation_json<W: Semiring>(v: &desimone::CongruenceViolation<W>, float: bool) -> Value {
    json!({
        "context": v.context.to_string(),
        "left": v.left.to_string(),
        "left_filled": v.left_filled().to_string(),
        "left_weight": weight_json(&v.left_weight, float),
        "right": v.right.to_string(),
        "right_filled": v.right_filled().to_string(),
        "right_weight": weight_json(&v.right_weight, float),
        "verified": v.verified,
        "word": render::word_json(&v.word),
    })
}

fn congruence<W: Semiring>(
    m: &Model<W>,
    common: &Common,
    contexts: &[desimone::Context],
    size: usize,
    depth: usize,
    max_pairs: usize,
    mut doc: Value,
) -> Result<u8, Fail> {
    let pairs = equivalent_pairs(m, size, depth, max_pairs)?;
    let report = congruence_test(m, &pairs, contexts, depth)?;
    let mut out = Out::new(common);
    doc["pairs_tested"] = json!(report.pairs_tested);
    doc["passed"] = json!(report.passed());
    doc["anomalies"] = json!(report.anomalies().len());
    doc["violations"] = json!(report
        .violations
        .iter()
        .map(|v| violation_json(v, common.float))
        .collect::<Vec<_>>());
    out.json(doc);
    for v in &report.violations {
        out.line(format!("violation: {v}"));
    }
    out.line(format!(
        "{} pairs x {} contexts at depth {}: {} violation(s)",
        report.pairs_tested,
        report.contexts_tested,
        depth,
        report.violations.len()
    ));
    out.finish();
    Ok(if report.passed() { 0 } else { 1 })
}

fn search_cmd<W: Semiring>(
    m: &Model<W>,
    common: &Common,
    contexts: &[desimone::Context],
    size: usize,
    depth: usize,
    mut doc: Value,
) -> Result<u8, Fail> {
    let report = counterexample_search(m, size, depth, contexts)?;
    let mut out = Out::new(common);
    doc["terms_enumerated"] = json!(report.terms_enumerated);
    doc["pairs_tested"] = json!(report.pairs_tested);
    doc["passed"] = json!(report.violation.is_none());
    doc["violation"] = match &report.violation {
        Some(v) => violation_json(v, common.float),
        None => Value::Null,
    };
    out.json(doc);
    match &report.violation {
        Some(v) => out.line(format!("violation: {v}")),
        None => out.line(format!(
            "no violation among {} pairs ({} terms)",
            report.pairs_tested, report.terms_enumerated
        )),
    }
    out.finish();
    Ok(if report.violation.is_none() { 0 } else { 1 })
}

fn naturality<W: Semiring>(
    law: &Law<W>,
    common: &Common,
    carrier: usize,
    mode: NaturalityMode,
) -> Result<u8, Fail> {
    let report = law.naturality_check(carrier, mode)?;
    let mut out = Out::new(common);
    let mut doc = json!({
        "carrier": carrier,
        "inputs_checked": report.inputs_checked,
        "mode": mode.to_string(),
        "passed": report.passed(),
    });
    match &report.witness {
        None => out.line(format!(
            "natural on {} inputs over a carrier of size {carrier} ({mode})",
            report.inputs_checked
        )),
        Some(w) => {
            doc["witness"] = json!({
                "input": w.input.to_string(),
                "leg1": behaviour_json(&w.leg1, common.float),
                "leg2": behaviour_json(&w.leg2, common.float),
            });
            out.line(format!("witness: {}", w.input));
            out.line(format!("  leg 1: {}", w.leg1));
            out.line(format!("  leg 2: {}", w.leg2));
        }
    }
    out.json(doc);
    out.finish();
    Ok(if report.passed() { 0 } else { 1 })
}

fn ast(m: &Model<desimone::ExtRational>, common: &Common, t: &ClosedTerm, depth: usize) -> Result<u8, Fail> {
    let report = ast_estimate(m, t, depth)?;
    let mut out = Out::new(common);
    let opt = |w: &Option<desimone::ExtRational>| match w {
        Some(w) => weight_json(w, common.float),
        None => Value::Null,
    };
    out.json(json!({
        "acyclic": report.acyclic,
        "depth": depth,
        "exact": report.exact,
        "limit": opt(&report.limit),
        "masses": report.masses.iter().map(|(n, w)| json!({
            "depth": n,
            "mass": weight_json(w, common.float),
        })).collect::<Vec<_>>(),
        "reachable_states": report.reachable_states,
        "term": t.to_string(),
        "verdict": report.verdict.to_string(),
    }));
    for (n, w) in &report.masses {
        out.line(format!("depth {n:>3}  mass {:.12}  {w}", w.approx()));
    }
    if let Some(limit) = &report.limit {
        out.line(format!("limit {:.12}  {limit}", limit.approx()));
    }
    out.line(format!("verdict: {}", report.verdict));
    out.finish();
    Ok(match report.verdict {
        desimone::AstVerdict::NonAst => 1,
        _ => 0,
    })
}
