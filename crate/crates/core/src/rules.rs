//! Rule files: parsing, label-metavariable expansion and format checks.
//!
//! A rule file is line oriented; `#` starts a comment.
//!
//! ```text
//! dialect weighted
//! semiring rational
//! labels a, b
//! op nil : 0
//! op pre_a : 1
//! op par : 2
//! rule nil -[1]-> *
//! rule pre_a(x1) -a[1]-> x1
//! rule par(x1, x2) -@l[1/2]-> par(y1, x2) when x1 -@l-> y1
//! rule par(x1, x2) -[1/2]-> * when x1 -> *
//! ```
//!
//! In the `desimone` dialect the bracketed weight is omitted, every rule
//! has weight one and termination is implicit.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::semiring::{ExtRational, Semiring};
use crate::syntax::{is_affine_term, Label, OpSym, Signature, Term, Tok, Tokens, Var, VarKind};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Dialect {
    DeSimone,
    Weighted,
}

impl fmt::Display for Dialect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dialect::DeSimone => "desimone",
            Dialect::Weighted => "weighted",
        })
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SemiringKind {
    Boolean,
    Rational,
}

impl fmt::Display for SemiringKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SemiringKind::Boolean => "boolean",
            SemiringKind::Rational => "rational",
        })
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Premise {
    /// `x_src -label-> y_tgt`; well-formed rules have `src == tgt`.
    Trans {
        src: usize,
        label: Label,
        tgt: usize,
    },
    /// `x_src -> *`
    Term { src: usize },
}

impl Premise {
    pub fn src(&self) -> usize {
        match self {
            Premise::Trans { src, .. } | Premise::Term { src } => *src,
        }
    }
}

impl fmt::Display for Premise {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Premise::Trans { src, label, tgt } => write!(f, "x{src} -{label}-> y{tgt}"),
            Premise::Term { src } => write!(f, "x{src} -> *"),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Conclusion {
    Labeled {
        label: Label,
        weight: ExtRational,
        target: Term<Var>,
    },
    Terminate {
        weight: ExtRational,
    },
    /// A label on a termination conclusion. Parsed so it can be reported;
    /// it fits neither conclusion form.
    LabelledTermination {
        label: Label,
        weight: ExtRational,
    },
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Rule {
    pub op: OpSym,
    pub arity: usize,
    pub premises: Vec<Premise>,
    pub conclusion: Conclusion,
}

impl Rule {
    fn fmt_with(&self, f: &mut fmt::Formatter<'_>, dialect: Dialect) -> fmt::Result {
        write!(f, "rule {}", self.op)?;
        if self.arity > 0 {
            let vars: Vec<String> = (1..=self.arity).map(|i| format!("x{i}")).collect();
            write!(f, "({})", vars.join(", "))?;
        }
        let weight = |w: &ExtRational| match dialect {
            Dialect::DeSimone => String::new(),
            Dialect::Weighted => format!("[{w}]"),
        };
        match &self.conclusion {
            Conclusion::Labeled {
                label,
                weight: w,
                target,
            } => write!(f, " -{label}{}-> {target}", weight(w))?,
            Conclusion::Terminate { .. } if dialect == Dialect::DeSimone => f.write_str(" -> *")?,
            Conclusion::Terminate { weight: w } => write!(f, " -{}-> *", weight(w))?,
            Conclusion::LabelledTermination { label, weight: w } => {
                write!(f, " -{label}{}-> *", weight(w))?
            }
        }
        if !self.premises.is_empty() {
            let ps: Vec<String> = self.premises.iter().map(|p| p.to_string()).collect();
            write!(f, " when {}", ps.join(", "))?;
        }
        Ok(())
    }

    /// The rule in rule-file syntax for the given dialect.
    pub fn display(&self, dialect: Dialect) -> impl fmt::Display + '_ {
        struct D<'a>(&'a Rule, Dialect);
        impl fmt::Display for D<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                self.0.fmt_with(f, self.1)
            }
        }
        D(self, dialect)
    }
}

/// A parsed and expanded rule file.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RuleSpec {
    pub dialect: Dialect,
    pub semiring: SemiringKind,
    pub signature: Signature,
    pub rules: Vec<Rule>,
}

impl fmt::Display for RuleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "dialect {}", self.dialect)?;
        writeln!(f, "semiring {}", self.semiring)?;
        let labels: Vec<&str> = self.signature.labels().iter().map(Label::as_str).collect();
        writeln!(f, "labels {}", labels.join(", "))?;
        for (op, n) in self.signature.ops() {
            writeln!(f, "op {op} : {n}")?;
        }
        for r in &self.rules {
            writeln!(f, "{}", r.display(self.dialect))?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Templates and metavariable expansion.

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum LabelRef {
    Ground(Label),
    Meta(String),
}

impl LabelRef {
    fn resolve(&self, env: &[(String, Label)]) -> Result<Label> {
        match self {
            LabelRef::Ground(l) => Ok(l.clone()),
            LabelRef::Meta(m) => env
                .iter()
                .find(|(n, _)| n == m)
                .map(|(_, l)| l.clone())
                .ok_or_else(|| Error::UnboundMetavar(m.clone())),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum PremiseTemplate {
    Trans {
        src: usize,
        label: LabelRef,
        tgt: usize,
    },
    Term {
        src: usize,
    },
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ConclusionTemplate {
    Labeled {
        label: LabelRef,
        weight: ExtRational,
        target: Term<Var>,
    },
    Terminate {
        weight: ExtRational,
    },
    LabelledTermination {
        label: LabelRef,
        weight: ExtRational,
    },
}

/// A rule whose labels may be metavariables `@m`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RuleTemplate {
    pub op: OpSym,
    pub arity: usize,
    pub premises: Vec<PremiseTemplate>,
    pub conclusion: ConclusionTemplate,
    pub forall: Vec<String>,
}

impl RuleTemplate {
    /// Metavariables in order of first appearance: premises, then the
    /// `forall` clause.
    fn binders(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        let mut push = |m: &String| {
            if !out.contains(m) {
                out.push(m.clone());
            }
        };
        for p in &self.premises {
            if let PremiseTemplate::Trans {
                label: LabelRef::Meta(m),
                ..
            } = p
            {
                push(m);
            }
        }
        self.forall.iter().for_each(&mut push);
        out
    }

    fn conclusion_meta(&self) -> Option<&String> {
        match &self.conclusion {
            ConclusionTemplate::Labeled {
                label: LabelRef::Meta(m),
                ..
            }
            | ConclusionTemplate::LabelledTermination {
                label: LabelRef::Meta(m),
                ..
            } => Some(m),
            _ => None,
        }
    }
}

/// One ground rule per assignment of labels to the template's
/// metavariables. Every metavariable of the conclusion must be bound by a
/// premise or the `forall` clause.
pub fn expand_forall(template: &RuleTemplate, labels: &[Label]) -> Result<Vec<Rule>> {
    let binders = template.binders();
    if let Some(m) = template.conclusion_meta() {
        if !binders.contains(m) {
            return Err(Error::UnboundMetavar(m.clone()));
        }
    }
    let mut used: BTreeSet<&String> = BTreeSet::new();
    for p in &template.premises {
        if let PremiseTemplate::Trans {
            label: LabelRef::Meta(m),
            ..
        } = p
        {
            used.insert(m);
        }
    }
    used.extend(template.conclusion_meta());
    if let Some(m) = template.forall.iter().find(|m| !used.contains(m)) {
        return Err(Error::InvalidArgument(format!(
            "metavariable `@{m}` is quantified but never used"
        )));
    }

    let mut assignments: Vec<Vec<(String, Label)>> = vec![Vec::new()];
    for m in &binders {
        assignments = assignments
            .into_iter()
            .flat_map(|env| {
                labels.iter().map(move |l| {
                    let mut e = env.clone();
                    e.push((m.clone(), l.clone()));
                    e
                })
            })
            .collect();
    }

    assignments
        .iter()
        .map(|env| {
            let premises = template
                .premises
                .iter()
                .map(|p| {
                    Ok(match p {
                        PremiseTemplate::Trans { src, label, tgt } => Premise::Trans {
                            src: *src,
                            label: label.resolve(env)?,
                            tgt: *tgt,
                        },
                        PremiseTemplate::Term { src } => Premise::Term { src: *src },
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let conclusion = match &template.conclusion {
                ConclusionTemplate::Labeled {
                    label,
                    weight,
                    target,
                } => Conclusion::Labeled {
                    label: label.resolve(env)?,
                    weight: weight.clone(),
                    target: target.clone(),
                },
                ConclusionTemplate::Terminate { weight } => Conclusion::Terminate {
                    weight: weight.clone(),
                },
                ConclusionTemplate::LabelledTermination { label, weight } => {
                    Conclusion::LabelledTermination {
                        label: label.resolve(env)?,
                        weight: weight.clone(),
                    }
                }
            };
            Ok(Rule {
                op: template.op.clone(),
                arity: template.arity,
                premises,
                conclusion,
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Parsing.

const KEYWORDS: [&str; 7] = [
    "dialect", "semiring", "labels", "op", "rule", "when", "forall",
];

#[derive(Default)]
struct Header {
    dialect: Option<Dialect>,
    semiring: Option<SemiringKind>,
    labels: Option<Vec<Label>>,
    ops: Vec<(OpSym, usize)>,
    signature: Option<Signature>,
}

/// Parses a rule file, expands metavariables and checks declarations.
///
/// Format conditions (affineness, distinct premise indices, …) are not
/// errors here; see [`validate_format`].
pub fn parse_spec(text: &str) -> Result<RuleSpec> {
    let mut h = Header::default();
    let mut rules = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut toks = Tokens::lex(content, line)?;
        if toks.at_end() {
            continue;
        }
        let kw = toks.ident("a declaration keyword")?;
        match kw.as_str() {
            "dialect" => {
                if h.dialect.is_some() {
                    return Err(toks.error("dialect declared twice"));
                }
                let d = toks.ident("`desimone` or `weighted`")?;
                h.dialect = Some(match d.as_str() {
                    "desimone" => Dialect::DeSimone,
                    "weighted" => Dialect::Weighted,
                    other => {
                        return Err(toks.error(format!("unknown dialect `{other}`")));
                    }
                });
            }
            "semiring" => {
                if h.dialect.is_none() {
                    return Err(toks.error("`dialect` must come first"));
                }
                if h.semiring.is_some() {
                    return Err(toks.error("semiring declared twice"));
                }
                let s = toks.ident("`boolean` or `rational`")?;
                let kind = match s.as_str() {
                    "boolean" => SemiringKind::Boolean,
                    "rational" => SemiringKind::Rational,
                    other => return Err(toks.error(format!("unknown semiring `{other}`"))),
                };
                if h.dialect == Some(Dialect::DeSimone) && kind != SemiringKind::Boolean {
                    return Err(toks.error("the desimone dialect requires `semiring boolean`"));
                }
                h.semiring = Some(kind);
            }
            "labels" => {
                if h.dialect.is_none() {
                    return Err(toks.error("`dialect` must come first"));
                }
                if h.signature.is_some() || h.labels.is_some() {
                    return Err(toks.error("labels must be declared once, before any rule"));
                }
                let mut labels = Vec::new();
                loop {
                    let l = toks.ident("a label")?;
                    if KEYWORDS.contains(&l.as_str()) {
                        return Err(toks.error(format!("`{l}` is a keyword")));
                    }
                    labels.push(Label::new(&l));
                    match toks.next() {
                        None => break,
                        Some(Tok::Comma) => continue,
                        Some(_) => return Err(toks.error("expected `,` between labels")),
                    }
                }
                h.labels = Some(labels);
            }
            "op" => {
                if h.dialect.is_none() {
                    return Err(toks.error("`dialect` must come first"));
                }
                if h.signature.is_some() {
                    return Err(toks.error("operations must be declared before any rule"));
                }
                let name = toks.ident("an operation name")?;
                if KEYWORDS.contains(&name.as_str()) {
                    return Err(toks.error(format!("`{name}` is a keyword")));
                }
                toks.expect(Tok::Colon, "`:`")?;
                let arity = match toks.next() {
                    Some(Tok::Number(n)) => n
                        .parse::<usize>()
                        .map_err(|_| toks.error("arity out of range"))?,
                    _ => return Err(toks.error("expected an arity")),
                };
                if !toks.at_end() {
                    return Err(toks.unexpected("end of line"));
                }
                h.ops.push((OpSym::new(&name), arity));
            }
            "rule" => {
                if h.signature.is_none() {
                    let dialect = h
                        .dialect
                        .ok_or_else(|| toks.error("`dialect` must come first"))?;
                    if h.semiring.is_none() {
                        h.semiring = Some(match dialect {
                            Dialect::DeSimone => SemiringKind::Boolean,
                            Dialect::Weighted => SemiringKind::Rational,
                        });
                    }
                    let labels = h
                        .labels
                        .clone()
                        .ok_or_else(|| toks.error("`labels` must be declared before rules"))?;
                    h.signature = Some(
                        Signature::new(h.ops.clone(), labels)
                            .map_err(|e| toks.error(e.to_string()))?,
                    );
                }
                let sig = h.signature.as_ref().expect("built above");
                let dialect = h.dialect.expect("checked above");
                let template = parse_rule(&mut toks, sig, dialect)?;
                let expanded =
                    expand_forall(&template, sig.labels()).map_err(|e| Error::Syntax {
                        line,
                        column: 1,
                        message: e.to_string(),
                    })?;
                rules.extend(expanded);
            }
            other => {
                return Err(Error::Syntax {
                    line,
                    column: 1,
                    message: format!("unknown declaration `{other}`"),
                })
            }
        }
    }
    let dialect = h.dialect.ok_or(Error::Syntax {
        line: 1,
        column: 1,
        message: "missing `dialect` declaration".into(),
    })?;
    let semiring = h.semiring.unwrap_or(match dialect {
        Dialect::DeSimone => SemiringKind::Boolean,
        Dialect::Weighted => SemiringKind::Rational,
    });
    let signature = match h.signature {
        Some(s) => s,
        None => {
            let labels = h.labels.ok_or(Error::Syntax {
                line: 1,
                column: 1,
                message: "missing `labels` declaration".into(),
            })?;
            Signature::new(h.ops, labels)?
        }
    };
    Ok(RuleSpec {
        dialect,
        semiring,
        signature,
        rules,
    })
}

fn parse_label_ref(toks: &mut Tokens, sig: &Signature) -> Result<Option<LabelRef>> {
    match toks.peek() {
        Some(Tok::Ident(name)) => {
            let name = name.clone();
            let l = sig
                .label(&name)
                .ok_or_else(|| toks.error(format!("undeclared label `{name}`")))?;
            toks.next();
            Ok(Some(LabelRef::Ground(l)))
        }
        Some(Tok::Meta(m)) => {
            let m = m.clone();
            toks.next();
            Ok(Some(LabelRef::Meta(m)))
        }
        _ => Ok(None),
    }
}

fn check_rule_term(toks: &Tokens, sig: &Signature, t: &Term<Var>, col: usize) -> Result<()> {
    sig.check_term(t)
        .map_err(|e| toks.error_at(col, e.to_string()))
}

fn parse_var(toks: &mut Tokens, kind: VarKind) -> Result<usize> {
    let col = toks.column();
    let name = toks.ident("a variable")?;
    match Var::parse(&name) {
        Some(v) if v.kind == kind && v.index > 0 => Ok(v.index),
        _ => Err(toks.error_at(
            col,
            format!(
                "expected a variable `{}<n>`, found `{name}`",
                if kind == VarKind::X { 'x' } else { 'y' }
            ),
        )),
    }
}

fn parse_rule(toks: &mut Tokens, sig: &Signature, dialect: Dialect) -> Result<RuleTemplate> {
    let op_col = toks.column();
    let name = toks.ident("an operation name")?;
    let op = sig
        .op(&name)
        .ok_or_else(|| toks.error_at(op_col, format!("undeclared operation `{name}`")))?;
    let arity = sig.arity(&op).expect("declared");

    let mut found = 0;
    if toks.peek() == Some(&Tok::LParen) {
        toks.next();
        loop {
            let idx = parse_var(toks, VarKind::X)?;
            found += 1;
            if idx != found {
                return Err(toks.error(format!(
                    "head arguments must be x1, …, xn in order; found x{idx} at position {found}"
                )));
            }
            match toks.next() {
                Some(Tok::Comma) => continue,
                Some(Tok::RParen) => break,
                _ => return Err(toks.error("expected `,` or `)` in rule head")),
            }
        }
    }
    if found != arity {
        return Err(toks.error_at(
            op_col,
            format!("operation `{op}` has arity {arity}, rule head has {found}"),
        ));
    }

    // Conclusion arrow: `-` [label] [`[w]`] `->`
    let bare = toks.peek() == Some(&Tok::Arrow);
    let label = if bare {
        None
    } else {
        toks.expect(Tok::Minus, "`-` starting the conclusion arrow")?;
        parse_label_ref(toks, sig)?
    };
    let weight = match toks.peek() {
        _ if bare => {
            if dialect == Dialect::Weighted {
                return Err(toks.unexpected("`-[w]->` with a weight"));
            }
            ExtRational::one()
        }
        Some(Tok::Bracket(raw)) => {
            let raw = raw.clone();
            if dialect == Dialect::DeSimone {
                return Err(toks.error("weights are not allowed in the desimone dialect"));
            }
            let w: ExtRational = raw.parse().map_err(|e: Error| toks.error(e.to_string()))?;
            toks.next();
            w
        }
        _ => {
            if dialect == Dialect::Weighted {
                return Err(toks.unexpected("a bracketed weight `[w]`"));
            }
            ExtRational::one()
        }
    };
    toks.expect(Tok::Arrow, "`->`")?;

    let target_col = toks.column();
    let conclusion = if toks.peek() == Some(&Tok::Star) {
        toks.next();
        match label {
            Some(label) => ConclusionTemplate::LabelledTermination { label, weight },
            None => ConclusionTemplate::Terminate { weight },
        }
    } else {
        let target = toks.term()?;
        check_rule_term(toks, sig, &target, target_col)?;
        let label = label.ok_or_else(|| {
            toks.error_at(target_col, "a conclusion with a target term needs a label")
        })?;
        ConclusionTemplate::Labeled {
            label,
            weight,
            target,
        }
    };

    let mut premises = Vec::new();
    let mut forall = Vec::new();
    if toks.peek() == Some(&Tok::Ident("when".into())) {
        toks.next();
        loop {
            let src = parse_var(toks, VarKind::X)?;
            let premise = match toks.next() {
                Some(Tok::Arrow) => {
                    toks.expect(Tok::Star, "`*` after a termination premise arrow")?;
                    PremiseTemplate::Term { src }
                }
                Some(Tok::Minus) => {
                    let label = parse_label_ref(toks, sig)?
                        .ok_or_else(|| toks.unexpected("a label or `@metavariable`"))?;
                    toks.expect(Tok::Arrow, "`->`")?;
                    let tgt = parse_var(toks, VarKind::Y)?;
                    PremiseTemplate::Trans { src, label, tgt }
                }
                _ => return Err(toks.error("expected `-label->` or `->` in premise")),
            };
            premises.push(premise);
            if toks.peek() == Some(&Tok::Comma) {
                toks.next();
            } else {
                break;
            }
        }
    }
    if toks.peek() == Some(&Tok::Ident("forall".into())) {
        toks.next();
        loop {
            match toks.next() {
                Some(Tok::Meta(m)) => forall.push(m),
                _ => return Err(toks.error("expected `@metavariable`")),
            }
            if toks.peek() == Some(&Tok::Comma) {
                toks.next();
            } else {
                break;
            }
        }
    }
    if !toks.at_end() {
        return Err(toks.unexpected("`when`, `forall` or end of line"));
    }
    Ok(RuleTemplate {
        op,
        arity,
        premises,
        conclusion,
        forall,
    })
}

// ---------------------------------------------------------------------------
// Format validation.

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub enum Condition {
    /// A premise refers to an argument index outside `1..=n`.
    PremiseIndexRange,
    /// Two premises on the same argument.
    DuplicatePremiseIndex,
    /// `x_i -a-> y_j` with `i != j`.
    PremiseShape,
    /// The target uses a variable the rule does not bind.
    TargetVariable,
    /// Some variable occurs more than once in the target.
    NonAffineTarget,
    /// Termination premises are not part of the desimone dialect.
    TerminationPremise,
    /// Termination conclusions are not part of the desimone dialect.
    TerminationConclusion,
    /// A label attached to a termination conclusion.
    LabelledTermination,
    /// Weight `inf`; accepted with a warning.
    InfiniteWeight,
}

impl Condition {
    /// Clause of the rule format the condition comes from.
    pub fn clause(&self) -> &'static str {
        match self {
            Condition::PremiseIndexRange | Condition::DuplicatePremiseIndex => "ii",
            Condition::PremiseShape => "premise-shape",
            Condition::TargetVariable | Condition::NonAffineTarget => "iv/v",
            Condition::TerminationPremise | Condition::TerminationConclusion => "dialect",
            Condition::LabelledTermination => "conclusion-form",
            Condition::InfiniteWeight => "iv",
        }
    }

    pub fn describe(&self) -> &'static str {
        match self {
            Condition::PremiseIndexRange => "premise index out of range",
            Condition::DuplicatePremiseIndex => "duplicate premise index",
            Condition::PremiseShape => "premise does not pair x_i with y_i",
            Condition::TargetVariable => "target uses a variable the rule does not bind",
            Condition::NonAffineTarget => "non-affine target",
            Condition::TerminationPremise => "termination premise in desimone dialect",
            Condition::TerminationConclusion => "termination conclusion in desimone dialect",
            Condition::LabelledTermination => "labelled termination conclusion",
            Condition::InfiniteWeight => "infinite weight",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Violation {
    /// Index into [`RuleSpec::rules`].
    pub rule: usize,
    pub rule_text: String,
    pub condition: Condition,
    pub fragment: String,
    pub severity: Severity,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(
            f,
            "{sev}: ({}) {} `{}` in rule `{}`",
            self.condition.clause(),
            self.condition.describe(),
            self.fragment,
            self.rule_text
        )
    }
}

/// Checks every rule against the rule format of the file's dialect.
/// An empty result means the file is valid; warnings do not invalidate it.
pub fn validate_format(spec: &RuleSpec) -> Vec<Violation> {
    let mut out = Vec::new();
    for (idx, rule) in spec.rules.iter().enumerate() {
        let text = rule.display(spec.dialect).to_string();
        let mut push = |condition, fragment: String| {
            let severity = if condition == Condition::InfiniteWeight {
                Severity::Warning
            } else {
                Severity::Error
            };
            out.push(Violation {
                rule: idx,
                rule_text: text.clone(),
                condition,
                fragment,
                severity,
            });
        };

        let mut seen = BTreeSet::new();
        for p in &rule.premises {
            let src = p.src();
            if src == 0 || src > rule.arity {
                push(Condition::PremiseIndexRange, p.to_string());
            }
            if !seen.insert(src) {
                push(Condition::DuplicatePremiseIndex, p.to_string());
            }
            match p {
                Premise::Trans { src, tgt, .. } if src != tgt => {
                    push(Condition::PremiseShape, p.to_string())
                }
                Premise::Term { .. } if spec.dialect == Dialect::DeSimone => {
                    push(Condition::TerminationPremise, p.to_string())
                }
                _ => {}
            }
        }

        match &rule.conclusion {
            Conclusion::Labeled { target, weight, .. } => {
                let allowed = allowed_target_vars(rule);
                let mut bad: Vec<String> = target
                    .leaves()
                    .into_iter()
                    .filter(|v| !allowed.contains(v))
                    .map(|v| v.to_string())
                    .collect();
                bad.dedup();
                if !bad.is_empty() {
                    push(Condition::TargetVariable, bad.join(", "));
                }
                if !is_affine_term(target) {
                    push(Condition::NonAffineTarget, target.to_string());
                }
                if weight.is_infinite() {
                    push(Condition::InfiniteWeight, weight.to_string());
                }
            }
            Conclusion::Terminate { weight } => {
                if spec.dialect == Dialect::DeSimone {
                    push(Condition::TerminationConclusion, "*".into());
                }
                if weight.is_infinite() {
                    push(Condition::InfiniteWeight, weight.to_string());
                }
            }
            Conclusion::LabelledTermination { label, .. } => {
                push(Condition::LabelledTermination, format!("-{label}-> *"));
            }
        }
    }
    out
}

/// `y_i` for transition premises on `i`, `x_j` for arguments without any
/// premise.
pub fn allowed_target_vars(rule: &Rule) -> BTreeSet<Var> {
    let mut allowed = BTreeSet::new();
    let premised: BTreeSet<usize> = rule.premises.iter().map(Premise::src).collect();
    for p in &rule.premises {
        if let Premise::Trans { src, .. } = p {
            allowed.insert(Var::y(*src));
        }
    }
    for j in 1..=rule.arity {
        if !premised.contains(&j) {
            allowed.insert(Var::x(j));
        }
    }
    allowed
}

/// True if the violations leave the rules executable. Non-affine targets
/// are executable (they are what counterexample searches run on); every
/// other error is not.
pub fn is_executable(violations: &[Violation]) -> bool {
    violations
        .iter()
        .all(|v| v.severity == Severity::Warning || v.condition == Condition::NonAffineTarget)
}

/// Errors only, ignoring warnings.
pub fn errors(violations: &[Violation]) -> impl Iterator<Item = &Violation> {
    violations.iter().filter(|v| v.severity == Severity::Error)
}
