mod common;

use std::collections::BTreeSet;

use desimone::rules::{
    expand_forall, is_executable, Condition, Conclusion, ConclusionTemplate, LabelRef, Premise,
    PremiseTemplate, Rule, RuleTemplate, Severity,
};
use desimone::{parse_spec, parse_term, validate_format, Dialect, Error, Label, OpSym, RuleSpec};

use common::{q, spec, spec_text, SHIPPED};

const DESIMONE: &str = "dialect desimone\nlabels a, b\nop nil : 0\nop g : 1\nop f : 2\nop t : 3\n";
const WEIGHTED: &str =
    "dialect weighted\nsemiring rational\nlabels a, b\nop nil : 0\nop g : 1\nop f : 2\nop t : 3\n";

/// Rule lines and the conditions an independent reading of the format
/// assigns to them.
const CORPUS: &[(&str, &str, &[Condition])] = {
    use Condition::*;
    &[
        (DESIMONE, "rule g(x1) -a-> g(y1) when x1 -a-> y1", &[]),
        (DESIMONE, "rule f(x1, x2) -a-> f(y1, x2) when x1 -b-> y1", &[]),
        (DESIMONE, "rule f(x1, x2) -a-> f(y1, y1) when x1 -b-> y1", &[NonAffineTarget]),
        (DESIMONE, "rule f(x1, x2) -a-> f(x2, x2)", &[NonAffineTarget]),
        (DESIMONE, "rule f(x1, x2) -a-> f(y1, y2) when x1 -a-> y1, x1 -b-> y1", &[DuplicatePremiseIndex, TargetVariable]),
        (DESIMONE, "rule f(x1, x2) -a-> nil when x1 -a-> y1, x1 -a-> y1", &[DuplicatePremiseIndex]),
        (DESIMONE, "rule g(x1) -a-> nil when x2 -a-> y2", &[PremiseIndexRange]),
        (DESIMONE, "rule f(x1, x2) -a-> y2 when x1 -a-> y2", &[PremiseShape, TargetVariable]),
        (DESIMONE, "rule g(x1) -a-> x1 when x1 -a-> y1", &[TargetVariable]),
        (DESIMONE, "rule g(x1) -a-> x2", &[TargetVariable]),
        (DESIMONE, "rule nil -> *", &[TerminationConclusion]),
        (DESIMONE, "rule g(x1) -a-> nil when x1 -> *", &[TerminationPremise]),
        (DESIMONE, "rule nil -a-> *", &[LabelledTermination]),
        (DESIMONE, "rule t(x1, x2, x3) -a-> t(y1, x2, y3) when x1 -a-> y1, x3 -b-> y3", &[]),
        (DESIMONE, "rule t(x1, x2, x3) -a-> t(y1, y3, y3) when x1 -a-> y1, x3 -b-> y3", &[NonAffineTarget]),
        (DESIMONE, "rule t(x1, x2, x3) -a-> g(x1) when x1 -a-> y1", &[TargetVariable]),
        (WEIGHTED, "rule nil -[1]-> *", &[]),
        (WEIGHTED, "rule nil -[0]-> *", &[]),
        (WEIGHTED, "rule nil -[inf]-> *", &[InfiniteWeight]),
        (WEIGHTED, "rule g(x1) -a[inf]-> g(g(y1)) when x1 -a-> y1", &[InfiniteWeight]),
        (WEIGHTED, "rule f(x1, x2) -[1/2]-> * when x1 -> *", &[]),
        (WEIGHTED, "rule f(x1, x2) -a[1/2]-> f(x1, y2) when x1 -> *, x2 -a-> y2", &[TargetVariable]),
        (WEIGHTED, "rule f(x1, x2) -a[1/2]-> g(y2) when x1 -> *, x2 -a-> y2", &[]),
        (WEIGHTED, "rule f(x1, x2) -a[1/3]-> f(y2, y2) when x2 -a-> y2", &[NonAffineTarget]),
        (WEIGHTED, "rule f(x1, x2) -[1]-> * when x1 -> *, x1 -> *", &[DuplicatePremiseIndex]),
        (WEIGHTED, "rule nil -a[1/2]-> *", &[LabelledTermination]),
        (WEIGHTED, "rule g(x1) -a[1]-> g(x1) when x3 -> *", &[PremiseIndexRange]),
    ]
};

/// Independent re-check: counts variable occurrences in the printed
/// target and derives the bound variables from the premise list.
fn recheck(spec: &RuleSpec, rule: &Rule) -> BTreeSet<Condition> {
    let mut out = BTreeSet::new();
    let mut sources = Vec::new();
    for p in &rule.premises {
        let (src, tgt) = match p {
            Premise::Trans { src, tgt, .. } => (*src, Some(*tgt)),
            Premise::Term { src } => (*src, None),
        };
        if !(1..=rule.arity).contains(&src) {
            out.insert(Condition::PremiseIndexRange);
        }
        if sources.contains(&src) {
            out.insert(Condition::DuplicatePremiseIndex);
        }
        sources.push(src);
        match tgt {
            Some(t) if t != src => {
                out.insert(Condition::PremiseShape);
            }
            None if spec.dialect == Dialect::DeSimone => {
                out.insert(Condition::TerminationPremise);
            }
            _ => {}
        }
    }
    let weight = match &rule.conclusion {
        Conclusion::Labeled { weight, target, .. } => {
            let text = target.to_string();
            let vars: Vec<&str> = text
                .split(|c: char| !c.is_ascii_alphanumeric() && c != '_')
                .filter(|w| {
                    w.len() > 1
                        && (w.starts_with('x') || w.starts_with('y'))
                        && w[1..].chars().all(|c| c.is_ascii_digit())
                })
                .collect();
            let distinct: BTreeSet<&str> = vars.iter().copied().collect();
            if distinct.len() != vars.len() {
                out.insert(Condition::NonAffineTarget);
            }
            for v in distinct {
                let i: usize = v[1..].parse().unwrap();
                let ok = if v.starts_with('y') {
                    rule.premises
                        .iter()
                        .any(|p| matches!(p, Premise::Trans { src, .. } if *src == i))
                } else {
                    i <= rule.arity && !sources.contains(&i)
                };
                if !ok {
                    out.insert(Condition::TargetVariable);
                }
            }
            weight
        }
        Conclusion::Terminate { weight } => {
            if spec.dialect == Dialect::DeSimone {
                out.insert(Condition::TerminationConclusion);
            }
            weight
        }
        Conclusion::LabelledTermination { weight, .. } => {
            out.insert(Condition::LabelledTermination);
            weight
        }
    };
    if weight.is_infinite() && !matches!(rule.conclusion, Conclusion::LabelledTermination { .. }) {
        out.insert(Condition::InfiniteWeight);
    }
    out
}

#[test]
fn validator_agrees_with_recheck() {
    assert!(CORPUS.len() >= 20);
    for (header, line, expected) in CORPUS {
        let spec = parse_spec(&format!("{header}{line}\n")).unwrap_or_else(|e| panic!("{line}: {e}"));
        assert_eq!(spec.rules.len(), 1);
        let found: BTreeSet<Condition> = validate_format(&spec).iter().map(|v| v.condition).collect();
        let oracle = recheck(&spec, &spec.rules[0]);
        let expected: BTreeSet<Condition> = expected.iter().copied().collect();
        assert_eq!(found, oracle, "validator vs recheck on `{line}`");
        assert_eq!(found, expected, "validator vs corpus on `{line}`");
    }
}

#[test]
fn violations_name_rule_condition_and_fragment() {
    let spec = parse_spec(&format!("{DESIMONE}rule g(x1) -a-> nil\nrule f(x1, x2) -a-> f(y1, y1) when x1 -a-> y1\n")).unwrap();
    let vs = validate_format(&spec);
    assert_eq!(vs.len(), 1);
    assert_eq!(vs[0].rule, 1);
    assert_eq!(vs[0].condition, Condition::NonAffineTarget);
    assert_eq!(vs[0].fragment, "f(y1, y1)");
    assert!(vs[0].to_string().contains("non-affine target"));
    assert!(is_executable(&vs));

    let warn = parse_spec(&format!("{WEIGHTED}rule nil -[inf]-> *\n")).unwrap();
    let vs = validate_format(&warn);
    assert_eq!(vs[0].severity, Severity::Warning);
}

#[test]
fn shipped_specs_validate() {
    for name in SHIPPED {
        let vs = validate_format(&spec(name));
        if name.ends_with("_nonaffine") {
            assert!(vs.iter().all(|v| v.condition == Condition::NonAffineTarget), "{name}");
            assert!(!vs.is_empty());
        } else {
            assert!(vs.is_empty(), "{name}: {vs:?}");
        }
    }
}

#[test]
fn shipped_rule_counts() {
    let prob = spec("prob_par");
    assert_eq!(prob.rules.len(), 9);
    let lines = spec_text("prob_par").lines().filter(|l| l.starts_with("rule")).count();
    assert_eq!(lines, 7);
    let par = spec("de_simone_par");
    let par_rules = par.rules.iter().filter(|r| r.op.as_str() == "par").count();
    assert_eq!(par_rules, 4);
}

#[test]
fn print_parse_roundtrip() {
    for name in SHIPPED {
        let s = spec(name);
        assert_eq!(parse_spec(&s.to_string()).unwrap(), s, "{name}");
    }
    for (header, line, _) in CORPUS {
        let s = parse_spec(&format!("{header}{line}\n")).unwrap();
        assert_eq!(parse_spec(&s.to_string()).unwrap(), s, "{line}");
    }
}

#[test]
fn parse_errors() {
    let err = |text: &str| parse_spec(text).unwrap_err();
    assert!(matches!(err(&format!("{WEIGHTED}rule nil -[2/0]-> *\n")), Error::Syntax { line: 8, .. }));
    assert!(matches!(err(&format!("{DESIMONE}rule h(x1) -a-> nil\n")), Error::Syntax { line: 7, .. }));
    assert!(matches!(err(&format!("{DESIMONE}rule g(x1) -c-> nil\n")), Error::Syntax { .. }));
    assert!(matches!(err(&format!("{DESIMONE}rule f(x1) -a-> nil\n")), Error::Syntax { .. }));
    assert!(matches!(err(&format!("{DESIMONE}rule g(x1) -a-> f(nil)\n")), Error::Syntax { .. }));
    assert!(matches!(err(&format!("{DESIMONE}rule g(x1) -a[1/2]-> nil\n")), Error::Syntax { .. }));
    assert!(matches!(err(&format!("{WEIGHTED}rule g(x1) -a-> nil\n")), Error::Syntax { .. }));
    assert!(err(&format!("{DESIMONE}rule g(x1) -@m-> nil\n")).to_string().contains("@m"));
    assert!(parse_spec("labels a\nop nil : 0\n").is_err());
}

fn par_template(meta: &[&str]) -> RuleTemplate {
    let m = |s: &str| LabelRef::Meta(s.into());
    let premises = match meta {
        [] => vec![PremiseTemplate::Trans { src: 1, label: LabelRef::Ground(Label::new("a")), tgt: 1 }],
        [one] => vec![PremiseTemplate::Trans { src: 1, label: m(one), tgt: 1 }],
        [one, two, ..] => vec![
            PremiseTemplate::Trans { src: 1, label: m(one), tgt: 1 },
            PremiseTemplate::Trans { src: 2, label: m(two), tgt: 2 },
        ],
    };
    RuleTemplate {
        op: OpSym::new("par"),
        arity: 2,
        premises,
        conclusion: ConclusionTemplate::Labeled {
            label: meta.first().map(|s| m(s)).unwrap_or(LabelRef::Ground(Label::new("a"))),
            weight: q("1"),
            target: parse_term("par(y1, x2)").unwrap(),
        },
        forall: Vec::new(),
    }
}

#[test]
fn expand_forall_examples() {
    let labels = [Label::new("a"), Label::new("b")];
    assert_eq!(expand_forall(&par_template(&["l"]), &labels).unwrap().len(), 2);
    let ground = expand_forall(&par_template(&[]), &labels).unwrap();
    assert_eq!(ground.len(), 1);
    assert!(matches!(&ground[0].premises[0], Premise::Trans { label, .. } if label.as_str() == "a"));
    let mut two = par_template(&["l", "m"]);
    two.conclusion = ConclusionTemplate::Labeled {
        label: LabelRef::Meta("l".into()),
        weight: q("1"),
        target: parse_term("par(y1, y2)").unwrap(),
    };
    assert_eq!(expand_forall(&two, &labels).unwrap().len(), 4);

    let mut unbound = par_template(&[]);
    unbound.conclusion = ConclusionTemplate::Labeled {
        label: LabelRef::Meta("k".into()),
        weight: q("1"),
        target: parse_term("nil").unwrap(),
    };
    assert!(matches!(expand_forall(&unbound, &labels), Err(Error::UnboundMetavar(_))));
    unbound.forall.push("k".into());
    assert_eq!(expand_forall(&unbound, &labels).unwrap().len(), 2);
}

#[test]
fn forall_clause_in_files() {
    let s = parse_spec(&format!("{DESIMONE}rule g(x1) -@k-> g(x1) forall @k\n")).unwrap();
    assert_eq!(s.rules.len(), 2);
    assert!(parse_spec(&format!("{DESIMONE}rule g(x1) -a-> g(x1) forall @k\n")).is_err());
}
