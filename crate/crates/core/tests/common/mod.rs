#![allow(dead_code)]

use std::path::PathBuf;

use desimone::{parse_closed_term, parse_spec, ClosedTerm, ExtRational, FormalSum, Model, RuleSpec, Semiring};

/// The five rule files shipped in `examples/`.
pub const SHIPPED: [&str; 5] = [
    "de_simone_par",
    "prob_par",
    "leaky",
    "copy_nonaffine",
    "loop",
];

pub fn examples_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../examples")
}

pub fn spec_text(name: &str) -> String {
    let path = examples_dir().join(format!("{name}.spec"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn spec(name: &str) -> RuleSpec {
    parse_spec(&spec_text(name)).unwrap()
}

pub fn model<W: Semiring>(name: &str) -> Model<W> {
    Model::new(&spec(name)).unwrap()
}

pub fn term<W: Semiring>(m: &Model<W>, text: &str) -> ClosedTerm {
    parse_closed_term(&m.spec().signature, text).unwrap()
}

pub fn q(s: &str) -> ExtRational {
    s.parse().unwrap()
}

/// `prob_par.spec` with every `1/2` replaced by the given split.
pub fn prob_par_with(left: &str, right: &str) -> RuleSpec {
    let text = spec_text("prob_par");
    let mut lines = Vec::new();
    let mut seen = 0;
    for line in text.lines() {
        if line.starts_with("rule par") {
            let w = if seen < 2 { left } else { right };
            seen += 1;
            lines.push(line.replace("1/2", w));
        } else {
            lines.push(line.to_string());
        }
    }
    parse_spec(&lines.join("\n")).unwrap()
}

pub fn sum<X: Ord + Clone, W: Semiring>(entries: &[(X, W)]) -> FormalSum<X, W> {
    FormalSum::from_entries(entries.iter().cloned())
}
