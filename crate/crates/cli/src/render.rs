//! Text and JSON rendering. JSON objects come out with sorted keys and
//! entries in formal-sum order, so output is byte-identical across runs.

use desimone::{BElem, FormalSum, Semiring, Term, TraceTable, Word};
use serde_json::{json, Value};

use crate::Common;

/// Collects either human-readable lines or one JSON document.
pub struct Out {
    json: bool,
    lines: Vec<String>,
    doc: Value,
}

impl Out {
    pub fn new(common: &Common) -> Self {
        Out {
            json: common.json,
            lines: Vec::new(),
            doc: Value::Null,
        }
    }

    pub fn line(&mut self, s: String) {
        self.lines.push(s);
    }

    pub fn json(&mut self, doc: Value) {
        self.doc = doc;
    }

    pub fn table_lines<W: Semiring>(&mut self, table: &TraceTable<W>, float: bool) {
        for (w, x) in table.iter() {
            self.lines.push(format!("{}  {w}", weight_text(x, float)));
        }
        self.lines
            .push(format!("mass {}", weight_text(&table.total(), float)));
    }

    pub fn finish(self) {
        if self.json {
            println!("{}", serde_json::to_string_pretty(&self.doc).expect("json"));
        } else {
            for l in self.lines {
                println!("{l}");
            }
        }
    }
}

pub fn weight_text<W: Semiring>(w: &W, float: bool) -> String {
    if float {
        format!("{w} (~{:.6})", w.approx())
    } else {
        w.to_string()
    }
}

/// Exact weights are strings; `--float` turns them into
/// `{"exact": …, "approx": …}`.
pub fn weight_json<W: Semiring>(w: &W, float: bool) -> Value {
    if float {
        json!({ "approx": w.approx(), "exact": w.to_string() })
    } else {
        json!(w.to_string())
    }
}

pub fn word_json(w: &Word) -> String {
    if w.is_empty() {
        String::new()
    } else {
        w.to_string()
    }
}

pub fn behaviour_json<X, W>(s: &FormalSum<BElem<Term<X>>, W>, float: bool) -> Vec<Value>
where
    X: Ord + std::fmt::Display,
    W: Semiring,
{
    s.iter()
        .map(|(e, w)| match e {
            BElem::Stop => json!({ "kind": "stop", "weight": weight_json(w, float) }),
            BElem::Step(a, t) => json!({
                "kind": "step",
                "label": a.as_str(),
                "target": t.to_string(),
                "weight": weight_json(w, float),
            }),
        })
        .collect()
}

pub fn table_json<W: Semiring>(table: &TraceTable<W>, float: bool) -> Value {
    json!({
        "mass": weight_json(&table.total(), float),
        "traces": table.iter().map(|(w, x)| json!({
            "word": word_json(w),
            "weight": weight_json(x, float),
        })).collect::<Vec<_>>(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use desimone::{ExtRational, Label};

    fn ratio(n: i64, d: i64) -> ExtRational {
        ExtRational::ratio(n, d)
    }

    #[test]
    fn weights() {
        let w = ratio(1, 3);
        assert_eq!(weight_json(&w, false), json!("1/3"));
        assert_eq!(weight_json(&ExtRational::Infinity, false), json!("inf"));
        let f = weight_json(&ratio(1, 4), true);
        assert_eq!(f, json!({ "approx": 0.25, "exact": "1/4" }));
        assert_eq!(weight_text(&ratio(1, 2), true), "1/2 (~0.500000)");
    }

    #[test]
    fn words_and_behaviours() {
        assert_eq!(word_json(&Word(vec![])), "");
        assert_eq!(word_json(&Word(vec![Label::new("a"), Label::new("b")])), "ab");
        let s: FormalSum<BElem<Term<std::convert::Infallible>>, ExtRational> =
            FormalSum::from_entries([
                (BElem::Stop, ratio(1, 2)),
                (BElem::Step(Label::new("a"), Term::constant("nil")), ratio(1, 2)),
            ]);
        let shown = serde_json::to_string(&behaviour_json(&s, false)).unwrap();
        assert_eq!(
            shown,
            r#"[{"kind":"step","label":"a","target":"nil","weight":"1/2"},{"kind":"stop","weight":"1/2"}]"#
        );
    }
}
