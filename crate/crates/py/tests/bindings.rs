use std::path::PathBuf;

use desimone_py::Spec;
use pyo3::prelude::*;
use pyo3::types::{IntoPyDict, PyTuple};

fn text(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "examples", &format!("{name}.spec")]
        .iter()
        .collect();
    std::fs::read_to_string(p).unwrap()
}

fn with_spec<R>(name: &str, f: impl FnOnce(Python<'_>, Bound<'_, Spec>) -> R) -> R {
    Python::initialize();
    Python::attach(|py| {
        let spec = Bound::new(py, Spec::from_text(&text(name)).unwrap()).unwrap();
        f(py, spec)
    })
}

#[test]
fn step_and_traces() {
    with_spec("prob_par", |_, s| {
        let steps: Vec<(Option<String>, Option<String>, String)> = s
            .call_method1("step", ("par(pre_a(nil), pre_b(nil))",))
            .unwrap()
            .extract()
            .unwrap();
        assert_eq!(steps.len(), 2);
        assert_eq!(steps[0], (Some("a".into()), Some("par(nil, pre_b(nil))".into()), "1/2".into()));

        let table: Vec<(String, String)> = s
            .call_method1("traces", ("par(pre_a(nil), pre_b(nil))", 3))
            .unwrap()
            .extract()
            .unwrap();
        let words: Vec<&str> = table.iter().map(|(w, _)| w.as_str()).collect();
        assert_eq!(words, ["a", "b", "ab", "ba"]);
        assert!(table.iter().all(|(_, x)| x == "1/4"));
    });
}

#[test]
fn validation_and_naturality() {
    with_spec("copy_nonaffine", |py, s| {
        let valid: bool = s.call_method0("is_valid").unwrap().extract().unwrap();
        assert!(!valid);
        let kwargs = [("include_nonaffine", true)].into_py_dict(py).unwrap();
        let witness: Option<String> = s
            .call_method("naturality_witness", PyTuple::empty(py), Some(&kwargs))
            .unwrap()
            .extract()
            .unwrap();
        assert!(witness.unwrap().starts_with("choice("));
        let witness: Option<String> = s.call_method0("naturality_witness").unwrap().extract().unwrap();
        assert!(witness.unwrap().starts_with("f("));
    });
    with_spec("de_simone_par", |_, s| {
        let witness: Option<String> = s.call_method0("naturality_witness").unwrap().extract().unwrap();
        assert_eq!(witness, None);
    });
}

#[test]
fn errors_become_value_errors() {
    with_spec("prob_par", |py, s| {
        let e = s.call_method1("step", ("seq(nil)",)).unwrap_err();
        assert!(e.is_instance_of::<pyo3::exceptions::PyValueError>(py));
        assert!(e.to_string().contains("seq"));
    });
    with_spec("de_simone_par", |py, s| {
        let e = s.call_method1("termination", ("nil",)).unwrap_err();
        assert!(e.is_instance_of::<pyo3::exceptions::PyValueError>(py));
    });
    assert!(Spec::from_text("rule broken(").is_err());
}

#[test]
fn termination_masses() {
    with_spec("leaky", |_, s| {
        let (masses, verdict): (Vec<String>, String) =
            s.call_method1("termination", ("c0", 4)).unwrap().extract().unwrap();
        assert_eq!(masses, ["1/3", "1/2", "7/12", "5/8"]);
        assert_eq!(verdict, "non-a.s.t.");
    });
}
