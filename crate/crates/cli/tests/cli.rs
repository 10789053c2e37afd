use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn example(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "examples", &format!("{name}.spec")]
        .iter()
        .collect();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_desimone"))
        .args(args)
        .output()
        .expect("spawn desimone")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = args.to_vec();
    all.push("--json");
    let out = run(&all);
    let v = serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("bad json from {args:?}: {e}\n{}", stdout(&out)));
    (code(&out), v)
}

const PAR_AB: &str = "par(pre_a(nil), pre_b(nil))";

#[test]
fn validate_exit_codes() {
    for name in ["de_simone_par", "prob_par", "leaky", "loop"] {
        let out = run(&["validate", &example(name)]);
        assert_eq!(code(&out), 0, "{name}: {}", stdout(&out));
    }
    let out = run(&["validate", &example("copy_nonaffine")]);
    assert_eq!(code(&out), 1);
    let text = stdout(&out);
    assert!(text.contains("non-affine target") && text.contains("g(y1, y1)"), "{text}");

    let (c, v) = json(&["validate", &example("copy_nonaffine")]);
    assert_eq!(c, 1);
    assert_eq!(v["valid"], false);
    let errors: Vec<&Value> = v["violations"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|x| x["severity"] == "error")
        .collect();
    assert_eq!(errors.len(), 1);
    assert_eq!(errors[0]["fragment"], "g(y1, y1)");

    assert_eq!(code(&run(&["validate", "/nonexistent/file.spec"])), 2);
}

#[test]
fn parse_errors_exit_with_two() {
    let dir = std::env::temp_dir().join(format!("desimone-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.spec");
    std::fs::write(&bad, "dialect desimone\nlabels a\nop f : 1\nrule f(x1 -a-> x1\n").unwrap();
    let out = run(&["validate", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(code(&run(&[])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
    assert_eq!(code(&run(&["step", &example("prob_par")])), 2);
    assert_eq!(code(&run(&["step", &example("prob_par"), "par(nil"])), 2);
    assert_eq!(code(&run(&["naturality", &example("prob_par"), "--carrier", "9"])), 2);
    assert_eq!(code(&run(&["ast", &example("de_simone_par")])), 2);
}

#[test]
fn step_output() {
    let (c, v) = json(&["step", &example("prob_par"), "nil"]);
    assert_eq!(c, 0);
    assert_eq!(v["entries"], serde_json::json!([{ "kind": "stop", "weight": "1" }]));

    let (c, v) = json(&["step", &example("prob_par"), PAR_AB]);
    assert_eq!(c, 0);
    let entries = v["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 2);
    assert!(entries.iter().all(|e| e["weight"] == "1/2" && e["kind"] == "step"));
    assert_eq!(entries[0]["label"], "a");
    assert_eq!(entries[0]["target"], "par(nil, pre_b(nil))");
    assert_eq!(v["total"], "1");

    let (_, direct) = json(&["step", &example("prob_par"), PAR_AB, "--direct"]);
    assert_eq!(direct["entries"], v["entries"]);

    let (_, float) = json(&["step", &example("prob_par"), PAR_AB, "--float"]);
    assert_eq!(float["entries"][0]["weight"]["exact"], "1/2");
    assert_eq!(float["entries"][0]["weight"]["approx"], 0.5);
}

#[test]
fn step_with_unknown_operation_fails() {
    let out = run(&["step", &example("prob_par"), "seq(nil)"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("seq"));
}

#[test]
fn traces_output() {
    let (c, v) = json(&["traces", &example("prob_par"), PAR_AB, "--depth", "3", "--oracle"]);
    assert_eq!(c, 0);
    let words: Vec<(&str, &str)> = v["traces"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| (e["word"].as_str().unwrap(), e["weight"].as_str().unwrap()))
        .collect();
    assert_eq!(words, [("a", "1/4"), ("b", "1/4"), ("ab", "1/4"), ("ba", "1/4")]);
    assert_eq!(v["mass"], "1");
    assert_eq!(v["agree"], true);
    assert_eq!(v["oracle"]["traces"], v["traces"]);

    let (c, v) = json(&["traces", &example("prob_par"), PAR_AB, "--depth", "0", "--oracle"]);
    assert_eq!(c, 0);
    assert_eq!(v["traces"], serde_json::json!([]));
    assert_eq!(v["mass"], "0");

    let (_, v) = json(&["traces", &example("de_simone_par"), PAR_AB, "--depth", "3"]);
    let words: Vec<&str> = v["traces"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["word"].as_str().unwrap())
        .collect();
    assert_eq!(words, ["", "a", "b", "ab", "ba"]);
}

#[test]
fn equiv_output() {
    let swapped = "par(pre_b(nil), pre_a(nil))";
    let out = run(&["equiv", &example("prob_par"), PAR_AB, swapped, "--depth", "4"]);
    assert_eq!(code(&out), 0);

    let (c, v) = json(&["equiv", &example("prob_par"), "pre_a(nil)", "pre_b(nil)", "--depth", "3"]);
    assert_eq!(c, 1);
    assert_eq!(v["equivalent"], false);
    assert_eq!(v["word"], "a");
    assert_eq!(v["left_weight"], "1");
    assert_eq!(v["right_weight"], "0");
}

#[test]
fn naturality_output() {
    let (c, v) = json(&["naturality", &example("prob_par")]);
    assert_eq!(c, 0);
    assert_eq!(v["passed"], true);
    assert!(v["inputs_checked"].as_u64().unwrap() > 0);

    let (c, v) = json(&[
        "naturality",
        &example("copy_nonaffine"),
        "--mode",
        "include-nonaffine",
        "--carrier",
        "2",
    ]);
    assert_eq!(c, 1);
    assert_eq!(v["mode"], "include-nonaffine");
    assert!(v["witness"]["input"].as_str().unwrap().starts_with("choice("));
    assert_eq!(v["witness"]["leg1"], serde_json::json!([{ "kind": "stop", "weight": "1" }]));
    assert_eq!(v["witness"]["leg2"], serde_json::json!([]));

    // Copying a variable duplicates behaviour on one side only.
    let (c, v) = json(&["naturality", &example("copy_nonaffine")]);
    assert_eq!(c, 1);
    assert_eq!(v["mode"], "affine-only");
    let leg1 = v["witness"]["leg1"].as_array().unwrap().len();
    let leg2 = v["witness"]["leg2"].as_array().unwrap().len();
    assert_eq!((leg1, leg2), (5, 3), "{v}");
}

#[test]
fn ast_output() {
    let (c, v) = json(&["ast", &example("leaky"), "--depth", "30"]);
    assert_eq!(c, 1);
    assert_eq!(v["verdict"], "non-a.s.t.");
    assert_eq!(v["masses"].as_array().unwrap().len(), 30);
    assert_eq!(v["masses"][0]["mass"], "1/3");
    assert_eq!(v["masses"][1]["mass"], "1/2");

    let (c, v) = json(&["ast", &example("prob_par"), PAR_AB, "--depth", "8"]);
    assert_eq!(c, 0);
    assert_eq!(v["verdict"], "a.s.t.-consistent");
    assert_eq!(v["limit"], "1");
    assert_eq!(v["exact"], true);

    let (c, v) = json(&["ast", &example("loop")]);
    assert_eq!(c, 1);
    assert_eq!(v["limit"], "0");
}

#[test]
fn congruence_output() {
    let (c, v) = json(&["congruence", &example("prob_par"), "--seed", "42"]);
    assert_eq!(c, 0);
    assert_eq!(v["violations"], serde_json::json!([]));
    assert_eq!(v["contexts"], 200);
    assert!(v["pairs_tested"].as_u64().unwrap() > 0);

    let (c, v) = json(&[
        "congruence",
        &example("copy_nonaffine"),
        "--search",
        "--size",
        "7",
        "--depth",
        "4",
        "--contexts",
        "20",
        "--context-size",
        "4",
        "--seed",
        "1",
    ]);
    assert_eq!(c, 1);
    let w = &v["violation"];
    assert_eq!(w["word"], "abc");
    assert_eq!(w["context"], "f([])");
    assert_eq!((w["left_weight"].as_str(), w["right_weight"].as_str()), (Some("1"), Some("0")));
    assert_eq!(w["verified"], true);
}

#[test]
fn json_is_byte_identical_across_runs() {
    let cases: [&[&str]; 4] = [
        &["traces", &example("prob_par"), "par(pre_a(pre_b(nil)), pre_a(nil))", "--depth", "5", "--json"],
        &["congruence", &example("de_simone_par"), "--json", "--contexts", "50"],
        &["naturality", &example("copy_nonaffine"), "--json", "--mode", "include-nonaffine"],
        &["validate", &example("copy_nonaffine"), "--json"],
    ];
    for args in cases {
        let a = run(args).stdout;
        let b = run(args).stdout;
        assert!(!a.is_empty());
        assert_eq!(a, b, "{args:?}");
    }
}
