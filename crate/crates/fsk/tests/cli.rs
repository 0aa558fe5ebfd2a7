use std::path::PathBuf;
use std::process::{Command, Output};

fn model(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("models");
    p.push(name);
    p.to_string_lossy().into_owned()
}

fn fsk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fsk"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn history_given_event() {
    let o = fsk(&[
        "history",
        "--model",
        &model("coins.json"),
        "U1",
        "--given",
        "agree",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "{c1,c2}\n");

    let o = fsk(&["history", "--model", &model("coins.json"), "U1"]);
    assert_eq!(stdout(&o), "{c1}\n");
}

#[test]
fn history_of_constant_is_empty() {
    let o = fsk(&["history", "--model", &model("coins.json"), "C"]);
    assert_eq!(stdout(&o), "{}\n");
    let o = fsk(&["history", "--model", &model("coins.json"), "C", "--json"]);
    assert_eq!(stdout(&o), "{\"history\":[]}\n");
}

#[test]
fn history_given_value() {
    let o = fsk(&[
        "history",
        "--model",
        &model("perfect-map.json"),
        "X2",
        "--given",
        "X1=1",
    ]);
    assert_eq!(stdout(&o), "{}\n");
    let o = fsk(&[
        "history",
        "--model",
        &model("perfect-map.json"),
        "X1",
        "--given",
        "X2=1",
    ]);
    assert_eq!(stdout(&o), "{u}\n");
}

#[test]
fn indep_verdicts_and_exit_codes() {
    let o = fsk(&["indep", "--model", &model("coins.json"), "U1", "U2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "structurally independent\n");

    let o = fsk(&[
        "indep",
        "--model",
        &model("perfect-map.json"),
        "X2",
        "X2",
        "--given",
        "X1",
    ]);
    assert_eq!(o.status.code(), Some(0));

    let o = fsk(&[
        "indep",
        "--model",
        &model("perfect-map.json"),
        "X1",
        "X1",
        "--given",
        "X2",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o), "structurally dependent\n");
}

#[test]
fn xor_witness_is_biased() {
    let o = fsk(&[
        "indep",
        "--model",
        &model("coins.json"),
        "U1",
        "XOR",
        "--witness",
        "--json",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["independent"], false);
    // XOR of two coins is independent of either coin exactly when the other
    // one is fair, so the witness must bias c2
    let c2 = v["witness"]["factors"]["c2"].as_array().unwrap();
    assert_ne!(c2[0], c2[1]);

    let o = fsk(&[
        "indep",
        "--model",
        &model("coins.json"),
        "U1",
        "XOR",
        "--witness",
    ]);
    let text = stdout(&o);
    assert!(
        text.starts_with("structurally dependent\nwitness: "),
        "{text}"
    );
    assert!(text.contains("  c2: "));
}

#[test]
fn witness_is_reproducible() {
    let args = [
        "indep",
        "--model",
        &model("coins.json"),
        "U1",
        "XOR",
        "--witness",
        "--seed",
        "9",
    ];
    assert_eq!(stdout(&fsk(&args)), stdout(&fsk(&args)));
}

#[test]
fn before_and_strict() {
    let m = model("coins.json");
    let o = fsk(&["before", "--model", &m, "U1", "XOR"]);
    assert_eq!(
        (o.status.code(), stdout(&o).as_str()),
        (Some(0), "structurally before\n")
    );
    let o = fsk(&["before", "--model", &m, "XOR", "U1"]);
    assert_eq!(o.status.code(), Some(1));
    let o = fsk(&["before", "--model", &m, "U1", "U1", "--strict"]);
    assert_eq!(
        (o.status.code(), stdout(&o).as_str()),
        (Some(1), "not strictly before\n")
    );
}

#[test]
fn dsep_collider() {
    let m = model("collider.json");
    let o = fsk(&["dsep", "--model", &m, "a", "b"]);
    assert_eq!(
        (o.status.code(), stdout(&o).as_str()),
        (Some(0), "d-separated\n")
    );
    let o = fsk(&["dsep", "--model", &m, "a", "b", "--given", "c"]);
    assert_eq!(
        (o.status.code(), stdout(&o).as_str()),
        (Some(1), "not d-separated\n")
    );
    let o = fsk(&["dsep", "--model", &m, "a", "x"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn from_dag_pair() {
    let o = fsk(&["from-dag", "--model", &model("pair-cpt.json")]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let labels: Vec<&str> = v["space"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["label"].as_str().unwrap())
        .collect();
    assert_eq!(labels, ["v1()", "v2(v1=0)", "v2(v1=1)"]);
    // v2 reads the factor selected by v1: points run v1() fastest
    assert_eq!(
        v["variables"][1]["table"],
        serde_json::json!([0, 0, 1, 0, 0, 1, 1, 1])
    );
    assert_eq!(
        v["distributions"][0]["factors"],
        serde_json::json!([["1/3", "2/3"], ["1/2", "1/2"], ["1/4", "3/4"]])
    );
    assert_eq!(
        stdout(&fsk(&["from-dag", "--model", &model("pair-cpt.json")])),
        text
    );
}

#[test]
fn from_dag_writes_file_that_reparses() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("chain-fsm.json");
    let out = out.to_str().unwrap();
    let o = fsk(&["from-dag", "--model", &model("chain.json"), "-o", out]);
    assert_eq!(o.status.code(), Some(0));
    let o = fsk(&["indep", "--model", out, "a", "c", "--given", "b"]);
    assert_eq!(stdout(&o), "structurally independent\n");
    let o = fsk(&["verify", "dsep", "--model", out]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn verify_suites() {
    let o = fsk(&["verify", "axioms", "--random", "3x2x2", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("violations: 0\n"));

    let o = fsk(&["verify", "soundness", "--model", &model("coins.json")]);
    assert_eq!(o.status.code(), Some(0));

    let o = fsk(&[
        "verify",
        "completeness",
        "--model",
        &model("coins.json"),
        "--json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["notes"]["witnesses"].as_u64().unwrap() > 0);
    assert_eq!(
        v["notes"]["witnesses"],
        v["notes"]["structurally-dependent"]
    );

    let o = fsk(&["verify", "tau", "--random", "2x3x2", "--trials", "10"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn intersection_failures_are_reported_not_violations() {
    let o = fsk(&["verify", "axioms", "--model", &model("mean.json")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("intersection-failures: "));
}

#[test]
fn counterexamples_rerun() {
    // completeness with no trials cannot find witnesses
    let o = fsk(&[
        "verify",
        "completeness",
        "--model",
        &model("coins.json"),
        "--trials",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    let start = text.find("\n{\n").expect("a model is printed") + 1;
    let end = start + text[start..].find("\n}\n").unwrap() + 3;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cx.json");
    std::fs::write(&path, &text[start..end]).unwrap();
    let path = path.to_str().unwrap();
    let o = fsk(&["verify", "completeness", "--model", path, "--trials", "0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_and_model_errors() {
    assert_eq!(fsk(&["bogus"]).status.code(), Some(2));
    assert_eq!(
        fsk(&["verify", "nope", "--random", "2"]).status.code(),
        Some(2)
    );
    assert_eq!(
        fsk(&["history", "--model", "/nonexistent.json", "X"])
            .status
            .code(),
        Some(2)
    );
    let o = fsk(&["history", "--model", &model("coins.json"), "Q"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Q"));
    assert_eq!(fsk(&["--help"]).status.code(), Some(0));
}

#[test]
fn capacity_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("big.json");
    let space: Vec<String> = (0..30)
        .map(|i| format!(r#"{{"label": "f{i}", "card": 2}}"#))
        .collect();
    std::fs::write(&path, format!(r#"{{"space": [{}]}}"#, space.join(", "))).unwrap();
    let o = fsk(&["history", "--model", path.to_str().unwrap(), "f0"]);
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn cpt_row_errors_name_the_row() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"dag": {"nodes": [
            {"name": "a", "card": 2, "cpt": [["1/2", "1/2"]]},
            {"name": "b", "card": 2, "cpt": [["1/2", "1/2"], ["1/2", "2/5"]]}],
          "edges": [["a", "b"]]}}"#,
    )
    .unwrap();
    let o = fsk(&["from-dag", "--model", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("cpt[1]") && err.contains("9/10"), "{err}");
}

#[test]
fn golden_models_are_canonical() {
    for entry in std::fs::read_dir(model("")).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        let o = fsk(&["fmt", "--model", path.to_str().unwrap()]);
        assert_eq!(stdout(&o), text, "{}", path.display());
    }
}
