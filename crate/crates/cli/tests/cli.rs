use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn gci(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gci")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let o = gci(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Writes a small labeled synthetic corpus and returns its directory.
fn inputs(root: &Path) -> PathBuf {
    let dir = root.join("in");
    ok(&[
        "--out",
        s(&dir),
        "--seed",
        "5",
        "synth",
        "--scenario",
        "fraud_extortion",
        "--n",
        "600",
        "--groups",
        "a,b",
    ]);
    dir
}

fn pipeline(input: &Path, out: &Path, extra: &[&str]) -> String {
    let (corpus, charges, emb) = (
        input.join("corpus.jsonl"),
        input.join("charges.txt"),
        input.join("embeddings.txt"),
    );
    let mut args = vec!["--out", s(out)];
    args.extend_from_slice(extra);
    args.extend_from_slice(&[
        "pipeline",
        "--corpus",
        s(&corpus),
        "--charges",
        s(&charges),
        "--embeddings",
        s(&emb),
    ]);
    ok(&args)
}

#[test]
fn pipeline_is_deterministic() {
    let t = tempfile::tempdir().unwrap();
    let input = inputs(t.path());
    let (a, b) = (t.path().join("a"), t.path().join("b"));
    let text = pipeline(&input, &a, &["--seed", "7"]);
    assert!(text.contains("accuracy"));
    pipeline(&input, &b, &["--seed", "7"]);
    for name in [
        "factors.json",
        "table.csv",
        "pag.json",
        "dags.json",
        "strengths.json",
        "model.json",
        "predictions.csv",
        "metrics.json",
        "manifest.json",
    ] {
        assert_eq!(
            fs::read(a.join(name)).unwrap(),
            fs::read(b.join(name)).unwrap(),
            "{name}"
        );
    }
    let manifest = fs::read_to_string(a.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"master_seed\": 7"));
}

#[test]
fn stages_match_the_pipeline() {
    let t = tempfile::tempdir().unwrap();
    let input = inputs(t.path());
    let whole = t.path().join("whole");
    pipeline(&input, &whole, &[]);
    let staged = t.path().join("staged");
    let o = s(&staged);
    ok(&[
        "--out",
        o,
        "factors",
        "--corpus",
        s(&input.join("corpus.jsonl")),
        "--charges",
        s(&input.join("charges.txt")),
        "--embeddings",
        s(&input.join("embeddings.txt")),
    ]);
    for stage in ["discover", "sample", "estimate", "train", "predict"] {
        ok(&["--out", o, stage]);
    }
    for name in [
        "pag.json",
        "dags.json",
        "strengths.json",
        "model.json",
        "predictions.csv",
    ] {
        assert_eq!(
            fs::read(whole.join(name)).unwrap(),
            fs::read(staged.join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn config_file_is_honored() {
    let t = tempfile::tempdir().unwrap();
    let input = inputs(t.path());
    let cfg = t.path().join("cfg.json");
    fs::write(&cfg, r#"{"Q": 3, "n_trees": 5}"#).unwrap();
    let out = t.path().join("out");
    pipeline(&input, &out, &["--config", s(&cfg)]);
    let dags = fs::read_to_string(out.join("dags.json")).unwrap();
    assert!(dags.contains("\"Q\": 3"));
    fs::write(&cfg, r#"{"alpha": 2.0}"#).unwrap();
    assert!(!gci(&["--config", s(&cfg), "--out", s(&out), "discover"])
        .status
        .success());
}

#[test]
fn analysis_commands_write_their_reports() {
    let t = tempfile::tempdir().unwrap();
    let input = inputs(t.path());
    let out = t.path().join("out");
    let o = s(&out);
    pipeline(&input, &out, &[]);
    let corpus = s(&input.join("corpus.jsonl")).to_owned();
    let charges = s(&input.join("charges.txt")).to_owned();

    ok(&["--out", o, "chains", "--max-len", "3"]);
    let chains: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("chains.json")).unwrap()).unwrap();
    assert!(!chains.as_array().unwrap().is_empty());

    ok(&[
        "--out",
        o,
        "attention-targets",
        "--corpus",
        &corpus,
        "--charges",
        &charges,
    ]);
    let att: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("attention.json")).unwrap()).unwrap();
    for doc in att.as_array().unwrap() {
        let sum: f64 = doc["targets"]
            .as_array()
            .unwrap()
            .iter()
            .map(|x| x.as_f64().unwrap())
            .sum();
        assert!((sum - 1.0).abs() < 1e-9);
    }

    ok(&[
        "--out",
        o,
        "fairness",
        "--corpus",
        &corpus,
        "--charges",
        &charges,
        "--positive",
        "fraud",
    ]);
    let f: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("fairness.json")).unwrap()).unwrap();
    assert_eq!(f["groups"].as_array().unwrap().len(), 2);

    ok(&["--out", o, "export-dot"]);
    assert!(fs::read_to_string(out.join("pag.dot"))
        .unwrap()
        .starts_with("digraph g {"));
    ok(&["--out", o, "export-dot", "--graph", "dag", "--index", "1", "--annotate"]);
    assert!(out.join("dag_1.dot").is_file());
    assert!(!gci(&["--out", o, "export-dot", "--graph", "dag", "--index", "99"])
        .status
        .success());

    let strengths: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("strengths.json")).unwrap()).unwrap();
    let edge = &strengths["provenance"][0];
    let report = ok(&[
        "--out",
        o,
        "refute",
        "--treatment",
        edge["treatment"].as_str().unwrap(),
        "--outcome",
        edge["outcome"].as_str().unwrap(),
        "--mode",
        "placebo-treatment",
        "--repeats",
        "3",
    ]);
    assert!(report.contains("PlaceboTreatment"));
    assert!(out.join("refutations.json").is_file());
}

#[test]
fn synthetic_tables_feed_discovery() {
    let t = tempfile::tempdir().unwrap();
    let o = t.path().join("collider");
    ok(&["--out", s(&o), "synth", "--scenario", "collider", "--n", "5000"]);
    ok(&["--out", s(&o), "discover"]);
    ok(&["--out", s(&o), "export-dot"]);
    let dot = fs::read_to_string(o.join("pag.dot")).unwrap();
    assert!(
        dot.contains("\"A\" -> \"C\" [dir=both, arrowtail=odot, arrowhead=normal];"),
        "{dot}"
    );
    assert!(!dot.contains("\"A\" -> \"B\""));
    let truth = fs::read_to_string(o.join("truth.json")).unwrap();
    assert!(truth.contains("\"ate\""));
}

#[test]
fn failures_name_the_stage_and_exit_nonzero() {
    let t = tempfile::tempdir().unwrap();
    let o = gci(&["--out", s(t.path()), "estimate"]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("stage estimate failed"), "{err}");
    let o = gci(&["synth", "--scenario", "nope"]);
    assert!(!o.status.success());
}
