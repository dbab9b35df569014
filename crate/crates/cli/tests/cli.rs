use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scripthmm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_is_reproducible() {
    let a = run(&["generate", "--n", "30", "--seed", "4"]);
    let b = run(&["generate", "--n", "30", "--seed", "4"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(
        stdout(&a).lines().filter(|l| !l.trim().is_empty()).count(),
        30
    );
}

#[test]
fn train_then_inspect() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.txt");
    let model = dir.path().join("model.txt");
    let rules = dir.path().join("rules.txt");
    assert!(run(&[
        "generate",
        "--script",
        "chain:hear,walk,open",
        "--null",
        "0.1",
        "--n",
        "40",
        "--output",
        path(&corpus)
    ])
    .status
    .success());
    let t = run(&[
        "train",
        "--corpus",
        path(&corpus),
        "--model",
        path(&model),
        "--constraints",
        path(&rules),
        "--r",
        "10",
    ]);
    assert!(t.status.success(), "{}", String::from_utf8_lossy(&t.stderr));
    assert!(rules.exists());
    let i = run(&["inspect", "--model", path(&model)]);
    assert!(i.status.success());
    let text = stdout(&i);
    for word in ["hear", "walk", "open", "state", "->"] {
        assert!(text.contains(word), "{text}");
    }
}

#[test]
fn evaluate_prints_a_table_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.txt");
    let rows = dir.path().join("rows.tsv");
    assert!(run(&[
        "generate",
        "--n",
        "40",
        "--seed",
        "2",
        "--output",
        path(&corpus)
    ])
    .status
    .success());
    let e = run(&[
        "evaluate",
        "--corpus",
        path(&corpus),
        "--r",
        "5,10",
        "--method",
        "conditional",
        "--method",
        "frequency",
        "--rows",
        path(&rows),
    ]);
    assert!(e.status.success(), "{}", String::from_utf8_lossy(&e.stderr));
    let table = stdout(&e);
    let header = table.lines().next().unwrap();
    assert!(header.contains("r=5") && header.contains("r=10"), "{table}");
    assert!(table.contains("conditional") && table.contains("frequency"));
    let tsv = std::fs::read_to_string(&rows).unwrap();
    assert!(tsv.starts_with("domain\tmethod\tr\tcorrect\ttotal\taccuracy"));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.txt");
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "method = frequency\nr = 3\n").unwrap();
    assert!(run(&["generate", "--n", "20", "--output", path(&corpus)])
        .status
        .success());
    let e = run(&[
        "evaluate",
        "--config",
        path(&cfg),
        "--corpus",
        path(&corpus),
        "--r",
        "7",
    ]);
    assert!(e.status.success());
    let table = stdout(&e);
    assert!(table.contains("r=7") && !table.contains("r=3"), "{table}");
    assert!(table.contains("frequency") && !table.contains("conditional"));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["train", "--bogus"]).status.code(), Some(1));
    assert_eq!(run(&[]).status.code(), Some(1));
    let missing = run(&["inspect", "--model", "/nonexistent/model.txt"]);
    assert_eq!(missing.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.txt");
    assert!(run(&["generate", "--n", "20", "--output", path(&corpus)])
        .status
        .success());
    let bad = run(&["evaluate", "--corpus", path(&corpus), "--method", "hmm"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("sem-hmm-approx"));

    let junk = dir.path().join("junk.txt");
    std::fs::write(&junk, "< a >\n< b\n").unwrap();
    assert_eq!(
        run(&["evaluate", "--corpus", path(&junk)]).status.code(),
        Some(2)
    );
}

#[test]
fn extract_writes_a_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("raw.txt");
    std::fs::write(
        &raw,
        "I heard the doorbell.\nI walked to the door.\nI opened the door.\n\nHeard the bell ring.\nOpened the door.\n",
    )
    .unwrap();
    let o = run(&["extract", "--input", path(&raw)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(
        text.lines().filter(|l| !l.trim().is_empty()).count(),
        2,
        "{text}"
    );
    assert!(text.contains("open"));
}
