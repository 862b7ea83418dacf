//! End-to-end tests of the `ontodex` binary: every subcommand, the
//! determinism guarantees, and the error paths users actually hit.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn ontodex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ontodex"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("stdout is UTF-8")
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("stderr is UTF-8")
}

/// Runs build-index on the bundled fixtures, writing the index to `dir`.
fn build_fixture_index(dir: &Path, name: &str) -> PathBuf {
    let index = dir.join(name);
    let output = ontodex(&[
        "build-index",
        "--ontology",
        fixture("ontology.json").to_str().unwrap(),
        "--corpus",
        fixture("corpus.jsonl").to_str().unwrap(),
        "--categories",
        fixture("categories.json").to_str().unwrap(),
        "--index",
        index.to_str().unwrap(),
    ]);
    assert!(
        output.status.success(),
        "build-index failed: {}",
        stderr(&output)
    );
    index
}

fn ranked_ids(output: &Output) -> Vec<String> {
    stdout(output)
        .lines()
        .map(|line| {
            let record: serde_json::Value = serde_json::from_str(line).expect("JSONL output");
            record["doc_id"].as_str().expect("doc_id").to_string()
        })
        .collect()
}

#[test]
fn build_index_is_deterministic_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let first = build_fixture_index(dir.path(), "first.idx");
    let second = build_fixture_index(dir.path(), "second.idx");
    assert_eq!(
        std::fs::read(&first).unwrap(),
        std::fs::read(&second).unwrap(),
        "two builds of the same corpus differ"
    );
}

#[test]
fn build_index_ignores_document_order() {
    let dir = tempfile::tempdir().unwrap();
    let reference = build_fixture_index(dir.path(), "forward.idx");

    let corpus = std::fs::read_to_string(fixture("corpus.jsonl")).unwrap();
    let reversed: Vec<&str> = corpus.lines().rev().collect();
    let reversed_path = dir.path().join("reversed.jsonl");
    std::fs::write(&reversed_path, reversed.join("\n")).unwrap();

    let index = dir.path().join("reversed.idx");
    let output = ontodex(&[
        "build-index",
        "--ontology",
        fixture("ontology.json").to_str().unwrap(),
        "--corpus",
        reversed_path.to_str().unwrap(),
        "--categories",
        fixture("categories.json").to_str().unwrap(),
        "--index",
        index.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", stderr(&output));
    assert_eq!(
        std::fs::read(&reference).unwrap(),
        std::fs::read(&index).unwrap(),
        "document order leaked into the index bytes"
    );
}

#[test]
fn rank_orders_documents_by_relevance() {
    let dir = tempfile::tempdir().unwrap();
    let index = build_fixture_index(dir.path(), "rank.idx");

    let graph = ontodex(&[
        "rank",
        "--ontology",
        fixture("ontology.json").to_str().unwrap(),
        "--index",
        index.to_str().unwrap(),
        "--context",
        fixture("context.json").to_str().unwrap(),
        "--method",
        "graph",
    ]);
    assert!(graph.status.success(), "{}", stderr(&graph));
    assert_eq!(ranked_ids(&graph), ["d1", "d4", "d3", "d2", "d5"]);

    let weight = ontodex(&[
        "rank",
        "--ontology",
        fixture("ontology.json").to_str().unwrap(),
        "--index",
        index.to_str().unwrap(),
        "--context",
        fixture("context.json").to_str().unwrap(),
        "--method",
        "weight",
    ]);
    assert!(weight.status.success(), "{}", stderr(&weight));
    assert_eq!(ranked_ids(&weight), ["d1", "d3", "d4", "d2", "d5"]);

    let first: serde_json::Value =
        serde_json::from_str(stdout(&graph).lines().next().unwrap()).unwrap();
    assert_eq!(first["s"], 1.0);
    assert_eq!(first["index_sim"], 0.742857142857);
    assert_eq!(first["relevance"], 0.742857142857);
}

#[test]
fn rank_renders_a_table() {
    let dir = tempfile::tempdir().unwrap();
    let index = build_fixture_index(dir.path(), "table.idx");
    let output = ontodex(&[
        "rank",
        "--ontology",
        fixture("ontology.json").to_str().unwrap(),
        "--index",
        index.to_str().unwrap(),
        "--context",
        fixture("context.json").to_str().unwrap(),
        "--method",
        "graph",
        "--format",
        "table",
    ]);
    assert!(output.status.success(), "{}", stderr(&output));
    let text = stdout(&output);
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("doc_id"), "unexpected header {header:?}");
    assert_eq!(lines.count(), 5, "one row per document");
}

#[test]
fn rank_warns_when_index_and_ontology_diverge() {
    let dir = tempfile::tempdir().unwrap();
    let index = build_fixture_index(dir.path(), "stale.idx");

    let mut ontology: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(fixture("ontology.json")).unwrap()).unwrap();
    ontology["classes"][0]["description"] = "Edited after indexing.".into();
    let edited = dir.path().join("edited-ontology.json");
    std::fs::write(&edited, serde_json::to_string(&ontology).unwrap()).unwrap();

    let output = ontodex(&[
        "rank",
        "--ontology",
        edited.to_str().unwrap(),
        "--index",
        index.to_str().unwrap(),
        "--context",
        fixture("context.json").to_str().unwrap(),
        "--method",
        "graph",
    ]);
    assert!(
        output.status.success(),
        "a stale index should warn, not fail"
    );
    assert!(
        stderr(&output).contains("different ontology"),
        "missing staleness warning: {}",
        stderr(&output)
    );
    assert_eq!(ranked_ids(&output).len(), 5);
}

#[test]
fn select_fragment_spans_the_seeds() {
    let output = ontodex(&[
        "select-fragment",
        "--ontology",
        fixture("ontology.json").to_str().unwrap(),
        "--classes",
        "jazz",
        "--classes",
        "sculpture",
    ]);
    assert!(output.status.success(), "{}", stderr(&output));
    let fragment: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    let classes: Vec<&str> = fragment["classes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c.as_str().unwrap())
        .collect();
    assert_eq!(classes, ["art", "jazz", "music", "sculpture"]);
    assert_eq!(fragment["relations"].as_array().unwrap().len(), 3);
}

#[test]
fn select_fragment_warns_about_unreachable_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let ontology = dir.path().join("split.json");
    std::fs::write(
        &ontology,
        r#"{"classes":[{"name":"a","description":"","attributes":[]},
                       {"name":"b","description":"","attributes":[]},
                       {"name":"c","description":"","attributes":[]}],
            "relations":[{"from":"a","to":"b","kind":"associative"}]}"#,
    )
    .unwrap();
    let output = ontodex(&[
        "select-fragment",
        "--ontology",
        ontology.to_str().unwrap(),
        "--classes",
        "a",
        "--classes",
        "c",
    ]);
    assert!(output.status.success(), "unreachable pairs warn, not fail");
    assert!(
        stderr(&output).contains("no path between 'a' and 'c'"),
        "missing warning: {}",
        stderr(&output)
    );
    let fragment: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert_eq!(
        fragment["classes"].as_array().unwrap().len(),
        2,
        "both seeds stay in the fragment"
    );
}

#[test]
fn inspect_summarizes_and_expands_records() {
    let dir = tempfile::tempdir().unwrap();
    let index = build_fixture_index(dir.path(), "inspect.idx");

    let summary = ontodex(&["inspect", "--index", index.to_str().unwrap()]);
    assert!(summary.status.success());
    let text = stdout(&summary);
    assert!(
        text.contains("records: 5"),
        "summary missing record count: {text}"
    );
    assert!(
        text.contains("sim quartiles"),
        "summary missing quartiles: {text}"
    );

    let detail = ontodex(&[
        "inspect",
        "--index",
        index.to_str().unwrap(),
        "--doc-id",
        "d1",
    ]);
    assert!(detail.status.success());
    let text = stdout(&detail);
    assert!(text.contains("doc_id: d1"));
    assert!(
        text.contains("jazz"),
        "detail omits the matched element: {text}"
    );

    let missing = ontodex(&[
        "inspect",
        "--index",
        index.to_str().unwrap(),
        "--doc-id",
        "nope",
    ]);
    assert!(!missing.status.success(), "unknown ids must fail");
    assert!(
        stderr(&missing).contains("nope"),
        "error does not name the id: {}",
        stderr(&missing)
    );
}

#[test]
fn synonyms_extend_the_match_vocabulary() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.jsonl");
    std::fs::write(
        &corpus,
        r#"{"id":"x1","title":"Instrument","categories":[],"text":"An instrument makes musical sounds."}"#,
    )
    .unwrap();

    let run = |synonyms: bool| {
        let index = dir
            .path()
            .join(if synonyms { "with.idx" } else { "without.idx" });
        let mut args = vec![
            "build-index".to_string(),
            format!("--ontology={}", fixture("ontology.json").display()),
            format!("--corpus={}", corpus.display()),
            format!("--categories={}", fixture("categories.json").display()),
            format!("--index={}", index.display()),
        ];
        if synonyms {
            args.push(format!("--synonyms={}", fixture("synonyms.json").display()));
        }
        let output = Command::new(env!("CARGO_BIN_EXE_ontodex"))
            .args(&args)
            .output()
            .expect("binary runs");
        assert!(output.status.success(), "{}", stderr(&output));
        std::fs::read_to_string(index).unwrap()
    };

    let without = run(false);
    let record = without.lines().nth(1).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(record).unwrap();
    assert_eq!(
        parsed["matches"].as_array().unwrap().len(),
        0,
        "no match without synonyms"
    );

    let with = run(true);
    let record = with.lines().nth(1).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(record).unwrap();
    let matches = parsed["matches"].as_array().unwrap();
    assert_eq!(matches.len(), 1, "the synonym should produce a match");
    assert_eq!(matches[0]["element"], "musical instrument");
    assert_eq!(matches[0]["matched_name"], "instrument");
    assert_eq!(matches[0]["distance"], 0);
}

#[test]
fn custom_stop_words_change_description_overlap() {
    let dir = tempfile::tempdir().unwrap();
    let default_run = build_fixture_index(dir.path(), "default-stops.idx");

    let index = dir.path().join("custom-stops.idx");
    let output = ontodex(&[
        "build-index",
        "--ontology",
        fixture("ontology.json").to_str().unwrap(),
        "--corpus",
        fixture("corpus.jsonl").to_str().unwrap(),
        "--categories",
        fixture("categories.json").to_str().unwrap(),
        "--stopwords",
        fixture("stopwords.txt").to_str().unwrap(),
        "--index",
        index.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", stderr(&output));
    assert_ne!(
        std::fs::read(&default_run).unwrap(),
        std::fs::read(&index).unwrap(),
        "a different stop-word list must change overlap values"
    );
}

#[test]
fn document_errors_fail_the_build_but_name_the_document() {
    let dir = tempfile::tempdir().unwrap();
    // One class and one category make the candidate bound 1, while the
    // document matches twice: build-index must report the document and
    // exit non-zero, not silently drop it.
    let ontology = dir.path().join("tiny-ontology.json");
    std::fs::write(
        &ontology,
        r#"{"classes":[{"name":"a","description":"","attributes":[]}],"relations":[]}"#,
    )
    .unwrap();
    let categories = dir.path().join("tiny-categories.json");
    std::fs::write(&categories, r#"{"categories":["x"],"edges":[]}"#).unwrap();
    let corpus = dir.path().join("tiny-corpus.jsonl");
    std::fs::write(
        &corpus,
        r#"{"id":"dx","title":"ab","categories":["x"],"text":""}"#,
    )
    .unwrap();

    let index = dir.path().join("tiny.idx");
    let output = ontodex(&[
        "build-index",
        "--ontology",
        ontology.to_str().unwrap(),
        "--corpus",
        corpus.to_str().unwrap(),
        "--categories",
        categories.to_str().unwrap(),
        "--index",
        index.to_str().unwrap(),
    ]);
    assert!(
        !output.status.success(),
        "document errors must fail the build"
    );
    let err = stderr(&output);
    assert!(
        err.contains("'dx'"),
        "error does not name the document: {err}"
    );
}

#[test]
fn flag_and_file_errors_are_named() {
    let out_of_range = ontodex(&[
        "build-index",
        "--ontology",
        fixture("ontology.json").to_str().unwrap(),
        "--corpus",
        fixture("corpus.jsonl").to_str().unwrap(),
        "--categories",
        fixture("categories.json").to_str().unwrap(),
        "--index",
        "/tmp/unused.idx",
        "--k",
        "1.5",
    ]);
    assert!(!out_of_range.status.success());
    assert!(
        stderr(&out_of_range).contains('k'),
        "error does not mention k: {}",
        stderr(&out_of_range)
    );

    let missing = ontodex(&[
        "select-fragment",
        "--ontology",
        "/nonexistent/ontology.json",
        "--classes",
        "music",
    ]);
    assert!(!missing.status.success());
    assert!(
        stderr(&missing).contains("/nonexistent/ontology.json"),
        "error does not name the path: {}",
        stderr(&missing)
    );

    let unknown_class = ontodex(&[
        "select-fragment",
        "--ontology",
        fixture("ontology.json").to_str().unwrap(),
        "--classes",
        "polka",
    ]);
    assert!(!unknown_class.status.success());
    assert!(
        stderr(&unknown_class).contains("polka"),
        "error does not name the class: {}",
        stderr(&unknown_class)
    );
}
