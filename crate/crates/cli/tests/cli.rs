use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(name)
}

fn tablint(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tablint")).args(args).output().unwrap()
}

fn tablint_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_tablint"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn records(o: &Output) -> Vec<Value> {
    stdout(o).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

const CLEAN_TABLE: &str = r#"{"page_title":"X","rows":[[{"value":"Name","is_header":true},{"value":"Votes","is_header":true}],[{"value":"Ann Lee","highlighted":true},{"value":"12","highlighted":true}]]}"#;

#[test]
fn parse_round_trips_the_corpus() {
    let corpus = fixture("linearized.txt");
    let o = tablint(&["--format", "plain", "parse", path(&corpus)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), std::fs::read_to_string(&corpus).unwrap());
}

#[test]
fn parse_reports_one_malformed_line() {
    let good = "<page_title> A </page_title> <table> </table>";
    let input = format!("{good}\n<page_title> B </page_title> <table> <cell> x </table>\n{good}\n");
    let o = tablint_stdin(&["parse", "-"], &input);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with("line 2:"), "{err}");
    let out = records(&o);
    assert_eq!(out.len(), 3);
    assert_eq!(out[1]["line"], 2);
}

#[test]
fn lint_exit_codes() {
    let o = tablint(&["lint", path(&fixture("tables.jsonl"))]);
    assert_eq!(o.status.code(), Some(3));
    let reports = records(&o);
    assert_eq!(reports.len(), 9);
    let norton = reports[0]["diagnostics"].as_array().unwrap();
    assert!(norton.iter().any(|d| d["problem"] == "insufficient_input"), "{norton:?}");

    let o = tablint_stdin(&["lint", "-"], CLEAN_TABLE);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn fix_then_refix_makes_no_edits() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.jsonl");
    let o = tablint(&["-o", path(&first), "fix", path(&fixture("tables.jsonl"))]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let fixed: Vec<Value> = std::fs::read_to_string(&first)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(fixed.len(), 9);
    assert!(fixed.iter().any(|r| !r["edits"].as_array().unwrap().is_empty()));
    let tables: String = fixed.iter().map(|r| format!("{}\n", r["table"])).collect();

    let o = tablint_stdin(&["fix", "-"], &tables);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for r in records(&o) {
        assert_eq!(r["edits"].as_array().unwrap().len(), 0, "{r}");
    }
}

#[test]
fn fix_plain_emits_linearizations() {
    let o = tablint(&["--format", "plain", "fix", path(&fixture("tables.jsonl"))]);
    let out = stdout(&o);
    let first = out.lines().next().unwrap();
    for needle in ["Democratic", "90.00", "Sprague Simonds", "7.54"] {
        assert!(first.contains(needle), "{first}");
    }
}

#[test]
fn io_and_config_errors_exit_two() {
    let o = tablint(&["lint", "/nonexistent/tables.jsonl"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/nonexistent/tables.jsonl"));

    let dir = tempfile::tempdir().unwrap();
    let rules = dir.path().join("rules.toml");
    std::fs::write(&rules, "version = 99\n").unwrap();
    let o = tablint(&["--rules", path(&rules), "lint", path(&fixture("tables.jsonl"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!stderr(&o).is_empty());

    let o = tablint_stdin(&["lint", "-"], "{\"rows\": 3}\n");
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn stats_prints_reductions() {
    let o = tablint(&["--format", "plain", "stats", path(&fixture("annotations_210.jsonl"))]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let reduction = out.lines().find(|l| l.starts_with("Error reduction")).unwrap();
    assert!(reduction.contains("62%") && reduction.contains("57%"), "{reduction}");
}

#[test]
fn empty_corpus_stats_has_no_groups() {
    let o = tablint_stdin(&["stats", "-"], "{\"version\": 1, \"encoding\": \"utf-8\"}\n");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = records(&o);
    assert_eq!(out.len(), 1);
    assert_eq!(out[0]["groups"].as_array().unwrap().len(), 0);
}

#[test]
fn stats_rejects_invalid_spans() {
    let corpus = "{\"version\": 1, \"encoding\": \"utf-8\"}\n\
        {\"sample_id\": \"a\", \"model_id\": \"m\", \"phase\": \"before\", \"text\": \"abc\", \
        \"spans\": [{\"start\": 1, \"end\": 9, \"category\": \"WORD\"}], \"omission\": false}\n";
    let o = tablint_stdin(&["stats", "-"], corpus);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains('a'));
}

#[test]
fn problem_type_histogram_matches_recount() {
    let fixture_path = fixture("annotations_40.jsonl");
    let mut recount: BTreeMap<(String, String, String), u64> = BTreeMap::new();
    for line in std::fs::read_to_string(&fixture_path).unwrap().lines().skip(1) {
        let v: Value = serde_json::from_str(line).unwrap();
        let key = (
            v["model_id"].as_str().unwrap().to_string(),
            v["phase"].as_str().unwrap().to_string(),
            v["problem_type"].as_str().unwrap().to_string(),
        );
        *recount.entry(key).or_default() += 1;
    }

    let o = tablint(&["stats", "--group-by", "problem-type", path(&fixture_path)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let summary = &records(&o)[0];
    let mut seen = 0;
    for g in summary["groups"].as_array().unwrap() {
        let problem = g["problem_type"].as_str().unwrap();
        for phase in ["before", "after"] {
            let n = g[phase]["samples"].as_u64().unwrap();
            let label_count = recount
                .iter()
                .filter(|((m, p, label), _)| {
                    m == g["model_id"].as_str().unwrap() && p == phase && label_matches(label, problem)
                })
                .map(|(_, c)| *c)
                .sum::<u64>();
            assert_eq!(n, label_count, "{} {phase} {problem}", g["model_id"]);
            seen += n;
        }
    }
    assert_eq!(seen, recount.values().sum::<u64>());
}

fn label_matches(label: &str, key: &str) -> bool {
    let pairs = [
        ("Single record lacking atomicity", "single_record_non_atomic"),
        ("Multiple records lacking atomicity", "multi_record_non_atomic"),
        ("Complex table type", "complex_table_type"),
        ("Insufficient input", "insufficient_input"),
        ("Longer input", "longer_table"),
        ("ToTTo specific", "politics_symbol_header"),
        ("List of Leader names", "leader_name_list_hazard"),
    ];
    pairs.iter().any(|(l, k)| *l == label && *k == key)
}

#[test]
fn kappa_on_oracle_matrix() {
    let o = tablint(&["kappa", path(&fixture("kappa_oracle.csv"))]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let k = records(&o)[0]["kappa"].as_f64().unwrap();
    assert!((k - 28.0 / 67.0).abs() < 1e-9, "{k}");

    let o = tablint(&["--format", "plain", "kappa", path(&fixture("confusion_items.jsonl"))]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("WORD"), "{out}");
    assert!(out.lines().any(|l| l.starts_with("Fleiss' kappa")), "{out}");
}

#[test]
fn kappa_rejects_ragged_matrix() {
    let o = tablint_stdin(&["kappa", "-"], "3 0\n1 1\n");
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
}

#[test]
fn prompt_wraps_each_record() {
    let corpus = fixture("linearized.txt");
    let lines: Vec<String> = std::fs::read_to_string(&corpus).unwrap().lines().map(String::from).collect();
    let o = tablint(&["--format", "plain", "prompt", "--template", "election_fields", path(&corpus)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let prompts: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(prompts.len(), lines.len());
    for (p, l) in prompts.iter().zip(&lines) {
        assert!(p.starts_with("Given the input table data"));
        assert!(p.ends_with(l.as_str()));
    }

    let o = tablint(&["prompt", "--record", "2", path(&corpus)]);
    let out = records(&o);
    assert_eq!(out.len(), 1);
    assert_eq!(out[0]["line"], 2);
    assert_eq!(out[0]["template"], "generic_summary");

    let o = tablint(&["prompt", "--template", "nope", path(&corpus)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn prompt_uses_rules_templates() {
    let dir = tempfile::tempdir().unwrap();
    let rules = dir.path().join("rules.toml");
    std::fs::write(
        &rules,
        "version = 1\n[[templates]]\nid = \"short\"\nbody = \"Describe: <Linearized table data>\"\n",
    )
    .unwrap();
    let input = "<page_title> A </page_title> <table> </table>\n";
    let o = tablint_stdin(&["--rules", path(&rules), "--format", "plain", "prompt", "--template", "short", "-"], input);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), format!("Describe: {input}"));

    std::fs::write(&rules, "version = 1\n[[templates]]\nid = \"bad\"\nbody = \"no slot\"\n").unwrap();
    let o = tablint_stdin(&["--rules", path(&rules), "prompt", "-"], input);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn output_is_independent_of_worker_count() {
    let tables = fixture("tables.jsonl");
    let corpus = fixture("linearized.txt");
    for args in [
        vec!["fix", path(&tables)],
        vec!["lint", path(&tables)],
        vec!["parse", path(&corpus)],
        vec!["prompt", path(&corpus)],
    ] {
        let one = tablint(&[&["--jobs", "1"][..], &args].concat());
        let four = tablint(&[&["--jobs", "4"][..], &args].concat());
        assert_eq!(one.stdout, four.stdout, "{args:?}");
        assert_eq!(one.status.code(), four.status.code());
    }
}

#[test]
fn size_and_record_overrides() {
    let senate = std::fs::read_to_string(fixture("tables.jsonl")).unwrap().lines().nth(1).unwrap().to_string();
    let rows = |args: &[&str]| {
        let o = tablint_stdin(&[args, &["fix", "-"]].concat(), &senate);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        records(&o)[0].clone()
    };
    assert_eq!(rows(&[])["table"]["rows"].as_array().unwrap().len(), 5);
    assert_eq!(rows(&["--max-records", "0"])["table"]["rows"].as_array().unwrap().len(), 8);

    let rejected = rows(&["--max-rows", "2"]);
    assert_eq!(rejected["rejected"], "Please simplify the tabular data with fewer records");
    assert_eq!(rejected["corrections_made"], false);

    let truncated = rows(&["--max-rows", "2", "--truncate"]);
    assert!(truncated.get("rejected").is_none(), "{truncated}");
    // The limit applies to the input; splitting may add rows afterwards.
    let values: Vec<&str> = truncated["table"]["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r[0]["value"].as_str().unwrap())
        .collect();
    assert_eq!(values, ["State", "Alaska", "Alaska"]);
    assert!(truncated["edits"].as_array().unwrap().iter().any(|e| e["kind"] == "truncate_rows"));

    let o = tablint_stdin(&["--max-rows", "0", "fix", "-"], &senate);
    assert_eq!(o.status.code(), Some(2));
}
