//! End-to-end tests of the `lfd` binary: exit codes, golden outputs, seeded
//! reproducibility and document round-trips.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn lfd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lfd"))
        .args(args)
        .env_remove("LFD_SEED")
        .output()
        .expect("binary runs")
}

fn lfd_with_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lfd"))
        .args(args)
        .env_remove("LFD_SEED")
        .env(key, value)
        .output()
        .expect("binary runs")
}

fn stdout_json(output: &Output) -> Value {
    serde_json::from_slice(&output.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&output.stdout)
        )
    })
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

#[test]
fn solve_finds_the_weather_policy() {
    let out = lfd(&["solve", fixture("weather_batch.json").to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0);
    let payload = stdout_json(&out);
    assert_eq!(payload["result"], "policy");
    assert_eq!(payload["t_used"], 4);
    let transitions = payload["policy"]["transitions"].as_array().unwrap();
    assert_eq!(transitions.len(), 4);
    assert_eq!(transitions[0]["trigger"][0], "f1");
    assert_eq!(transitions[0]["action"], "a1");
    assert!(payload["stats"]["candidates"].as_u64().unwrap() > 0);
}

#[test]
fn solve_reports_bottom_with_exit_one() {
    let out = lfd(&["solve", fixture("weather_contradictory.json").to_str().unwrap()]);
    assert_eq!(exit_code(&out), 1);
    assert_eq!(stdout_json(&out)["result"], "bottom");
}

#[test]
fn solve_strategies_and_jobs_agree_via_cli() {
    let path = fixture("weather_batch.json");
    let path = path.to_str().unwrap();
    let a = lfd(&["solve", path, "--strategy", "reference", "--jobs", "1"]);
    let b = lfd(&["solve", path, "--strategy", "backtracking", "--jobs", "4"]);
    assert_eq!(exit_code(&a), 0);
    assert_eq!(exit_code(&b), 0);
    assert_eq!(stdout_json(&a)["policy"], stdout_json(&b)["policy"]);
}

#[test]
fn solve_minimize_t_reports_the_smallest_budget() {
    let out = lfd(&[
        "solve",
        fixture("weather_batch.json").to_str().unwrap(),
        "--minimize-t",
    ]);
    assert_eq!(exit_code(&out), 0);
    let payload = stdout_json(&out);
    assert_eq!(payload["t_used"], 4);
    assert_eq!(payload["policy"]["transitions"].as_array().unwrap().len(), 4);
}

#[test]
fn solve_rejects_malformed_input_with_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{ not json").unwrap();
    let out = lfd(&["solve", path.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
    assert!(!out.stderr.is_empty());

    let path2 = dir.path().join("unknown_symbol.json");
    std::fs::write(
        &path2,
        r#"{"features":["f1"],"actions":["a1"],"problem":"batch",
            "demonstrations":[{"type":"pos","steps":[{"state":["f9"],"action":"a1"}]}],
            "limits":{"t":1,"f_t":1}}"#,
    )
    .unwrap();
    let out = lfd(&["solve", path2.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn check_validity_of_the_weather_policy() {
    let out = lfd(&[
        "check",
        fixture("weather_check_validity.json").to_str().unwrap(),
        "--what",
        "validity",
    ]);
    assert_eq!(exit_code(&out), 0);
    assert_eq!(stdout_json(&out)["result"], true);
}

#[test]
fn check_consistency_of_the_weather_policy() {
    let out = lfd(&[
        "check",
        fixture("weather_check_validity.json").to_str().unwrap(),
        "--what",
        "consistency",
    ]);
    assert_eq!(exit_code(&out), 0);
    assert_eq!(stdout_json(&out)["result"], true);
}

#[test]
fn check_policy_consistency_is_false_for_the_swapped_pair() {
    let out = lfd(&[
        "check",
        fixture("weather_check_modulo.json").to_str().unwrap(),
        "--what",
        "policy-consistency",
    ]);
    assert_eq!(exit_code(&out), 1);
    assert_eq!(stdout_json(&out)["result"], false);
}

#[test]
fn check_derivability_reports_the_distance() {
    let out = lfd(&[
        "check",
        fixture("weather_check_derivability.json").to_str().unwrap(),
        "--what",
        "derivability",
    ]);
    assert_eq!(exit_code(&out), 0);
    let payload = stdout_json(&out);
    assert_eq!(payload["result"], true);
    assert_eq!(payload["distance"], 3);
}

#[test]
fn reduce_emits_one_demo_per_vertex() {
    let out = lfd(&[
        "reduce",
        fixture("k3.json").to_str().unwrap(),
        "--lemma",
        "bat",
        "--k",
        "1",
    ]);
    assert_eq!(exit_code(&out), 0);
    let payload = stdout_json(&out);
    assert_eq!(payload["problem"], "batch");
    assert_eq!(payload["demonstrations"].as_array().unwrap().len(), 3);
    assert_eq!(payload["limits"]["t"], 1);
    assert_eq!(payload["limits"]["f_t"], 1);
}

#[test]
fn reduce_path_states_follow_the_neighborhoods() {
    let out = lfd(&[
        "reduce",
        fixture("p3.json").to_str().unwrap(),
        "--lemma",
        "bat",
        "--k",
        "1",
    ]);
    assert_eq!(exit_code(&out), 0);
    let payload = stdout_json(&out);
    let states: Vec<Vec<String>> = payload["demonstrations"]
        .as_array()
        .unwrap()
        .iter()
        .map(|d| {
            d["steps"][0]["state"]
                .as_array()
                .unwrap()
                .iter()
                .map(|s| s.as_str().unwrap().to_string())
                .collect()
        })
        .collect();
    assert_eq!(
        states,
        vec![
            vec!["f1".to_string(), "f2".to_string()],
            vec!["f1".to_string(), "f2".to_string(), "f3".to_string()],
            vec!["f2".to_string(), "f3".to_string()],
        ]
    );
}

#[test]
fn reduce_rejects_k_zero() {
    let out = lfd(&[
        "reduce",
        fixture("k3.json").to_str().unwrap(),
        "--lemma",
        "bat",
        "--k",
        "0",
    ]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn reduced_instances_solve_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    for lemma in ["bat", "inchist-pos", "inchist-neg", "incnohist-pos", "incnohist-neg"] {
        let reduced = lfd(&[
            "reduce",
            fixture("k3.json").to_str().unwrap(),
            "--lemma",
            lemma,
            "--k",
            "1",
        ]);
        assert_eq!(exit_code(&reduced), 0, "{lemma}");
        let path = dir.path().join(format!("{lemma}.json"));
        std::fs::write(&path, &reduced.stdout).unwrap();
        let solved = lfd(&["solve", path.to_str().unwrap()]);
        assert_eq!(exit_code(&solved), 0, "{lemma}: triangle with k=1 is solvable");

        // the 4-cycle needs two dominating vertices, so k=1 must fail
        let reduced = lfd(&[
            "reduce",
            fixture("c4.json").to_str().unwrap(),
            "--lemma",
            lemma,
            "--k",
            "1",
        ]);
        let path = dir.path().join(format!("c4-{lemma}.json"));
        std::fs::write(&path, &reduced.stdout).unwrap();
        let solved = lfd(&["solve", path.to_str().unwrap()]);
        assert_eq!(exit_code(&solved), 1, "{lemma}");
    }
}

#[test]
fn gen_grid_is_a_path_and_byte_stable() {
    let args = [
        "gen", "--model", "grid3", "--rows", "1", "--cols", "3", "--keep-prob", "1.0",
    ];
    let a = lfd(&args);
    assert_eq!(exit_code(&a), 0);
    let payload = stdout_json(&a);
    assert_eq!(payload["n"], 3);
    assert_eq!(payload["edges"], serde_json::json!([[0, 1], [1, 2]]));
    let b = lfd(&args);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn gen_gnp_is_seed_reproducible() {
    let args = ["gen", "--model", "gnp", "--n", "6", "--edge-prob", "0.5", "--seed", "11"];
    let a = lfd(&args);
    let b = lfd(&args);
    assert_eq!(exit_code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let other = lfd(&["gen", "--model", "gnp", "--n", "6", "--edge-prob", "0.5", "--seed", "12"]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn gen_seed_comes_from_the_environment() {
    let args = ["gen", "--model", "gnp", "--n", "6", "--edge-prob", "0.5"];
    let via_env = lfd_with_env(&args, "LFD_SEED", "11");
    let via_flag = lfd(&["gen", "--model", "gnp", "--n", "6", "--edge-prob", "0.5", "--seed", "11"]);
    assert_eq!(via_env.stdout, via_flag.stdout);
}

#[test]
fn gen_rejects_bad_dimensions() {
    let out = lfd(&["gen", "--model", "grid3", "--rows", "0", "--cols", "3", "--keep-prob", "1.0"]);
    assert_eq!(exit_code(&out), 2);
    let out = lfd(&["gen", "--model", "gnp", "--n", "5", "--edge-prob", "1.5"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn map_renders_the_worked_example_grid() {
    let results = fixture("abcd_results.json");
    let args = [
        "map",
        results.to_str().unwrap(),
        "--rows",
        "A,B",
        "--cols",
        "C,D",
    ];
    let out = lfd(&args);
    assert_eq!(exit_code(&out), 0);
    let expected = "\
| | -- | C | D | C,D |
| --- | --- | --- | --- | --- |
| -- | NPh | X | X | X |
| A | X | X | X | X |
| B | X | X | ??? | ??? |
| A,B | \u{221a} | \u{221a} | \u{221a} | \u{221a} |
";
    assert_eq!(String::from_utf8_lossy(&out.stdout), expected);
    let again = lfd(&args);
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn map_default_split_matches_the_explicit_one() {
    let explicit = lfd(&[
        "map",
        fixture("lfdbat_results.json").to_str().unwrap(),
        "--rows",
        "t,f_t,F,A",
        "--cols",
        "nd,ld,feap",
    ]);
    let default = lfd(&["map", fixture("lfdbat_results.json").to_str().unwrap()]);
    assert_eq!(exit_code(&explicit), 0);
    assert_eq!(explicit.stdout, default.stdout);
}

#[test]
fn map_batch_table_golden_rendering() {
    let out = lfd(&["map", fixture("lfdbat_results.json").to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0);
    let expected = "\
| | -- | nd | ld | feap | nd,ld | nd,feap | ld,feap | nd,ld,feap |
| --- | --- | --- | --- | --- | --- | --- | --- | --- |
| -- | NPh | X | X | X | ??? | X | X | ??? |
| t | X | X | X | ??? | ??? | ??? | ??? | ??? |
| f_t | X | X | X | X | ??? | X | X | ??? |
| F | ??? | ??? | ??? | ??? | ??? | ??? | ??? | ??? |
| A | X | X | X | X | ??? | X | X | \u{221a} |
| t,f_t | X | X | X | ??? | ??? | ??? | ??? | ??? |
| t,F | ??? | ??? | ??? | ??? | ??? | ??? | ??? | ??? |
| t,A | X | X | X | ??? | ??? | ??? | ??? | \u{221a} |
| f_t,F | ??? | ??? | ??? | ??? | ??? | ??? | ??? | ??? |
| f_t,A | X | X | X | X | ??? | X | X | \u{221a} |
| F,A | \u{221a} | \u{221a} | \u{221a} | \u{221a} | \u{221a} | \u{221a} | \u{221a} | \u{221a} |
| t,f_t,F | ??? | ??? | ??? | ??? | ??? | ??? | ??? | ??? |
| t,f_t,A | X | X | X | ??? | ??? | ??? | ??? | \u{221a} |
| t,F,A | \u{221a} | \u{221a} | \u{221a} | \u{221a} | \u{221a} | \u{221a} | \u{221a} | \u{221a} |
| f_t,F,A | \u{221a} | \u{221a} | \u{221a} | \u{221a} | \u{221a} | \u{221a} | \u{221a} | \u{221a} |
| t,f_t,F,A | \u{221a} | \u{221a} | \u{221a} | \u{221a} | \u{221a} | \u{221a} | \u{221a} | \u{221a} |
";
    assert_eq!(String::from_utf8_lossy(&out.stdout), expected);
}

#[test]
fn map_json_and_csv_formats_render() {
    let json_out = lfd(&[
        "map",
        fixture("abcd_results.json").to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert_eq!(exit_code(&json_out), 0);
    let payload = stdout_json(&json_out);
    assert_eq!(payload["cells"]["A"]["status"], "intractable");
    assert_eq!(payload["np_hard"][0], "NPh");

    let csv_out = lfd(&[
        "map",
        fixture("abcd_results.json").to_str().unwrap(),
        "--rows",
        "A,B",
        "--cols",
        "C,D",
        "--format",
        "csv",
    ]);
    assert!(String::from_utf8_lossy(&csv_out.stdout).starts_with("\"\",\"--\",\"C\",\"D\",\"C,D\""));
}

#[test]
fn map_conflict_exits_three_with_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("conflict.json");
    std::fs::write(
        &path,
        r#"{"universe":["A","B"],"results":[
            {"kind":"tractable","label":"T","params":{"A":"@"}},
            {"kind":"intractable","label":"X","conjecture":"P!=NP","params":{"A":"@","B":"@"}}
        ]}"#,
    )
    .unwrap();
    let out = lfd(&["map", path.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 3);
    let payload = stdout_json(&out);
    let conflicts = payload["conflicts"].as_array().unwrap();
    assert_eq!(conflicts.len(), 2);
    assert_eq!(conflicts[0]["params"], serde_json::json!(["A"]));
    assert_eq!(conflicts[0]["provenance"], serde_json::json!(["T", "X"]));
}

#[test]
fn advise_reads_off_the_tractable_cell() {
    let out = lfd(&[
        "advise",
        fixture("weather_batch.json").to_str().unwrap(),
        fixture("lfdbat_results.json").to_str().unwrap(),
        "--thresholds",
        "F=5,A=5",
    ]);
    assert_eq!(exit_code(&out), 0);
    let payload = stdout_json(&out);
    assert_eq!(payload["status"], "tractable");
    assert_eq!(payload["provenance"], serde_json::json!(["J"]));
    assert_eq!(payload["small"], serde_json::json!(["F", "A"]));
}

#[test]
fn advise_reports_intractable_small_sets_with_the_conjecture() {
    let out = lfd(&[
        "advise",
        fixture("weather_batch.json").to_str().unwrap(),
        fixture("lfdbat_results.json").to_str().unwrap(),
        "--thresholds",
        "A=4,f_t=1",
    ]);
    assert_eq!(exit_code(&out), 0);
    let payload = stdout_json(&out);
    assert_eq!(payload["status"], "intractable");
    assert_eq!(payload["conjecture"], "P!=NP");
}

#[test]
fn advise_notes_classical_hardness_when_nothing_is_small() {
    let out = lfd(&[
        "advise",
        fixture("weather_batch.json").to_str().unwrap(),
        fixture("lfdbat_results.json").to_str().unwrap(),
        "--thresholds",
        "F=1",
    ]);
    assert_eq!(exit_code(&out), 0);
    let payload = stdout_json(&out);
    assert_eq!(payload["status"], "unknown");
    assert_eq!(payload["np_hard_note"], true);
}

#[test]
fn canonical_documents_round_trip_byte_identically() {
    use lfd_cli::commands::canonicalize_instance;
    use lfd_cli::doc::{to_canonical_json, InstanceDocument};
    for name in ["weather_batch.json", "weather_contradictory.json"] {
        let text = std::fs::read_to_string(fixture(name)).unwrap();
        let doc: InstanceDocument = serde_json::from_str(&text).unwrap();
        let canonical = to_canonical_json(&canonicalize_instance(&doc).unwrap());
        let reparsed: InstanceDocument = serde_json::from_str(&canonical).unwrap();
        let twice = to_canonical_json(&canonicalize_instance(&reparsed).unwrap());
        assert_eq!(canonical, twice, "{name}");
    }
}

#[test]
fn reduce_output_is_already_canonical() {
    use lfd_cli::commands::canonicalize_instance;
    use lfd_cli::doc::{to_canonical_json, InstanceDocument};
    let out = lfd(&[
        "reduce",
        fixture("p3.json").to_str().unwrap(),
        "--lemma",
        "inchist-pos",
        "--k",
        "2",
        "--seed",
        "5",
    ]);
    assert_eq!(exit_code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let doc: InstanceDocument = serde_json::from_str(&text).unwrap();
    let canonical = to_canonical_json(&canonicalize_instance(&doc).unwrap());
    assert_eq!(text, canonical);
}
