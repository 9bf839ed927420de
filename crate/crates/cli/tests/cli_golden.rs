//! Golden-output tests for every subcommand on a fixed synthetic world.
//!
//! Set `UPDATE_GOLDEN=1` to rewrite the files under `tests/golden/`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_semdecode"))
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn wordnet_fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data/wordnet").join(name)
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("binary runs")
}

fn ok_stdout(dir: &Path, args: &[&str]) -> String {
    let out = run_in(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed with {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn check_golden(name: &str, actual: &str) {
    let path = golden_dir().join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(golden_dir()).unwrap();
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "output differs from {}", path.display());
}

const SYNTH: &[&str] = &["synth", "--out", "world", "--seed", "7", "--snr", "2"];

#[test]
fn full_chain_matches_golden_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    check_golden("synth.txt", &ok_stdout(root, SYNTH));
    let w = root.join("world");
    check_golden("preprocess.txt", &ok_stdout(&w, &["preprocess", "--config", "config.toml"]));
    check_golden("train.txt", &ok_stdout(&w, &["train", "--config", "config.toml"]));
    check_golden("build_index.txt", &ok_stdout(&w, &["build-index", "--config", "config.toml"]));
    check_golden("decode_test.txt", &ok_stdout(&w, &["decode", "--config", "config.toml"]));
    check_golden("decode_train.txt", &ok_stdout(&w, &["decode", "--config", "config.toml", "--split", "train"]));
    check_golden(
        "decode_random.txt",
        &ok_stdout(&w, &["decode", "--config", "config.toml", "--baseline", "random", "--seed", "3"]),
    );
    check_golden("prompts.txt", &ok_stdout(&w, &["prompts", "--config", "config.toml"]));
    check_golden("prompts_test.tsv", &std::fs::read_to_string(w.join("out/prompts_test.tsv")).unwrap());
    check_golden("chart.txt", &ok_stdout(&w, &["chart", "--config", "config.toml"]));
    check_golden("wup_chart.svg", &std::fs::read_to_string(w.join("out/wup_chart.svg")).unwrap());
    check_golden("wup_synthetic.txt", &ok_stdout(&w, &["wup", "c00", "c20", "--config", "config.toml"]));
    check_golden(
        "wup_synthetic.json",
        &ok_stdout(&w, &["wup", "c00", "c05", "--config", "config.toml", "--wup-formula", "paper", "--json"]),
    );
}

#[test]
fn raw_preprocess_matches_config_preprocess() {
    let tmp = tempfile::tempdir().unwrap();
    ok_stdout(tmp.path(), SYNTH);
    let w = tmp.path().join("world");
    let text = ok_stdout(
        &w,
        &["preprocess", "--events", "test_events.tsv", "--runs", "runs/test", "--out", "raw/test.fmx", "--hrf-shift", "1"],
    );
    check_golden("preprocess_raw.txt", &text);
    ok_stdout(&w, &["preprocess", "--config", "config.toml", "--split", "test"]);
    assert_eq!(
        std::fs::read(w.join("raw/test.fmx")).unwrap(),
        std::fs::read(w.join("trials/test.fmx")).unwrap()
    );
}

#[test]
fn wup_on_wordnet_excerpt() {
    let tmp = tempfile::tempdir().unwrap();
    let data = wordnet_fixture("excerpt50.data.noun");
    let data = data.to_str().unwrap();
    let same = ok_stdout(tmp.path(), &["wup", "n01443537", "n01443537", "--wordnet", data]);
    assert_eq!(same, "1.000000\n");
    let by_name = ok_stdout(tmp.path(), &["wup", "goldfish.n.01", "dog.n.01", "--wordnet", data]);
    let by_id = ok_stdout(tmp.path(), &["wup", "n01443537", "n02084071", "--wordnet", data]);
    assert_eq!(by_name, by_id);
    check_golden("wup_wordnet.txt", &by_id);
}

#[test]
fn wup_falls_back_to_wnsearchdir() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::copy(wordnet_fixture("excerpt50.data.noun"), tmp.path().join("data.noun")).unwrap();
    std::fs::copy(wordnet_fixture("excerpt50.index.noun"), tmp.path().join("index.noun")).unwrap();
    let out = bin()
        .env("WNSEARCHDIR", tmp.path())
        .args(["wup", "goldfish.n.01", "n01443537"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "1.000000\n");
}

#[test]
fn missing_config_exits_2_naming_the_path() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(tmp.path(), &["decode", "--config", "missing.toml"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.toml"));
}

#[test]
fn usage_errors_exit_1() {
    let tmp = tempfile::tempdir().unwrap();
    for args in [
        vec!["decode", "--config", "c.toml", "--bogus"],
        vec!["decode", "--config", "c.toml", "--metric", "manhattan"],
        vec!["frobnicate"],
        vec!["wup", "a"],
        vec!["prompts"],
        vec!["synth", "--out", "w", "--snr", "1", "--voxel-noise", "1"],
    ] {
        let out = bin().current_dir(tmp.path()).env_remove("WNSEARCHDIR").args(&args).output().unwrap();
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
    let out = bin().current_dir(tmp.path()).env_remove("WNSEARCHDIR").args(["wup", "a", "b"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn data_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("bad.toml"), "k = 0\n").unwrap();
    let out = run_in(tmp.path(), &["train", "--config", "bad.toml"]);
    assert_eq!(out.status.code(), Some(2));
    let data = wordnet_fixture("malformed_cycle.data.noun");
    let out = run_in(tmp.path(), &["wup", "n01443537", "n01443537", "--wordnet", data.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn help_on_every_subcommand() {
    for sub in ["preprocess", "synth", "train", "build-index", "decode", "wup", "prompts", "chart"] {
        let out = bin().args([sub, "--help"]).output().unwrap();
        assert_eq!(out.status.code(), Some(0), "{sub}");
        assert!(String::from_utf8_lossy(&out.stdout).contains("Usage"));
    }
}

fn tree_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    out
}

#[test]
fn synth_twice_gives_identical_trees() {
    let tmp = tempfile::tempdir().unwrap();
    ok_stdout(tmp.path(), &["synth", "--out", "a", "--seed", "7"]);
    ok_stdout(tmp.path(), &["synth", "--out", "b", "--seed", "7"]);
    let (a, b) = (tree_bytes(&tmp.path().join("a")), tree_bytes(&tmp.path().join("b")));
    assert!(a.contains_key("config.toml"));
    assert_eq!(a, b);
}

#[test]
fn json_output_parses() {
    let tmp = tempfile::tempdir().unwrap();
    let summary: serde_json::Value =
        serde_json::from_str(&ok_stdout(tmp.path(), &["--json", "synth", "--out", "w", "--seed", "1"])).unwrap();
    assert!(summary["chance_wup"]["mean"].as_f64().unwrap() > 0.0);
    let w = tmp.path().join("w");
    ok_stdout(&w, &["preprocess", "--config", "config.toml"]);
    let grid: serde_json::Value =
        serde_json::from_str(&ok_stdout(&w, &["train", "--config", "config.toml", "--json", "--lambda-grid", "0.01,1,100"])).unwrap();
    assert_eq!(grid["lambdas"].as_array().unwrap().len(), 3);
    ok_stdout(&w, &["build-index", "--config", "config.toml", "--metric", "cosine", "--k", "3"]);
    let decoded: serde_json::Value = serde_json::from_str(&ok_stdout(
        &w,
        &["decode", "--config", "config.toml", "--json", "--no-adapt", "--threads", "2"],
    ))
    .unwrap();
    assert_eq!(decoded["aggregates"]["n_items"], 40);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(w.join("out/report_test.json")).unwrap()).unwrap();
    assert_eq!(report["settings"]["k"], 3);
    assert_eq!(report["settings"]["metric"], "cosine");
    assert_eq!(report["settings"]["adapt"], false);
}

#[test]
fn prompts_from_report_with_all_candidates() {
    let tmp = tempfile::tempdir().unwrap();
    ok_stdout(tmp.path(), SYNTH);
    let w = tmp.path().join("world");
    for step in [&["preprocess", "--config", "config.toml"][..], &["train", "--config", "config.toml"], &["decode", "--config", "config.toml"]] {
        ok_stdout(&w, step);
    }
    let text = ok_stdout(
        &w,
        &["prompts", "--report", "out/report_test.json", "--out", "all.tsv", "--all-candidates"],
    );
    assert_eq!(text, "200 prompts -> all.tsv\n");
    let tsv = std::fs::read_to_string(w.join("all.tsv")).unwrap();
    assert_eq!(tsv.lines().count(), 1 + 40 * 5);
    assert_eq!(tsv.lines().next(), Some("image_id\tsynset_id\tprompt"));
    let chart = ok_stdout(&w, &["chart", "--reports", "out/report_test.json", "--out", "one.svg"]);
    assert_eq!(chart, "1 bars -> one.svg\n");
}
