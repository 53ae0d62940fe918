use std::path::PathBuf;
use std::process::{Command, Output};

use ifte::logic::AlgebraTables;
use ifte::models::FiniteCSet;

fn ifte(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ifte"))
        .args(args)
        .output()
        .expect("run ifte")
}

fn code(args: &[&str]) -> i32 {
    ifte(args).status.code().unwrap()
}

fn stdout(args: &[&str]) -> String {
    String::from_utf8(ifte(args).stdout).unwrap()
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("ifte-{}-{name}", std::process::id()));
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn corpus_reports_each_line() {
    let path = scratch(
        "corpus.txt",
        "# C-set facts\nU[s,t] = bot\n\n(~a)[s,t] = a[t,s]\na[s,s] = s  # fails at U\n",
    );
    let p = path.to_str().unwrap();
    let out = stdout(&["check", "--corpus", p, "--theory", "cset"]);
    assert!(out.contains("2: VALID"), "{out}");
    assert!(out.contains("5: INVALID"), "{out}");
    assert!(out.contains("2/3 valid"), "{out}");
    assert_eq!(code(&["check", "--corpus", p, "--theory", "cset"]), 1);

    let bad = scratch("bad.txt", "T = T\na[s, = s\n");
    let out = ifte(&["check", "--corpus", bad.to_str().unwrap(), "--theory", "ada"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains(":2:"));
}

#[test]
fn model_files_round_trip() {
    let m = FiniteCSet::basic(3, true);
    let path = scratch("basic3.json", &serde_json::to_string(&m).unwrap());
    let p = path.to_str().unwrap();
    assert_eq!(code(&["verify", p, "--suite", "agreeable"]), 0);
    assert_eq!(code(&["decompose", p, "--agreeable"]), 0);
    assert_eq!(stdout(&["eval", "(s*t)[s,t]", "--model", p, "--env", "s=1,t=2"]).trim(), "(s*t)[s,t] = p2");

    let broken = scratch("broken.json", "{\"tests\": 3}");
    assert_eq!(code(&["verify", broken.to_str().unwrap(), "--suite", "cset"]), 2);
    assert_eq!(code(&["verify", "/nonexistent/model.json", "--suite", "cset"]), 2);
}

#[test]
fn classify_table_files() {
    let three = scratch("three.json", &serde_json::to_string(&AlgebraTables::three()).unwrap());
    let t = three.to_str().unwrap();
    assert_eq!(code(&["classify", t, "--as", "ada"]), 0);
    assert_eq!(code(&["classify", t, "--as", "bool"]), 1);
    let four = scratch("four.json", &serde_json::to_string(&AlgebraTables::boolean_power(2)).unwrap());
    assert_eq!(code(&["classify", four.to_str().unwrap(), "--as", "bool"]), 0);
}

#[test]
fn total_bset_goes_through_ultrafilters() {
    let out = stdout(&["decompose", "--total-bset", "2", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["factors"].as_array().unwrap().len(), 2);
    assert_eq!(v["star_preserved"], true);
}

#[test]
fn jobs_flag_gives_same_counterexample() {
    let args = ["check", "a[b[s,t],u] = b[a[s,u],a[t,u]]", "--theory", "cset"];
    let one = stdout(&[&args[..], &["--jobs", "1"]].concat());
    let many = stdout(&[&args[..], &["--jobs", "4"]].concat());
    assert!(one.starts_with("INVALID"), "{one}");
    assert_eq!(one, many);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&[]), 2);
    assert_eq!(code(&["verify", "--suite", "cset"]), 2);
    assert_eq!(code(&["eval", "a[s,t]", "--model", "basic:3", "--env", "a=X"]), 2);
    assert_eq!(code(&["roundtrip", "--atoms", "0"]), 2);
    assert_eq!(code(&["--version"]), 0);
}
