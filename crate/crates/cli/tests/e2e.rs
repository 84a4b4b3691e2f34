//! End-to-end runs of the `mtcircle` binary: exit codes, output contract,
//! cache behaviour.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn mtcircle(args: &[&str], cache: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mtcircle"));
    cmd.args(args).env_remove("MTCIRCLE_CACHE_DIR");
    if let Some(dir) = cache {
        cmd.arg("--cache-dir").arg(dir);
    }
    cmd.output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Vec<Value> {
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).expect("stdout line is JSON"))
        .collect()
}

fn stderr_error(out: &Output) -> Value {
    let text = String::from_utf8(out.stderr.clone()).unwrap();
    let line = text.lines().find(|l| l.contains("\"error\"")).expect("error line on stderr");
    serde_json::from_str(line).expect("stderr error is JSON")
}

#[test]
fn tree_verification_passes_at_61() {
    let out = mtcircle(&["verify", "--theorem", "tree", "-p", "61", "--ell", "5", "-s", "1"], None);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert!(text.contains("\"verdict\":\"pass\""));
    let rep = &stdout_json(&out)[0];
    assert_eq!(rep["theorem"], "tree");
    assert_eq!(rep["witnesses"]["tree_count"], 125);
}

#[test]
fn alpha_at_181_is_two() {
    let out = mtcircle(&["alpha", "-p", "181", "--ell", "5", "-s", "1"], None);
    assert_eq!(out.status.code(), Some(0));
    let rep = &stdout_json(&out)[0];
    assert_eq!(rep["alpha"], 2);
    assert_eq!(rep["stabilized"], false);
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("{\"p\":181,\"ell\":5,\"s\":1,\"alpha\":2,"));
}

#[test]
fn invalid_context_exits_2_with_json_error() {
    let out = mtcircle(&["supersingular", "-p", "13", "--ell", "5"], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert_eq!(stderr_error(&out)["error"]["kind"], "invalid_config");
}

#[test]
fn configuration_errors_exit_2() {
    let cases: [&[&str]; 6] = [
        &["supersingular", "-p", "15", "--ell", "7"],
        &["verify", "--theorem", "tree", "-p", "31", "--ell", "5"],
        &["brandt", "-p", "61", "--ell", "5", "--q", "61"],
        &["alpha", "-p", "61", "--ell", "5", "-s", "2"],
        &["verify", "--theorem", "everything", "-p", "61"],
        &["lmatrix", "-p", "61", "--tree-cap", "40"],
    ];
    for args in cases {
        let out = mtcircle(args, None);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert_eq!(stderr_error(&out)["error"]["kind"], "invalid_config", "{args:?}");
    }
}

#[test]
fn verify_all_skips_tree_off_its_congruence_class() {
    let out = mtcircle(&["verify", "--theorem", "all", "-p", "31", "--ell", "5"], None);
    assert_eq!(out.status.code(), Some(0));
    let names: Vec<String> = stdout_json(&out).iter().map(|r| r["theorem"].as_str().unwrap().to_string()).collect();
    assert_eq!(names, ["main", "alpha2", "alpha3"]);
}

#[test]
fn merel_at_31_is_consistent() {
    let out = mtcircle(&["merel", "-p", "31", "--ell", "5"], None);
    assert_eq!(out.status.code(), Some(0));
    let rep = &stdout_json(&out)[0];
    assert_eq!(rep["consistent"], true);
}

#[test]
fn homology_ranks_follow_the_genus() {
    let out = mtcircle(&["homology", "-p", "61", "--ell", "5", "--format", "csv"], None);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("p,ell,s,genus,dim,plus,cuspidal,plus_cuspidal"));
    assert_eq!(lines.next(), Some("61,5,1,4,9,5,8,4"));
}

#[test]
fn output_flag_writes_file_only() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nested/s61.json");
    let out = mtcircle(&["supersingular", "-p", "61", "--output", path.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let direct = mtcircle(&["supersingular", "-p", "61"], None);
    assert_eq!(fs::read(&path).unwrap(), direct.stdout);
}

#[test]
fn lmatrix_cold_and_warm_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cold = mtcircle(&["lmatrix", "-p", "181"], Some(dir.path()));
    assert_eq!(cold.status.code(), Some(0));
    assert!(fs::read_dir(dir.path()).unwrap().count() > 0);
    let warm = mtcircle(&["lmatrix", "-p", "181"], Some(dir.path()));
    assert_eq!(warm.status.code(), Some(0));
    assert_eq!(cold.stdout, warm.stdout);
    let uncached = mtcircle(&["lmatrix", "-p", "181"], None);
    assert_eq!(cold.stdout, uncached.stdout);
}

fn only_entry(dir: &Path, prefix: &str) -> std::path::PathBuf {
    let mut hits: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap().to_str().unwrap().starts_with(prefix))
        .collect();
    assert_eq!(hits.len(), 1);
    hits.pop().unwrap()
}

#[test]
fn tampered_weight_is_detected_and_recomputed() {
    let dir = tempfile::tempdir().unwrap();
    let first = mtcircle(&["supersingular", "-p", "61"], Some(dir.path()));
    let path = only_entry(dir.path(), "supersingular-p61-");
    let mut entry: Value = serde_json::from_slice(&fs::read(&path).unwrap()).unwrap();
    assert_eq!(entry["value"], stdout_json(&first)[0]);
    entry["value"]["weights"][0] = Value::from(2);
    fs::write(&path, serde_json::to_vec(&entry).unwrap()).unwrap();

    let second = mtcircle(&["supersingular", "-p", "61"], Some(dir.path()));
    assert_eq!(second.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    assert!(String::from_utf8(second.stderr).unwrap().contains("\"warning\""));
    let healed: Value = serde_json::from_slice(&fs::read(&path).unwrap()).unwrap();
    assert_eq!(healed["value"], stdout_json(&first)[0]);
}

#[test]
fn corrupted_presentation_is_recomputed() {
    let dir = tempfile::tempdir().unwrap();
    let first = mtcircle(&["homology", "-p", "41", "--ell", "5"], Some(dir.path()));
    let path = only_entry(dir.path(), "presentation-p41-");
    let text = fs::read_to_string(&path).unwrap();
    fs::write(&path, &text[..text.len() / 2]).unwrap();
    let second = mtcircle(&["homology", "-p", "41", "--ell", "5"], Some(dir.path()));
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(fs::read_to_string(&path).unwrap(), text);
}

#[test]
fn flag_wins_over_environment() {
    let env_dir = tempfile::tempdir().unwrap();
    let flag_dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_mtcircle"))
        .args(["supersingular", "-p", "61", "--cache-dir"])
        .arg(flag_dir.path())
        .env("MTCIRCLE_CACHE_DIR", env_dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(fs::read_dir(env_dir.path()).unwrap().count(), 0);
    assert_eq!(fs::read_dir(flag_dir.path()).unwrap().count(), 1);

    let out = Command::new(env!("CARGO_BIN_EXE_mtcircle"))
        .args(["supersingular", "-p", "61"])
        .env("MTCIRCLE_CACHE_DIR", env_dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(fs::read_dir(env_dir.path()).unwrap().count(), 1);
}

#[test]
fn battery_passes_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cold = mtcircle(&["battery"], Some(dir.path()));
    assert_eq!(cold.status.code(), Some(0), "{}", String::from_utf8_lossy(&cold.stderr));
    let reports = stdout_json(&cold);
    assert!(reports.iter().all(|r| r["verdict"] == "pass"));
    assert_eq!(reports.iter().filter(|r| r["theorem"] == "tree").count(), 5);
    let warm = mtcircle(&["battery"], Some(dir.path()));
    assert_eq!(cold.stdout, warm.stdout);
}

#[test]
fn csv_and_pretty_project_the_same_rows() {
    let csv = mtcircle(&["brandt", "-p", "61", "--q", "2", "--format", "csv"], None);
    let pretty = mtcircle(&["brandt", "-p", "61", "--q", "2", "--format", "pretty"], None);
    let json = &stdout_json(&mtcircle(&["brandt", "-p", "61", "--q", "2"], None))[0];
    let mat = json["mat"].as_array().unwrap();
    let csv_rows: Vec<Vec<u64>> = String::from_utf8(csv.stdout)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').skip(1).map(|c| c.parse().unwrap()).collect())
        .collect();
    let pretty_rows: Vec<Vec<u64>> = String::from_utf8(pretty.stdout)
        .unwrap()
        .lines()
        .skip(2)
        .map(|l| l.split_whitespace().skip(1).map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(csv_rows.len(), mat.len());
    for (i, row) in mat.iter().enumerate() {
        let want: Vec<u64> = row.as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
        assert_eq!(csv_rows[i], want);
        assert_eq!(pretty_rows[i], want);
    }
}

#[test]
fn help_exits_zero() {
    let out = mtcircle(&["--help"], None);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().contains("battery"));
}
