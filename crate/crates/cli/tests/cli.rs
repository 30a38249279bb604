use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn shiftlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shiftlab")).args(args).env_remove("SHIFTLAB_CAP").output().expect("binary runs")
}

fn run(scenario: &str, out: &Path, extra: &[&str]) -> Output {
    let s = fixture(scenario);
    let mut args = vec!["run", "--scenario", s.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    shiftlab(&args)
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn coset_coding_on_z6_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = run("coset_z6.json", &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = read_json(&out);
    assert_eq!(r["status"], "pass");
    assert_eq!(r["summary"]["stab_size"], 2);
}

#[test]
fn trivial_stabilizer_on_z7_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = run("trivial_stab_z7.json", &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn malformed_json_exits_2_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = run("malformed.json", &out, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2 column"), "{}", stderr(&o));
    assert_eq!(read_json(&out)["status"], "error");
}

#[test]
fn stochastic_mode_without_seed_is_a_schema_error() {
    let dir = tempfile::tempdir().unwrap();
    let sc = dir.path().join("s.json");
    let mut v = read_json(&fixture("free_image_z8.json"));
    v.as_object_mut().unwrap().remove("seed");
    std::fs::write(&sc, v.to_string()).unwrap();
    let out = dir.path().join("r.json");
    let o = shiftlab(&["run", "--scenario", sc.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("seed"), "{}", stderr(&o));
    let o = shiftlab(&["run", "--scenario", sc.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn free_image_reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    assert_eq!(run("free_image_z8.json", &a, &[]).status.code(), Some(0));
    assert_eq!(run("free_image_z8.json", &b, &[]).status.code(), Some(0));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn failed_stage_exits_1_and_explains() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    assert_eq!(run("free_image_z8_one_color.json", &out, &[]).status.code(), Some(1));
    let o = shiftlab(&["explain", "--report", out.to_str().unwrap(), "--audit", "stage 0: failed"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("stage:  0"), "{text}");
    assert!(text.contains("status: fail"), "{text}");
    assert!(text.contains("no coloring of the stage block meets every requirement"), "{text}");
}

#[test]
fn explain_split_lists_sets_and_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    run("free_image_z8.json", &out, &[]);
    let o = shiftlab(&["explain", "--report", out.to_str().unwrap(), "--audit", "stage 0: split"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    for needle in ["c: [", "u: [", "C is R-syndetic: holds", "U is S-separated: holds", "U is T_next-syndetic: holds"] {
        assert!(text.contains(needle), "missing {needle:?} in\n{text}");
    }
}

#[test]
fn explain_resampling_run_shows_seed_and_resamples() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    assert_eq!(run("moser_tardos.json", &out, &[]).status.code(), Some(0));
    let o = shiftlab(&["explain", "--report", out.to_str().unwrap(), "--audit", "resampling run 0"]);
    let text = stdout(&o);
    assert!(text.contains("seed: 3"), "{text}");
    assert!(text.contains("resamples: "), "{text}");
}

#[test]
fn explain_unknown_audit_lists_names() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    run("coset_z6.json", &out, &[]);
    let o = shiftlab(&["explain", "--report", out.to_str().unwrap(), "--audit", "no such audit"]);
    assert_ne!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("available:"), "{}", stderr(&o));
}

fn sweep(grid: &str, dir: &Path) -> Value {
    let g = dir.join("grid.json");
    std::fs::write(&g, grid).unwrap();
    let out = dir.join("table.json");
    let t = fixture("bound_report.json");
    let o = shiftlab(&[
        "sweep",
        "--template",
        t.to_str().unwrap(),
        "--grid",
        g.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--jobs",
        "4",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    read_json(&out)
}

#[test]
fn empty_grid_gives_empty_table() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(sweep("{}", dir.path())["rows"], serde_json::json!([]));
}

#[test]
fn bound_sweep_reproduces_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let t = sweep(r#"{"params.m": [1287, 9, 1284, 1285, 1283, 1286]}"#, dir.path());
    let rows = t["rows"].as_array().unwrap();
    let ms: Vec<u64> = rows.iter().map(|r| r["key"]["params.m"].as_u64().unwrap()).collect();
    assert_eq!(ms, [9, 1283, 1284, 1285, 1286, 1287]);
    for r in rows {
        let m = r["key"]["params.m"].as_u64().unwrap();
        assert_eq!(r["summary"]["threshold"], 1285);
        let want = if m >= 1285 { "pass" } else { "fail" };
        assert_eq!(r["summary"]["verdict"], want, "m = {m}");
    }
}

#[test]
fn sweep_row_errors_stay_in_their_row() {
    let dir = tempfile::tempdir().unwrap();
    let t = sweep(r#"{"params.colors": [2, "two"]}"#, dir.path());
    let rows = t["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows.iter().filter(|r| r["status"] == "error").count(), 1);
    assert_eq!(rows.iter().filter(|r| r["status"] == "pass").count(), 1);
}

#[test]
fn cap_override_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let s = fixture("coset_z6.json");
    let o = Command::new(env!("CARGO_BIN_EXE_shiftlab"))
        .args(["run", "--scenario", s.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .env("SHIFTLAB_CAP", "10")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let r = read_json(&out);
    assert!(r["audits"][0]["witness"]["error"].as_str().unwrap().contains("cap"), "{r}");
}

#[test]
fn every_mode_runs_clean_and_repeats_exactly() {
    let dir = tempfile::tempdir().unwrap();
    for name in [
        "coset_z6",
        "trivial_stab_z7",
        "step_z24",
        "schedule_z16",
        "free_image_z8",
        "pipeline_z8",
        "approx_z4",
        "moser_tardos",
        "bound_report",
    ] {
        let (a, b) = (dir.path().join(format!("{name}.a")), dir.path().join(format!("{name}.b")));
        let o = run(&format!("{name}.json"), &a, &[]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stderr(&o));
        run(&format!("{name}.json"), &b, &[]);
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap(), "{name}");
        let r = read_json(&a);
        assert!(r["audits"].as_array().is_some_and(|a| !a.is_empty()), "{name}");
    }
}
