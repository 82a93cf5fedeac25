use serde_json::Value as Json;
use std::path::Path;
use std::process::{Command, Output};
use tempnet::modular::CheckReport;

fn tempnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tempnet"))
        .args(args)
        .env_remove("TEMPNET_SOLVER")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

const RUNNING_TABLE: &str = "\
time  n  w              v             d             e
0     ∅  ⟨100,0,false⟩  ∅             ∅             ∅
1     ∅  ⟨100,0,false⟩  ⟨100,1,true⟩  ∅             ∅
2     ∅  ⟨100,0,false⟩  ⟨100,1,true⟩  ⟨100,2,true⟩  ∅
3     ∅  ⟨100,0,false⟩  ⟨100,1,true⟩  ⟨100,2,true⟩  ⟨100,3,true⟩
4     ∅  ⟨100,0,false⟩  ⟨100,1,true⟩  ⟨100,2,true⟩  ⟨100,3,true⟩
converged at t=3
";

#[test]
fn simulate_prints_the_running_example() {
    let o = tempnet(&["simulate", "--fixture", "base"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), RUNNING_TABLE);
}

#[test]
fn check_reach_passes() {
    let o = tempnet(&["check", "--mode", "modular", "--fixture", "reach"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.matches(" ok").count(), 15, "{out}");
    assert!(out.contains("overall: PASS"));
}

#[test]
fn check_bad_temporal_fails_at_time_zero() {
    let o = tempnet(&["check", "--fixture", "bad-temporal"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("initial counterexample at v, t=0"), "{out}");
    assert!(out.contains("initial counterexample at d, t=0"), "{out}");
}

fn strip_wall(j: &mut Json) {
    match j {
        Json::Object(m) => {
            for k in ["wall", "total_wall", "median_node_time", "p99_node_time"] {
                m.remove(k);
            }
            m.values_mut().for_each(strip_wall);
        }
        Json::Array(xs) => xs.iter_mut().for_each(strip_wall),
        _ => {}
    }
}

#[test]
fn json_reports_round_trip_and_are_deterministic() {
    let run = || {
        let o = tempnet(&["--report", "json", "check", "--fixture", "patched"]);
        assert_eq!(o.status.code(), Some(1));
        stdout(&o)
    };
    let text = run();
    let first: Json = serde_json::from_str(&text).unwrap();
    assert_eq!(first["status"], "fail");
    let report: CheckReport = serde_json::from_str(&text).unwrap();
    let mut again = serde_json::to_value(&report).unwrap();
    again["status"] = first["status"].clone();
    assert_eq!(again, first);

    let (mut a, mut b) = (first, serde_json::from_str(&run()).unwrap());
    strip_wall(&mut a);
    strip_wall(&mut b);
    assert_eq!(a, b);
}

#[test]
fn strawperson_passes_with_a_warning() {
    let o = tempnet(&["strawperson", "--fixture", "strawperson"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("WARNING"));
}

#[test]
fn mode_flags_are_validated() {
    let o = tempnet(&["check", "--mode", "monolithic", "--delay", "1", "--fixture", "reach"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--delay"));
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn malformed_inputs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad_json = write(dir.path(), "bad.json", "{");
    let o = tempnet(&["check", &bad_json]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("invalid JSON"));

    let unknown_op = write(
        dir.path(),
        "op.json",
        r#"{"network": {"nodes": ["a"], "edges": [], "route_sort": "int",
            "init": {"a": ["frob", 0]}, "transfer": [], "merge": ["min", "s1", "s2"]}}"#,
    );
    let o = tempnet(&["validate", &unknown_op]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("$.network.init.a: unknown operator `frob`"), "{}", stderr(&o));

    let ill_sorted = write(
        dir.path(),
        "sort.json",
        r#"{"network": {"nodes": ["a"], "edges": [], "route_sort": "int",
            "init": {"a": true}, "transfer": [], "merge": ["min", "s1", "s2"]},
            "interfaces": {"a": {"op": "G", "pred": true}}}"#,
    );
    let o = tempnet(&["validate", &ill_sorted]);
    assert_eq!(o.status.code(), Some(2));
    let o = tempnet(&["check", &ill_sorted]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("invalid network"), "{}", stderr(&o));
}

#[test]
fn dumped_benchmarks_check_like_builtins() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("wan.json");
    let path = path.to_str().unwrap();
    let o = tempnet(&["bench", "--name", "wan-bte-broken", "--dump", path]);
    assert_eq!(o.status.code(), Some(0));
    let o = tempnet(&["check", path]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("counterexample at x5"));
}

#[test]
fn undecided_queries_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("solver.sh");
    std::fs::write(&script, "#!/bin/sh\ncat > /dev/null\necho unknown\n").unwrap();
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        std::fs::set_permissions(&script, std::fs::Permissions::from_mode(0o755)).unwrap();
    }
    let o = tempnet(&["--solver", script.to_str().unwrap(), "check", "--fixture", "reach"]);
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));
}

#[test]
fn smt_scripts_are_dumped() {
    let dir = tempfile::tempdir().unwrap();
    let o = tempnet(&["--dump-smt", dir.path().to_str().unwrap(), "check", "--fixture", "base"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 15);
}
