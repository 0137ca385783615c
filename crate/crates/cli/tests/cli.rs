use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn pp10(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pp10")).args(args).current_dir(dir).env_remove("PP10_OUTPUT_DIR").output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn check_proof_exit_codes() {
    let d = tempfile::tempdir().unwrap();
    fs::write(d.path().join("unsat.cnf"), "p cnf 1 2\n1 0\n-1 0\n").unwrap();
    fs::write(d.path().join("sat.cnf"), "p cnf 2 1\n1 2 0\n").unwrap();
    fs::write(d.path().join("p.drup"), "0\n").unwrap();
    let ok = pp10(&["check-proof", "unsat.cnf", "p.drup", "--report", "r.json"], d.path());
    assert_eq!(code(&ok), 0, "{}", stdout(&ok));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(report["verdict"], "verified");
    let bad = pp10(&["check-proof", "sat.cnf", "p.drup"], d.path());
    assert_eq!(code(&bad), 1);
    assert!(stdout(&bad).contains("NOT VERIFIED"));
}

#[test]
fn usage_errors_exit_with_two() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(code(&pp10(&["encode", "--rows", "51", "--frobnicate"], d.path())), 2);
    assert_eq!(code(&pp10(&["enumerate", "--rows", "30"], d.path())), 2);
    assert_eq!(code(&pp10(&["pipeline", "--config", "x.toml", "--reproduce"], d.path())), 2);
    assert_eq!(code(&pp10(&["encode", "--rows", "51", "--variant", "bogus", "-o", "x.cnf"], d.path())), 2);
    fs::write(d.path().join("bad.toml"), "rows = 12\n").unwrap();
    assert_eq!(code(&pp10(&["pipeline", "--config", "bad.toml"], d.path())), 2);
}

#[test]
fn encode_writes_dimacs_and_stats() {
    let d = tempfile::tempdir().unwrap();
    let o = pp10(&["encode", "--rows", "51", "--variant", "full-simplify", "-o", "i51.cnf"], d.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stats: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.path().join("i51.cnf.stats.json")).unwrap()).unwrap();
    assert_eq!(stats["num_vars"], 3825);
    assert_eq!(stats["units"], 3075);
    assert_eq!(stats["num_unknown"], 750);
    let text = fs::read_to_string(d.path().join("i51.cnf")).unwrap();
    assert!(text.lines().any(|l| l == format!("p cnf 3825 {}", stats["total_distinct"])));
}

#[test]
fn encoding_is_byte_identical_across_runs() {
    let d = tempfile::tempdir().unwrap();
    for name in ["a.cnf", "b.cnf"] {
        assert_eq!(code(&pp10(&["--seed", "4", "encode", "--rows", "45", "-o", name], d.path())), 0);
    }
    assert_eq!(fs::read(d.path().join("a.cnf")).unwrap(), fs::read(d.path().join("b.cnf")).unwrap());
}

#[test]
fn solve_then_check_proof() {
    let d = tempfile::tempdir().unwrap();
    // Pigeonhole: 4 pigeons, 3 holes.
    let v = |i: usize, j: usize| (i * 3 + j + 1) as i32;
    let mut lines = vec![];
    for i in 0..4 {
        lines.push(format!("{} {} {} 0", v(i, 0), v(i, 1), v(i, 2)));
    }
    for j in 0..3 {
        for a in 0..4 {
            for b in a + 1..4 {
                lines.push(format!("-{} -{} 0", v(a, j), v(b, j)));
            }
        }
    }
    fs::write(d.path().join("php.cnf"), format!("p cnf 12 {}\n{}\n", lines.len(), lines.join("\n"))).unwrap();
    let o = pp10(&["solve", "php.cnf", "--proof", "php.drup"], d.path());
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("s UNSATISFIABLE"));
    assert_eq!(code(&pp10(&["check-proof", "php.cnf", "php.drup"], d.path())), 0);

    fs::write(d.path().join("assume.txt"), "1 -2 0\n").unwrap();
    fs::write(d.path().join("sat.cnf"), "p cnf 3 2\n1 2 0\n-1 3 0\n").unwrap();
    let o = pp10(&["solve", "sat.cnf", "--assume", "assume.txt", "--model", "m.json"], d.path());
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("s SATISFIABLE"));
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.path().join("m.json")).unwrap()).unwrap();
    assert_eq!(m["model"], serde_json::json!([1, -2, 3]));
}

#[test]
fn exhausted_budget_exits_with_three() {
    let d = tempfile::tempdir().unwrap();
    let o = pp10(&["encode", "--rows", "51", "-o", "i51.cnf"], d.path());
    assert_eq!(code(&o), 0);
    let o = pp10(&["solve", "i51.cnf", "--conflicts", "10"], d.path());
    assert_eq!(code(&o), 3);
    assert!(stdout(&o).contains("s UNKNOWN"));
}

#[test]
fn fixture_validates_cleanly() {
    let d = tempfile::tempdir().unwrap();
    let o = pp10(&["fixture-validate", "--json", "v.json"], d.path());
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("51 rows"));
    let mut broken = pp10::matrix::FIXTURE.to_string().into_bytes();
    // Give heavy row 1 a sixth One in an A column.
    let pos = broken.iter().position(|&b| b == b'0').unwrap();
    broken[pos] = b'1';
    fs::write(d.path().join("broken.txt"), broken).unwrap();
    let o = pp10(&["fixture-validate", "--fixture", "broken.txt"], d.path());
    assert_eq!(code(&o), 1);
}

#[test]
fn witness_round_trip_through_model_file() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(code(&pp10(&["encode", "--rows", "45", "-o", "i45.cnf"], d.path())), 0);
    let o = pp10(&["solve", "i45.cnf", "--model", "m.json"], d.path());
    assert_eq!(code(&o), 0);
    let o = pp10(&["show-witness", "m.json", "--validate"], d.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 45);
    assert!(text.lines().all(|l| l.len() == 75 && l.bytes().all(|b| b == b'0' || b == b'1')));
}

#[test]
fn symmetric_enumeration_yields_1021_records() {
    let d = tempfile::tempdir().unwrap();
    let o = pp10(&["enumerate", "--rows", "27", "--block-symmetric", "-o", "c.json"], d.path());
    assert_eq!(code(&o), 0);
    let records: Vec<serde_json::Value> = serde_json::from_str(&fs::read_to_string(d.path().join("c.json")).unwrap()).unwrap();
    assert_eq!(records.len(), 1021);
    let total: u64 = records.iter().map(|r| r["orbit_size"].as_u64().unwrap()).sum();
    assert_eq!(total, 42_496);
}

#[test]
fn pipeline_honours_output_dir_environment_variable() {
    let d = tempfile::tempdir().unwrap();
    fs::write(d.path().join("run.toml"), "output_dir = \"ignored\"\n[stages]\nphase1 = false\nphase2 = false\nwitness45 = false\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_pp10"))
        .args(["pipeline", "--config", "run.toml"])
        .current_dir(d.path())
        .env("PP10_OUTPUT_DIR", "from-env")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!d.path().join("ignored").exists());
    let runs: Vec<_> = fs::read_dir(d.path().join("from-env")).unwrap().collect();
    assert_eq!(runs.len(), 1);
    let run = runs[0].as_ref().unwrap().path();
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(run.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["status"], "success");
    assert_eq!(report["groups"]["column1_stabilizer"], 48);
    assert!(run.join("manifest.json").exists() && run.join("instance-51.cnf").exists());
}
