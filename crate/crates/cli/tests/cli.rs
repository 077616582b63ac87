use std::fs;
use std::process::{Command, Output};

fn kitchen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kitchen-ids")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn plans_and_explains_a_game() {
    let dir = tempfile::tempdir().unwrap();
    let plan = stdout(&kitchen(&["plan", "--game", "two_meal"]));
    assert!(plan.ends_with("; overtime 0 cost 19\n"), "{plan}");
    let path = dir.path().join("plan.txt");
    fs::write(&path, &plan).unwrap();
    let steps = plan.lines().filter(|l| !l.starts_with(';')).count();
    for mode in ["action", "clc", "subgoal"] {
        let text = stdout(&kitchen(&["explain", "--plan", path.to_str().unwrap(), "--game", "two_meal", "--mode", mode]));
        assert_eq!(text.lines().count(), steps);
    }
    let subgoal = stdout(&kitchen(&["explain", "--plan", path.to_str().unwrap(), "--game", "two_meal", "--mode", "subgoal"]));
    assert!(subgoal.contains("Chop the tomato for the salad meal.\n"));
}

#[test]
fn recommends_from_a_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let snapshot = dir.path().join("state.txt");
    fs::write(&snapshot, "elapsed 3\n").unwrap();
    let out = stdout(&kitchen(&["recommend", "--game", "italian_bistro", "--mode", "subgoal", "--corruption", "0", "--seed", "1"]));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 3, "{out}");
    assert_eq!(lines[2], "provenance: optimal");
    let corrupted = stdout(&kitchen(&["recommend", "--game", "italian_bistro", "--corruption", "1", "--seed", "1"]));
    assert!(corrupted.ends_with("provenance: corrupted\n"));
    // A snapshot without a chef location is rejected.
    assert!(!kitchen(&["recommend", "--game", "italian_bistro", "--state", snapshot.to_str().unwrap()]).status.success());
}

#[test]
fn simulates_and_recomputes_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.toml");
    fs::write(
        &grid,
        "conditions = [\"suboptimal_subgoal\", \"none\"]\ngames = [\"two_meal\"]\npolicies = [\"conformant\"]\nseeds = [1, 2]\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let summary = stdout(&kitchen(&["simulate", "--grid", grid.to_str().unwrap(), "--out", out.to_str().unwrap()]));
    assert!(summary.starts_with("4 rows, 0 failed"));
    let csv = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    let log = fs::read_dir(out.join("logs")).unwrap().next().unwrap().unwrap().path();
    let report = stdout(&kitchen(&["metrics", "--log", log.to_str().unwrap()]));
    let report: serde_json::Value = serde_json::from_str(report.trim()).unwrap();
    assert_eq!(report["game_id"], "two_meal");
}

#[test]
fn unknown_games_fail_cleanly() {
    let out = kitchen(&["plan", "--game", "no_such_game"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("no_such_game"));
}
