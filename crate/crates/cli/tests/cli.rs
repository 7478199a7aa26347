use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

use blackwell_cli::{ArtifactDoc, EXIT_INFEASIBLE, EXIT_OK, EXIT_PARSE, EXIT_VERIFY_FAIL};
use blackwell_core::equilibrium::{grim_trigger, synthesize_equilibrium};
use blackwell_core::model::{Game, MixedProfile, PeriodicPlay};

fn game_file(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../games").join(name)
}

fn blackwell(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_blackwell"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn run(cmd: &str, game: &str, out: &Path, extra: &[&str]) -> (i32, String, String) {
    let spec = game_file(game);
    let mut args = vec![cmd, "--spec", spec.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    blackwell(&args)
}

fn json(path: &Path) -> Value {
    let v: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(v["schema_version"], "1", "{}", path.display());
    v
}

fn exact_values(v: &Value) -> Vec<String> {
    v["players"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["exact"].as_str().unwrap().to_string())
        .collect()
}

#[test]
fn minmax_reports() {
    let dir = tempfile::tempdir().unwrap();
    for (game, want) in [
        ("four_outcomes.json", ["0", "0"]),
        ("pennies_io.json", ["1", "1"]),
        ("constant.json", ["1", "1"]),
    ] {
        let (code, _, err) = run("minmax", game, dir.path(), &[]);
        assert_eq!(code, EXIT_OK, "{err}");
        let v = json(&dir.path().join("minmax.json"));
        assert_eq!(exact_values(&v), want, "{game}");
        assert!(v["players"][0]["history"]["history_independent"].as_bool().unwrap());
        assert!(dir.path().join("minmax.csv").exists());
    }
}

#[test]
fn synth_writes_artifact() {
    for (game, payoffs) in [("pennies_limsup.json", ["1/2", "1/2"]), ("four_outcomes.json", ["1", "1"])] {
        let dir = tempfile::tempdir().unwrap();
        let (code, out, err) = run("synth", game, dir.path(), &[]);
        assert_eq!(code, EXIT_OK, "{err}");
        assert!(out.contains("expected payoffs"));
        let a = json(&dir.path().join("automaton.json"));
        assert_eq!(a["expected_payoffs"], serde_json::json!(payoffs));
        let p = json(&dir.path().join("play.json"));
        assert_eq!(p["plays"][0]["payoffs"], serde_json::json!(payoffs));
        assert!(dir.path().join("summary.txt").exists());
    }
}

#[test]
fn synth_reports_infeasible() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = run("synth", "infeasible_horizon.json", dir.path(), &[]);
    assert_eq!(code, EXIT_INFEASIBLE);
    assert!(err.contains("infeasible"));
    let v = json(&dir.path().join("infeasible.json"));
    assert_eq!(v["infeasible"]["players"], serde_json::json!(["1", "2"]));
    assert!(!v["infeasible"]["constraints"].as_array().unwrap().is_empty());
}

#[test]
fn payoff_set_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = run("payoff-set", "four_outcomes.json", dir.path(), &[]);
    assert_eq!(code, EXIT_OK, "{err}");
    let csv = fs::read_to_string(dir.path().join("payoff_set.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("0.1,0,0,0,"));
    assert!(rows[1].starts_with("0.1,1,1,1,"));
    let svg = fs::read_to_string(dir.path().join("payoff_set.svg")).unwrap();
    assert!(svg.contains(r#"class="ir-region" data-points="0,0 3,0 0,3""#));
    assert!(svg.contains(r#"data-x="3" data-y="0""#));

    let (code, out, _) = run("payoff-set", "solo_constant.json", dir.path(), &[]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("CSV only"));
    let v = json(&dir.path().join("payoff_set.json"));
    assert_eq!(v["hulls"][0]["vertices"], serde_json::json!([{"payoff": ["2"], "witness": "[(x)]^w"}]));

    let dir = tempfile::tempdir().unwrap();
    run("payoff-set", "pennies_limsup.json", dir.path(), &[]);
    let v = json(&dir.path().join("payoff_set.json"));
    let payoffs: Vec<&Value> = v["hulls"][0]["vertices"].as_array().unwrap().iter().map(|p| &p["payoff"]).collect();
    assert_eq!(payoffs, [&serde_json::json!(["2/5", "3/5"]), &serde_json::json!(["3/5", "2/5"])]);
}

#[test]
fn verify_passes_and_fails() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run("synth", "pennies_limsup.json", dir.path(), &[]).0, EXIT_OK);
    let (code, _, err) = run("verify", "pennies_limsup.json", dir.path(), &["--epsilon", "0.2", "--reps", "50"]);
    assert_eq!(code, EXIT_OK, "{err}");
    let v = json(&dir.path().join("verify.json"));
    assert!(v["pass"].as_bool().unwrap());
    assert!(v["max_gain"].as_f64().unwrap() <= 0.2 + 1e-6);
    assert_eq!(v["deviations"][0]["method"], "mdp_exact");

    // Pure Nash equilibrium play: no gain at all.
    let dir = tempfile::tempdir().unwrap();
    run("synth", "four_outcomes.json", dir.path(), &[]);
    let (code, _, _) = run("verify", "four_outcomes.json", dir.path(), &["--epsilon", "0.000001", "--reps", "20"]);
    assert_eq!(code, EXIT_OK);

    // Punishing with the cooperative profile invites deviations.
    let game = Game::from_json(&fs::read_to_string(game_file("four_outcomes.json")).unwrap()).unwrap();
    let mut artifact = synthesize_equilibrium(&game, 0.1).unwrap();
    let tl = MixedProfile::pure(&game, 0);
    artifact.automaton = grim_trigger(&game, &PeriodicPlay::cycle(vec![0]), &[tl.clone(), tl]).unwrap();
    let path = dir.path().join("broken.json");
    fs::write(&path, serde_json::to_string(&ArtifactDoc::new(&game, &artifact)).unwrap()).unwrap();
    let (code, out, _) = run(
        "verify",
        "four_outcomes.json",
        dir.path(),
        &["--automaton", path.to_str().unwrap(), "--reps", "20"],
    );
    assert_eq!(code, EXIT_VERIFY_FAIL, "{out}");
    let v = json(&dir.path().join("verify.json"));
    assert!(!v["pass"].as_bool().unwrap());
    assert!(v["max_gain"].as_f64().unwrap() > 0.1);
}

#[test]
fn parse_errors_name_the_position() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\n  \"players\": [\"a\"],\n  \"actions\": 7\n}").unwrap();
    let (code, _, err) = blackwell(&["minmax", "--spec", bad.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, EXIT_PARSE);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [&a, &b] {
        for cmd in ["synth", "payoff-set", "verify"] {
            run(cmd, "pennies_io.json", dir.path(), &["--reps", "40", "--seed", "9"]);
        }
    }
    for name in ["automaton.json", "play.json", "payoff_set.json", "payoff_set.csv", "payoff_set.svg", "verify.json"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
}
