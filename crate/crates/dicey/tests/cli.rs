//! End-to-end tests of the `dicey` binary: document round trips through real
//! files, result JSON shapes, and the exit-code contract.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn dicey(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dicey"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    assert!(
        !out.stdout.is_empty(),
        "no stdout; stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON document")
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}; stderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn path_str(p: &PathBuf) -> &str {
    p.to_str().expect("utf-8 path")
}

#[test]
fn gen_solve_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let game = dir.path().join("mp2.json");
    let witness = dir.path().join("witness.json");
    let out = dicey(&[
        "gen",
        "clique-mp",
        "-n",
        "2",
        "--out",
        path_str(&game),
    ]);
    assert_ok(&out);
    assert_eq!(json_of(&out)["dice"], 1);

    let out = dicey(&["solve", path_str(&game), "--out", path_str(&witness)]);
    assert_ok(&out);
    let doc = json_of(&out);
    assert_eq!(doc["command"], "solve");
    assert!((doc["value"].as_f64().unwrap() - 0.5).abs() < 1e-6);
    assert_eq!(doc["schemes_examined"], "16");

    // The written witness feeds back through eval at the same value.
    let out = dicey(&["eval", path_str(&game), path_str(&witness), "--exact"]);
    assert_ok(&out);
    let doc = json_of(&out);
    assert_eq!(doc["mode"], "exact-rational");
    assert!((doc["value_float"].as_f64().unwrap() - 0.5).abs() < 1e-6);
}

#[test]
fn eval_exact_reports_rational_strings() {
    let out = dicey(&["eval", &data("triangular.json"), &data("thirds.json"), "--exact"]);
    assert_ok(&out);
    let doc = json_of(&out);
    assert_eq!(doc["per_action"]["H"], "8/27");
    assert_eq!(doc["per_action"]["T"], "7/27");
    assert_eq!(doc["value"], "7/27");
}

#[test]
fn threshold_exit_codes_follow_the_answer() {
    let game = data("triangular.json");
    let yes = dicey(&["threshold", &game, "-t", "1/4", "--starts", "2", "--iters", "150"]);
    assert_eq!(yes.status.code(), Some(0));
    let doc = json_of(&yes);
    assert_eq!(doc["answer"], "yes");

    let no = dicey(&["threshold", &game, "-t", "0.279", "--starts", "2", "--iters", "150"]);
    assert_eq!(no.status.code(), Some(3));
    let doc = json_of(&no);
    assert_eq!(doc["answer"], "no-within-search");
    assert_eq!(doc["t"], "279/1000");
    assert!(doc["value"].as_f64().unwrap() > 0.278);
}

#[test]
fn normalize_writes_a_valid_smaller_strategy() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("normalized.json");
    let out = dicey(&[
        "normalize",
        &data("triangular.json"),
        &data("sigma0.json"),
        "--out",
        path_str(&out_path),
        "--dump-profiles",
    ]);
    assert_ok(&out);
    let doc = json_of(&out);
    assert_eq!(doc["value_before"], "7/27");
    assert_eq!(doc["k"], 2);
    assert!(doc["pieces_after"]
        .as_object()
        .unwrap()
        .values()
        .all(|v| v.as_u64().unwrap() <= 2));
    assert_eq!(doc["profiles"].as_array().unwrap().len(), 3);

    // The written document evaluates to at least the original value.
    let out = dicey(&["eval", &data("triangular.json"), path_str(&out_path), "--exact"]);
    assert_ok(&out);
    let after = json_of(&out)["value_float"].as_f64().unwrap();
    assert!(after >= 7.0 / 27.0 - 1e-12, "normalized value {after}");
}

#[test]
fn mc_is_reproducible_per_seed() {
    let args = [
        "mc",
        &data("triangular.json") as &str,
        &data("thirds.json"),
        "--samples",
        "50000",
        "--seed",
        "11",
    ];
    let a = dicey(&args);
    let b = dicey(&args);
    assert_ok(&a);
    assert_eq!(a.stdout, b.stdout, "same seed must give identical output");
    let doc = json_of(&a);
    let h = doc["per_action"]["H"]["mean"].as_f64().unwrap();
    assert!((h - 8.0 / 27.0).abs() < 0.02, "H mean {h}");
}

#[test]
fn certify_reports_verdict_and_multipliers() {
    let out = dicey(&[
        "certify",
        &data("triangular.json"),
        &data("thirds.json"),
        "-t",
        "7/27",
    ]);
    assert_ok(&out);
    let doc = json_of(&out);
    // Thirds cuts are not optimal, so the point is not a Fritz John point.
    assert_eq!(doc["status"], "infeasible");
    assert!(doc["residual_float"].as_f64().unwrap() > 1e-6);
    assert!(doc["mu"].is_object());
}

#[test]
fn export_smt_document_and_stub_check() {
    let dir = tempfile::tempdir().unwrap();
    let witness = dir.path().join("witness.json");
    let game = data("triangular.json");
    assert_ok(&dicey(&[
        "solve",
        &game,
        "--out",
        path_str(&witness),
        "--starts",
        "2",
        "--iters",
        "150",
    ]));

    let out = dicey(&[
        "export-smt",
        &game,
        "--strategy",
        path_str(&witness),
        "-t",
        "278/1000",
    ]);
    assert_ok(&out);
    let doc = String::from_utf8(out.stdout).unwrap();
    assert!(doc.starts_with("(set-logic QF_NRA)"), "{doc}");
    assert!(doc.contains("(= t (/ 139 500))"));
    assert!(!doc.contains('.'), "rationals must be exact quotients");
    assert!(doc.trim_end().ends_with("(check-sat)"));

    // --check against a stub solver that always answers sat.
    let stub = dir.path().join("stub.sh");
    std::fs::write(&stub, "grep -q check-sat \"$1\" && echo sat\n").unwrap();
    let solver = format!("sh {}", stub.display());
    let out = dicey(&[
        "export-smt",
        &game,
        "--strategy",
        path_str(&witness),
        "-t",
        "278/1000",
        "--check",
        "--solver",
        &solver,
    ]);
    assert_ok(&out);
    let doc = json_of(&out);
    assert_eq!(doc["verdict"], "sat");
    assert_eq!(doc["query"], "fixed-scheme");

    // An unsat verdict exits 3, mirroring the threshold command.
    std::fs::write(&stub, "echo unsat\n").unwrap();
    let out = dicey(&[
        "export-smt",
        &game,
        "--strategy",
        path_str(&witness),
        "-t",
        "279/1000",
        "--check",
        "--solver",
        &solver,
    ]);
    assert_eq!(out.status.code(), Some(3), "{out:?}");
    assert_eq!(json_of(&out)["verdict"], "unsat");
}

#[test]
fn reduce_quad_chains_into_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("sys.quad");
    let game = dir.path().join("encoded.json");
    // x1*x1 >= 0 holds everywhere, so the threshold answer must be YES.
    std::fs::write(&input, "vars 2\nineq 1 1 1\n").unwrap();
    let out = dicey(&[
        "reduce",
        "quad",
        path_str(&input),
        "--out",
        path_str(&game),
    ]);
    assert_ok(&out);
    let doc = json_of(&out);
    assert_eq!(doc["threshold"], "0");
    assert_eq!(doc["kind"], "quad");

    let out = dicey(&[
        "threshold",
        path_str(&game),
        "-t",
        "0",
        "--k",
        "2",
        "--starts",
        "2",
        "--iters",
        "80",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["answer"], "yes");
}

#[test]
fn reduce_dqbf_reports_the_encoding() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("inst.dqbf");
    std::fs::write(&input, "forall x\nexists y : x\nclause x y\nclause -x -y\n").unwrap();
    let out = dicey(&["reduce", "dqbf", path_str(&input)]);
    assert_ok(&out);
    let doc = json_of(&out);
    assert_eq!(doc["threshold"], "1");
    assert_eq!(doc["players"], 2);
    assert_eq!(doc["dice"], 1);
    assert!(doc["game"]["devil_actions"].as_array().unwrap().len() >= 3);
}

#[test]
fn allocate_assigns_the_shared_die() {
    let dir = tempfile::tempdir().unwrap();
    let game = dir.path().join("mp3.json");
    let pack = dir.path().join("pack.json");
    assert_ok(&dicey(&[
        "gen",
        "clique-mp",
        "-n",
        "3",
        "--diceless",
        "--out",
        path_str(&game),
    ]));
    std::fs::write(&pack, r#"{"dice": [{"id": "d", "acc": 3}]}"#).unwrap();
    let out = dicey(&[
        "allocate",
        path_str(&game),
        path_str(&pack),
        "--starts",
        "2",
        "--iters",
        "150",
    ]);
    assert_ok(&out);
    let doc = json_of(&out);
    assert_eq!(doc["structures_examined"], 1);
    assert!((doc["value"].as_f64().unwrap() - 0.5).abs() < 1e-6);
    assert_eq!(
        doc["best_structure"][0]["access"],
        serde_json::json!(["p1", "p2", "p3"])
    );
}

#[test]
fn conjecture_check_matches_exactly_for_n4() {
    let out = dicey(&["conjecture-check", "-n", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json_of(&out);
    assert_eq!(doc["evaluated_exact"], "1/4");
    assert_eq!(doc["match"], true);
    assert!(doc["constants"]["beta"].as_f64().unwrap() > 0.278);
}

#[test]
fn exit_code_contract_for_errors() {
    // Usage error (clap): 2.
    let out = dicey(&["solve", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    // Internal error (missing file): 1.
    let out = dicey(&["solve", "no-such-file.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no-such-file.json"));
    // Semantic error surfaced as internal: bad mode.
    let out = dicey(&["solve", &data("triangular.json"), "--mode", "psychic"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("psychic"));
}

#[test]
fn jobs_flag_caps_the_worker_pool() {
    let out = dicey(&[
        "--jobs",
        "1",
        "solve",
        &data("triangular.json"),
        "--starts",
        "1",
        "--iters",
        "60",
    ]);
    assert_ok(&out);
    assert!(json_of(&out)["value"].as_f64().unwrap() > 0.27);
}
