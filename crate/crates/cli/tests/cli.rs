use std::process::{Command, Output};

use pir_squeeze::rates::Rational;
use pir_squeeze::scheme::Transcript;
use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_pir-squeeze"));
    c.env_remove("PIR_SQUEEZE_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn transcript(args: &[&str]) -> (Transcript, i32) {
    let mut all = vec!["run"];
    all.extend_from_slice(args);
    let out = run(&all);
    let t = serde_json::from_slice(&out.stdout).expect("transcript JSON");
    (t, out.status.code().unwrap())
}

#[test]
fn run_general_matches_closed_form() {
    let (t, code) = transcript(&["--n", "5", "--k", "3", "--seed", "1"]);
    assert_eq!(code, 0);
    assert!(t.success);
    assert_eq!(t.achieved_rate, Rational::new(10, 17));
    assert_eq!(t.closed_form_rate, t.achieved_rate);
    assert_eq!(t.per_server.len(), 5);
    assert_eq!(t.per_server[0].server, 1);
}

#[test]
fn run_grs_and_cyclic_rates() {
    let (grs, _) = transcript(&["--variant", "grs", "--n", "5", "--k", "2"]);
    assert_eq!(grs.achieved_rate, Rational::new(20, 31));
    assert_eq!(grs.download_total, 31);

    let (cyc, code) = transcript(&["--variant", "cyclic", "--n", "5", "--k", "3"]);
    assert_eq!(code, 0);
    assert_eq!(cyc.achieved_rate, Rational::new(3, 5));
    let i_n: Vec<usize> = cyc.per_server.iter().map(|s| s.i_n).collect();
    assert_eq!(i_n, vec![3, 3, 3, 1, 0]);
}

#[test]
fn run_multifile_reports_both_files_rate() {
    let (t, code) = transcript(&[
        "--variant",
        "multifile",
        "--m",
        "3",
        "--n",
        "5",
        "--k",
        "2",
        "--p",
        "2",
    ]);
    assert_eq!(code, 0);
    assert_eq!(t.achieved_rate, Rational::new(40, 51));
}

#[test]
fn output_is_byte_identical_across_runs() {
    let args = [
        "run", "--n", "5", "--k", "2", "--seed", "42", "--trials", "3",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn transcript_round_trips() {
    let out = run(&["run", "--n", "4", "--k", "2", "--q", "3"]);
    let t: Transcript = serde_json::from_slice(&out.stdout).unwrap();
    let again = serde_json::to_string_pretty(&t).unwrap() + "\n";
    assert_eq!(again.as_bytes(), out.stdout.as_slice());
}

#[test]
fn seed_falls_back_to_env() {
    let from_env = bin()
        .env("PIR_SQUEEZE_SEED", "9")
        .args(["run", "--n", "5", "--k", "2"])
        .output()
        .unwrap();
    let from_flag = run(&["run", "--n", "5", "--k", "2", "--seed", "9"]);
    assert_eq!(from_env.stdout, from_flag.stdout);
    let t: Transcript = serde_json::from_slice(&from_env.stdout).unwrap();
    assert_eq!(t.params.seed, 9);
}

#[test]
fn output_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("pir-squeeze-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("t.json");
    let out = run(&[
        "run",
        "--n",
        "5",
        "--k",
        "3",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let t: Transcript = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(t.success);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn invalid_parameters_exit_2_with_json_error() {
    let out = run(&["run", "--n", "4", "--k", "3"]);
    assert_eq!(out.status.code(), Some(2));
    let e: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(e["error"]["code"], "invalid_params");
    assert!(out.stdout.is_empty());
}

#[test]
fn missing_required_and_unknown_flags_exit_2() {
    assert_eq!(run(&["run", "--k", "2"]).status.code(), Some(2));
    assert_eq!(
        run(&["run", "--n", "5", "--k", "2", "--bogus"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["run", "--variant", "nope"]).status.code(), Some(2));
}

#[test]
fn audit_small_case_is_exhaustive() {
    let out = run(&[
        "audit", "--n", "4", "--k", "2", "--q", "3", "--budget", "2000",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["pass"], true);
    assert_eq!(v["span"]["mode"], "Exhaustive");
    assert_eq!(v["span"]["tuple_space"], "1296");
    assert_eq!(v["span"]["failures"], 0);
    assert_eq!(v["privacy"]["coalitions"].as_array().unwrap().len(), 6);
}

#[test]
fn injected_fault_fails_with_witness() {
    let out = run(&["audit", "--n", "4", "--k", "2", "--inject-fault"]);
    assert_eq!(out.status.code(), Some(1));
    let v = stdout_json(&out);
    assert_eq!(v["pass"], false);
    assert_eq!(v["fault"]["server"], 1);
    assert_eq!(v["redundancy"]["verdict"], false);
    assert!(v["span"]["witness"]["permutations"].is_array());
}

#[test]
fn audit_general_t() {
    let out = run(&["audit", "--variant", "generalT", "--n", "6", "--k", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["params"]["t"], 3);
    assert_eq!(v["redundancy"]["ranks"][0]["rank"], 45);
}

#[test]
fn rates_single_row() {
    let out = run(&["rates", "--n", "5", "--k", "3"]);
    assert!(out.status.success());
    let rows = stdout_json(&out);
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 1);
    let r = &rows[0];
    assert_eq!(
        (r["theorem1"]["num"].as_i64(), r["theorem1"]["den"].as_i64()),
        (Some(10), Some(17))
    );
    assert_eq!(
        (r["cyclic"]["num"].as_i64(), r["cyclic"]["den"].as_i64()),
        (Some(3), Some(5))
    );
    assert!(r["general_t"].is_null());
}

#[test]
fn rates_sweep_covers_both_collusion_levels() {
    let out = run(&["rates", "--n", "6"]);
    let rows = stdout_json(&out);
    let rows = rows.as_array().unwrap();
    assert!(rows
        .iter()
        .any(|r| r["t"] == 2 && r["n"] == 6 && r["k"] == 4));
    assert!(rows
        .iter()
        .any(|r| r["t"] == 3 && r["n"] == 6 && r["k"] == 3));
    assert!(rows.iter().all(|r| r["n"].as_u64().unwrap() <= 6));
}

#[test]
fn table_format_prints_rate() {
    let out = run(&["run", "--n", "5", "--k", "3", "--format", "table"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("rate 10/17"));
}
