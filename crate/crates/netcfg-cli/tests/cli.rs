//! End-to-end runs of the `netcfg` binary: every subcommand and every exit
//! code in the contract (0 approved/completed, 1 usage or I/O, 2 rejected,
//! 3 exhausted or failed validation, 4 backend failure).

use std::path::PathBuf;
use std::process::{Command, Output};

const CP_INTENT: &str = "Shut down interface GigabitEthernet0/2 on R2.";
const SNMP_INTENT: &str = "Enable SNMP with community string public on R1.";

fn workspace_path(relative: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").join(relative)
}

fn topology() -> String {
    workspace_path("topology/topology.json").display().to_string()
}

fn dataset() -> String {
    workspace_path("datasets/intents.jsonl").display().to_string()
}

/// The binary with a scrubbed environment: an endpoint configured outside
/// the test must never leak into a run that expects the rules backend.
fn netcfg() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_netcfg"));
    cmd.env_remove("NETCFG_LLM_URL");
    cmd
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn assert_exit(output: &Output, expected: i32) {
    assert_eq!(
        output.status.code(),
        Some(expected),
        "stdout:\n{}\nstderr:\n{}",
        stdout_of(output),
        stderr_of(output)
    );
}

#[test]
fn approved_intent_exits_zero_with_a_summary_line() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = dir.path().join("repo").display().to_string();
    let output = run(netcfg().args(["run", CP_INTENT, "--topology", &topology(), "--out", &out]));
    assert_exit(&output, 0);
    let stdout = stdout_of(&output);
    assert!(stdout.contains("approved, class=CP, cycles=1"), "{stdout}");
    assert!(stdout.contains("version=v1"), "{stdout}");
}

#[test]
fn unsupported_intent_exits_two_without_consuming_cycles() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = dir.path().join("repo").display().to_string();
    let output = run(netcfg().args(["run", SNMP_INTENT, "--topology", &topology(), "--out", &out]));
    assert_exit(&output, 2);
    let stdout = stdout_of(&output);
    assert!(stdout.contains("rejected_other"), "{stdout}");
    assert!(stdout.contains("cycles=0"), "{stdout}");
}

#[test]
fn persistent_syntax_faults_exhaust_the_budget_and_exit_three() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = dir.path().join("repo").display().to_string();
    let output = run(netcfg().args([
        "run", CP_INTENT,
        "--topology", &topology(),
        "--faults", "syntax:1.0",
        "--threshold", "3",
        "--out", &out,
    ]));
    assert_exit(&output, 3);
    let stdout = stdout_of(&output);
    assert!(stdout.contains("exhausted"), "{stdout}");
    assert!(stdout.contains("cycles=3"), "{stdout}");
}

#[test]
fn unreachable_http_endpoint_exits_four() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = dir.path().join("repo").display().to_string();
    let output = run(netcfg()
        .args(["run", CP_INTENT, "--topology", &topology(), "--backend", "http", "--out", &out])
        .env("NETCFG_LLM_URL", "http://127.0.0.1:9/v1/chat/completions")
        .env("NETCFG_LLM_TIMEOUT_S", "2"));
    assert_exit(&output, 4);
    let stdout = stdout_of(&output);
    assert!(stdout.contains("backend_failed"), "{stdout}");
}

#[test]
fn missing_topology_file_exits_one() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = dir.path().join("repo").display().to_string();
    let missing = dir.path().join("nowhere.json").display().to_string();
    let output = run(netcfg().args(["run", CP_INTENT, "--topology", &missing, "--out", &out]));
    assert_exit(&output, 1);
    assert!(stderr_of(&output).contains("cannot load topology"));
}

#[test]
fn usage_errors_exit_one_and_help_exits_zero() {
    let output = run(netcfg().args(["run"]));
    assert_exit(&output, 1);

    let output = run(netcfg().args(["--help"]));
    assert_exit(&output, 0);
    assert!(stdout_of(&output).contains("validate-config"));
}

#[test]
fn run_json_emits_a_machine_readable_result() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = dir.path().join("repo").display().to_string();
    let output = run(netcfg().args([
        "run", CP_INTENT, "--topology", &topology(), "--out", &out, "--json",
    ]));
    assert_exit(&output, 0);
    let value: serde_json::Value =
        serde_json::from_str(&stdout_of(&output)).expect("stdout is JSON");
    assert_eq!(value["status"], "approved");
    assert_eq!(value["class"], "CP");
    assert_eq!(value["cycles"], 1);
    assert_eq!(value["stored_version"], 1);
}

#[test]
fn batch_writes_metrics_and_reports_accuracy() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = dir.path().join("repo").display().to_string();
    let metrics = dir.path().join("metrics.json");
    let output = run(netcfg().args([
        "batch", &dataset(),
        "--topology", &topology(),
        "--clock", "logical",
        "--out", &out,
        "--metrics-out", &metrics.display().to_string(),
    ]));
    assert_exit(&output, 0);
    let stdout = stdout_of(&output);
    assert!(stdout.contains("40 intents: 40 approved"), "{stdout}");
    assert!(stdout.contains("classification accuracy 1.000"), "{stdout}");
    assert!(stdout.contains("cycle histogram (cycles:intents) 1:40"), "{stdout}");

    let written = std::fs::read_to_string(&metrics).expect("metrics file exists");
    let value: serde_json::Value = serde_json::from_str(&written).expect("metrics file is JSON");
    assert_eq!(value["total"], 40);
    assert_eq!(value["approved"], 40);
    assert_eq!(value["classification_accuracy"], 1.0);
}

#[test]
fn seeded_class_faults_reject_a_tenth_of_the_batch() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = dir.path().join("repo").display().to_string();
    let metrics = dir.path().join("metrics.json");
    let output = run(netcfg().args([
        "batch", &dataset(),
        "--topology", &topology(),
        "--clock", "logical",
        "--faults", "class:0.1",
        "--seed", "7",
        "--out", &out,
        "--metrics-out", &metrics.display().to_string(),
    ]));
    assert_exit(&output, 0);
    assert!(stdout_of(&output).contains("36 approved, 4 rejected_other"));

    let written = std::fs::read_to_string(&metrics).expect("metrics file exists");
    let value: serde_json::Value = serde_json::from_str(&written).expect("metrics file is JSON");
    assert_eq!(value["rejected_other"], 4);
    assert_eq!(value["other_rate"], 0.1);
}

#[test]
fn empty_dataset_exits_one() {
    let dir = tempfile::tempdir().expect("tempdir");
    let empty = dir.path().join("empty.jsonl");
    std::fs::write(&empty, "").expect("write dataset");
    let out = dir.path().join("repo").display().to_string();
    let metrics = dir.path().join("metrics.json").display().to_string();
    let output = run(netcfg().args([
        "batch", &empty.display().to_string(),
        "--topology", &topology(),
        "--out", &out,
        "--metrics-out", &metrics,
    ]));
    assert_exit(&output, 1);
    assert!(stderr_of(&output).contains("holds no intents"));
}

#[test]
fn faults_cannot_drive_the_http_backend() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = dir.path().join("repo").display().to_string();
    let output = run(netcfg().args([
        "run", CP_INTENT,
        "--topology", &topology(),
        "--backend", "http",
        "--faults", "class:0.5",
        "--out", &out,
    ]));
    assert_exit(&output, 1);
    assert!(stderr_of(&output).contains("--faults"));
}

#[test]
fn two_logical_batches_write_identical_metrics() {
    let dir = tempfile::tempdir().expect("tempdir");
    let mut written = Vec::new();
    for pass in ["first", "second"] {
        let out = dir.path().join(pass).join("repo").display().to_string();
        let metrics = dir.path().join(pass).join("metrics.json");
        std::fs::create_dir_all(metrics.parent().unwrap()).expect("mkdir");
        let output = run(netcfg().args([
            "batch", &dataset(),
            "--topology", &topology(),
            "--clock", "logical",
            "--out", &out,
            "--metrics-out", &metrics.display().to_string(),
        ]));
        assert_exit(&output, 0);
        written.push(std::fs::read(&metrics).expect("metrics file exists"));
    }
    assert_eq!(written[0], written[1], "logical-clock batches must replay byte-for-byte");
}

#[test]
fn show_prints_versions_and_the_audit_trail() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = dir.path().join("repo").display().to_string();
    for _ in 0..2 {
        let output = run(netcfg().args([
            "run", CP_INTENT, "--topology", &topology(), "--id", "shutdown-g02", "--out", &out,
        ]));
        assert_exit(&output, 0);
    }

    let output = run(netcfg().args(["show", "shutdown-g02", "--out", &out]));
    assert_exit(&output, 0);
    let stdout = stdout_of(&output);
    assert!(stdout.contains("2 stored version(s)"), "{stdout}");
    assert!(stdout.contains("v1: class=CP, devices=R2"), "{stdout}");
    assert!(stdout.contains("cycle 1: pass"), "{stdout}");

    let output = run(netcfg().args(["show", "shutdown-g02", "--out", &out, "--json"]));
    assert_exit(&output, 0);
    let value: serde_json::Value =
        serde_json::from_str(&stdout_of(&output)).expect("stdout is JSON");
    assert_eq!(value["versions"].as_array().map(Vec::len), Some(2));

    let output = run(netcfg().args(["show", "never-ran", "--out", &out]));
    assert_exit(&output, 1);
    assert!(stderr_of(&output).contains("nothing stored"));
}

#[test]
fn metrics_summarises_a_written_file() {
    let dir = tempfile::tempdir().expect("tempdir");
    let mini = dir.path().join("mini.jsonl");
    std::fs::write(
        &mini,
        format!(
            "{}\n{}\n",
            serde_json::json!({"id": "labelled", "text": CP_INTENT, "expected_class": "CP"}),
            serde_json::json!({"id": "unlabelled", "text": SNMP_INTENT}),
        ),
    )
    .expect("write dataset");
    let out = dir.path().join("repo").display().to_string();
    let metrics = dir.path().join("metrics.json").display().to_string();
    let output = run(netcfg().args([
        "batch", &mini.display().to_string(),
        "--topology", &topology(),
        "--out", &out,
        "--metrics-out", &metrics,
    ]));
    assert_exit(&output, 0);

    let output = run(netcfg().args(["metrics", "--file", &metrics]));
    assert_exit(&output, 0);
    let stdout = stdout_of(&output);
    assert!(stdout.contains("2 intents: 1 approved, 1 rejected_other"), "{stdout}");
    assert!(stdout.contains("classification accuracy 1.000"), "{stdout}");
    assert!(stdout.contains("Other rate 0.500"), "{stdout}");

    let output = run(netcfg().args(["metrics", "--file", &metrics, "--json"]));
    assert_exit(&output, 0);
    let value: serde_json::Value =
        serde_json::from_str(&stdout_of(&output)).expect("stdout is JSON");
    assert_eq!(value["total"], 2);

    let missing = dir.path().join("missing.json").display().to_string();
    let output = run(netcfg().args(["metrics", "--file", &missing]));
    assert_exit(&output, 1);
}

#[test]
fn topology_lists_devices_links_and_hosts() {
    let output = run(netcfg().args(["topology", "--topology", &topology()]));
    assert_exit(&output, 0);
    let stdout = stdout_of(&output);
    assert!(stdout.contains("4 device(s), 5 link(s), 2 host(s)"), "{stdout}");
    assert!(stdout.contains("R1:GigabitEthernet0/0 <-> R2:GigabitEthernet0/0"), "{stdout}");
    assert!(stdout.contains("host u1 at R1:GigabitEthernet0/3 (10.0.1.10)"), "{stdout}");

    let output = run(netcfg().args(["topology", "--topology", &topology(), "--json"]));
    assert_exit(&output, 0);
    let value: serde_json::Value =
        serde_json::from_str(&stdout_of(&output)).expect("stdout is JSON");
    assert_eq!(value["devices"].as_array().map(Vec::len), Some(4));
    assert_eq!(value["links"].as_array().map(Vec::len), Some(5));
}

#[test]
fn validate_config_accepts_a_clean_bundle() {
    let dir = tempfile::tempdir().expect("tempdir");
    let bundle = dir.path().join("clean.txt");
    std::fs::write(
        &bundle,
        "R1\ninterface GigabitEthernet0/3\n description 'lan uplink'\n~~~\nR2\ninterface GigabitEthernet0/2\n shutdown\n",
    )
    .expect("write bundle");
    let output = run(netcfg().args([
        "validate-config", &bundle.display().to_string(), "--topology", &topology(),
    ]));
    assert_exit(&output, 0);
    assert!(stdout_of(&output).contains("ok: 2 device section(s)"));
}

#[test]
fn validate_config_flags_bad_syntax_with_its_location() {
    let dir = tempfile::tempdir().expect("tempdir");
    let bundle = dir.path().join("typo.txt");
    std::fs::write(&bundle, "R2\ninterface GigabitEthernet0/2\n shutdwn\n").expect("write bundle");
    let output = run(netcfg().args([
        "validate-config", &bundle.display().to_string(), "--topology", &topology(),
    ]));
    assert_exit(&output, 3);
    let stdout = stdout_of(&output);
    assert!(stdout.contains("R2: line 2"), "{stdout}");
    assert!(stdout.contains("unknown directive 'shutdwn'"), "{stdout}");
}

#[test]
fn validate_config_flags_devices_outside_the_model() {
    let dir = tempfile::tempdir().expect("tempdir");
    let bundle = dir.path().join("ghost.txt");
    std::fs::write(&bundle, "R9\ninterface GigabitEthernet0/0\n shutdown\n").expect("write bundle");
    let output = run(netcfg().args([
        "validate-config", &bundle.display().to_string(), "--topology", &topology(),
    ]));
    assert_exit(&output, 3);
    assert!(stdout_of(&output).contains("UNKNOWN_DEVICE"));

    let missing = dir.path().join("missing.txt").display().to_string();
    let output = run(netcfg().args(["validate-config", &missing, "--topology", &topology()]));
    assert_exit(&output, 1);
}
