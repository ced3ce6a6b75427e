use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use effect_design::elicitation::{ElicitationSession, Stage};
use effect_design::service_api::{compute_diagnostics, DiagnosticsRequest};
use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_effect-design");

const SCRIPT: &str = include_str!("golden/elicit_input.txt");
const TRANSCRIPT: &str = include_str!("golden/elicit_transcript.txt");

fn run(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(BIN)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

fn load(path: &Path) -> ElicitationSession {
    ElicitationSession::from_json(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn ate_outputs() {
    let o = run(&["--format", "json", "ate", "--range", "0,0.2", "--p-null", "0.5"], "");
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["ate"].as_f64(), Some(0.05));
    let o = run(&["--format", "json", "ate", "--range", "0,0.2", "--p-null", "1"], "");
    assert_eq!(json(&o)["ate"].as_f64(), Some(0.0));
    let o = run(&["--format", "json", "ate", "--types", "0.6,0.2,0,0.2"], "");
    let v = json(&o);
    assert_eq!(v["ate"].as_f64(), Some(0.2));
    assert_eq!(v["types"]["treat_rate"].as_f64(), Some(0.8));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&[], "").status.code(), Some(2));
    assert_eq!(run(&["ate", "--range", "0,0.2", "--types", "1,0,0,0"], "").status.code(), Some(2));
    assert_eq!(run(&["power", "--effect", "x", "--se", "1"], "").status.code(), Some(2));
    let o = run(&["power", "--effect", "0.1", "--se=-1"], "");
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    assert_eq!(run(&["--version"], "").status.code(), Some(0));
}

#[test]
fn scenarios_via_binary() {
    let o = run(&["scenario", "run", "all"], "");
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = run(&["--format", "json", "scenario", "run", "penumbra"], "");
    assert_eq!(json(&o)["passed"], Value::Bool(true));
}

#[test]
fn elicit_golden_transcript() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("session.json");
    let o = run(&["elicit", "--out", out.to_str().unwrap()], SCRIPT);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o).replace(out.to_str().unwrap(), "SESSION");
    assert_eq!(text, TRANSCRIPT);
    let s = load(&out);
    assert_eq!(s.stage(), Stage::Compared);
    assert!((s.ate_post().unwrap() - 0.1).abs() < 1e-12);
}

#[test]
fn elicit_resume_then_replay() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    let p = path.to_str().unwrap();
    let lines: Vec<&str> = SCRIPT.lines().collect();
    let cut = 8;
    let head = lines[..cut].join("\n") + "\n";
    let tail = lines[cut..].join("\n") + "\n";

    let o = run(&["elicit", "--out", p], &head);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("input ended at stage `extremes`"));
    assert_eq!(load(&path).stage(), Stage::Extremes);

    let o = run(&["elicit", "--resume", p], &tail);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let resumed = load(&path);
    assert_eq!(resumed.stage(), Stage::Compared);

    let full = dir.path().join("full.json");
    run(&["elicit", "--out", full.to_str().unwrap()], SCRIPT);
    assert_eq!(
        load(&full).ate_post().unwrap().to_bits(),
        resumed.ate_post().unwrap().to_bits()
    );

    let o = run(&["--format", "json", "elicit", "--replay", p], "");
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["matches"], Value::Bool(true));

    let text = std::fs::read_to_string(&path).unwrap();
    let stored = resumed.ate_post().unwrap();
    let tampered = text.replacen(
        &format!("\"ate_post\": {}", serde_json::to_string(&stored).unwrap()),
        "\"ate_post\": 0.25",
        1,
    );
    assert_ne!(tampered, text);
    std::fs::write(&path, tampered).unwrap();
    let o = run(&["elicit", "--replay", p], "");
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn power_from_elicited_distribution() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    run(&["elicit", "--out", path.to_str().unwrap()], SCRIPT);
    let args = [
        "--format", "json", "power", "--dist", path.to_str().unwrap(), "--se", "0.05", "--draws", "50000", "--seed", "4",
    ];
    let from_cli = json(&run(&args, ""));
    let req = DiagnosticsRequest {
        distribution: load(&path).distribution().cloned(),
        se: Some(0.05),
        alpha: Some(0.05),
        sides: Some(Default::default()),
        draws: Some(50_000),
        seed: Some(4),
        ..Default::default()
    };
    let lib = serde_json::to_value(compute_diagnostics(&req).unwrap()).unwrap();
    assert_eq!(from_cli, lib);
}

#[test]
fn serve_binds_and_answers() {
    let mut child = Command::new(BIN)
        .args(["serve", "--port", "0"])
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut first = String::new();
    BufReader::new(child.stdout.take().unwrap())
        .read_line(&mut first)
        .unwrap();
    let addr = first.trim().strip_prefix("listening on http://").unwrap().to_string();
    let mut stream = TcpStream::connect(&addr).unwrap();
    write!(stream, "GET /v1/scenarios HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\n\r\n").unwrap();
    let mut raw = String::new();
    stream.read_to_string(&mut raw).unwrap();
    child.kill().unwrap();
    child.wait().unwrap();
    assert!(raw.starts_with("HTTP/1.1 200"), "{raw}");
    assert!(raw.contains("\"covid_trial\""));
}
