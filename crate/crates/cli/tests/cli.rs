use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const W15: &str = r#"{"kind":"preset","family":"exp_dist","params":{"s":1.0,"gamma":1.0,"points":[0.0]}}"#;

fn disclab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_disclab"))
        .args(args)
        .current_dir(dir)
        .env("DISCLAB_WORKERS", "2")
        .output()
        .unwrap()
}

fn file(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stderr)))
}

#[test]
fn example_1_5_demo() {
    let d = tempfile::tempdir().unwrap();
    let o = disclab(&["demo", "example-1-5"], d.path());
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["schema_version"], "1.0");
    assert_eq!(v["result"]["rows"][0]["cyclic"], "yes");
    assert_eq!(v["result"]["rows"][1]["cyclic"], "no");
    assert_eq!(v["manifest"]["command"], "demo example-1-5");
}

#[test]
fn input_errors_exit_2() {
    let d = tempfile::tempdir().unwrap();
    file(d.path(), "w.json", W15);
    assert_eq!(
        disclab(&["oracle", "cyclic", "--measure", "nope.json", "--weight", "w.json"], d.path()).status.code(),
        Some(2)
    );
    file(d.path(), "bad.json", "{\"atoms\": 3}");
    assert_eq!(
        disclab(&["oracle", "cyclic", "--measure", "bad.json", "--weight", "w.json"], d.path()).status.code(),
        Some(2)
    );
    file(d.path(), "neg.json", r#"{"atoms":[{"angle":0.0,"mass":-1.0}]}"#);
    assert_eq!(
        disclab(&["oracle", "cyclic", "--measure", "neg.json", "--weight", "w.json"], d.path()).status.code(),
        Some(2)
    );
    assert_eq!(disclab(&["frobnicate"], d.path()).status.code(), Some(2));
}

#[test]
fn withheld_verdict_exits_3() {
    let d = tempfile::tempdir().unwrap();
    file(d.path(), "w.json", W15);
    // half of the excluded arc of width 2π/2^14 around 0: the core boundary
    let edge = std::f64::consts::PI / 16384.0;
    file(d.path(), "edge.json", &format!(r#"{{"atoms":[{{"angle":{edge},"mass":1.0}}]}}"#));
    let o = disclab(&["oracle", "cyclic", "--measure", "edge.json", "--weight", "w.json"], d.path());
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(json(&o)["result"]["verdict"], "inconclusive");
}

#[test]
fn numerical_failure_exits_4() {
    let d = tempfile::tempdir().unwrap();
    file(d.path(), "nu.json", r#"{"atoms":[{"angle":0.0,"mass":1.0}]}"#);
    let o = disclab(&["taylor", "--measure", "nu.json", "--N", "512", "--r", "0.5"], d.path());
    assert_eq!(o.status.code(), Some(4));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["exit_code"], 4);
}

#[test]
fn manifest_digests_and_reruns() {
    let d = tempfile::tempdir().unwrap();
    file(d.path(), "w.json", W15);
    let a = json(&disclab(&["core", "set", "--weight", "w.json", "--level", "10"], d.path()));
    let b = json(&disclab(&["core", "set", "--weight", "w.json", "--level", "10"], d.path()));
    assert_eq!(a["result"], b["result"]);
    let digest = a["manifest"]["input_digests"]["w.json"].as_str().unwrap();
    assert_eq!(digest.len(), 64);
    assert_eq!(digest, b["manifest"]["input_digests"]["w.json"]);
    assert_eq!(a["manifest"]["workers"], 2);
    file(d.path(), "w.json", &W15.replace("\"s\":1.0", "\"s\":2.0"));
    let c = json(&disclab(&["core", "set", "--weight", "w.json", "--level", "10"], d.path()));
    assert_ne!(c["manifest"]["input_digests"]["w.json"], a["manifest"]["input_digests"]["w.json"]);
}

#[test]
fn hat_build_and_verify() {
    let d = tempfile::tempdir().unwrap();
    file(d.path(), "F.json", r#"{"kind":"inverse","d":1.0}"#);
    let o = disclab(&["hat", "build", "--F", "F.json", "--out", "profile.json"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let p: Value = serde_json::from_str(&std::fs::read_to_string(d.path().join("profile.json")).unwrap()).unwrap();
    assert_eq!(p["result"]["profile"]["n0"], 3);
    assert_eq!(p["result"]["profile"]["knots"][0], 1.0);

    let args = ["hat", "verify", "--profile", "profile.json", "--walks", "3000", "--seed", "7", "--out", "t.csv"];
    assert_eq!(disclab(&args, d.path()).status.code(), Some(0));
    let first = std::fs::read_to_string(d.path().join("t.csv")).unwrap();
    assert_eq!(disclab(&args, d.path()).status.code(), Some(0));
    let second = std::fs::read_to_string(d.path().join("t.csv")).unwrap();
    let rows = |s: &str| s.lines().filter(|l| !l.starts_with('#')).map(String::from).collect::<Vec<_>>();
    assert_eq!(rows(&first), rows(&second));
    assert_eq!(rows(&first)[0], "t,estimate,std_error,bound,pass");
    assert_eq!(rows(&first).len(), 3);
    assert!(first.starts_with("# {\"command\":\"hat verify\""));

    file(d.path(), "x2.json", r#"{"kind":"power","q":2.0}"#);
    let o = disclab(&["hat", "bound", "--profile", "x2.json", "--t", "0.5"], d.path());
    let b = json(&o)["result"][0]["bound"].as_f64().unwrap();
    assert!((b - 8.0 / std::f64::consts::PI * (-2.0 * std::f64::consts::PI).exp()).abs() < 1e-10);
}

#[test]
fn module_commands_run() {
    let d = tempfile::tempdir().unwrap();
    file(d.path(), "w.json", W15);
    file(d.path(), "nu.json", r#"{"atoms":[{"angle":0.0,"mass":0.5}]}"#);
    file(d.path(), "g.json", r#"{"kind":"linear"}"#);
    file(d.path(), "k.json", r#"{"kind":"sqrt","d":2.0}"#);
    let model: Vec<f64> = (0..=256).map(|n| (-2.0 * (n as f64).sqrt()).exp()).collect();
    file(d.path(), "f.json", &serde_json::to_string(&model).unwrap());
    file(d.path(), "m.json", &serde_json::to_string(&model[..=40]).unwrap());
    let b = r#"{"blaschke_zeros":[],"singular":{"atoms":[{"angle":3.14159,"mass":1.0}]},
        "defect":{"kind":"preset","family":"exp_dist","params":{"s":0.5,"gamma":1.0,"points":[0.0]}},"unimodular":{"arcs":[]}}"#;
    file(d.path(), "b.json", b);

    let run = |args: &[&str]| {
        let o = disclab(args, d.path());
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        json(&o)["result"].clone()
    };
    let m = run(&["moments", "of-g", "--g", "g.json", "--N", "3"]);
    assert!((m["values"][1].as_f64().unwrap() - 0.1).abs() < 1e-12);
    let u = run(&["legendre", "upper", "--fn", "k.json", "--x", "1"]);
    assert!((u["value"][0].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let s = run(&["transform", "inner", "--measure", "nu.json", "--z", "0,0"]);
    assert!((s[0]["value"][0].as_f64().unwrap() - (-0.5f64).exp()).abs() < 1e-12);
    assert_eq!(run(&["seqspace", "rsd", "--series", "f.json"])["verdict"], "rsd");
    run(&["seqspace", "norms", "--moments", "m.json", "--series", "m.json"]);
    assert_eq!(run(&["moments", "admissible", "--moments", "f.json"])["admissible"], true);
    assert_eq!(run(&["oracle", "hb-density", "--b", "b.json"])["verdict"], "yes");
    let ob = run(&["obstacle", "--measure", "nu.json", "--weight", "w.json", "--levels", "4,8"]);
    assert!(ob["weak_star"][1]["mass_error"].as_f64().unwrap() <= 1e-10);
    let wt = run(&["witness", "--measure", "nu.json", "--weight", "w.json", "--levels", "10"]);
    assert!(wt["rows"][0]["errors"][1].as_f64().unwrap() <= 1e-3);
}
