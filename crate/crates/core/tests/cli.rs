use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use tempfile::TempDir;

fn gmsurf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gmsurf"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn gmsurf_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_gmsurf"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child
        .stdin
        .take()
        .unwrap()
        .write_all(input.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn two_piece(dir: &Path, name: &str, e1: &str, e2: &str) -> PathBuf {
    let path = dir.join(name);
    let text = format!(
        r#"{{
  "pieces": [
    {{"id": 1, "euler": "{e1}", "genus": 1}},
    {{"id": 2, "euler": "{e2}", "genus": 1}}
  ],
  "tori": [{{"from": 1, "to": 2, "p": 1}}]
}}"#
    );
    fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn analyze_exit_codes() {
    let dir = TempDir::new().unwrap();
    let yes = two_piece(dir.path(), "yes.json", "-1", "-1");
    let out = gmsurf(&["analyze", s(&yes)]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("property I: true"));
    assert!(text.contains("property VE: true"));
    assert!(text.contains("D: 1\n"));

    let no = two_piece(dir.path(), "no.json", "-2", "-2");
    let out = gmsurf(&["analyze", s(&no), "--json"]);
    assert_eq!(code(&out), 1);
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["verdict"]["property_i"], false);
    assert_eq!(json["two_piece"]["d"], "4");
    assert_eq!(json["matrix"][0][0], "-2");
}

#[test]
fn analyze_reports_self_gluing_with_line() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(
        &path,
        "{\n \"pieces\": [{\"id\": 1, \"euler\": \"-1\", \"genus\": 1},\n  {\"id\": 2, \"euler\": \"-1\", \"genus\": 1}],\n \"tori\": [{\"from\": 1, \"to\": 2, \"p\": 1},\n  {\"from\": 2, \"to\": 2, \"p\": 1}]\n}\n",
    )
    .unwrap();
    let out = gmsurf(&["analyze", s(&path)]);
    assert_eq!(code(&out), 2);
    let err = stderr(&out);
    assert!(err.contains("self-gluing"), "{err}");
    assert!(err.contains("line 5"), "{err}");

    let missing = gmsurf(&["analyze", s(&dir.path().join("none.json"))]);
    assert_eq!(code(&missing), 2);
}

#[test]
fn certify_then_verify_round_trip() {
    let dir = TempDir::new().unwrap();
    let m = two_piece(dir.path(), "zero.json", "0", "0");
    let cert = dir.path().join("cert.json");
    let out = gmsurf(&["certify", s(&m), "--out", s(&cert)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&cert).unwrap()).unwrap();
    assert_eq!(json["a"], serde_json::json!(["2", "2"]));

    let out = gmsurf(&["verify", s(&m), s(&cert)]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).trim(), "ok");

    // flip one fiber coordinate
    let mut tampered = json.clone();
    let b = tampered["systems"][1]["b_minus"].as_str().unwrap().to_string();
    let flipped = if let Some(rest) = b.strip_prefix('-') {
        rest.to_string()
    } else if b == "0" {
        "1".to_string()
    } else {
        format!("-{b}")
    };
    tampered["systems"][1]["b_minus"] = serde_json::Value::String(flipped);
    let bad = dir.path().join("bad.json");
    fs::write(&bad, serde_json::to_string(&tampered).unwrap()).unwrap();
    let out = gmsurf(&["verify", s(&m), s(&bad)]);
    assert_eq!(code(&out), 4);
    assert!(stdout(&out).contains("violation:"));

    fs::write(&bad, "{not json").unwrap();
    assert_eq!(code(&gmsurf(&["verify", s(&m), s(&bad)])), 2);
}

#[test]
fn certify_negative_definite_is_unavailable() {
    let dir = TempDir::new().unwrap();
    let m = two_piece(dir.path(), "nd.json", "-2", "-2");
    let cert = dir.path().join("cert.json");
    let out = gmsurf(&["certify", s(&m), "--out", s(&cert)]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("NegativeDefinite"));
    assert!(!cert.exists());
}

#[test]
fn matrix_mode_examples() {
    let out = gmsurf(&["matrix", "[[-1,2],[2,-1]]"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("reduction a_prime"));

    let out = gmsurf(&["matrix", "[[1,1],[1,-1]]", "--json"]);
    assert_eq!(code(&out), 1);
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["verdict"]["property_i"], false);
    assert_eq!(json["verdict"]["property_ve"], false);

    let out = gmsurf_stdin(&["matrix"], "[[0,-1],[-1,0]]\n");
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("negative off-diagonal"));

    assert_eq!(code(&gmsurf(&["matrix", "[[0,1],[2,0]]"])), 2);
}

#[test]
fn reduction_certificates_verify() {
    let dir = TempDir::new().unwrap();
    let cert = dir.path().join("red.json");
    let out = gmsurf(&["matrix", "[[-1,2],[2,-1]]", "--out", s(&cert)]);
    assert_eq!(code(&out), 0);
    let out = gmsurf(&["verify", "[[-1,2],[2,-1]]", s(&cert), "--kind", "reduction"]);
    assert_eq!(code(&out), 0);
    // a different matrix: the recorded A' is no longer a reduction of it
    let out = gmsurf(&["verify", "[[-1,1],[1,-1]]", s(&cert), "--kind", "reduction"]);
    assert_eq!(code(&out), 4);

    let m = two_piece(dir.path(), "m.json", "-1/2", "-1/2");
    let out = gmsurf(&["verify", s(&m), s(&cert), "--kind", "reduction"]);
    assert_eq!(code(&out), 4);

    let out = gmsurf(&["matrix", "[[-2,1],[1,-2]]", "--out", s(&dir.path().join("x.json"))]);
    assert_eq!(code(&out), 3);
}

#[test]
fn gen_profiles_feed_analyze_and_certify() {
    let dir = TempDir::new().unwrap();
    let nd = dir.path().join("nd.json");
    let out = gmsurf(&["gen", "--pieces", "2", "--seed", "7", "--profile", "negdef", "--out", s(&nd)]);
    assert_eq!(code(&out), 0);
    assert_eq!(code(&gmsurf(&["analyze", s(&nd)])), 1);

    let pe = dir.path().join("pe.json");
    let out = gmsurf(&["gen", "--pieces", "3", "--seed", "1", "--profile", "posEig", "--out", s(&pe)]);
    assert_eq!(code(&out), 0);
    let cert = dir.path().join("pe-cert.json");
    let out = gmsurf(&["certify", s(&pe), "--out", s(&cert)]);
    assert!(code(&out) == 0 || stderr(&out).contains("vanishes"));
    if code(&out) == 0 {
        assert_eq!(code(&gmsurf(&["verify", s(&pe), s(&cert)])), 0);
    }

    let a = stdout(&gmsurf(&["gen", "--pieces", "4", "--seed", "3"]));
    let b = stdout(&gmsurf(&["gen", "--pieces", "4", "--seed", "3"]));
    assert_eq!(a, b);

    assert_eq!(code(&gmsurf(&["gen", "--pieces", "1"])), 2);
    assert_eq!(code(&gmsurf(&["gen", "--pieces", "3", "--profile", "weird"])), 2);
}

#[test]
fn cover_subcommands() {
    let check = |b: &str| code(&gmsurf(&["cover", "check", "--genus", "1", "--alpha", "2", "--boundary", b]));
    assert_eq!(check("2"), 1);
    assert_eq!(check("1,1"), 0);
    assert_eq!(check("3"), 2);

    let dir = TempDir::new().unwrap();
    let cert = dir.path().join("cover.txt");
    let spec = ["--genus", "1", "--alpha", "3", "--boundary", "3"];
    let mut args = vec!["cover", "find"];
    args.extend(spec);
    args.extend(["--seed", "5", "--out", s(&cert)]);
    assert_eq!(code(&gmsurf(&args)), 0);
    let text = fs::read_to_string(&cert).unwrap();
    assert!(text.starts_with("alpha 3\nx1 "));

    let mut args = vec!["cover", "verify"];
    args.extend(spec);
    args.push(s(&cert));
    let out = gmsurf(&args);
    assert_eq!(code(&out), 0);

    fs::write(&cert, "alpha 3\nx1 ()\ny1 ()\n").unwrap();
    assert_eq!(code(&gmsurf(&args)), 4);

    let brute = |g: &str, b: &str| {
        code(&gmsurf(&["cover", "brute", "--genus", g, "--alpha", "2", "--boundary", b]))
    };
    assert_eq!(brute("1", "2"), 1);
    assert_eq!(brute("1", "1,1"), 0);
    assert_eq!(brute("3", "1,1"), 2);
    let out = gmsurf(&[
        "cover", "find", "--genus", "1", "--alpha", "2", "--boundary", "2",
    ]);
    assert_eq!(code(&out), 1);
    assert_eq!(
        code(&gmsurf(&["cover", "check", "--genus", "0", "--alpha", "1", "--boundary", "1"])),
        2
    );
}
