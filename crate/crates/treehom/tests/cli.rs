use std::fs;
use std::path::PathBuf;
use std::process::Command;

use treehom::cli::{run, EXIT_NEGATIVE, EXIT_OK, EXIT_USAGE};

fn file(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("treehom-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn call(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let mut full = vec!["treehom"];
    full.extend_from_slice(args);
    let code = run(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

const Z6: &str = "6 5\n0 1\n2 1\n2 3\n4 3\n4 5\n";
const ARC: &str = "2 1\n0 1\n";

#[test]
fn recognize_reports_pattern_and_pair() {
    let z6 = file("z6.txt", Z6);
    let (code, out, _) = call(&["recognize", z6.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("Z6 "), "{out}");
    assert!(out.contains("pair "));
    let arc = file("arc.txt", ARC);
    let (code, out, _) = call(&["recognize", arc.to_str().unwrap()]);
    assert_eq!((code, out.trim()), (EXIT_OK, "PATTERN-FREE"));
}

#[test]
fn decompose_and_hm_exit_codes() {
    let z6 = file("z6b.txt", Z6);
    let arc = file("arcb.txt", ARC);
    assert_eq!(call(&["decompose", z6.to_str().unwrap()]).0, EXIT_NEGATIVE);
    let (code, out, _) = call(&["decompose", arc.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!(!out.trim().is_empty());
    let (code, out, _) = call(&["hm", arc.to_str().unwrap()]);
    assert_eq!((code, out.trim()), (EXIT_OK, "HM3 OK"));
    assert_eq!(call(&["hm", z6.to_str().unwrap()]).0, EXIT_NEGATIVE);
}

#[test]
fn solve_and_oracle_agree() {
    let arc = file("arcc.txt", ARC);
    let yes = file("yes.txt", "3 2\n0 1\n2 1\n");
    let no = file("no.txt", "3 2\n0 1\n1 2\n");
    let (code, out, _) = call(&["solve", arc.to_str().unwrap(), yes.to_str().unwrap()]);
    assert_eq!((code, out.trim()), (EXIT_OK, "YES"));
    let (code, out, _) = call(&["oracle", arc.to_str().unwrap(), yes.to_str().unwrap()]);
    assert_eq!((code, out.trim()), (EXIT_OK, "0 1 0"));
    let (code, out, _) = call(&["solve", arc.to_str().unwrap(), no.to_str().unwrap()]);
    assert_eq!((code, out.trim()), (EXIT_NEGATIVE, "NO"));
    assert_eq!(call(&["oracle", arc.to_str().unwrap(), no.to_str().unwrap()]).0, EXIT_NEGATIVE);
    let z6 = file("z6c.txt", Z6);
    assert_eq!(call(&["solve", z6.to_str().unwrap(), yes.to_str().unwrap()]).0, EXIT_USAGE);
}

#[test]
fn witness_wave_and_ladder() {
    let z6 = file("z6d.txt", Z6);
    let (code, out, _) = call(&["witness", z6.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("VERIFIED"), "{out}");
    let path = file("path.txt", "4 3\n0 1\n1 2\n3 2\n");
    let (code, out, _) = call(&["wave", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("U:") && out.contains("V:"), "{out}");
    assert_eq!(call(&["wave", z6.to_str().unwrap()]).0, EXIT_NEGATIVE);
    assert_eq!(call(&["ladder", "2"]).0, EXIT_OK);
    assert_eq!(call(&["ladder", "0"]).0, EXIT_USAGE);
}

#[test]
fn json_output_parses() {
    let arc = file("arce.txt", ARC);
    let (code, out, _) = call(&["--json", "recognize", arc.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    assert!(v["pattern"].is_null());
}

#[test]
fn gen_and_crosscheck() {
    let (code, a, _) = call(&["gen", "pftree", "--seed", "5", "--n", "12"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(a, call(&["gen", "pftree", "--seed", "5", "--n", "12"]).1);
    let t = treehom::io::parse_digraph(&a).unwrap();
    assert!(t.is_tree() && t.n() == 12);
    let (code, out, _) = call(&["crosscheck", "--samples", "30", "--seed", "3"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.trim_end().ends_with("30/30 OK"), "{out}");
}

#[test]
fn usage_errors() {
    assert_eq!(call(&["recognize"]).0, EXIT_USAGE);
    assert_eq!(call(&["recognize", "/nonexistent/file"]).0, EXIT_USAGE);
    let bad = file("bad.txt", "2 1\n0 x\n");
    let (code, _, err) = call(&["recognize", bad.to_str().unwrap()]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("line 2"), "{err}");
    assert_eq!(call(&["--help"]).0, EXIT_OK);
}

#[test]
fn binary_runs() {
    let arc = file("arcf.txt", ARC);
    let out = Command::new(env!("CARGO_BIN_EXE_treehom")).args(["recognize", arc.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_OK));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "PATTERN-FREE");
    let bad = Command::new(env!("CARGO_BIN_EXE_treehom")).arg("nonsense").output().unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_USAGE));
}
