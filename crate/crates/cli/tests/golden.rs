use std::path::PathBuf;
use std::process::Command;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name).to_string_lossy().into_owned()
}

fn fbc(args: &[&str]) -> (String, String, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_fbc")).args(args).output().unwrap();
    (String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap(), out.status.code().unwrap())
}

fn expect(args: &[&str], stdout: &str, code: i32) {
    let (out, err, c) = fbc(args);
    assert_eq!(out, stdout, "stdout of {args:?} (stderr: {err})");
    assert_eq!(c, code, "exit code of {args:?} (stderr: {err})");
}

#[test]
fn eval_verdicts() {
    expect(&["eval", &data("e_self.fbm")], "FREEZE repeats (0,0) first at depth 0 height=1\n", 0);
    expect(&["eval", &data("loop.fbm")], "DIVERGES cycle 0..1 height=0\n", 0);
    expect(&["eval", &data("deep.fbm"), "--steps", "50"], "UNKNOWN steps budget height=0\n", 2);
    expect(&["--format", "tsv", "eval", &data("loop.fbm")], "verdict\tvalue\tsteps\theight\tdetail\nDIVERGES\t-\t1\t0\tcycle 0..1\n", 0);
}

#[test]
fn input_errors_exit_one() {
    let (_, err, c) = fbc(&["compile", &data("y0_halts.fbm"), "--sigma", "2"]);
    assert_eq!(c, 1);
    assert!(err.contains("bad prefix"), "{err}");
    assert_eq!(fbc(&["eval"]).2, 1);
    assert_eq!(fbc(&["eval", &data("missing.fbm")]).2, 1);
    assert_eq!(fbc(&["ordinal", "cmp", "w+", "1"]).2, 1);
    assert_eq!(fbc(&["--help"]).2, 0);
}

#[test]
fn compile_verify_passes() {
    let (out, _, c) = fbc(&["compile", &data("y0_halts.fbm"), "--alpha", "0", "--L", "2", "--verify"]);
    assert_eq!(c, 0);
    let rows: Vec<&str> = out.lines().filter(|l| l.starts_with("PASS") || l.starts_with("FAIL")).collect();
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().all(|r| r.starts_with("PASS")), "{out}");
    assert!(out.contains("PASS 10|c:0 converges height=0"));
    assert!(out.contains("PASS 01|c:1 diverges height=0"));
}

#[test]
fn compile_writes_code_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let (_, err, c) = fbc(&["compile", &data("y0_halts.fbm"), "--alpha", "0", "--L", "2", "--out", out]);
    assert_eq!(c, 0, "{err}");
    let down = dir.path().join("zeta_down.code");
    assert!(down.exists() && dir.path().join("zeta_up.code").exists());
    let down = down.to_str().unwrap();
    expect(&["borel", "member", down, "--y", "10|c:0"], "in\n", 0);
    expect(&["borel", "member", down, "--y", "01|c:0"], "out\n", 0);
}

#[test]
fn borel_commands() {
    expect(&["borel", "rank", &data("b.code")], "2\n", 0);
    expect(&["borel", "rank", &data("b.code"), "--le", "1"], "no\n", 0);
    expect(&["borel", "rank", &data("b.code"), "--le", "2"], "yes\n", 0);
    expect(&["borel", "member", &data("a.code"), "--y", "01|c:0"], "in\n", 0);
    expect(&["borel", "member", &data("a.code"), "--y", "1|c:0"], "out\n", 0);
}

#[test]
fn ittm_runs() {
    expect(
        &["ittm", "run", &data("halt.tm"), "--alpha", "3", "--beta", "4"],
        "time\tstate\thead\ttape\tlimit\n0\ts\t0\t0000\t\n1\th\t0\t0000\t\noutcome\thalted\nhalted at 1 with tape {}\n",
        0,
    );
    let (out, _, c) = fbc(&["ittm", "run", &data("blinker.tm"), "--alpha", "w+2", "--beta", "4"]);
    assert_eq!(c, 0);
    assert!(out.contains("w*1\tb\t0\t0000\tunit 1..3\n"), "{out}");
    assert!(out.ends_with("halted at w*1 + 1 with tape {}\n"), "{out}");
    let (out, _, c) = fbc(&["ittm", "run", &data("counter.tm"), "--alpha", "w*2", "--beta", "w", "--max-block", "50"]);
    assert_eq!(c, 2);
    assert!(out.contains("outcome\tunknown\n"), "{out}");
}

#[test]
fn ittm_compute_copies_input() {
    let (out, err, c) = fbc(&["ittm", "compute", &data("copy.tm"), "--alpha", "w*2", "--beta", "w", "--input", "1,3,5", "--params", "6"]);
    assert_eq!(c, 0, "{err}");
    assert_eq!(out, "{1, 3, 5}\n");
}

#[test]
fn structure_commands() {
    expect(&["struct", "encode", &data("z2.pres"), "--bits", "24"], "111100000000010000000000\n", 0);
    expect(&["struct", "nat", "fixture:echo", &data("omega5.pres"), "--n", "3"], "3\n", 0);
    let args = ["struct", "harness", "expansion", "fixture:inverse", &data("z4.pres"), &data("z4_inv.pres"), "--perms", "(0 3)(1 5);(2 4)"];
    let (out, err, c) = fbc(&args);
    assert_eq!(c, 0, "{out}{err}");
    let args = ["struct", "harness", "reduction", "fixture:copy", &data("z4.pres"), &data("z2.pres"), "--perms", "()"];
    assert_eq!(fbc(&args).2, 3);
}

#[test]
fn ordinal_commands() {
    expect(&["ordinal", "cmp", "w+3", "w*2"], "<\n", 0);
    expect(&["ordinal", "cmp", "3+w", "w"], "=\n", 0);
    expect(&["ordinal", "add", "w+3", "w"], "w*2\n", 0);
}

#[test]
fn runs_are_reproducible() {
    let args = ["ittm", "run", &data("blinker.tm"), "--alpha", "w*2", "--beta", "8"];
    assert_eq!(fbc(&args), fbc(&args));
    let seq = ["--sequential", "compile", &data("nested.fbm"), "--alpha", "0", "--L", "3", "--verify"];
    let par = &seq[1..];
    assert_eq!(fbc(&seq).0, fbc(par).0);
}
