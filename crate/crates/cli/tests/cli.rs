use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_measbound")).args(args).output().expect("spawn measbound")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("measbound-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn bound_prints_schema_header_and_rows() {
    let text = stdout(&["bound", "--function", "matyas", "--domain", "box", "--r", "3", "--method", "pfm-hankel", "--all"]);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# measbound bound schema=1 precision=256"));
    assert_eq!(lines[1], "r,method,value");
    assert_eq!(lines.len(), 2 + 4);
}

#[test]
fn bound_reads_polynomial_file() {
    let path = scratch("sq.txt");
    std::fs::write(&path, "# x^2\n1 2\n").unwrap();
    let text = stdout(&["bound", "--poly", path.to_str().unwrap(), "--r", "2", "--method", "full"]);
    let row = text.lines().last().unwrap();
    let value: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
    assert!(value > 0.0 && value < 1.0 / 3.0, "{row}");
}

#[test]
fn precision_flag_reaches_the_header() {
    let text = stdout(&["--precision", "128", "bound", "--function", "booth", "--r", "1", "--method", "pfm-cheb"]);
    assert!(text.lines().next().unwrap().contains("precision=128"));
}

#[test]
fn maxcut_gen_is_deterministic_and_readable() {
    let a = stdout(&["maxcut", "gen", "--n", "5", "--p", "1/2", "--seed", "9"]);
    let b = stdout(&["maxcut", "gen", "--n", "5", "--p", "1/2", "--seed", "9"]);
    assert_eq!(a, b);
    let path = scratch("g.txt");
    std::fs::write(&path, &a).unwrap();
    let bounds = stdout(&["maxcut", "bounds", "--instance", path.to_str().unwrap(), "--r-max", "2"]);
    assert!(bounds.starts_with('#'));
    assert!(bounds.contains("sense=max"));
}

#[test]
fn out_flag_writes_file() {
    let path = scratch("fig.csv");
    let _ = std::fs::remove_file(&path);
    stdout(&["--out", path.to_str().unwrap(), "figures", "fig4", "--r-max", "3"]);
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with('#'));
}

#[test]
fn unknown_function_fails_cleanly() {
    let out = run(&["bound", "--function", "nosuch", "--r", "1"]);
    assert!(!out.status.success());
    assert!(!out.stderr.is_empty());
}

#[test]
fn selftest_passes() {
    let text = stdout(&["selftest"]);
    assert!(!text.contains("FAIL"), "{text}");
}
