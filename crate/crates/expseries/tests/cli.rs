use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_expseries"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn solve(dir: &Path, cfg: &str) -> PathBuf {
    let out = dir.join(cfg);
    let o = run(&["solve", "--config", config(cfg).to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    out
}

#[test]
fn single_mode_solve_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    let table = solve(dir.path(), "euler_single_mode.json");
    let text = std::fs::read_to_string(&table).unwrap();
    let loaded = expseries::tablefile::from_str(&text).unwrap();
    assert_eq!(loaded.iter().filter(|(k, c)| !k.is_zero() && !c.is_zero()).count(), 1);
    let o = run(&["verify", "--table", table.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("closed_form: true"));
}

#[test]
fn incompatible_data_exits_3_naming_the_mode() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.json");
    let o = run(&[
        "solve",
        "--config",
        config("euler_incompatible.json").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 3);
    let e = stderr(&o);
    assert!(e.starts_with("error[incompatible]:"), "{e}");
    assert!(e.contains("(1,1,0)"), "{e}");
    assert!(!out.exists());
}

#[test]
fn decimal_rational_exits_2_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(config("euler_single_mode.json"))
        .unwrap()
        .replace("[-1, 25000]", "0.5");
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, text).unwrap();
    let o = run(&["solve", "--config", cfg.to_str().unwrap(), "--out", "unused.json"]);
    assert_eq!(code(&o), 2);
    let e = stderr(&o);
    assert!(e.starts_with("error[config]:"), "{e}");
    assert!(e.contains("euler.modes[0].b[1]"), "{e}");
    assert_eq!(e.trim_end().lines().count(), 1);
}

#[test]
fn corrupted_table_exits_4_with_the_mode() {
    let dir = tempfile::tempdir().unwrap();
    let table = solve(dir.path(), "euler_single_mode.json");
    let text = std::fs::read_to_string(&table).unwrap();
    assert!(text.contains("[1,25000]"));
    std::fs::write(&table, text.replacen("[1,25000]", "[1,24999]", 1)).unwrap();
    let o = run(&["verify", "--table", table.to_str().unwrap()]);
    assert_eq!(code(&o), 4);
    let e = stderr(&o);
    assert!(e.starts_with("error[verification]:"), "{e}");
    assert!(e.contains("divergence") && e.contains("(1,1,0)"), "{e}");
    assert!(e.contains("worst divergence"), "{e}");
}

#[test]
fn euler_grid_below_the_half_space_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let table = solve(dir.path(), "euler_single_mode.json");
    let o = run(&["verify", "--table", table.to_str().unwrap(), "--grid", "-1:1:3,0:1:3,0:1:3"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("x1"));
}

#[test]
fn bounds_on_admissible_table() {
    let dir = tempfile::tempdir().unwrap();
    let table = solve(dir.path(), "euler_two_mode.json");
    let o = run(&["bounds", "--table", table.to_str().unwrap(), "--epsilon", "1/2"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("violations: 0"));
    let o = run(&["bounds", "--table", table.to_str().unwrap(), "--epsilon", "1/4"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn bounds_rejects_ns_tables() {
    let dir = tempfile::tempdir().unwrap();
    let table = solve(dir.path(), "ns_forced.json");
    let o = run(&["bounds", "--table", table.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn abel_default_run() {
    let o = run(&["abel", "--n-max", "40", "--trials", "20", "--k-max", "40", "--cor3-max", "3"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = String::from_utf8_lossy(&o.stdout).into_owned();
    assert!(out.contains("abel_identity_i: 800 instances, 0 failures"), "{out}");
}

#[test]
fn export_row_count_matches_grid() {
    let dir = tempfile::tempdir().unwrap();
    let table = solve(dir.path(), "ns_forced.json");
    let csv = dir.path().join("f.csv");
    let o = run(&[
        "export",
        "--table",
        table.to_str().unwrap(),
        "--grid",
        "-1:1:3,0:1:2,-0.5:0.5:4",
        "--t",
        "0:1:5",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "x1,x2,x3,t,u1,u2,u3,p,r1,r2,r3,div");
    assert_eq!(lines.count(), 3 * 2 * 4 * 5);
}

#[test]
fn solve_is_byte_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for cfg in ["euler_two_mode.json", "ns_forced.json"] {
        let x = std::fs::read(solve(a.path(), cfg)).unwrap();
        let y = std::fs::read(solve(b.path(), cfg)).unwrap();
        assert_eq!(x, y, "{cfg}");
    }
}

#[test]
fn missing_file_and_unknown_flag_exit_2() {
    let o = run(&["verify", "--table", "/nonexistent/table.json"]);
    assert_eq!(code(&o), 2);
    let o = run(&["solve", "--bogus"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).starts_with("error[config]:"));
    assert_eq!(code(&run(&["--help"])), 0);
}
