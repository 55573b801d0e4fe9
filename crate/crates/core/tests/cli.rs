mod common;

use std::process::{Command, Output};

use common::fixture_path;

fn mfc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mfc"))
        .args(args)
        .output()
        .unwrap()
}

#[test]
fn solve_fixture_to_json_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.json");
    let fixture = fixture_path();
    let res = mfc(&[
        "solve",
        "--input",
        fixture.to_str().unwrap(),
        "--method",
        "knapsack",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let doc = mfc_grouping::read_grouping(&out).unwrap();
    let members: usize = doc.groups.iter().map(|g| g.members.len()).sum();
    assert_eq!(members, 24);
}

#[test]
fn exit_codes() {
    assert_eq!(
        mfc(&["solve", "--generate", "5,2,2,1", "--cl", "3", "--cu", "3"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        mfc(&["solve", "--generate", "12,5,2,1", "--method", "oracle"])
            .status
            .code(),
        Some(4)
    );
    assert_eq!(
        mfc(&["solve", "--input", "/no/such/file.csv"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(mfc(&["solve", "--no-such-flag"]).status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(
        &bad,
        "ID,Name,Gender,wish1,wish2,Time\n1,a,F,1,17,5\n2,b,M,1,2,6\n",
    )
    .unwrap();
    let res = mfc(&["solve", "--input", bad.to_str().unwrap(), "--topics", "16"]);
    assert_eq!(res.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&res.stderr).contains("invalid topic index"));
}

#[test]
fn sweep_csv_has_one_row_per_method_and_bound() {
    let fixture = fixture_path();
    let res = mfc(&[
        "sweep",
        "--input",
        fixture.to_str().unwrap(),
        "--cl-range",
        "2..8",
    ]);
    assert!(res.status.success());
    let text = String::from_utf8(res.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 7);
}

#[test]
fn generate_then_validate() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("gen.csv");
    let res = mfc(&[
        "generate",
        "--preset",
        "mathematics",
        "--seed",
        "4",
        "--out",
        file.to_str().unwrap(),
    ]);
    assert!(res.status.success());
    let head = std::fs::read_to_string(&file).unwrap();
    assert!(head
        .lines()
        .take(2)
        .any(|l| l.starts_with('#') && l.contains("seed=4")));
    let res = mfc(&["validate", "--input", file.to_str().unwrap()]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stdout)
    );
}

#[test]
fn validate_flags_a_priority_order_violation() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("v.csv");
    // Student 1 registered first but has the lower priority on topic 1.
    std::fs::write(
        &file,
        "ID,Name,Gender,wish1,Time,T1,T2\n1,a,F,1,1,0.5,0\n2,b,M,1,2,1,0\n3,c,M,2,3,0,1\n",
    )
    .unwrap();
    let res = mfc(&["validate", "--input", file.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&res.stdout).contains("priority_order"));
}
