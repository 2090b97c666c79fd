use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use collatz_octave::fixtures::{
    parse_codebook, parse_grid, parse_table2, write_codebook, write_grid,
};
use collatz_octave::report::read_paths;
use collatz_octave_core::codebook::Provenance;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_collatz-octave"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().expect("exited normally")
}

fn stdout(args: &[&str]) -> Vec<u8> {
    run(args).stdout
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&["audit", "--range", "0..5"]), 2);
    assert_eq!(code(&["audit", "--range", "9..5"]), 2);
    assert_eq!(code(&["audit", "--range", "1..5", "--jobs", "0"]), 2);
    assert_eq!(code(&["reproduce", "table9"]), 2);
    assert_eq!(code(&["reproduce", "tableB1", "--range", "1..3"]), 2);
    assert_eq!(code(&["graph-export", "--format", "csv"]), 2);
    assert_eq!(code(&["trajectory", "--range", "x..3"]), 2);
    assert_eq!(
        code(&[
            "reproduce",
            "table1",
            "--fixture-dir",
            "/nonexistent/fixtures"
        ]),
        2
    );
    assert_eq!(code(&[]), 2);
}

#[test]
fn help_exits_zero() {
    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&["--version"]), 0);
}

#[test]
fn clean_commands_exit_zero() {
    assert_eq!(code(&["graph-export"]), 0);
    assert_eq!(code(&["reproduce", "table1"]), 0);
    assert_eq!(code(&["reproduce", "figure2"]), 0);
    assert_eq!(code(&["paths", "enumerate"]), 0);
    assert_eq!(code(&["codebook", "generate"]), 0);
    assert_eq!(code(&["trajectory", "--range", "1..50"]), 0);
    assert_eq!(code(&["audit", "--range", "1..2000"]), 0);
}

#[test]
fn findings_exit_one() {
    // The transcription disagrees with exact arithmetic at h = 9 and h = 15.
    assert_eq!(code(&["reproduce", "table2"]), 1);
    assert_eq!(code(&["reproduce", "tableB1"]), 1);
    assert_eq!(code(&["codebook", "diff"]), 1);
    assert_eq!(code(&["paths", "diff"]), 1);
    assert_eq!(code(&["paths", "cycles"]), 1);
    // A cap of 3 steps cannot finish h = 7.
    assert_eq!(code(&["trajectory", "--range", "7", "--step-cap", "3"]), 1);
}

#[test]
fn codebook_round_trips_through_its_own_parser() {
    let csv = stdout(&["codebook", "generate"]);
    let book = parse_codebook(&csv[..], "generated", Provenance::Derived).unwrap();
    assert_eq!(book.len(), 128);
    let mut again = Vec::new();
    write_codebook(&book, &mut again).unwrap();
    assert_eq!(again, csv);
}

#[test]
fn grids_round_trip() {
    for table in ["table1", "tableB1"] {
        let csv = stdout(&["reproduce", table]);
        let grid = parse_grid(&csv[..], table).unwrap();
        let mut again = Vec::new();
        write_grid(&grid, &mut again).unwrap();
        assert_eq!(again, csv, "{table}");
    }
    let rows = parse_table2(&stdout(&["reproduce", "table2"])[..]).unwrap();
    assert_eq!(rows.len(), 16);
    assert_eq!(
        rows.iter().map(|r| r.h).collect::<Vec<_>>(),
        (1..=16).collect::<Vec<_>>()
    );
}

#[test]
fn paper_paths_parse_back() {
    let records = read_paths(&stdout(&["paths", "enumerate"])[..]).unwrap();
    assert_eq!(records.len(), 5680);
    assert!(records.iter().all(|r| r.net_budget <= 0));
    assert!(records
        .iter()
        .all(|r| r.even_steps + r.odd_steps == r.length));
    assert!(records
        .iter()
        .enumerate()
        .all(|(i, r)| r.path == i as u64 + 1));
}

#[test]
fn outputs_are_deterministic() {
    for args in [
        &["reproduce", "table1"][..],
        &["codebook", "diff"],
        &["paths", "cycles"],
        &["trajectory", "--range", "1..300"],
    ] {
        assert_eq!(stdout(args), stdout(args), "{args:?}");
    }
    let one = stdout(&[
        "audit", "--range", "1..20000", "--jobs", "1", "--format", "csv",
    ]);
    let many = stdout(&[
        "audit", "--range", "1..20000", "--jobs", "4", "--format", "csv",
    ]);
    assert_eq!(one, many);
}

#[test]
fn audit_record_for_1639() {
    let out = String::from_utf8(stdout(&["audit", "--range", "1639"])).unwrap();
    let mut lines = out.lines();
    let record: serde_json::Value = serde_json::from_str(lines.next().unwrap()).unwrap();
    assert_eq!(record["h1"], 1639);
    assert!(record["terminated"].as_bool().unwrap());
    let episode = record["episodes"]
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e["entry_value"] == 1663)
        .expect("episode entered at 1663");
    assert_eq!(episode["entry_A"], 208);
    assert_eq!(episode["t"], 4);
    let summary: serde_json::Value = serde_json::from_str(lines.next().unwrap()).unwrap();
    assert!(summary.get("summary").is_some());
    assert!(lines.next().is_none());
}

#[test]
fn out_writes_table_and_diff_side_by_side() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t2.csv");
    let status = run(&["reproduce", "table2", "--out", out.to_str().unwrap()]).status;
    assert_eq!(status.code(), Some(1));
    assert!(out.is_file());
    let diff = fs::read_to_string(dir.path().join("t2.diff.csv")).unwrap();
    assert!(diff.lines().count() > 1);
    assert!(diff.contains("h=15"));
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 2);
}

#[test]
fn fixture_dir_is_read() {
    let dir = tempfile::tempdir().unwrap();
    let bundled = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    for entry in fs::read_dir(&bundled).unwrap() {
        let entry = entry.unwrap();
        fs::copy(entry.path(), dir.path().join(entry.file_name())).unwrap();
    }
    let d = dir.path().to_str().unwrap();
    assert_eq!(code(&["reproduce", "table1", "--fixture-dir", d]), 0);

    // Corrupt one cell; the diff must notice.
    let t1 = dir.path().join("table1.csv");
    let text = fs::read_to_string(&t1).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let mut cells: Vec<String> = lines[1].split(',').map(String::from).collect();
    cells[2] = "999".into();
    lines[1] = cells.join(",");
    fs::write(&t1, lines.join("\n") + "\n").unwrap();
    assert_eq!(code(&["reproduce", "table1", "--fixture-dir", d]), 1);
}
