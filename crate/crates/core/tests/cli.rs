use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use market_moments::app::{self, EXIT_OK, EXIT_ORACLE};
use market_moments::io;
use market_moments::pipeline::{Family, PipelineReport, ReportRow, RowStatus};
use tempfile::TempDir;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_market-moments"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

const LOG: &str = "time,investor_id,side,price,volume
0,a,B,10,2
1,a,B,8,3
2,b,B,9,4
3,a,S,12,5
4,b,S,11,4
5,c,B,10,1
";

#[test]
fn report_from_input_file() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "log.csv", LOG);
    let out = bin(&["--input", &input, "--window", "3", "--tau", "1", "--oracle"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let rows = io::parse_report_csv(out.stdout.as_slice()).unwrap();
    assert!(rows.iter().any(|r| r.family == Family::Price));
    let sales: Vec<&ReportRow> = rows
        .iter()
        .filter(|r| r.family == Family::ActualSale)
        .collect();
    assert_eq!(sales.len(), 2);
    // a sells 5 against lots at 10 and 8: g = 60 / 44
    let a = sales
        .iter()
        .find(|r| r.investor_id.as_deref() == Some("a"))
        .unwrap();
    assert!((a.mean.unwrap() - 60.0 / 44.0).abs() < 1e-15);
    assert!(rows.iter().all(|r| r.status != RowStatus::OracleFail));
}

#[test]
fn json_output_to_file() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "log.csv", LOG);
    let report = dir.path().join("report.json");
    let out = bin(&[
        "--input",
        &input,
        "--window",
        "3",
        "--format",
        "json",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let value: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    let rows = value.as_array().unwrap();
    assert!(!rows.is_empty());
    assert!(rows
        .iter()
        .all(|r| r.get("family").is_some() && r.get("volatility").is_some()));
}

#[test]
fn simulation_settings_file_and_event_log() {
    let dir = TempDir::new().unwrap();
    let config = write(
        &dir,
        "sim.conf",
        "# small market\nseed = 7\ninvestors = 4\nticks = 400\nprice_model = walk:50,0,0.01\nvolume_model = uniform:1,20\nwindow = 50\n",
    );
    let events = dir.path().join("events.csv");
    let events_arg = events.to_str().unwrap();
    let first = bin(&["--sim", &config, "--events-out", events_arg]);
    assert_eq!(
        code(&first),
        0,
        "{}",
        String::from_utf8_lossy(&first.stderr)
    );
    let log = io::read_events(&events).unwrap();
    assert_eq!(log.len(), 400);

    // same settings reproduce the report; the logged events reproduce it too
    let second = bin(&["--sim", &config]);
    assert_eq!(first.stdout, second.stdout);
    let replay = bin(&["--input", events_arg, "--window", "50"]);
    assert_eq!(code(&replay), 0);
    assert_eq!(first.stdout, replay.stdout);

    // a flag overrides the file
    let other = bin(&["--sim", &config, "--seed", "8"]);
    assert_ne!(first.stdout, other.stdout);
}

#[test]
fn tau_sweep_writes_curve() {
    let out = bin(&["--seed", "3", "--window", "100", "--tau-sweep", "1,5,20"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().contains("volatility"));
    assert!(lines.count() > 0);
}

#[test]
fn stress_fixture_runs() {
    let out = bin(&[
        "--stress",
        "one_sale_per_investor",
        "--window",
        "8",
        "--oracle",
    ]);
    assert_eq!(code(&out), 0);
    let rows = io::parse_report_csv(out.stdout.as_slice()).unwrap();
    assert!(rows
        .iter()
        .any(|r| r.family == Family::ActualMarket && r.investor_count == Some(8)));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&bin(&["--bogus"])), 1);
    assert_eq!(code(&bin(&["--window", "0"])), 1);
    assert_eq!(code(&bin(&["--policy", "random"])), 1);
    assert_eq!(code(&bin(&["--format", "xml"])), 1);
    assert_eq!(code(&bin(&["--stress", "nope"])), 1);
    assert_eq!(code(&bin(&["--input", "/nonexistent/log.csv"])), 1);
    assert_eq!(code(&bin(&["--help"])), 0);
}

#[test]
fn parse_and_ordering_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let bad_price = write(
        &dir,
        "bad.csv",
        "time,investor_id,side,price,volume\n0,a,B,-1,2\n",
    );
    let out = bin(&["--input", &bad_price]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2") && err.contains("price"), "{err}");

    let unordered = write(
        &dir,
        "order.csv",
        "time,investor_id,side,price,volume\n5,a,B,1,2\n4,a,B,1,2\n",
    );
    assert_eq!(code(&bin(&["--input", &unordered])), 2);

    let bad_side = write(
        &dir,
        "side.csv",
        "time,investor_id,side,price,volume\n0,a,X,1,2\n",
    );
    assert_eq!(code(&bin(&["--input", &bad_side])), 2);
}

#[test]
fn oversold_events_are_skipped_not_fatal() {
    let dir = TempDir::new().unwrap();
    let input = write(
        &dir,
        "over.csv",
        "time,investor_id,side,price,volume\n0,a,B,10,1\n1,a,S,11,5\n2,b,B,10,1\n3,b,S,12,1\n",
    );
    let out = bin(&["--input", &input, "--window", "2"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("skipped a at 1"));
}

#[test]
fn oracle_failures_map_to_exit_three() {
    let mut row = ReportRow::new(0, 1, Family::Price);
    let mut report = PipelineReport {
        rows: vec![row.clone()],
        ..PipelineReport::default()
    };
    assert_eq!(app::report_exit_code(&report), EXIT_OK);
    row.status = RowStatus::OracleFail;
    report.rows.push(row);
    assert_eq!(app::report_exit_code(&report), EXIT_ORACLE);
    assert_eq!(EXIT_ORACLE, 3);
}

#[test]
fn report_file_in_missing_directory_is_an_io_error() {
    let out = bin(&[
        "--seed",
        "1",
        "--out",
        Path::new("/nonexistent/dir/r.csv").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
}
