use std::process::{Command, Output};

use nielsen_section::cli::{Report, Status, CHECK_NAMES, REPORT_SCHEMA};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nielsen-section")).args(args).output().expect("binary runs")
}

#[test]
fn verify_is_deterministic_and_round_trips() {
    let a = run(&["--no-timing", "--seed", "7"]);
    let b = run(&["--no-timing", "--seed", "7"]);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);

    let text = String::from_utf8(a.stdout).unwrap();
    let report = Report::from_json(&text).unwrap();
    assert_eq!(report.schema, REPORT_SCHEMA);
    assert!(report.passed);
    let names: Vec<_> = report.checks.iter().map(|c| c.name.as_str()).collect();
    assert_eq!(names, CHECK_NAMES);
    assert!(report.checks.iter().all(|c| c.status == Status::Pass && c.runtime_ms.is_none()));
    assert_eq!(report.to_json().trim(), text.trim());
}

#[test]
fn text_format_at_rank_four() {
    let out = run(&["--n", "4", "--format", "text", "--no-timing"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.ends_with("9/9 checks passed\n"), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 9);
}

#[test]
fn bad_configuration_exits_with_two() {
    for args in [
        &["--plateau-end", "0.7"][..],
        &["--n", "1"],
        &["--format", "yaml"],
        &["--samples", "300"],
        &["--dump", "nothing"],
        &["--dump", "jacobian", "--map", "H1"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"), "{args:?}");
    }
}

#[test]
fn psi_dump_shape() {
    let out = run(&["--dump", "psi"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("r,psi,psi_prime\n"));
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 10_000);
    let first: Vec<f64> = rows[0].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(first[1], 1.0);
}
