use std::io::Write;
use std::process::Command;
use std::time::Instant;

use radial_lab::verify::{self, VerifyConfig, CRITERIA};

#[test]
fn all_criteria_pass() {
    let cfg = VerifyConfig::default();
    let mut failed = Vec::new();
    // Written past the test harness capture so the verdicts show in every run.
    let mut out = std::io::stdout().lock();
    writeln!(out).unwrap();
    for (id, _) in CRITERIA {
        let start = Instant::now();
        let c = verify::run_criterion(id, &cfg);
        let secs = start.elapsed().as_secs_f64();
        writeln!(out, "{} {:>2} {} ({secs:.2} s)", if c.pass { "PASS" } else { "FAIL" }, c.id, c.name).unwrap();
        if !c.pass {
            writeln!(out, "    {}", c.details).unwrap();
            failed.push(c.name);
        }
    }
    assert!(failed.is_empty(), "failed: {failed:?}");
}

#[test]
fn report_lists_every_criterion_once() {
    let report = verify::run_all(&VerifyConfig { seed: 3, ..Default::default() });
    let ids: Vec<u32> = report.criteria.iter().map(|c| c.id).collect();
    assert_eq!(ids, (1..=11).collect::<Vec<_>>());
    assert_eq!(report.all_pass, report.criteria.iter().all(|c| c.pass));
    let v: serde_json::Value = serde_json::from_str(&report.to_json_string()).unwrap();
    assert_eq!(v["seed"], 3);
    assert_eq!(v["criteria"].as_array().unwrap().len(), 11);
}

#[test]
fn verify_binary_is_byte_deterministic() {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_radial-lab"))
            .args(["verify", "--seed", "0"])
            .output()
            .expect("binary runs")
    };
    let a = run();
    let b = run();
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(b.status.code(), Some(0));
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
    let lines = String::from_utf8(a.stderr).unwrap();
    assert_eq!(lines.lines().filter(|l| l.starts_with("PASS")).count(), 11);
}
