use std::fs;
use std::process::{Command, Output};

fn unruh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_unruh"))
        .args(args)
        .env_remove("UNRUH_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn sweep_to_stdout() {
    let o = unruh(&["sweep", "--family", "phi-plus", "--config", "ab-i", "--alpha", "pi/4", "--gamma-steps", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[1].ends_with(",5.00000000000e-1"), "{}", lines[1]);
}

#[test]
fn preset_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for (path, workers) in [(&a, "1"), (&b, "3")] {
        let o = unruh(&["sweep", "--preset", "fig5", "--out", path.to_str().unwrap(), "--workers", workers]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (a, b) = (fs::read(a).unwrap(), fs::read(b).unwrap());
    assert_eq!(a, b);
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 1 + 4 * 4 * 181);
}

#[test]
fn workers_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_unruh"))
        .args(["sweep", "--preset", "fig2", "--gamma-steps", "3"])
        .env("UNRUH_WORKERS", "0")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("invalid workers"));
}

#[test]
fn invalid_field_is_named() {
    let o = unruh(&["sweep", "--family", "phi-minus", "--qr", "1.2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("invalid qR"));
    let o = unruh(&["sweep", "--family", "werner"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("invalid fidelity"));
}

#[test]
fn config_file_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.toml");
    let out = dir.path().join("w.csv");
    fs::write(
        &cfg,
        format!(
            "family = \"werner\"\nconfigs = [\"ab-ii\"]\nfidelities = [0.5, 0.9]\nq_r = [0.8]\nout = {:?}\n[gamma]\nsteps = 4\n",
            out.to_str().unwrap()
        ),
    )
    .unwrap();
    let o = unruh(&["sweep", "--config-file", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 4);
    assert!(text.lines().skip(1).all(|l| l.starts_with("werner,ab-ii,")));
}

#[test]
fn verify_reports_each_check() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.txt");
    let stem = dir.path().join("oracle");
    let o = unruh(&[
        "verify",
        "--report",
        report.to_str().unwrap(),
        "--oracle-out",
        stem.to_str().unwrap(),
    ]);
    let text = stdout(&o);
    assert_eq!(fs::read_to_string(&report).unwrap(), text);
    assert!(stem.with_extension("json").exists() && stem.with_extension("txt").exists());

    let failing: Vec<&str> = text.lines().filter(|l| l.starts_with("FAIL")).collect();
    let flagged = text.lines().filter(|l| l.starts_with("FLAGGED")).count();
    assert_eq!(flagged, 3, "{text}");
    assert!(text.lines().any(|l| l.starts_with("PASS") && l.contains("convergence")));
    assert!(!text.lines().any(|l| l.starts_with("FAIL") && l.contains("convergence")));
    // the one disagreement: anti-Bob's particle mode keeps a small
    // negativity for phi-minus at qR = 3/4
    assert_eq!(failing.len(), 1, "{text}");
    assert!(failing[0].contains("zero pattern phi-minus qR=3/4"));
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn verify_alternate_ordering_fails_reproduction() {
    let o = unruh(&["verify", "--ordering", "alternate"]);
    let text = stdout(&o);
    assert!(text.starts_with("ordering: alternate"));
    assert!(text
        .lines()
        .any(|l| l.starts_with("FAIL") && l.contains("creation operator reproduces particle ket")));
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unknown_preset_and_ordering() {
    let o = unruh(&["sweep", "--preset", "fig9"]);
    assert_eq!(o.status.code(), Some(2));
    let o = unruh(&["verify", "--ordering", "sideways"]);
    assert!(!o.status.success());
}
