use std::f64::consts::FRAC_PI_4;

use unruh_core::oracle::{self, CoeffArgs, DiffGrid, TableStatus};
use unruh_core::sweep::{self, GammaGrid, SweepConfig, SweepError};
use unruh_core::{DetectorConfig, Family, Ordering, UnruhParams};

fn csv_of(cfg: &SweepConfig) -> String {
    let mut buf = Vec::new();
    sweep::write_csv(&sweep::run_sweep(cfg).unwrap(), &mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

#[test]
fn single_point_sweep_has_one_row() {
    let mut cfg = SweepConfig::new(Family::PhiPlus);
    cfg.configs = vec![DetectorConfig::AB_I];
    cfg.gamma = GammaGrid {
        start: 0.0,
        stop: 0.0,
        steps: 1,
    };
    let text = csv_of(&cfg);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "family,config,alpha,qR,F,gamma,negativity");
    assert_eq!(
        lines[1],
        "phi-plus,ab-i,7.85398163397e-1,1.00000000000e0,,0.00000000000e0,5.00000000000e-1"
    );
    assert!(text.ends_with('\n'));
}

#[test]
fn rows_ordered_by_config_alpha_qr_gamma() {
    let mut cfg = sweep::preset("fig2").unwrap();
    cfg.gamma.steps = 3;
    let rows = sweep::run_sweep(&cfg).unwrap();
    assert_eq!(rows.len(), cfg.row_count());
    assert_eq!(rows.len(), 2 * 2 * 3 * 3);
    let key = |r: &sweep::CurveRecord| {
        (
            cfg.configs.iter().position(|c| *c == r.config).unwrap(),
            cfg.alphas.iter().position(|a| *a == r.alpha).unwrap(),
            cfg.q_rs.iter().position(|q| *q == r.q_r).unwrap(),
            r.gamma.to_bits(),
        )
    };
    let keys: Vec<_> = rows.iter().map(key).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    assert_eq!(rows.last().unwrap().gamma, FRAC_PI_4);
}

#[test]
fn worker_count_does_not_change_output() {
    let mut cfg = sweep::preset("fig8").unwrap();
    cfg.gamma.steps = 11;
    cfg.workers = Some(1);
    let one = csv_of(&cfg);
    cfg.workers = Some(4);
    assert_eq!(one, csv_of(&cfg));
}

#[test]
fn werner_rows_carry_fidelity() {
    let mut cfg = sweep::preset("fig7").unwrap();
    cfg.gamma.steps = 2;
    let text = csv_of(&cfg);
    let row = text.lines().nth(1).unwrap();
    let cols: Vec<&str> = row.split(',').collect();
    assert_eq!(cols[0], "werner");
    assert_eq!(cols[4], "9.50000000000e-1");
}

#[test]
fn unwritable_output_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = SweepConfig::new(Family::PhiMinus);
    cfg.gamma.steps = 2;
    let err = sweep::run_sweep_to_file(&cfg, &dir.path().join("missing/out.csv")).unwrap_err();
    assert!(matches!(err, SweepError::Io { .. }), "{err}");
}

#[test]
fn sweep_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig3.csv");
    let mut cfg = sweep::preset("fig3").unwrap();
    cfg.gamma.steps = 5;
    let n = sweep::run_sweep_to_file(&cfg, &path).unwrap();
    assert_eq!(n, 4 * 4 * 5);
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text, csv_of(&cfg));
}

#[test]
fn oracle_reports_written_as_text_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let grid = DiffGrid {
        alphas: vec![FRAC_PI_4],
        gammas: vec![0.0, 0.4],
        q_rs: vec![0.5],
        fidelities: vec![0.9],
    };
    let comparisons = oracle::compare_all(&grid, &Ordering::CANONICAL).unwrap();
    let (txt, json) = oracle::write_reports(&comparisons, &dir.path().join("oracle")).unwrap();
    let text = std::fs::read_to_string(txt).unwrap();
    assert!(text.contains("phi-plus/ab-i: match"));
    assert!(text.contains("phi-minus/ab-i: FLAGGED"));
    let records: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    let records = records.as_array().unwrap();
    assert!(!records.is_empty());
    for r in records {
        for key in ["table", "ket", "bra", "symbol", "expected", "constructed"] {
            assert!(r.get(key).is_some(), "missing {key} in {r}");
        }
        assert_eq!(r["status"], "flagged");
    }
}

#[test]
fn flagged_tables_still_match_elsewhere() {
    for t in oracle::tables() {
        let c = oracle::compare_table(&t, &DiffGrid::default(), &Ordering::CANONICAL).unwrap();
        match c.status() {
            TableStatus::Match => assert!(c.report.max_deviation < 1e-10),
            TableStatus::Flagged => {
                let cells = c.report.offending_positions();
                assert!(!cells.is_empty() && cells.len() <= 6, "{}: {cells:?}", t.name);
            }
            TableStatus::Mismatch => panic!("{} disagrees without being flagged", t.name),
        }
    }
}

#[test]
fn single_point_diff_matches_phi_star() {
    let t = oracle::table(Family::PhiStar, DetectorConfig::AB_II).unwrap();
    let args = CoeffArgs::new(0.9, &UnruhParams::new(0.35, 0.4).unwrap(), 1.0);
    let r = oracle::diff_against_constructed(&t, &args, &Ordering::CANONICAL).unwrap();
    assert!(r.is_empty(), "{r:?}");
}
