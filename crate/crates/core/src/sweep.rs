//! Negativity sweeps over parameter grids, with CSV output and the figure
//! presets.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Deserialize;
use thiserror::Error;

use crate::scenarios::{negativities, DetectorConfig, Ordering, ScenarioError};
use crate::states::{Family, SharedStateSpec, UnruhParams};

pub const DEFAULT_GAMMA_STEPS: usize = 181;
pub const CSV_HEADER: [&str; 7] = ["family", "config", "alpha", "qR", "F", "gamma", "negativity"];
pub const PRESET_NAMES: [&str; 7] = ["fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8"];

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid {field}: {reason}")]
    InvalidConfig { field: &'static str, reason: String },
    #[error("unknown preset {0:?} (expected one of fig2..fig8)")]
    UnknownPreset(String),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("CSV output failed: {0}")]
    Csv(#[from] csv::Error),
    #[error("bad config file: {0}")]
    ConfigFile(String),
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

fn invalid(field: &'static str, reason: impl Into<String>) -> SweepError {
    SweepError::InvalidConfig {
        field,
        reason: reason.into(),
    }
}

/// Evenly spaced `γ` values; the last one is exactly `stop`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaGrid {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl Default for GammaGrid {
    fn default() -> GammaGrid {
        GammaGrid {
            start: 0.0,
            stop: FRAC_PI_4,
            steps: DEFAULT_GAMMA_STEPS,
        }
    }
}

impl GammaGrid {
    pub fn points(&self) -> Vec<f64> {
        match self.steps {
            0 => Vec::new(),
            1 => vec![self.start],
            n => (0..n)
                .map(|k| {
                    if k == n - 1 {
                        self.stop
                    } else {
                        self.start + (self.stop - self.start) * k as f64 / (n - 1) as f64
                    }
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub family: Family,
    pub configs: Vec<DetectorConfig>,
    /// Ignored for Werner states.
    pub alphas: Vec<f64>,
    pub q_rs: Vec<f64>,
    /// Only used for Werner states.
    pub fidelities: Vec<f64>,
    pub gamma: GammaGrid,
    pub out: Option<PathBuf>,
    /// `None` uses rayon's default.
    pub workers: Option<usize>,
    pub ordering: Ordering,
}

impl SweepConfig {
    pub fn new(family: Family) -> SweepConfig {
        SweepConfig {
            family,
            configs: DetectorConfig::NON_DISTINGUISHING.to_vec(),
            alphas: vec![FRAC_PI_4],
            q_rs: vec![1.0],
            fidelities: Vec::new(),
            gamma: GammaGrid::default(),
            out: None,
            workers: None,
            ordering: Ordering::CANONICAL,
        }
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        if self.configs.is_empty() {
            return Err(invalid("config", "no detector configurations"));
        }
        if self.family != Family::Werner {
            check_list("alpha", &self.alphas, 0.0, FRAC_PI_2)?;
        } else {
            check_list("fidelity", &self.fidelities, 0.0, 1.0)?;
        }
        check_list("qR", &self.q_rs, 0.0, 1.0)?;
        let g = &self.gamma;
        if g.steps == 0 {
            return Err(invalid("gamma-steps", "must be at least 1"));
        }
        for (name, v) in [("gamma start", g.start), ("gamma stop", g.stop)] {
            if !(v.is_finite() && (0.0..=FRAC_PI_4).contains(&v)) {
                return Err(invalid("gamma", format!("{name} = {v} outside [0, pi/4]")));
            }
        }
        if g.start > g.stop {
            return Err(invalid("gamma", format!("start {} exceeds stop {}", g.start, g.stop)));
        }
        if self.workers == Some(0) {
            return Err(invalid("workers", "must be at least 1"));
        }
        Ok(())
    }

    fn state_specs(&self) -> Vec<SharedStateSpec> {
        match self.family {
            Family::Werner => self.fidelities.iter().map(|&f| SharedStateSpec::werner(f)).collect(),
            family => self.alphas.iter().map(|&a| SharedStateSpec::pure(family, a)).collect(),
        }
    }

    /// Number of CSV data rows the sweep produces.
    pub fn row_count(&self) -> usize {
        self.configs.len() * self.state_specs().len() * self.q_rs.len() * self.gamma.points().len()
    }
}

fn check_list(field: &'static str, values: &[f64], lo: f64, hi: f64) -> Result<(), SweepError> {
    if values.is_empty() {
        return Err(invalid(field, "empty list"));
    }
    for &v in values {
        if !(v.is_finite() && v >= lo && v <= hi) {
            return Err(invalid(field, format!("{v} outside [{lo}, {hi}]")));
        }
    }
    Ok(())
}

/// Built-in configurations for the figure data.
pub fn preset(name: &str) -> Result<SweepConfig, SweepError> {
    let non_dist = DetectorConfig::NON_DISTINGUISHING.to_vec();
    let dist = DetectorConfig::DISTINGUISHING.to_vec();
    let two_alphas = vec![FRAC_PI_4, PI / 18.0];
    let three_q = vec![1.0, 0.85, 0.73];
    let four_q = vec![1.0, 0.75, 0.5, 0.25];
    let pure = |family, configs, alphas, q_rs| SweepConfig {
        configs,
        alphas,
        q_rs,
        ..SweepConfig::new(family)
    };
    let werner = |configs, fidelities, q_rs| SweepConfig {
        configs,
        fidelities,
        q_rs,
        ..SweepConfig::new(Family::Werner)
    };
    Ok(match name.trim().to_ascii_lowercase().as_str() {
        "fig2" => pure(Family::PhiPlus, non_dist, two_alphas, three_q),
        "fig3" => pure(Family::PhiPlus, dist, vec![FRAC_PI_4], four_q),
        "fig4" => pure(Family::PhiMinus, non_dist, two_alphas, three_q),
        "fig5" => pure(Family::PhiMinus, dist, vec![FRAC_PI_4], four_q),
        "fig6" => pure(Family::PhiStar, non_dist, two_alphas, three_q),
        "fig7" => werner(non_dist, vec![0.95, 0.65], three_q),
        "fig8" => werner(dist, vec![0.95], four_q),
        _ => return Err(SweepError::UnknownPreset(name.to_owned())),
    })
}

/// Parses an angle such as `0.3`, `pi`, `pi/4`, `3pi/8`, `3*pi/8` or `π/18`.
pub fn parse_angle(text: &str) -> Result<f64, String> {
    let s = text.trim().to_ascii_lowercase().replace('π', "pi").replace(' ', "");
    let Some(at) = s.find("pi") else {
        return s.parse::<f64>().map_err(|_| format!("cannot parse angle {text:?}"));
    };
    let bad = || format!("cannot parse angle {text:?}");
    let head = s[..at].trim_end_matches('*');
    let tail = &s[at + 2..];
    let factor = if head.is_empty() {
        1.0
    } else {
        head.parse::<f64>().map_err(|_| bad())?
    };
    let divisor = if tail.is_empty() {
        1.0
    } else {
        tail.strip_prefix('/')
            .ok_or_else(bad)?
            .parse::<f64>()
            .map_err(|_| bad())?
    };
    if divisor == 0.0 {
        return Err(bad());
    }
    Ok(factor * PI / divisor)
}

/// One row of sweep output.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRecord {
    pub family: Family,
    pub config: DetectorConfig,
    pub alpha: f64,
    pub q_r: f64,
    /// `None` for pure families.
    pub fidelity: Option<f64>,
    pub gamma: f64,
    pub negativity: f64,
}

/// Computes every grid point. Rows come back ordered by
/// `(config, α, q_R, F, γ)` whatever the worker count.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<CurveRecord>, SweepError> {
    cfg.validate()?;
    let specs = cfg.state_specs();
    let gammas = cfg.gamma.points();

    // one work item per (state, q_R, γ), shared by all detector configs
    let mut items = Vec::with_capacity(specs.len() * cfg.q_rs.len() * gammas.len());
    for (si, spec) in specs.iter().enumerate() {
        for (qi, &q_r) in cfg.q_rs.iter().enumerate() {
            for (gi, &gamma) in gammas.iter().enumerate() {
                items.push((si, qi, gi, *spec, q_r, gamma));
            }
        }
    }

    let compute = || -> Result<Vec<Vec<f64>>, ScenarioError> {
        items
            .par_iter()
            .map(|&(_, _, _, spec, q_r, gamma)| {
                let p = UnruhParams::new(gamma, q_r)?;
                negativities(&spec, &p, &cfg.configs, &cfg.ordering)
            })
            .collect()
    };
    let values = match cfg.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| SweepError::Pool(e.to_string()))?
            .install(compute)?,
        None => compute()?,
    };

    let mut rows = Vec::with_capacity(cfg.row_count());
    for (ci, &config) in cfg.configs.iter().enumerate() {
        for ((_, _, _, spec, q_r, gamma), vals) in items.iter().zip(&values) {
            rows.push(CurveRecord {
                family: cfg.family,
                config,
                alpha: spec.alpha,
                q_r: *q_r,
                fidelity: spec.fidelity,
                gamma: *gamma,
                negativity: vals[ci],
            });
        }
    }
    Ok(rows)
}

fn num(x: f64) -> String {
    // 12 significant digits; `+ 0.0` folds -0 into 0
    format!("{:.11e}", x + 0.0)
}

pub fn write_csv<W: Write>(records: &[CurveRecord], out: W) -> Result<(), SweepError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.family.name().to_owned(),
            r.config.name().to_owned(),
            num(r.alpha),
            num(r.q_r),
            r.fidelity.map(num).unwrap_or_default(),
            num(r.gamma),
            num(r.negativity),
        ])?;
    }
    w.flush().map_err(|source| SweepError::Io {
        path: PathBuf::from("<output>"),
        source,
    })?;
    Ok(())
}

/// Runs the sweep and writes the CSV to `path`.
pub fn run_sweep_to_file(cfg: &SweepConfig, path: &Path) -> Result<usize, SweepError> {
    let rows = run_sweep(cfg)?;
    let io_err = |source| SweepError::Io {
        path: path.to_owned(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    let mut buf = io::BufWriter::new(file);
    write_csv(&rows, &mut buf)?;
    buf.flush().map_err(io_err)?;
    Ok(rows.len())
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum AngleValue {
    Number(f64),
    Text(String),
}

impl AngleValue {
    fn value(&self) -> Result<f64, String> {
        match self {
            AngleValue::Number(x) => Ok(*x),
            AngleValue::Text(s) => parse_angle(s),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GammaFile {
    start: Option<AngleValue>,
    stop: Option<AngleValue>,
    steps: Option<usize>,
}

/// On-disk sweep description. Every key is optional; a `preset` supplies
/// the starting point and the other keys override it.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepFile {
    preset: Option<String>,
    family: Option<String>,
    configs: Option<Vec<String>>,
    alphas: Option<Vec<AngleValue>>,
    q_r: Option<Vec<f64>>,
    fidelities: Option<Vec<f64>>,
    gamma: Option<GammaFile>,
    out: Option<PathBuf>,
    workers: Option<usize>,
    ordering: Option<String>,
}

/// Reads a TOML sweep description, see the README for the keys.
pub fn config_from_toml(text: &str) -> Result<SweepConfig, SweepError> {
    let f: SweepFile = toml::from_str(text).map_err(|e| SweepError::ConfigFile(e.to_string()))?;
    let mut cfg = match (&f.preset, &f.family) {
        (Some(p), _) => preset(p)?,
        (None, Some(_)) => SweepConfig::new(Family::PhiPlus),
        (None, None) => return Err(invalid("family", "config file needs `family` or `preset`")),
    };
    if let Some(name) = &f.family {
        let family = name.parse::<Family>().map_err(|e| invalid("family", e.to_string()))?;
        cfg.family = family;
    }
    if let Some(names) = &f.configs {
        cfg.configs = names
            .iter()
            .map(|n| n.parse::<DetectorConfig>())
            .collect::<Result<_, _>>()
            .map_err(|e| invalid("config", e.to_string()))?;
    }
    if let Some(alphas) = &f.alphas {
        cfg.alphas = alphas
            .iter()
            .map(AngleValue::value)
            .collect::<Result<_, _>>()
            .map_err(|e| invalid("alpha", e))?;
    }
    if let Some(q) = &f.q_r {
        cfg.q_rs = q.clone();
    }
    if let Some(fid) = &f.fidelities {
        cfg.fidelities = fid.clone();
    }
    if let Some(g) = &f.gamma {
        if let Some(v) = &g.start {
            cfg.gamma.start = v.value().map_err(|e| invalid("gamma", e))?;
        }
        if let Some(v) = &g.stop {
            cfg.gamma.stop = v.value().map_err(|e| invalid("gamma", e))?;
        }
        if let Some(n) = g.steps {
            cfg.gamma.steps = n;
        }
    }
    if f.out.is_some() {
        cfg.out = f.out.clone();
    }
    if f.workers.is_some() {
        cfg.workers = f.workers;
    }
    if let Some(o) = &f.ordering {
        cfg.ordering = o.parse().map_err(|e: String| invalid("ordering", e))?;
    }
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_grid_endpoints() {
        let g = GammaGrid::default().points();
        assert_eq!(g.len(), 181);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[180], FRAC_PI_4);
        assert_eq!(GammaGrid { start: 0.2, stop: 0.5, steps: 1 }.points(), vec![0.2]);
    }

    #[test]
    fn angles() {
        assert_eq!(parse_angle("pi/4").unwrap(), FRAC_PI_4);
        assert_eq!(parse_angle("π/18").unwrap(), PI / 18.0);
        assert_eq!(parse_angle("3*pi/8").unwrap(), 3.0 * PI / 8.0);
        assert_eq!(parse_angle("2pi").unwrap(), 2.0 * PI);
        assert_eq!(parse_angle(" 0.25 ").unwrap(), 0.25);
        assert!(parse_angle("pi/0").is_err());
        assert!(parse_angle("pie").is_err());
        assert!(parse_angle("x").is_err());
    }

    #[test]
    fn presets_are_valid() {
        for name in PRESET_NAMES {
            preset(name).unwrap().validate().unwrap();
        }
        let fig2 = preset("fig2").unwrap();
        assert_eq!(fig2.configs.len() * fig2.alphas.len() * fig2.q_rs.len(), 12);
        assert_eq!(preset("fig3").unwrap().configs.len(), 4);
        assert!(matches!(preset("fig9"), Err(SweepError::UnknownPreset(_))));
    }

    #[test]
    fn validation_names_field() {
        let mut cfg = SweepConfig::new(Family::PhiPlus);
        cfg.q_rs = vec![1.5];
        assert!(matches!(cfg.validate(), Err(SweepError::InvalidConfig { field: "qR", .. })));
        let mut cfg = SweepConfig::new(Family::PhiPlus);
        cfg.gamma.stop = 1.0;
        assert!(matches!(cfg.validate(), Err(SweepError::InvalidConfig { field: "gamma", .. })));
        let cfg = SweepConfig::new(Family::Werner);
        assert!(matches!(cfg.validate(), Err(SweepError::InvalidConfig { field: "fidelity", .. })));
        let mut cfg = SweepConfig::new(Family::PhiMinus);
        cfg.configs.clear();
        assert!(matches!(cfg.validate(), Err(SweepError::InvalidConfig { field: "config", .. })));
    }

    #[test]
    fn number_format() {
        assert_eq!(num(0.5), "5.00000000000e-1");
        assert_eq!(num(-0.0), "0.00000000000e0");
        assert_eq!(num(1.0), "1.00000000000e0");
    }

    #[test]
    fn toml_overrides_preset() {
        let cfg = config_from_toml(
            r#"
            preset = "fig2"
            alphas = ["pi/3"]
            q_r = [0.5]
            [gamma]
            steps = 5
            "#,
        )
        .unwrap();
        assert_eq!(cfg.family, Family::PhiPlus);
        assert_eq!(cfg.alphas, vec![PI / 3.0]);
        assert_eq!(cfg.gamma.steps, 5);
        assert_eq!(cfg.gamma.stop, FRAC_PI_4);
        assert!(config_from_toml("colour = 3").is_err());
        assert!(matches!(config_from_toml("q_r = [1.0]"), Err(SweepError::InvalidConfig { field: "family", .. })));
    }
}
