//! Self-check suite behind `unruh verify`.
//!
//! Every check records a measured deviation against its tolerance. Printed
//! closed-form tables that fail their own consistency checks are reported
//! as flagged and do not count as failures.

use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt::{self, Write as _};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::density::{self, BipartitionSpec};
use crate::fock::{apply_annihilation, apply_creation, FockBasisState, Mode, Species, StateVector, C64};
use crate::linalg;
use crate::oracle::{self, DiffGrid, TableStatus};
use crate::scenarios::{negativities, reduce_for, DetectorConfig, Ordering, ScenarioError};
use crate::states::{
    build_shared_state_from, unruh_creation, Family, SharedStateSpec, UnruhKets, UnruhParams,
};
use crate::sweep::GammaGrid;

pub const Q_R_GRID: [f64; 6] = [0.25, 0.5, 0.73, 0.75, 0.85, 1.0];
pub const WERNER_FIDELITIES: [f64; 2] = [0.95, 0.65];
pub const CONVERGENCE_TOL: f64 = 1e-9;
pub const ZERO_TOL: f64 = 1e-9;
pub const REPRODUCTION_TOL: f64 = 1e-12;
pub const MONOTONE_TOL: f64 = 1e-12;
pub const EIGEN_TOL: f64 = 1e-10;
pub const CAR_TOL: f64 = 1e-15;
const SEED: u64 = 20_240_229;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Flagged,
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Flagged => "FLAGGED",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub status: CheckStatus,
    pub deviation: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckResult {
    fn measured(name: impl Into<String>, deviation: f64, tolerance: f64, detail: impl Into<String>) -> CheckResult {
        let status = if deviation <= tolerance {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        CheckResult {
            name: name.into(),
            status,
            deviation,
            tolerance,
            detail: detail.into(),
        }
    }

    fn error(name: impl Into<String>, err: ScenarioError) -> CheckResult {
        CheckResult {
            name: name.into(),
            status: CheckStatus::Fail,
            deviation: f64::NAN,
            tolerance: 0.0,
            detail: format!("error: {err}"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub ordering: &'static str,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    /// True when no check failed. Flagged checks do not count.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn count(&self, status: CheckStatus) -> usize {
        self.checks.iter().filter(|c| c.status == status).count()
    }

    pub fn render(&self) -> String {
        let mut out = format!("ordering: {}\n", self.ordering);
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{:<7} {:<52} deviation {:>10.3e}  tol {:.0e}  {}",
                c.status, c.name, c.deviation, c.tolerance, c.detail
            );
        }
        let _ = writeln!(
            out,
            "{} passed, {} failed, {} flagged",
            self.count(CheckStatus::Pass),
            self.count(CheckStatus::Fail),
            self.count(CheckStatus::Flagged)
        );
        out
    }
}

fn spec_label(spec: &SharedStateSpec) -> String {
    match spec.fidelity {
        Some(f) => format!("{} F={f}", spec.family),
        None => format!("{} alpha={:.4}", spec.family, spec.alpha),
    }
}

/// Specs covered by the convergence and q_R-independence checks.
pub fn convergence_specs() -> Vec<SharedStateSpec> {
    let mut specs = Vec::new();
    for family in [Family::PhiPlus, Family::PhiMinus, Family::PhiStar] {
        for alpha in [FRAC_PI_4, PI / 18.0] {
            specs.push(SharedStateSpec::pure(family, alpha));
        }
    }
    specs.extend(WERNER_FIDELITIES.map(SharedStateSpec::werner));
    specs
}

fn negs(spec: &SharedStateSpec, gamma: f64, q_r: f64, configs: &[DetectorConfig], ordering: &Ordering) -> Result<Vec<f64>, ScenarioError> {
    negativities(spec, &UnruhParams::new(gamma, q_r)?, configs, ordering)
}

/// Largest `|{a_i, a_j†} − δ_ij|` and `|{a_i, a_j}|` over all basis states.
pub fn car_deviation(ordering: &Ordering) -> f64 {
    let conv = ordering.sign;
    let mut worst: f64 = 0.0;
    for s in FockBasisState::all() {
        let ket = StateVector::fock(s);
        for i in Mode::ALL {
            for j in Mode::ALL {
                let ad = &apply_annihilation(&apply_creation(&ket, j, conv), i, conv)
                    + &apply_creation(&apply_annihilation(&ket, i, conv), j, conv);
                let expected = if i == j { ket.clone() } else { &ket * 0.0 };
                worst = worst.max(ad.max_abs_diff(&expected).unwrap_or(f64::INFINITY));
                let aa = &apply_annihilation(&apply_annihilation(&ket, j, conv), i, conv)
                    + &apply_annihilation(&apply_annihilation(&ket, i, conv), j, conv);
                worst = worst.max(aa.norm_sqr().sqrt());
            }
        }
    }
    worst
}

/// Largest entry deviation between the creation operator applied to the
/// vacuum and the closed-form one-particle ket.
pub fn reproduction_deviation(species: Species, ordering: &Ordering, samples: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let p = UnruhParams::new(rng.gen_range(0.0..=FRAC_PI_4), rng.gen_range(0.0..=1.0)).expect("sampled in range");
        let kets = UnruhKets::closed_form(&p);
        let built = unruh_creation(&kets.vacuum, species, &p, ordering.sign);
        let target = match species {
            Species::Particle => &kets.particle,
            Species::Antiparticle => &kets.antiparticle,
        };
        worst = worst.max(built.max_abs_diff(target).unwrap_or(f64::INFINITY));
    }
    worst
}

fn convergence_checks(ordering: &Ordering, out: &mut Vec<CheckResult>) {
    let pair = DetectorConfig::NON_DISTINGUISHING;
    for spec in convergence_specs() {
        let label = spec_label(&spec);
        let mut gap: f64 = 0.0;
        let mut values = [Vec::new(), Vec::new()];
        for q_r in Q_R_GRID {
            match negs(&spec, FRAC_PI_4, q_r, &pair, ordering) {
                Ok(n) => {
                    gap = gap.max((n[0] - n[1]).abs());
                    values[0].push(n[0]);
                    values[1].push(n[1]);
                }
                Err(e) => {
                    out.push(CheckResult::error(format!("convergence {label}"), e));
                    return;
                }
            }
        }
        out.push(CheckResult::measured(
            format!("convergence at gamma=pi/4, {label}"),
            gap,
            CONVERGENCE_TOL,
            format!("N = {:.6}", values[0][0]),
        ));
        for (k, config) in pair.iter().enumerate() {
            let spread = spread(&values[k]);
            out.push(CheckResult::measured(
                format!("qR independence {config}, {label}"),
                spread,
                CONVERGENCE_TOL,
                "",
            ));
        }
    }
}

fn spread(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    max - min
}

fn zero_acceleration_checks(ordering: &Ordering, out: &mut Vec<CheckResult>) {
    for family in [Family::PhiPlus, Family::PhiMinus] {
        let mut worst: f64 = 0.0;
        for k in 0..=16 {
            let alpha = PI / 2.0 * k as f64 / 16.0;
            match negs(&SharedStateSpec::pure(family, alpha), 0.0, 1.0, &[DetectorConfig::AB_I], ordering) {
                Ok(n) => worst = worst.max((n[0] - 0.5 * (2.0 * alpha).sin().abs()).abs()),
                Err(e) => return out.push(CheckResult::error(format!("zero acceleration {family}"), e)),
            }
        }
        out.push(CheckResult::measured(
            format!("zero acceleration {family} ab-i = sin(2 alpha)/2"),
            worst,
            ZERO_TOL,
            "",
        ));
    }
    let mut worst: f64 = 0.0;
    for k in 0..=20 {
        let f = k as f64 / 20.0;
        match negs(&SharedStateSpec::werner(f), 0.0, 1.0, &[DetectorConfig::AB_I], ordering) {
            Ok(n) => worst = worst.max((n[0] - ((3.0 * f - 1.0) / 4.0).max(0.0)).abs()),
            Err(e) => return out.push(CheckResult::error("zero acceleration werner", e)),
        }
    }
    out.push(CheckResult::measured(
        "zero acceleration werner ab-i = max(0,(3F-1)/4)",
        worst,
        ZERO_TOL,
        "",
    ));
}

/// Grid maximum of the negativity for each configuration.
pub fn grid_maxima(
    spec: &SharedStateSpec,
    alphas: &[f64],
    q_r: f64,
    gammas: &[f64],
    configs: &[DetectorConfig],
    ordering: &Ordering,
) -> Result<Vec<f64>, ScenarioError> {
    let mut maxima = vec![0.0f64; configs.len()];
    for &alpha in alphas {
        let spec = SharedStateSpec { alpha, ..*spec };
        for &gamma in gammas {
            let n = negs(&spec, gamma, q_r, configs, ordering)?;
            for (m, v) in maxima.iter_mut().zip(n) {
                *m = m.max(v);
            }
        }
    }
    Ok(maxima)
}

fn phi_star_check(ordering: &Ordering, out: &mut Vec<CheckResult>) {
    let gammas = GammaGrid {
        steps: 31,
        ..GammaGrid::default()
    }
    .points();
    let alphas: Vec<f64> = (0..=8).map(|k| PI / 2.0 * k as f64 / 8.0).collect();
    let mut worst: f64 = 0.0;
    for q_r in Q_R_GRID {
        match grid_maxima(
            &SharedStateSpec::pure(Family::PhiStar, 0.0),
            &alphas,
            q_r,
            &gammas,
            &DetectorConfig::DISTINGUISHING,
            ordering,
        ) {
            Ok(m) => worst = worst.max(m.into_iter().fold(0.0, f64::max)),
            Err(e) => return out.push(CheckResult::error("phi-star separability", e)),
        }
    }
    out.push(CheckResult::measured(
        "phi-star separable under distinguishing detectors",
        worst,
        ZERO_TOL,
        "max N over alpha, gamma, qR grid",
    ));
}

/// An expected zero/nonzero pattern over the distinguishing detectors.
#[derive(Debug, Clone)]
pub struct PatternCase {
    pub name: &'static str,
    pub family: Family,
    pub q_r: f64,
    /// Per `DetectorConfig::DISTINGUISHING` entry.
    pub nonzero: [bool; 4],
}

pub fn pattern_cases() -> Vec<PatternCase> {
    vec![
        PatternCase {
            name: "phi-plus qR=1/2",
            family: Family::PhiPlus,
            q_r: 0.5,
            nonzero: [true, true, true, false],
        },
        PatternCase {
            name: "phi-minus qR=1",
            family: Family::PhiMinus,
            q_r: 1.0,
            nonzero: [false, true, true, false],
        },
        PatternCase {
            name: "phi-minus qR=3/4",
            family: Family::PhiMinus,
            q_r: 0.75,
            nonzero: [true, true, false, true],
        },
    ]
}

/// Grid maxima for a pattern case over `α ∈ {π/4, π/18}` and the default
/// 181-point γ grid.
pub fn pattern_maxima(case: &PatternCase, ordering: &Ordering) -> Result<Vec<f64>, ScenarioError> {
    grid_maxima(
        &SharedStateSpec::pure(case.family, FRAC_PI_4),
        &[FRAC_PI_4, PI / 18.0],
        case.q_r,
        &GammaGrid::default().points(),
        &DetectorConfig::DISTINGUISHING,
        ordering,
    )
}

fn pattern_checks(ordering: &Ordering, out: &mut Vec<CheckResult>) {
    for case in pattern_cases() {
        let name = format!("zero pattern {}", case.name);
        let maxima = match pattern_maxima(&case, ordering) {
            Ok(m) => m,
            Err(e) => {
                out.push(CheckResult::error(name, e));
                continue;
            }
        };
        let observed: Vec<bool> = maxima.iter().map(|&m| m > ZERO_TOL).collect();
        let wrong: Vec<String> = DetectorConfig::DISTINGUISHING
            .iter()
            .zip(observed.iter().zip(case.nonzero))
            .filter(|(_, (o, e))| **o != *e)
            .map(|(c, (o, _))| format!("{c} {}", if *o { "nonzero" } else { "zero" }))
            .collect();
        // deviation: largest value that should be zero, or the shortfall of
        // an expected-nonzero one
        let deviation = maxima
            .iter()
            .zip(case.nonzero)
            .map(|(&m, nz)| if nz { if m > ZERO_TOL { 0.0 } else { ZERO_TOL - m + f64::EPSILON } } else { m })
            .fold(0.0, f64::max);
        let detail = format!(
            "max N = [{}]{}",
            maxima.iter().map(|m| format!("{m:.3e}")).collect::<Vec<_>>().join(", "),
            if wrong.is_empty() {
                String::new()
            } else {
                format!("; unexpected: {}", wrong.join(", "))
            }
        );
        let mut r = CheckResult::measured(name, deviation, ZERO_TOL, detail);
        if !wrong.is_empty() {
            r.status = CheckStatus::Fail;
        }
        out.push(r);
    }
}

/// Largest adjacent-step violation of "ab-i non-increasing, ab-ii
/// non-decreasing" for `Φ₊`, α = π/4, q_R = 1.
pub fn monotonicity_violation(ordering: &Ordering) -> Result<f64, ScenarioError> {
    let spec = SharedStateSpec::pure(Family::PhiPlus, FRAC_PI_4);
    let mut prev: Option<Vec<f64>> = None;
    let mut worst: f64 = 0.0;
    for gamma in GammaGrid::default().points() {
        let n = negs(&spec, gamma, 1.0, &DetectorConfig::NON_DISTINGUISHING, ordering)?;
        if let Some(p) = &prev {
            worst = worst.max(n[0] - p[0]).max(p[1] - n[1]);
        }
        prev = Some(n);
    }
    Ok(worst)
}

fn oracle_checks(ordering: &Ordering, out: &mut Vec<CheckResult>) {
    let comparisons = match oracle::compare_all(&DiffGrid::default(), ordering) {
        Ok(c) => c,
        Err(e) => return out.push(CheckResult::error("oracle tables", e)),
    };
    for c in comparisons {
        let name = format!("oracle table {}", c.report.table);
        let mut r = CheckResult::measured(name, c.report.max_deviation, oracle::MATCH_TOL, "");
        if c.status() == TableStatus::Flagged {
            r.status = CheckStatus::Flagged;
            let cells: Vec<String> = c.report.offending_positions().iter().map(|(k, b)| format!("|{k}><{b}|")).collect();
            r.detail = format!("{}; differs at {}", c.health.reasons().join("; "), cells.join(" "));
        }
        out.push(r);
    }
}

/// Random Hermitian matrix with entries uniform in the unit square.
pub fn random_hermitian(rng: &mut impl Rng, n: usize) -> DMatrix<C64> {
    let a = DMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    (&a + a.adjoint()) * C64::new(0.5, 0.0)
}

/// Worst residual and worst `|Σλ − tr M|` over `count` random matrices of
/// dimension 1 to `max_dim`.
pub fn eigensolver_quality(count: usize, max_dim: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut residual, mut trace): (f64, f64) = (0.0, 0.0);
    for _ in 0..count {
        let n = rng.gen_range(1..=max_dim);
        let m = random_hermitian(&mut rng, n);
        match linalg::hermitian_eigen(&m) {
            Ok(e) => {
                residual = residual.max(e.max_residual(&m));
                trace = trace.max((e.values.iter().sum::<f64>() - m.trace().re).abs());
            }
            Err(_) => return (f64::INFINITY, f64::INFINITY),
        }
    }
    (residual, trace)
}

fn bound_check(ordering: &Ordering, out: &mut Vec<CheckResult>) {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..40 {
        let family = Family::ALL[rng.gen_range(0..4)];
        let spec = if family == Family::Werner {
            SharedStateSpec::werner(rng.gen_range(0.0..=1.0))
        } else {
            SharedStateSpec::pure(family, rng.gen_range(0.0..=PI / 2.0))
        };
        let p = UnruhParams::new(rng.gen_range(0.0..=FRAC_PI_4), rng.gen_range(0.0..=1.0)).expect("sampled in range");
        let result = ordering
            .kets(&p)
            .map_err(ScenarioError::from)
            .and_then(|k| Ok(build_shared_state_from(&spec, &k)?));
        let state = match result {
            Ok(s) => s,
            Err(e) => return out.push(CheckResult::error("negativity bound", e)),
        };
        for config in DetectorConfig::ALL {
            let n = reduce_for(config, &state, ordering).and_then(|rho| {
                let cut = BipartitionSpec::first_vs_rest(rho.factors().len());
                let n = density::negativity(&rho, &cut)?;
                Ok(n - cut.negativity_bound(rho.factors()))
            });
            match n {
                Ok(excess) => worst = worst.max(excess),
                Err(e) => return out.push(CheckResult::error("negativity bound", e)),
            }
        }
    }
    out.push(CheckResult::measured(
        "negativity within (d-1)/2 bound",
        worst.max(0.0),
        0.0,
        "40 random states, all detectors",
    ));
}

/// Runs every check under `ordering`.
pub fn run_verify(ordering: &Ordering) -> VerifyReport {
    let mut checks = Vec::new();
    checks.push(CheckResult::measured(
        "fock anticommutation relations",
        car_deviation(ordering),
        CAR_TOL,
        "",
    ));
    for (species, what) in [(Species::Particle, "particle"), (Species::Antiparticle, "antiparticle")] {
        checks.push(CheckResult::measured(
            format!("creation operator reproduces {what} ket"),
            reproduction_deviation(species, ordering, 50),
            REPRODUCTION_TOL,
            "50 random (gamma, qR)",
        ));
    }
    convergence_checks(ordering, &mut checks);
    zero_acceleration_checks(ordering, &mut checks);
    phi_star_check(ordering, &mut checks);
    pattern_checks(ordering, &mut checks);
    checks.push(match monotonicity_violation(ordering) {
        Ok(v) => CheckResult::measured(
            "phi-plus qR=1 ab-i decreasing, ab-ii increasing",
            v.max(0.0),
            MONOTONE_TOL,
            "181-point gamma grid",
        ),
        Err(e) => CheckResult::error("monotonicity", e),
    });
    oracle_checks(ordering, &mut checks);
    let (residual, trace) = eigensolver_quality(200, 32, SEED + 2);
    checks.push(CheckResult::measured(
        "eigensolver residual",
        residual,
        EIGEN_TOL,
        "200 random Hermitian, dim <= 32",
    ));
    checks.push(CheckResult::measured("eigenvalue sum vs trace", trace, EIGEN_TOL, ""));
    bound_check(ordering, &mut checks);
    VerifyReport {
        ordering: ordering.name(),
        checks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn car_holds_for_both_conventions() {
        assert!(car_deviation(&Ordering::CANONICAL) <= CAR_TOL);
        assert!(car_deviation(&Ordering::ALTERNATE) <= CAR_TOL);
    }

    #[test]
    fn reproduction_depends_on_sign_convention() {
        assert!(reproduction_deviation(Species::Particle, &Ordering::CANONICAL, 10) < 1e-14);
        assert!(reproduction_deviation(Species::Antiparticle, &Ordering::CANONICAL, 10) < 1e-14);
        let alt = reproduction_deviation(Species::Particle, &Ordering::ALTERNATE, 10)
            .max(reproduction_deviation(Species::Antiparticle, &Ordering::ALTERNATE, 10));
        assert!(alt > 1e-3, "{alt}");
    }

    #[test]
    fn spread_of_values() {
        assert_eq!(spread(&[0.2, 0.5, 0.1]), 0.4);
    }

    #[test]
    fn small_eigen_batch() {
        let (r, t) = eigensolver_quality(20, 8, 1);
        assert!(r < EIGEN_TOL && t < EIGEN_TOL);
    }
}
