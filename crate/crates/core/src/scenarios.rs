//! Detector configurations and the Alice–(anti)Bob reduced states they see.
//!
//! Bob lives in region I, anti-Bob in region II; neither has access to the
//! other wedge. A non-distinguishing detector keeps both species of its
//! region, a distinguishing one keeps a single mode.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::density::{self, BipartitionSpec, DensityError, DensityMatrix};
use crate::fock::{reordering_matrix, Mode, ModeOrder, Region, SignConvention, Species};
use crate::states::{build_shared_state_from, SharedState, SharedStateSpec, StateError, UnruhKets, UnruhParams};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error("state does not match the detector layout: {0}")]
    InvalidPairing(String),
    #[error("unknown detector configuration {0:?}")]
    UnknownConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Observer {
    /// Bob, region I.
    Bob,
    /// anti-Bob, region II.
    AntiBob,
}

impl Observer {
    pub fn region(self) -> Region {
        match self {
            Observer::Bob => Region::I,
            Observer::AntiBob => Region::II,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DetectorConfig {
    pub observer: Observer,
    /// `Some(species)` when the detector tells particles from antiparticles
    /// and reports only that species.
    pub resolves: Option<Species>,
}

impl DetectorConfig {
    pub const AB_I: DetectorConfig = DetectorConfig {
        observer: Observer::Bob,
        resolves: None,
    };
    pub const AB_II: DetectorConfig = DetectorConfig {
        observer: Observer::AntiBob,
        resolves: None,
    };
    pub const AB_I_PARTICLE: DetectorConfig = DetectorConfig {
        observer: Observer::Bob,
        resolves: Some(Species::Particle),
    };
    pub const AB_I_ANTIPARTICLE: DetectorConfig = DetectorConfig {
        observer: Observer::Bob,
        resolves: Some(Species::Antiparticle),
    };
    pub const AB_II_PARTICLE: DetectorConfig = DetectorConfig {
        observer: Observer::AntiBob,
        resolves: Some(Species::Particle),
    };
    pub const AB_II_ANTIPARTICLE: DetectorConfig = DetectorConfig {
        observer: Observer::AntiBob,
        resolves: Some(Species::Antiparticle),
    };

    pub const NON_DISTINGUISHING: [DetectorConfig; 2] = [Self::AB_I, Self::AB_II];
    /// Ordered as particle-I, antiparticle-I, particle-II, antiparticle-II.
    pub const DISTINGUISHING: [DetectorConfig; 4] = [
        Self::AB_I_PARTICLE,
        Self::AB_I_ANTIPARTICLE,
        Self::AB_II_PARTICLE,
        Self::AB_II_ANTIPARTICLE,
    ];
    pub const ALL: [DetectorConfig; 6] = [
        Self::AB_I,
        Self::AB_II,
        Self::AB_I_PARTICLE,
        Self::AB_I_ANTIPARTICLE,
        Self::AB_II_PARTICLE,
        Self::AB_II_ANTIPARTICLE,
    ];

    pub fn region(&self) -> Region {
        self.observer.region()
    }

    /// Modes the detector keeps, particle first.
    pub fn retained_modes(&self) -> Vec<Mode> {
        let region = self.region();
        match self.resolves {
            None => vec![
                Mode::new(region, Species::Particle),
                Mode::new(region, Species::Antiparticle),
            ],
            Some(species) => vec![Mode::new(region, species)],
        }
    }

    pub fn name(&self) -> &'static str {
        match (self.observer, self.resolves) {
            (Observer::Bob, None) => "ab-i",
            (Observer::AntiBob, None) => "ab-ii",
            (Observer::Bob, Some(Species::Particle)) => "ab-i-particle",
            (Observer::Bob, Some(Species::Antiparticle)) => "ab-i-antiparticle",
            (Observer::AntiBob, Some(Species::Particle)) => "ab-ii-particle",
            (Observer::AntiBob, Some(Species::Antiparticle)) => "ab-ii-antiparticle",
        }
    }
}

impl fmt::Display for DetectorConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DetectorConfig {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<DetectorConfig, ScenarioError> {
        DetectorConfig::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| ScenarioError::UnknownConfig(s.to_owned()))
    }
}

/// How fermionic operators are ordered when building one-particle states
/// and when splitting the sector into regions for the partial trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Ordering {
    pub sign: SignConvention,
    /// Register layout the partial trace runs on.
    pub register: ModeOrder,
}

impl Ordering {
    /// Region-grouped operator order; reproduces the closed-form reduced
    /// states and their infinite-acceleration convergence.
    pub const CANONICAL: Ordering = Ordering {
        sign: SignConvention::Ascending,
        register: ModeOrder::REGION_GROUPED,
    };

    /// Reversed Jordan–Wigner strings and a trace straight on the `|pqmn>`
    /// register, for ordering-sensitivity runs.
    pub const ALTERNATE: Ordering = Ordering {
        sign: SignConvention::Descending,
        register: ModeOrder::LABEL,
    };

    pub fn name(&self) -> &'static str {
        if *self == Ordering::CANONICAL {
            "canonical"
        } else if *self == Ordering::ALTERNATE {
            "alternate"
        } else {
            "custom"
        }
    }

    /// Sector kets for this ordering. The ascending convention reproduces
    /// the closed forms exactly, so those are used directly.
    pub fn kets(&self, p: &UnruhParams) -> Result<UnruhKets, StateError> {
        match self.sign {
            SignConvention::Ascending => Ok(UnruhKets::closed_form(p)),
            SignConvention::Descending => UnruhKets::from_operators(p, self.sign),
        }
    }
}

impl Default for Ordering {
    fn default() -> Ordering {
        Ordering::CANONICAL
    }
}

impl FromStr for Ordering {
    type Err = String;

    fn from_str(s: &str) -> Result<Ordering, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "canonical" => Ok(Ordering::CANONICAL),
            "alternate" => Ok(Ordering::ALTERNATE),
            other => Err(format!("unknown ordering {other:?} (expected canonical or alternate)")),
        }
    }
}

/// Reduced state of Alice and the detector's retained modes. Factors are
/// `[2, 2, 2]` (Alice, particle, antiparticle) or `[2, 2]`.
pub fn reduce_for(
    config: DetectorConfig,
    state: &SharedState,
    ordering: &Ordering,
) -> Result<DensityMatrix, ScenarioError> {
    let rho = match state {
        SharedState::Pure(v) => {
            if v.alice().dim() != 2 {
                return Err(ScenarioError::InvalidPairing("state has no inertial factor".into()));
            }
            DensityMatrix::from_pure(&v.reorder(ordering.register))?
        }
        SharedState::Mixed(rho) => {
            if rho.factors() != [2, 2, 2, 2, 2] {
                return Err(ScenarioError::InvalidPairing(format!(
                    "expected factors [2, 2, 2, 2, 2], got {:?}",
                    rho.factors()
                )));
            }
            rho.transform(&reordering_matrix(2, &ModeOrder::LABEL, &ordering.register))
        }
    };
    let mut keep = vec![0];
    let mut positions: Vec<usize> = config
        .retained_modes()
        .iter()
        .map(|&m| ordering.register.position(m) + 1)
        .collect();
    positions.sort_unstable();
    keep.extend(positions);
    Ok(density::partial_trace(&rho, &keep)?)
}

#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub reduced: DensityMatrix,
    pub negativity: f64,
    pub spec: SharedStateSpec,
    pub params: UnruhParams,
    pub config: DetectorConfig,
}

/// Builds the shared state, reduces it for `config` and measures the
/// negativity across the Alice | detector cut.
pub fn scenario_negativity(
    spec: &SharedStateSpec,
    params: &UnruhParams,
    config: DetectorConfig,
    ordering: &Ordering,
) -> Result<ScenarioResult, ScenarioError> {
    let state = build_shared_state_from(spec, &ordering.kets(params)?)?;
    let reduced = reduce_for(config, &state, ordering)?;
    let cut = BipartitionSpec::first_vs_rest(reduced.factors().len());
    let negativity = density::negativity(&reduced, &cut)?;
    Ok(ScenarioResult {
        reduced,
        negativity,
        spec: *spec,
        params: *params,
        config,
    })
}

/// Negativity for several detector configurations sharing one state.
pub fn negativities(
    spec: &SharedStateSpec,
    params: &UnruhParams,
    configs: &[DetectorConfig],
    ordering: &Ordering,
) -> Result<Vec<f64>, ScenarioError> {
    let state = build_shared_state_from(spec, &ordering.kets(params)?)?;
    configs
        .iter()
        .map(|&config| {
            let reduced = reduce_for(config, &state, ordering)?;
            let cut = BipartitionSpec::first_vs_rest(reduced.factors().len());
            Ok(density::negativity(&reduced, &cut)?)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::Family;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn config_names_round_trip() {
        for c in DetectorConfig::ALL {
            assert_eq!(c.name().parse::<DetectorConfig>().unwrap(), c);
        }
        assert!("ab-iii".parse::<DetectorConfig>().is_err());
    }

    #[test]
    fn retained_modes() {
        assert_eq!(DetectorConfig::AB_I.retained_modes(), vec![Mode::ParticleI, Mode::AntiparticleI]);
        assert_eq!(DetectorConfig::AB_II.retained_modes(), vec![Mode::ParticleII, Mode::AntiparticleII]);
        assert_eq!(DetectorConfig::AB_II_ANTIPARTICLE.retained_modes(), vec![Mode::AntiparticleII]);
    }

    #[test]
    fn factor_structure() {
        let p = UnruhParams::new(0.3, 0.8).unwrap();
        let spec = SharedStateSpec::pure(Family::PhiPlus, 0.6);
        for c in DetectorConfig::ALL {
            let r = scenario_negativity(&spec, &p, c, &Ordering::CANONICAL).unwrap();
            let expected: &[usize] = if c.resolves.is_some() { &[2, 2] } else { &[2, 2, 2] };
            assert_eq!(r.reduced.factors(), expected);
            r.reduced.validate().unwrap();
            assert!(r.negativity >= 0.0);
        }
    }

    #[test]
    fn zero_acceleration_is_pure_and_schmidt() {
        let p = UnruhParams::new(0.0, 1.0).unwrap();
        for alpha in [0.1, FRAC_PI_4, 1.2] {
            let r = scenario_negativity(&SharedStateSpec::pure(Family::PhiPlus, alpha), &p, DetectorConfig::AB_I, &Ordering::CANONICAL)
                .unwrap();
            assert!((r.reduced.purity() - 1.0).abs() < 1e-12);
            assert!((r.negativity - 0.5 * (2.0 * alpha).sin().abs()).abs() < 1e-12);
        }
    }

    #[test]
    fn bare_ket_is_rejected() {
        let p = UnruhParams::new(0.2, 0.5).unwrap();
        let bare = SharedState::Pure(crate::states::unruh_vacuum(&p));
        assert!(matches!(
            reduce_for(DetectorConfig::AB_I, &bare, &Ordering::CANONICAL),
            Err(ScenarioError::InvalidPairing(_))
        ));
    }

    #[test]
    fn ordering_parse() {
        assert_eq!("canonical".parse::<Ordering>().unwrap(), Ordering::CANONICAL);
        assert_eq!("Alternate".parse::<Ordering>().unwrap(), Ordering::ALTERNATE);
        assert!("physical".parse::<Ordering>().is_err());
    }
}
