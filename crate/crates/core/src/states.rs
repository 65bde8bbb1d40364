//! Unruh vacuum and one-particle states of a fermionic sector, and the
//! four shared-state families built from them.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::density::{DensityError, DensityMatrix};
use crate::fock::{
    apply_annihilation, apply_creation, AliceBasis, FockError, Mode, SignConvention, Species,
    StateVector,
};

const RANGE_SLACK: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("{name} = {value} is out of range: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("the Werner family needs a fidelity")]
    MissingFidelity,
    #[error("unknown state family {0:?}")]
    UnknownFamily(String),
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error(transparent)]
    Density(#[from] DensityError),
}

fn check_range(name: &'static str, value: f64, lo: f64, hi: f64, reason: &'static str) -> Result<f64, StateError> {
    if !(value.is_finite() && value >= lo - RANGE_SLACK && value <= hi + RANGE_SLACK) {
        return Err(StateError::InvalidParameter { name, value, reason });
    }
    Ok(value.clamp(lo, hi))
}

/// Acceleration parameter `γ` and the real Unruh-mode weights
/// `q_R`, `q_L = sqrt(1 − q_R²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnruhParams {
    gamma: f64,
    q_r: f64,
    q_l: f64,
}

impl UnruhParams {
    /// `gamma` in `[0, π/4]` (π/4 is infinite acceleration), `q_r` in `[0, 1]`.
    pub fn new(gamma: f64, q_r: f64) -> Result<UnruhParams, StateError> {
        let gamma = check_range("gamma", gamma, 0.0, FRAC_PI_4, "expected 0 <= gamma <= pi/4")?;
        let q_r = check_range("q_R", q_r, 0.0, 1.0, "expected 0 <= q_R <= 1")?;
        Ok(UnruhParams {
            gamma,
            q_r,
            q_l: (1.0 - q_r * q_r).max(0.0).sqrt(),
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn q_r(&self) -> f64 {
        self.q_r
    }

    pub fn q_l(&self) -> f64 {
        self.q_l
    }
}

/// `γ = arccos((e^{−2πΩc/a} + 1)^{−1/2})` for acceleration `a`, mode
/// frequency `omega` and light speed `c`.
pub fn gamma_from_acceleration(a: f64, omega: f64, c: f64) -> Result<f64, StateError> {
    for (name, v) in [("acceleration", a), ("omega", omega), ("c", c)] {
        if v.is_nan() || v <= 0.0 {
            return Err(StateError::InvalidParameter {
                name,
                value: v,
                reason: "must be positive",
            });
        }
    }
    let boltzmann = (-2.0 * PI * omega * c / a).exp();
    Ok((boltzmann + 1.0).powf(-0.5).acos())
}

/// `cos²γ|0000> − sinγ cosγ|0011> + sinγ cosγ|1100> − sin²γ|1111>`.
pub fn unruh_vacuum(p: &UnruhParams) -> StateVector {
    let (s, c) = p.gamma.sin_cos();
    StateVector::from_terms(&[
        ("0000", c * c),
        ("0011", -s * c),
        ("1100", s * c),
        ("1111", -s * s),
    ])
    .expect("static labels")
}

/// `|1^+>_U = q_R(cosγ|1000> − sinγ|1011>) + q_L(sinγ|1101> + cosγ|0001>)`.
pub fn unruh_particle(p: &UnruhParams) -> StateVector {
    let (s, c) = p.gamma.sin_cos();
    StateVector::from_terms(&[
        ("1000", p.q_r * c),
        ("1011", -p.q_r * s),
        ("1101", p.q_l * s),
        ("0001", p.q_l * c),
    ])
    .expect("static labels")
}

/// `|1^->_U = q_L(cosγ|0100> − sinγ|0111>) + q_R(sinγ|1110> + cosγ|0010>)`.
pub fn unruh_antiparticle(p: &UnruhParams) -> StateVector {
    let (s, c) = p.gamma.sin_cos();
    StateVector::from_terms(&[
        ("0100", p.q_l * c),
        ("0111", -p.q_l * s),
        ("1110", p.q_r * s),
        ("0010", p.q_r * c),
    ])
    .expect("static labels")
}

/// Applies the Unruh-mode creation operator of `species` to `ket`.
///
/// Particle: `q_L A†_L + q_R A†_R` with `A†_R = cosγ a†_I − sinγ b_II`,
/// `A†_L = cosγ a†_II − sinγ b_I`.
///
/// Antiparticle (inferred so that the annihilators kill the vacuum and the
/// printed one-particle state is reproduced): `q_L B†_L + q_R B†_R` with
/// `B†_R = cosγ b†_I + sinγ a_II`, `B†_L = cosγ b†_II + sinγ a_I`.
pub fn unruh_creation(ket: &StateVector, species: Species, p: &UnruhParams, conv: SignConvention) -> StateVector {
    let (s, c) = p.gamma.sin_cos();
    let create = |m| apply_creation(ket, m, conv);
    let annihilate = |m| apply_annihilation(ket, m, conv);
    let (right, left) = match species {
        Species::Particle => (
            &(&create(Mode::ParticleI) * c) - &(&annihilate(Mode::AntiparticleII) * s),
            &(&create(Mode::ParticleII) * c) - &(&annihilate(Mode::AntiparticleI) * s),
        ),
        Species::Antiparticle => (
            &(&create(Mode::AntiparticleI) * c) + &(&annihilate(Mode::ParticleII) * s),
            &(&create(Mode::AntiparticleII) * c) + &(&annihilate(Mode::ParticleI) * s),
        ),
    };
    &(&right * p.q_r) + &(&left * p.q_l)
}

/// Vacuum and one-particle kets of one sector.
#[derive(Debug, Clone, PartialEq)]
pub struct UnruhKets {
    pub vacuum: StateVector,
    pub particle: StateVector,
    pub antiparticle: StateVector,
}

impl UnruhKets {
    pub fn closed_form(p: &UnruhParams) -> UnruhKets {
        UnruhKets {
            vacuum: unruh_vacuum(p),
            particle: unruh_particle(p),
            antiparticle: unruh_antiparticle(p),
        }
    }

    /// One-particle kets from the creation operators acting on the vacuum,
    /// renormalized.
    pub fn from_operators(p: &UnruhParams, conv: SignConvention) -> Result<UnruhKets, StateError> {
        let vacuum = unruh_vacuum(p);
        let particle = unruh_creation(&vacuum, Species::Particle, p, conv).normalized()?;
        let antiparticle = unruh_creation(&vacuum, Species::Antiparticle, p, conv).normalized()?;
        Ok(UnruhKets {
            vacuum,
            particle,
            antiparticle,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// `cos α|0>_M|0>_U + sin α|1>_M|1^+>_U`
    PhiPlus,
    /// `cos α|0>_M|0>_U + sin α|1>_M|1^->_U`
    PhiMinus,
    /// `cos α|1>^+_M|1^+>_U + sin α|1>^-_M|1^->_U`
    PhiStar,
    /// `F|Φ₊(π/4)><Φ₊(π/4)| + (1−F)/4 𝕀`
    Werner,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::PhiPlus, Family::PhiMinus, Family::PhiStar, Family::Werner];

    pub fn name(self) -> &'static str {
        match self {
            Family::PhiPlus => "phi-plus",
            Family::PhiMinus => "phi-minus",
            Family::PhiStar => "phi-star",
            Family::Werner => "werner",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = StateError;

    fn from_str(s: &str) -> Result<Family, StateError> {
        Family::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| StateError::UnknownFamily(s.to_owned()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SharedStateSpec {
    pub family: Family,
    /// Ignored for Werner states, which always use `α = π/4`.
    pub alpha: f64,
    pub fidelity: Option<f64>,
}

impl SharedStateSpec {
    pub fn pure(family: Family, alpha: f64) -> SharedStateSpec {
        SharedStateSpec {
            family,
            alpha,
            fidelity: None,
        }
    }

    pub fn werner(fidelity: f64) -> SharedStateSpec {
        SharedStateSpec {
            family: Family::Werner,
            alpha: FRAC_PI_4,
            fidelity: Some(fidelity),
        }
    }
}

/// Output of [`build_shared_state`]: pure families give a ket, Werner a
/// density matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum SharedState {
    Pure(StateVector),
    Mixed(DensityMatrix),
}

impl SharedState {
    pub fn to_density(&self) -> Result<DensityMatrix, DensityError> {
        match self {
            SharedState::Pure(v) => DensityMatrix::from_pure(v),
            SharedState::Mixed(rho) => Ok(rho.clone()),
        }
    }
}

pub fn build_shared_state(spec: &SharedStateSpec, p: &UnruhParams) -> Result<SharedState, StateError> {
    build_shared_state_from(spec, &UnruhKets::closed_form(p))
}

/// Same as [`build_shared_state`] with caller-supplied sector kets.
pub fn build_shared_state_from(spec: &SharedStateSpec, kets: &UnruhKets) -> Result<SharedState, StateError> {
    let phi = |family: Family, alpha: f64| -> Result<StateVector, StateError> {
        let (sa, ca) = alpha.sin_cos();
        Ok(match family {
            Family::PhiPlus | Family::Werner => StateVector::with_alice(
                AliceBasis::Occupation,
                &[(0, ca, &kets.vacuum), (1, sa, &kets.particle)],
            )?,
            Family::PhiMinus => StateVector::with_alice(
                AliceBasis::Occupation,
                &[(0, ca, &kets.vacuum), (1, sa, &kets.antiparticle)],
            )?,
            Family::PhiStar => StateVector::with_alice(
                AliceBasis::Charge,
                &[(0, ca, &kets.particle), (1, sa, &kets.antiparticle)],
            )?,
        })
    };

    if spec.family != Family::Werner {
        let alpha = check_range("alpha", spec.alpha, 0.0, FRAC_PI_2, "expected 0 <= alpha <= pi/2")?;
        return Ok(SharedState::Pure(phi(spec.family, alpha)?));
    }

    let f = spec.fidelity.ok_or(StateError::MissingFidelity)?;
    let f = check_range("F", f, 0.0, 1.0, "expected 0 <= F <= 1")?;
    let entangled = DensityMatrix::from_pure(&phi(Family::PhiPlus, FRAC_PI_4)?)?;
    // maximally mixed state on span{|0>_M,|1>_M} ⊗ span{|0>_U,|1^+>_U}
    let mut logical = Vec::with_capacity(4);
    for a in 0..2 {
        for u in [&kets.vacuum, &kets.particle] {
            let v = StateVector::with_alice(AliceBasis::Occupation, &[(a, 1.0, u)])?;
            logical.push(DensityMatrix::from_pure(&v)?);
        }
    }
    let noise = (1.0 - f) / 4.0;
    let mut parts = vec![(f, &entangled)];
    parts.extend(logical.iter().map(|rho| (noise, rho)));
    Ok(SharedState::Mixed(DensityMatrix::mixture(&parts)?))
}
