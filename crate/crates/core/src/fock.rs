//! Four-mode fermionic Fock space for one Unruh frequency sector.
//!
//! The sector holds a particle and an antiparticle mode in each Rindler
//! region. Kets are written in the label order `|pqmn>` = particle-I,
//! antiparticle-II, antiparticle-I, particle-II unless a [`ModeOrder`] says
//! otherwise. A register position `i` of a state stores the occupation of
//! `order.modes()[i]`, most significant bit first.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

/// Number of fermionic modes in a frequency sector.
pub const MODES: usize = 4;
/// Dimension of the Fock space of one sector.
pub const FOCK_DIM: usize = 1 << MODES;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FockError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("basis mismatch: {0}")]
    BasisMismatch(&'static str),
    #[error("mode order must be a permutation of the four modes")]
    InvalidOrder,
    #[error("invalid occupation label {0:?}")]
    InvalidLabel(String),
    #[error("cannot normalize a zero vector")]
    ZeroVector,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Region {
    I,
    II,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Species {
    Particle,
    Antiparticle,
}

/// One of the four fermionic modes of a sector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    ParticleI,
    AntiparticleII,
    AntiparticleI,
    ParticleII,
}

impl Mode {
    /// All modes in label order.
    pub const ALL: [Mode; MODES] = [
        Mode::ParticleI,
        Mode::AntiparticleII,
        Mode::AntiparticleI,
        Mode::ParticleII,
    ];

    pub fn new(region: Region, species: Species) -> Mode {
        match (region, species) {
            (Region::I, Species::Particle) => Mode::ParticleI,
            (Region::I, Species::Antiparticle) => Mode::AntiparticleI,
            (Region::II, Species::Particle) => Mode::ParticleII,
            (Region::II, Species::Antiparticle) => Mode::AntiparticleII,
        }
    }

    /// Position in the label order.
    pub fn index(self) -> usize {
        match self {
            Mode::ParticleI => 0,
            Mode::AntiparticleII => 1,
            Mode::AntiparticleI => 2,
            Mode::ParticleII => 3,
        }
    }

    pub fn region(self) -> Region {
        match self {
            Mode::ParticleI | Mode::AntiparticleI => Region::I,
            Mode::ParticleII | Mode::AntiparticleII => Region::II,
        }
    }

    pub fn species(self) -> Species {
        match self {
            Mode::ParticleI | Mode::ParticleII => Species::Particle,
            Mode::AntiparticleI | Mode::AntiparticleII => Species::Antiparticle,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Mode::ParticleI => "particle-I",
            Mode::AntiparticleII => "antiparticle-II",
            Mode::AntiparticleI => "antiparticle-I",
            Mode::ParticleII => "particle-II",
        };
        f.write_str(s)
    }
}

/// Operator ordering of the four modes. Position `i` of the register holds
/// `modes()[i]`; creation operators are applied right-to-left in this order
/// when building a basis ket.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModeOrder([Mode; MODES]);

impl ModeOrder {
    /// The `|pqmn>` order in which the Unruh states are written.
    pub const LABEL: ModeOrder = ModeOrder(Mode::ALL);

    /// Region I modes first, then region II, particle before antiparticle in
    /// each region.
    pub const REGION_GROUPED: ModeOrder = ModeOrder([
        Mode::ParticleI,
        Mode::AntiparticleI,
        Mode::ParticleII,
        Mode::AntiparticleII,
    ]);

    pub fn new(modes: [Mode; MODES]) -> Result<ModeOrder, FockError> {
        let mut seen = [false; MODES];
        for m in modes {
            if std::mem::replace(&mut seen[m.index()], true) {
                return Err(FockError::InvalidOrder);
            }
        }
        Ok(ModeOrder(modes))
    }

    pub fn modes(&self) -> [Mode; MODES] {
        self.0
    }

    pub fn position(&self, mode: Mode) -> usize {
        self.0
            .iter()
            .position(|&m| m == mode)
            .expect("a mode order is a permutation")
    }
}

/// Occupation numbers of the four modes (0 or 1 each), independent of any
/// operator ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct FockBasisState(u8);

impl FockBasisState {
    pub const VACUUM: FockBasisState = FockBasisState(0);

    pub fn is_occupied(self, mode: Mode) -> bool {
        self.0 & (1 << mode.index()) != 0
    }

    pub fn with(self, mode: Mode, occupied: bool) -> FockBasisState {
        let bit = 1 << mode.index();
        FockBasisState(if occupied { self.0 | bit } else { self.0 & !bit })
    }

    pub fn occupation_count(self) -> u32 {
        self.0.count_ones()
    }

    /// Parses a `pqmn` label such as `"1011"`.
    pub fn from_label(label: &str) -> Result<FockBasisState, FockError> {
        let bytes = label.as_bytes();
        if bytes.len() != MODES {
            return Err(FockError::InvalidLabel(label.to_owned()));
        }
        let mut state = FockBasisState::VACUUM;
        for (mode, &b) in Mode::ALL.iter().zip(bytes) {
            match b {
                b'0' => {}
                b'1' => state = state.with(*mode, true),
                _ => return Err(FockError::InvalidLabel(label.to_owned())),
            }
        }
        Ok(state)
    }

    pub fn label(self) -> String {
        Mode::ALL
            .iter()
            .map(|&m| if self.is_occupied(m) { '1' } else { '0' })
            .collect()
    }

    /// Index of this state in a register laid out by `order`.
    pub fn register_index(self, order: &ModeOrder) -> usize {
        order
            .modes()
            .iter()
            .fold(0, |acc, &m| (acc << 1) | usize::from(self.is_occupied(m)))
    }

    pub fn from_register_index(index: usize, order: &ModeOrder) -> FockBasisState {
        let mut state = FockBasisState::VACUUM;
        for (pos, &m) in order.modes().iter().enumerate() {
            if index & (1 << (MODES - 1 - pos)) != 0 {
                state = state.with(m, true);
            }
        }
        state
    }

    pub fn all() -> impl Iterator<Item = FockBasisState> {
        (0..FOCK_DIM as u8).map(FockBasisState)
    }
}

/// Which Jordan–Wigner string a fermionic operator carries.
///
/// `Ascending` counts the occupied modes that precede the target mode in
/// the state's [`ModeOrder`]; `Descending` counts the ones that follow it.
/// Only `Ascending` reproduces the printed one-particle Unruh states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum SignConvention {
    #[default]
    Ascending,
    Descending,
}

/// Labels of the inertial observer's factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AliceBasis {
    /// No inertial factor: a bare 16-dimensional Fock ket.
    Absent,
    /// `{|0>_M, |1>_M}`.
    Occupation,
    /// `{|1>^+_M, |1>^-_M}`, written `+` and `-`.
    Charge,
}

impl AliceBasis {
    pub fn dim(self) -> usize {
        match self {
            AliceBasis::Absent => 1,
            AliceBasis::Occupation | AliceBasis::Charge => 2,
        }
    }
}

/// Complex amplitudes over (inertial label) ⊗ (sector Fock space).
///
/// Not normalized automatically: operator application may produce vectors of
/// any norm, including zero.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    alice: AliceBasis,
    order: ModeOrder,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn zero(alice: AliceBasis, order: ModeOrder) -> StateVector {
        StateVector {
            alice,
            order,
            amps: vec![C64::new(0.0, 0.0); alice.dim() * FOCK_DIM],
        }
    }

    pub fn from_amplitudes(
        alice: AliceBasis,
        order: ModeOrder,
        amps: Vec<C64>,
    ) -> Result<StateVector, FockError> {
        let expected = alice.dim() * FOCK_DIM;
        if amps.len() != expected {
            return Err(FockError::DimensionMismatch {
                left: amps.len(),
                right: expected,
            });
        }
        Ok(StateVector { alice, order, amps })
    }

    /// A bare Fock basis ket in label order.
    pub fn fock(state: FockBasisState) -> StateVector {
        let mut v = StateVector::zero(AliceBasis::Absent, ModeOrder::LABEL);
        v.amps[state.register_index(&ModeOrder::LABEL)] = C64::new(1.0, 0.0);
        v
    }

    /// Bare Fock ket from `(pqmn label, amplitude)` terms.
    pub fn from_terms(terms: &[(&str, f64)]) -> Result<StateVector, FockError> {
        let mut v = StateVector::zero(AliceBasis::Absent, ModeOrder::LABEL);
        for &(label, amp) in terms {
            let s = FockBasisState::from_label(label)?;
            v.amps[s.register_index(&ModeOrder::LABEL)] += amp;
        }
        Ok(v)
    }

    /// `Σ_k c_k |a_k> ⊗ |ψ_k>` for bare Fock kets `ψ_k` sharing one order.
    pub fn with_alice(
        alice: AliceBasis,
        components: &[(usize, f64, &StateVector)],
    ) -> Result<StateVector, FockError> {
        let order = components
            .first()
            .map(|c| c.2.order)
            .unwrap_or(ModeOrder::LABEL);
        let mut out = StateVector::zero(alice, order);
        for &(a, coeff, ket) in components {
            if ket.alice != AliceBasis::Absent {
                return Err(FockError::BasisMismatch("component already has an inertial factor"));
            }
            if ket.order != order {
                return Err(FockError::BasisMismatch("components use different mode orders"));
            }
            if a >= alice.dim() {
                return Err(FockError::DimensionMismatch {
                    left: a,
                    right: alice.dim(),
                });
            }
            for (i, amp) in ket.amps.iter().enumerate() {
                out.amps[a * FOCK_DIM + i] += amp * coeff;
            }
        }
        Ok(out)
    }

    pub fn alice(&self) -> AliceBasis {
        self.alice
    }

    pub fn order(&self) -> ModeOrder {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitude(&self, alice_index: usize, state: FockBasisState) -> C64 {
        self.amps[alice_index * FOCK_DIM + state.register_index(&self.order)]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalized(&self) -> Result<StateVector, FockError> {
        let n = self.norm_sqr().sqrt();
        if n == 0.0 {
            return Err(FockError::ZeroVector);
        }
        Ok(self * (1.0 / n))
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &StateVector) -> Result<f64, FockError> {
        self.check_compatible(other)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// The same vector expressed in another operator ordering.
    ///
    /// Moving fermionic creation operators past each other costs a sign per
    /// transposition of occupied modes, so each basis ket picks up
    /// `(-1)^(inversions between the two orders among its occupied modes)`.
    pub fn reorder(&self, target: ModeOrder) -> StateVector {
        let mut out = StateVector::zero(self.alice, target);
        for a in 0..self.alice.dim() {
            for i in 0..FOCK_DIM {
                let amp = self.amps[a * FOCK_DIM + i];
                if amp == C64::new(0.0, 0.0) {
                    continue;
                }
                let s = FockBasisState::from_register_index(i, &self.order);
                let sign = reorder_sign(s, &self.order, &target);
                out.amps[a * FOCK_DIM + s.register_index(&target)] = amp * sign;
            }
        }
        out
    }

    fn check_compatible(&self, other: &StateVector) -> Result<(), FockError> {
        if self.amps.len() != other.amps.len() {
            return Err(FockError::DimensionMismatch {
                left: self.amps.len(),
                right: other.amps.len(),
            });
        }
        if self.alice != other.alice {
            return Err(FockError::BasisMismatch("inertial labels differ"));
        }
        if self.order != other.order {
            return Err(FockError::BasisMismatch("mode orders differ"));
        }
        Ok(())
    }

    fn zip_with(&self, other: &StateVector, f: impl Fn(C64, C64) -> C64) -> StateVector {
        self.check_compatible(other)
            .expect("linear combination of incompatible state vectors");
        StateVector {
            alice: self.alice,
            order: self.order,
            amps: self.amps.iter().zip(&other.amps).map(|(&a, &b)| f(a, b)).collect(),
        }
    }
}

impl Add for &StateVector {
    type Output = StateVector;
    fn add(self, rhs: &StateVector) -> StateVector {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &StateVector {
    type Output = StateVector;
    fn sub(self, rhs: &StateVector) -> StateVector {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul<f64> for &StateVector {
    type Output = StateVector;
    fn mul(self, rhs: f64) -> StateVector {
        StateVector {
            alice: self.alice,
            order: self.order,
            amps: self.amps.iter().map(|a| a * rhs).collect(),
        }
    }
}

impl Mul<C64> for &StateVector {
    type Output = StateVector;
    fn mul(self, rhs: C64) -> StateVector {
        StateVector {
            alice: self.alice,
            order: self.order,
            amps: self.amps.iter().map(|a| a * rhs).collect(),
        }
    }
}

impl Neg for &StateVector {
    type Output = StateVector;
    fn neg(self) -> StateVector {
        self * -1.0
    }
}

/// Sign acquired by basis ket `state` when rewritten from `from` to `to`.
pub fn reorder_sign(state: FockBasisState, from: &ModeOrder, to: &ModeOrder) -> f64 {
    let target_positions: Vec<usize> = from
        .modes()
        .iter()
        .filter(|&&m| state.is_occupied(m))
        .map(|&m| to.position(m))
        .collect();
    let mut inversions = 0;
    for i in 0..target_positions.len() {
        for j in i + 1..target_positions.len() {
            if target_positions[i] > target_positions[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Signed permutation `P` with `P ψ_from = ψ_to` on (inertial) ⊗ Fock.
pub fn reordering_matrix(alice_dim: usize, from: &ModeOrder, to: &ModeOrder) -> DMatrix<C64> {
    let dim = alice_dim * FOCK_DIM;
    let mut p = DMatrix::zeros(dim, dim);
    for a in 0..alice_dim {
        for i in 0..FOCK_DIM {
            let s = FockBasisState::from_register_index(i, from);
            let j = s.register_index(to);
            p[(a * FOCK_DIM + j, a * FOCK_DIM + i)] = C64::new(reorder_sign(s, from, to), 0.0);
        }
    }
    p
}

fn string_sign(state: FockBasisState, mode: Mode, order: &ModeOrder, conv: SignConvention) -> f64 {
    let pos = order.position(mode);
    let modes = order.modes();
    let passed = match conv {
        SignConvention::Ascending => &modes[..pos],
        SignConvention::Descending => &modes[pos + 1..],
    };
    let n = passed.iter().filter(|&&m| state.is_occupied(m)).count();
    if n % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn apply_ladder(state: &StateVector, mode: Mode, conv: SignConvention, create: bool) -> StateVector {
    let mut out = StateVector::zero(state.alice, state.order);
    for a in 0..state.alice.dim() {
        for i in 0..FOCK_DIM {
            let amp = state.amps[a * FOCK_DIM + i];
            let s = FockBasisState::from_register_index(i, &state.order);
            if s.is_occupied(mode) == create {
                continue;
            }
            let sign = string_sign(s, mode, &state.order, conv);
            let t = s.with(mode, create);
            out.amps[a * FOCK_DIM + t.register_index(&state.order)] += amp * sign;
        }
    }
    out
}

/// Applies the creation operator of `mode` to every component. Not
/// renormalized; components already occupying `mode` vanish.
pub fn apply_creation(state: &StateVector, mode: Mode, conv: SignConvention) -> StateVector {
    apply_ladder(state, mode, conv, true)
}

/// Adjoint of [`apply_creation`].
pub fn apply_annihilation(state: &StateVector, mode: Mode, conv: SignConvention) -> StateVector {
    apply_ladder(state, mode, conv, false)
}

/// `<a|b>`, antilinear in the first argument.
pub fn inner_product(a: &StateVector, b: &StateVector) -> Result<C64, FockError> {
    a.check_compatible(b)?;
    Ok(a.amps.iter().zip(&b.amps).map(|(x, y)| x.conj() * y).sum())
}
