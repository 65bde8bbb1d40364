//! Bipartite entanglement of fermionic Unruh-mode states beyond the
//! single-mode approximation.
//!
//! An inertial observer (Alice) shares a state with a uniformly accelerated
//! one whose sector is split into Rindler regions I and II. The crate builds
//! those states from fermionic operators, reduces them to what region-I or
//! region-II detectors see, and measures the remaining entanglement with
//! the negativity.

pub mod density;
pub mod fock;
pub mod linalg;
pub mod oracle;
pub mod scenarios;
pub mod states;
pub mod sweep;
pub mod verify;

pub use density::{BipartitionSpec, DensityError, DensityMatrix, Operator};
pub use fock::{AliceBasis, FockBasisState, Mode, ModeOrder, Region, SignConvention, Species, StateVector, C64};
pub use states::{Family, SharedState, SharedStateSpec, StateError, UnruhKets, UnruhParams};
pub use scenarios::{DetectorConfig, Observer, Ordering, ScenarioError, ScenarioResult};
