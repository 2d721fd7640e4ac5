//! Quantum walks of one and two photons in Floquet-engineered lossy waveguide
//! lattices.
//!
//! The crate is organised bottom-up:
//!
//! * [`lattice`] describes the interleaved straight/auxiliary waveguide array
//!   and its instantaneous coupled-mode Hamiltonian.
//! * [`floquet`] integrates one Floquet period, applies the auxiliary cut-off
//!   and derives the transmission matrix, the effective Hamiltonian and the
//!   Lyapunov exponent.
//! * [`nonbloch`] extracts bulk hoppings and computes PBC/OBC spectra, the
//!   generalized Brillouin zone and the skin-removing similarity transform.
//! * [`pair`] evolves the density matrix of up to two photons in the extended
//!   `M² + M + 1` dimensional space and computes coincidence matrices.
//! * [`entanglement`] holds the second-order Rényi estimators and the
//!   similarity measures between distributions.
//! * [`io`] covers CSV/JSON export and the binary density dump.

pub mod angle;
pub mod entanglement;
mod error;
pub mod floquet;
pub mod fock;
pub mod io;
pub mod lattice;
pub mod linalg;
pub mod nonbloch;
pub mod pair;

pub use error::{Error, Result};

pub use num_complex::Complex64 as C64;

pub use entanglement::{EntropyResult, Estimator};
pub use floquet::{EffectiveHamiltonian, SinglePhotonState, TransmissionMatrix};
pub use lattice::{Boundary, LatticeSpec, SiteIndex, SiteKind};
pub use nonbloch::{BulkHoppings, GbzCurve, SpectrumKind, SpectrumResult};
pub use pair::{CorrelationMatrix, ExtendedBasis, ExtendedDensityMatrix};
