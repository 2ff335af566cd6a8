//! Thermal (Davies) dynamics of stabilizer Hamiltonians used as quantum
//! memories: the Ising ring and Kitaev's toric code.
//!
//! * [`pauli`]: exact Pauli monomial algebra in binary-symplectic form.
//! * [`model`]: lattices, stabilizers, logical operators, ground and Gibbs
//!   expectations.
//! * [`davies`]: weak-coupling jump operators, the full Lindblad generator on
//!   dense observables, structural checks and propagation.
//! * [`reduced`]: the classical signed generators on syndrome space that
//!   govern encoded observables, autocorrelations and lifetimes.
//! * [`kmc`]: continuous-time Monte Carlo estimates of the same quantities
//!   for lattices too large to propagate exactly.
//! * [`ed`]: dense exact diagonalization, the independent reference for
//!   spectra, Bohr frequencies and thermal averages on small lattices.

pub mod davies;
pub mod ed;
pub mod error;
pub mod expm;
pub mod kmc;
pub mod model;
pub mod pauli;
pub mod reduced;
pub mod sparse;

pub use error::{Error, Result};
