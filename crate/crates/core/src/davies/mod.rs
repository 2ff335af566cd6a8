//! Davies jump operators and the weak-coupling Lindblad generator in the
//! Heisenberg picture.

mod checks;
mod generator;
mod jumps;
mod observable;
mod propagate;
mod spectral;

pub use checks::{
    check_detailed_balance, check_locality, commutant_dimension, derivation_powers,
    ergodicity_inputs, neighborhood, DetailedBalanceReport, LocalityReport,
    MAX_BASIS_QUBITS, MAX_COMMUTANT_ENUMERATION,
};
pub use generator::{apply_lindblad, DaviesGenerator};
pub use jumps::{build_jump_set, Coupling, DaviesJumpSet, JumpChannel, Projections};
pub use observable::{Observable, MAX_DENSE_QUBITS};
pub use propagate::{default_options, propagate_observable, propagate_observable_at};
pub use spectral::SpectralFunction;
