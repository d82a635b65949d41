//! Entanglement as maximal total uncertainty of basic observables.
//!
//! The crate measures total variance of pure states against a chosen
//! observable basis, certifies and searches for completely entangled (CE)
//! states, computes SLOCC invariants (concurrence, 3-tangle, orbit-minimum
//! measure), embeds a qutrit into two qubits, and runs Monte-Carlo
//! wavefunction trajectories for two Λ-atoms in a cavity.

pub mod cavity;
pub mod embedding;
pub mod error;
pub mod hilbert;
pub mod io;
pub mod observables;
pub mod random;
pub mod slocc;
pub mod sphere;
pub mod variance;

pub use error::{Error, Result};
pub use hilbert::{expectation, lift_local, reduced_density, tensor_product, HilbertShape, Operator, StateVector, TensorProduct};
pub use num_complex::Complex64 as C64;
pub use observables::{custom_set, gell_mann_set, pauli_set, spin1_set, two_level_pair_set, Observable, ObservableSet};
pub use variance::{ce_check, find_ce, remoteness, total_variance, variance, CeSearch, FindCeOptions, VarianceReport};
