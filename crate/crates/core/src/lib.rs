//! Active-space electronic structure on a simulated qubit register.
//!
//! The crate grows an adaptive variational ansatz (ADAPT-VQE) on an exact
//! statevector simulator and couples it to a second-order orbital optimizer,
//! so that molecular orbitals are relaxed while the circuit is built. An
//! exact determinant-space CI solver sits alongside as the reference engine:
//! plugged into the same outer loop it yields classical CASCI/CASSCF.
//!
//! Module map:
//!
//! - [`integrals`]: FCIDUMP I/O, orbital partitions, active-space folding,
//!   the two-particle reduced Hamiltonian and orbital rotations.
//! - [`fermion`]: fermionic operators, Pauli algebra, Jordan-Wigner and
//!   Bravyi-Kitaev encodings.
//! - [`statevector`]: the simulator, ansatz circuits, RDM measurement.
//! - [`ci`]: determinant-basis CI (sigma vectors, CASCI, RDMs).
//! - [`adapt`]: operator pools, selection, VQE, ADAPT steps.
//! - [`scf`]: generalized Fock, Newton steps, coupled micro-iterations and
//!   the outer macro-iteration loop.
//! - [`spectro`]: quartic fits of potential energy curves.

pub mod adapt;
pub mod ci;
pub mod error;
pub mod fermion;
pub mod integrals;
pub mod linalg;
pub mod pec;
pub mod scf;
pub mod spectro;
pub mod statevector;

pub use error::{Error, Result};

#[cfg(test)]
pub(crate) mod test_util;
