//! Second-quantized fermionic operators, Pauli-string algebra and the
//! fermion-to-qubit encodings (Jordan-Wigner, Bravyi-Kitaev).

mod mapping;
mod operator;
mod pauli;

pub use mapping::{
    bravyi_kitaev, build_number_operator, build_s2_operator, build_sz_operator,
    jordan_wigner, map_hamiltonian, FermionEncoding, Mapping, Spin, SpinOrbitalOrdering,
};
pub use operator::{FermionOperator, FermionTerm, Ladder};
pub use pauli::{multiply, Pauli, PauliString, PauliSum, Phase, PRUNE_TOL};
