//! Dense statevector simulation of Pauli-exponential circuits.

mod circuit;
mod operator;
mod rdm;
mod state;

pub use circuit::{ansatz_energy_gradient, ansatz_gradient, apply_ansatz, cnot_count, AnsatzCircuit, AnsatzGate, Generator};
pub use operator::QubitOperator;
pub use rdm::{expectation_s2, measure_rdm12, RdmMeasurer};
pub use state::{expectation, init_reference, reference_occupation, Statevector, MAX_QUBITS};
