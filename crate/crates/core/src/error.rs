use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("FCIDUMP line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("reduced Hamiltonian undefined for N<2 (N = {0})")]
    ReducedHamiltonianUndefined(usize),

    #[error("symmetry drift {drift:e} after four-index transform exceeds 1e-9")]
    SymmetryDrift { drift: f64 },

    #[error("mode {mode} out of range for {n_modes} modes")]
    ModeOutOfRange { mode: usize, n_modes: usize },

    #[error("Pauli length mismatch ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("register of {0} qubits exceeds the 24-qubit capacity")]
    Capacity(usize),

    #[error("generator terms do not commute: {0}")]
    NonCommuting(String),

    #[error("state leaves the particle sector: {0}")]
    SectorViolation(String),

    #[error("internal consistency: {0}")]
    Consistency(String),

    #[error("Davidson did not converge in {0} iterations")]
    DavidsonNotConverged(usize),

    #[error("no bound minimum on the fitted curve")]
    NoBoundMinimum,
}
