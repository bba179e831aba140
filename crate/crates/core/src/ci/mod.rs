//! Determinant-space CI: exact CASCI eigenpairs, RDMs and the bridge to
//! qubit statevectors.

mod basis;
mod bridge;
mod rdm;
mod sigma;
mod solve;

pub use basis::{DeterminantBasis, Excitation};
pub use bridge::{determinant_sign, embed_civector, project_statevector, sector_component, OUT_OF_SECTOR_TOL};
pub use rdm::{ci_rdms, ci_s2};
pub use sigma::{sigma_apply, sigma_apply_k2, CiOperator};
pub use solve::{casci_solve, CasciRoot, DAVIDSON_MAX_ITER, DENSE_LIMIT};
