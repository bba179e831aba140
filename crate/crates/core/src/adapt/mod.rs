//! ADAPT-VQE: operator pools, gradient-based selection, the inner VQE
//! optimizer and the ansatz-growth loop.

mod pool;
mod run;
mod vqe;

pub use pool::{build_fermionic_pool, build_qubit_pool, pool_gradients, OperatorPool, PoolEntry, PoolKind};
pub use run::{adapt_step, run_adapt_vqe, select_operators, AdaptConfig, AdaptOutcome, AdaptStepOutcome, AdaptTraceRecord};
pub use vqe::{vqe_minimize, Objective, VqeConfig, VqeOutcome};
