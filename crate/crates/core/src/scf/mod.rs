//! Orbital optimization: generalized Fock matrix, orbital gradient and
//! Hessian action, Newton steps, coupled configurational micro-iterations,
//! state averaging and the outer macro-iteration loop.

mod driver;
mod engine;
mod fock;
mod micro;
mod newton;
mod state_average;

pub use driver::{
    run_adapt_vqe_scf, run_casscf, run_scf, AdaptSetup, MacroRecord, ScfConfig, ScfMode, ScfResult, ENERGY_RISE_TOL,
    MAX_RETRIES,
};
pub use engine::{AdaptEngine, ConfigurationEngine, ExactEngine, StateSolution};
pub use fock::{energy_from_rdms, generalized_fock, gradient_matrix, inactive_fock, orbital_gradient, ActiveRdms};
pub use micro::{coupled_micro_iteration, fold_orbital_gradient, refine_micro_iteration, DENOMINATOR_CLAMP};
pub use newton::{hessian_vector, newton_step, NewtonStep, OrbitalHessian};
pub use state_average::{state_average_assemble, StateAverageSpec, TargetState, WEIGHT_SUM_TOL};
