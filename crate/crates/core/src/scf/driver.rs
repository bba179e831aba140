use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::engine::{AdaptEngine, ConfigurationEngine, ExactEngine, StateSolution};
use super::fock::{generalized_fock, orbital_gradient, ActiveRdms};
use super::micro::{fold_orbital_gradient, refine_micro_iteration};
use super::newton::{newton_step, NewtonStep, OrbitalHessian};
use super::state_average::{state_average_assemble, StateAverageSpec};
use crate::adapt::{AdaptConfig, PoolKind};
use crate::ci::CiOperator;
use crate::fermion::{Mapping, SpinOrbitalOrdering};
use crate::integrals::{
    active_hamiltonian_derivative, build_active_hamiltonian, exp_kappa, rotate_integrals, ActiveHamiltonian,
    IntegralSet, KappaLayout, OrbitalPartition,
};
use crate::{Error, Result};

/// Largest energy rise tolerated before a step is retried.
pub const ENERGY_RISE_TOL: f64 = 1e-8;
pub const MAX_RETRIES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScfMode {
    /// Newton steps with the configurational response folded in.
    #[default]
    OneStep,
    /// Alternating CI solve and frozen-RDM Newton step.
    TwoStep,
}

impl std::str::FromStr for ScfMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "one_step" | "onestep" => Ok(Self::OneStep),
            "two_step" | "twostep" => Ok(Self::TwoStep),
            _ => Err(Error::InvalidInput(format!("unknown SCF mode '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScfConfig {
    pub mode: ScfMode,
    pub macro_tol_energy: f64,
    pub macro_tol_grad: f64,
    pub max_macro: usize,
    pub micro_max: usize,
    /// Cap on `|κ|∞` in radians.
    pub trust_radius: f64,
    pub level_shift_floor: f64,
    pub include_active_active: bool,
    /// Finite-difference scale of the Hessian action.
    pub fd_step: f64,
}

impl Default for ScfConfig {
    fn default() -> Self {
        Self {
            mode: ScfMode::OneStep,
            macro_tol_energy: 1e-8,
            macro_tol_grad: 1e-5,
            max_macro: 100,
            micro_max: 3,
            trust_radius: 0.2,
            level_shift_floor: 0.0,
            include_active_active: false,
            fd_step: 1e-4,
        }
    }
}

impl ScfConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.macro_tol_energy > 0.0 && self.macro_tol_grad > 0.0 && self.fd_step > 0.0) {
            return Err(Error::InvalidInput("SCF tolerances and fd_step must be positive".into()));
        }
        if !(self.trust_radius > 0.0 && self.trust_radius <= 0.5) {
            return Err(Error::InvalidInput(format!("trust_radius {} outside (0, 0.5]", self.trust_radius)));
        }
        if self.level_shift_floor < 0.0 {
            return Err(Error::InvalidInput("level_shift_floor must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MacroRecord {
    pub macro_iter: usize,
    pub energies: Vec<f64>,
    pub energy_sa: f64,
    pub s2: Vec<f64>,
    pub cnots: Vec<usize>,
    /// `‖g‖∞` at the energies above.
    pub grad_norm: f64,
    pub pool_grad_norm: Vec<f64>,
    pub ops_added: Vec<Vec<String>>,
    pub trust_radius: f64,
    /// `‖κ‖∞` of the accepted step; 0 on the final record.
    pub step_norm: f64,
    pub predicted_change: f64,
    pub retries: usize,
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScfResult {
    pub converged: bool,
    pub energy_sa: f64,
    pub energies: Vec<f64>,
    pub s2: Vec<f64>,
    pub cnots: Vec<usize>,
    pub n_macro: usize,
    pub records: Vec<MacroRecord>,
    /// Accumulated orbital rotation, row-major.
    pub u_total: Vec<Vec<f64>>,
    /// `(op_label, angle)` per state; empty for the exact engine.
    pub circuits: Vec<Vec<(String, f64)>>,
}

impl ScfResult {
    pub fn u_total_matrix(&self) -> Array2<f64> {
        let n = self.u_total.len();
        Array2::from_shape_fn((n, n), |(i, j)| self.u_total[i][j])
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

struct Frame {
    ints: IntegralSet,
    act: ActiveHamiltonian,
}

fn frame(ints0: &IntegralSet, part: &OrbitalPartition, u: &Array2<f64>) -> Result<Frame> {
    let ints = rotate_integrals(ints0, u)?;
    let act = build_active_hamiltonian(&ints, part)?;
    Ok(Frame { ints, act })
}

fn assemble(states: &[StateSolution], spec: &StateAverageSpec) -> Result<(f64, ActiveRdms)> {
    let per: Vec<(f64, &ActiveRdms)> = states.iter().map(|s| (s.energy, &s.rdms)).collect();
    state_average_assemble(&per, spec)
}

/// Orbital step from the current frame: a frozen-RDM Newton step, refined
/// in one-step mode by folding in the first-order CI response.
fn orbital_step(
    fr: &Frame,
    part: &OrbitalPartition,
    layout: &KappaLayout,
    states: &[StateSolution],
    spec: &StateAverageSpec,
    rdms: &ActiveRdms,
    g: &[f64],
    cfg: &ScfConfig,
    trust: f64,
) -> Result<NewtonStep> {
    let hess = OrbitalHessian::new(&fr.ints, part, rdms, layout, cfg.fd_step)?;
    let mut step = newton_step(g, |v| hess.apply(v), cfg.level_shift_floor, trust)?;
    if cfg.mode == ScfMode::TwoStep || step.fallback {
        return Ok(step);
    }
    let h0 = CiOperator::from_active(&fr.act);
    let diags = states.iter().map(|s| h0.diagonal(&s.basis)).collect::<Result<Vec<_>>>()?;
    let mut thetas: Vec<Option<Array1<f64>>> = vec![None; states.len()];
    for _ in 0..cfg.micro_max {
        if inf_norm(&step.kappa) == 0.0 {
            break;
        }
        let k = layout.vector(step.kappa.clone()).to_matrix(part.norb())?;
        let dop = CiOperator::from_active(&active_hamiltonian_derivative(&fr.ints, part, &k)?);
        let mut delta = ActiveRdms::zeros(part.nact);
        for (k, s) in states.iter().enumerate() {
            let w = spec.states[k].weight;
            if w == 0.0 {
                continue;
            }
            let prev = thetas[k].as_ref().map(|t| (&h0, t));
            let (theta, ds) = refine_micro_iteration(&dop, prev, &diags[k], s.energy, &s.civec, &s.basis)?;
            delta.scaled_add(w, &ds);
            thetas[k] = Some(theta);
        }
        let folded = fold_orbital_gradient(g, &fr.ints, part, rdms, &delta, layout)?;
        let next = newton_step(&folded, |v| hess.apply(v), cfg.level_shift_floor, trust)?;
        if next.fallback {
            break;
        }
        step = next;
    }
    Ok(step)
}

/// Outer macro-iteration loop shared by every configurational engine.
pub fn run_scf<E: ConfigurationEngine>(
    ints0: &IntegralSet,
    part: &OrbitalPartition,
    mut engine: E,
    spec: &StateAverageSpec,
    cfg: &ScfConfig,
    initial_rotation: Option<&Array2<f64>>,
) -> Result<ScfResult> {
    cfg.validate()?;
    spec.validate()?;
    part.check(ints0)?;
    let n = ints0.norb;
    let mut u_total = match initial_rotation {
        Some(u) if u.dim() == (n, n) => u.clone(),
        Some(u) => return Err(Error::Dimension(format!("initial rotation {:?} for {n} orbitals", u.dim()))),
        None => Array2::eye(n),
    };
    let layout = KappaLayout::new(part, cfg.include_active_active);
    let mut fr = frame(ints0, part, &u_total)?;
    let mut states = engine.grow(&fr.act)?;
    let mut records = Vec::new();
    let mut e_prev: Option<f64> = None;
    let mut trust = cfg.trust_radius;
    let mut converged = false;
    for it in 1..=cfg.max_macro {
        let (e_sa, rdms) = assemble(&states, spec)?;
        let g = orbital_gradient(&generalized_fock(&fr.ints, part, &rdms)?, &layout);
        let gnorm = inf_norm(&g);
        let mut rec = MacroRecord {
            macro_iter: it,
            energies: states.iter().map(|s| s.energy).collect(),
            energy_sa: e_sa,
            s2: states.iter().map(|s| s.s2).collect(),
            cnots: states.iter().map(|s| s.cnots).collect(),
            grad_norm: gnorm,
            pool_grad_norm: states.iter().map(|s| s.pool_grad_norm).collect(),
            ops_added: states.iter().map(|s| s.added.clone()).collect(),
            trust_radius: trust,
            step_norm: 0.0,
            predicted_change: 0.0,
            retries: 0,
            fallback: false,
        };
        let de = e_prev.map_or(f64::INFINITY, |e| (e_sa - e).abs());
        log::info!("macro {it}: E = {e_sa:.12} dE = {de:.3e} |g| = {gnorm:.3e}");
        if de < cfg.macro_tol_energy && gnorm < cfg.macro_tol_grad && engine.converged() {
            records.push(rec);
            converged = true;
            break;
        }
        if it == cfg.max_macro {
            records.push(rec);
            break;
        }
        let step = orbital_step(&fr, part, &layout, &states, spec, &rdms, &g, cfg, trust)?;
        rec.fallback = step.fallback;
        let mut kappa = step.kappa.clone();
        let mut predicted = step.predicted;
        let mut accepted = None;
        for attempt in 0..=MAX_RETRIES {
            let u_trial = u_total.dot(&exp_kappa(&layout.vector(kappa.clone()), n)?);
            let fr_trial = frame(ints0, part, &u_trial)?;
            let mut trial = engine.clone();
            let relaxed = trial.relax(&fr_trial.act)?;
            let e_trial = assemble(&relaxed, spec)?.0;
            if e_trial <= e_sa + ENERGY_RISE_TOL {
                rec.retries = attempt;
                accepted = Some((u_trial, fr_trial, trial, e_trial));
                break;
            }
            log::debug!("macro {it}: energy rose by {:.3e}; halving the step", e_trial - e_sa);
            kappa.iter_mut().for_each(|k| *k *= 0.5);
            predicted *= 0.5;
            trust *= 0.5;
        }
        rec.step_norm = inf_norm(&kappa);
        rec.predicted_change = predicted;
        let Some((u_new, fr_new, eng_new, e_trial)) = accepted else {
            rec.retries = MAX_RETRIES;
            log::warn!("macro {it}: no energy-lowering orbital step after {MAX_RETRIES} retries");
            records.push(rec);
            break;
        };
        records.push(rec);
        // restore the trust radius gradually after a well-predicted step
        let actual = e_trial - e_sa;
        if predicted < 0.0 && actual / predicted > 0.75 {
            trust = (2.0 * trust).min(cfg.trust_radius);
        }
        u_total = u_new;
        fr = fr_new;
        engine = eng_new;
        e_prev = Some(e_sa);
        states = engine.grow(&fr.act)?;
    }
    let last = records.last().cloned().ok_or_else(|| Error::InvalidInput("max_macro must be at least 1".into()))?;
    Ok(ScfResult {
        converged,
        energy_sa: last.energy_sa,
        energies: last.energies,
        s2: last.s2,
        cnots: last.cnots,
        n_macro: records.len(),
        records,
        u_total: u_total.rows().into_iter().map(|r| r.to_vec()).collect(),
        circuits: engine.circuits(),
    })
}

/// Classical CASSCF: the shared outer loop around exact CASCI.
pub fn run_casscf(
    ints: &IntegralSet,
    part: &OrbitalPartition,
    spec: &StateAverageSpec,
    cfg: &ScfConfig,
    initial_rotation: Option<&Array2<f64>>,
) -> Result<ScfResult> {
    run_scf(ints, part, ExactEngine::new(part, spec)?, spec, cfg, initial_rotation)
}

/// Encoding and pool choices for the ADAPT engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdaptSetup {
    pub mapping: Mapping,
    pub ordering: SpinOrbitalOrdering,
    pub pool: PoolKind,
}

pub fn run_adapt_vqe_scf(
    ints: &IntegralSet,
    part: &OrbitalPartition,
    setup: AdaptSetup,
    adapt_cfg: &AdaptConfig,
    scf_cfg: &ScfConfig,
    spec: &StateAverageSpec,
    initial_rotation: Option<&Array2<f64>>,
) -> Result<ScfResult> {
    let engine = AdaptEngine::new(part, spec, setup.mapping, setup.ordering, setup.pool, adapt_cfg)?;
    run_scf(ints, part, engine, spec, scf_cfg, initial_rotation)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ci::{casci_solve, DeterminantBasis};
    use crate::scf::TargetState;
    use crate::test_util::random_ints;

    fn singlet() -> StateAverageSpec {
        StateAverageSpec::single(0)
    }

    #[test]
    fn config_bounds() {
        assert!(ScfConfig::default().validate().is_ok());
        for tr in [0.0, 0.6, f64::NAN] {
            assert!(ScfConfig { trust_radius: tr, ..ScfConfig::default() }.validate().is_err());
        }
        assert!(ScfConfig { macro_tol_grad: 0.0, ..ScfConfig::default() }.validate().is_err());
        assert!(ScfConfig { level_shift_floor: -1.0, ..ScfConfig::default() }.validate().is_err());
    }

    #[test]
    fn mode_names() {
        assert_eq!("one-step".parse::<ScfMode>().unwrap(), ScfMode::OneStep);
        assert_eq!("TWO_STEP".parse::<ScfMode>().unwrap(), ScfMode::TwoStep);
        assert!("newton".parse::<ScfMode>().is_err());
    }

    #[test]
    fn casscf_lowers_casci_and_keeps_u_orthogonal() {
        let ints = random_ints(5, 4, 31);
        let part = OrbitalPartition::new(5, 4, 1, 2).unwrap();
        let act = build_active_hamiltonian(&ints, &part).unwrap();
        let e_casci = casci_solve(&act, &DeterminantBasis::for_sector(2, 2, 0).unwrap(), 1).unwrap()[0].energy;
        let r = run_casscf(&ints, &part, &singlet(), &ScfConfig::default(), None).unwrap();
        assert!(r.converged);
        assert!(r.energy_sa < e_casci);
        for w in r.records.windows(2) {
            assert!(w[1].energy_sa <= w[0].energy_sa + ENERGY_RISE_TOL);
        }
        let u = r.u_total_matrix();
        let dev = (&u.t().dot(&u) - &Array2::<f64>::eye(5)).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(dev < 1e-12, "{dev}");
    }

    #[test]
    fn modes_agree_and_restart_is_converged() {
        let ints = random_ints(5, 4, 32);
        let part = OrbitalPartition::new(5, 4, 1, 2).unwrap();
        let one = run_casscf(&ints, &part, &singlet(), &ScfConfig::default(), None).unwrap();
        let cfg = ScfConfig { mode: ScfMode::TwoStep, ..ScfConfig::default() };
        let two = run_casscf(&ints, &part, &singlet(), &cfg, None).unwrap();
        assert!(one.converged && two.converged);
        assert!((one.energy_sa - two.energy_sa).abs() < 1e-8);
        let again = run_casscf(&ints, &part, &singlet(), &ScfConfig::default(), Some(&one.u_total_matrix())).unwrap();
        assert!(again.n_macro <= 2, "{}", again.n_macro);
        assert!((again.energy_sa - one.energy_sa).abs() < 1e-9);
    }

    #[test]
    fn full_active_space_has_nothing_to_rotate() {
        let ints = random_ints(3, 2, 33);
        let part = OrbitalPartition::new(3, 2, 0, 3).unwrap();
        let r = run_casscf(&ints, &part, &singlet(), &ScfConfig::default(), None).unwrap();
        // the first macro-iteration has no energy change to test against
        assert!(r.converged);
        assert_eq!(r.n_macro, 2);
        assert!(r.records.iter().all(|m| m.grad_norm == 0.0 && m.step_norm == 0.0));
        assert_eq!(r.records[0].energy_sa, r.records[1].energy_sa);
    }

    #[test]
    fn adapt_matches_exact_engine() {
        let ints = random_ints(4, 2, 34);
        let part = OrbitalPartition::new(4, 2, 0, 2).unwrap();
        let exact = run_casscf(&ints, &part, &singlet(), &ScfConfig::default(), None).unwrap();
        let setup =
            AdaptSetup { mapping: Mapping::BravyiKitaev, ordering: SpinOrbitalOrdering::Blocked, pool: PoolKind::Fermionic };
        let r = run_adapt_vqe_scf(&ints, &part, setup, &AdaptConfig::default(), &ScfConfig::default(), &singlet(), None)
            .unwrap();
        assert!(r.converged);
        assert!((r.energy_sa - exact.energy_sa).abs() < 1e-7);
        assert_eq!(r.circuits.len(), 1);
    }

    #[test]
    fn rejects_bad_inputs() {
        let ints = random_ints(4, 2, 35);
        let part = OrbitalPartition::new(4, 2, 0, 2).unwrap();
        let cfg = ScfConfig::default();
        assert!(run_casscf(&ints, &part, &singlet(), &cfg, Some(&Array2::eye(3))).is_err());
        let bad = StateAverageSpec { states: vec![TargetState { spin: 0.0, ms2: 0, weight: 0.7 }] };
        assert!(run_casscf(&ints, &part, &bad, &cfg, None).is_err());
        let zero = ScfConfig { max_macro: 0, ..cfg };
        assert!(run_casscf(&ints, &part, &singlet(), &zero, None).is_err());
    }
}
