use serde::Serialize;

use super::pool::{pool_gradients, OperatorPool};
use super::vqe::{vqe_minimize, Objective, VqeConfig};
use crate::statevector::{apply_ansatz, cnot_count, AnsatzCircuit, QubitOperator};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct AdaptConfig {
    /// Operators appended per step (nG-ADAPT).
    pub n_gates_per_macro: usize,
    pub pool_grad_tol: f64,
    /// Growth also stops once a step lowers the energy by less than this.
    pub adapt_energy_tol: f64,
    pub vqe_grad_tol: f64,
    pub vqe_max_iter: usize,
    pub max_total_ops: usize,
    pub spin_filter: bool,
    pub spin_penalty_weight: f64,
    /// Weight of `μ <(N̂ − N)² + (2Ŝ_z − ms2)²>`, applied with qubit pools
    /// only: their Z-stripped strings conserve neither N nor S_z.
    pub sector_penalty_weight: f64,
}

impl Default for AdaptConfig {
    fn default() -> Self {
        Self {
            n_gates_per_macro: 1,
            pool_grad_tol: 1e-5,
            adapt_energy_tol: 1e-10,
            vqe_grad_tol: 1e-7,
            vqe_max_iter: 500,
            max_total_ops: 200,
            spin_filter: true,
            spin_penalty_weight: 0.0,
            sector_penalty_weight: 1.0,
        }
    }
}

impl AdaptConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_gates_per_macro == 0 {
            return Err(Error::InvalidInput("n_gates_per_macro must be at least 1".into()));
        }
        if !(self.pool_grad_tol > 0.0 && self.vqe_grad_tol > 0.0 && self.adapt_energy_tol >= 0.0) {
            return Err(Error::InvalidInput("ADAPT tolerances must be positive".into()));
        }
        if self.spin_penalty_weight < 0.0 || self.sector_penalty_weight < 0.0 {
            return Err(Error::InvalidInput("penalty weights must be non-negative".into()));
        }
        Ok(())
    }

    pub fn vqe(&self) -> VqeConfig {
        VqeConfig { grad_tol: self.vqe_grad_tol, max_iter: self.vqe_max_iter }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdaptTraceRecord {
    pub macro_iter: usize,
    pub op_label: String,
    pub energy_hartree: f64,
    pub cnots: usize,
    pub pool_grad_norm: f64,
    pub s2: f64,
    pub vqe_iters: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptStepOutcome {
    pub energy: f64,
    /// Pool gradients at the input state.
    pub pool_grad_norm: f64,
    pub pool_grad_max: f64,
    pub added: Vec<usize>,
    /// No operator cleared the gradient threshold; the circuit is unchanged.
    pub converged: bool,
    pub vqe_iters: usize,
    pub vqe_grad_inf: f64,
}

/// Indices of the `n` largest `|g|` at or above `tol`, ties to the lower index.
pub fn select_operators(grads: &[f64], n: usize, tol: f64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..grads.len()).filter(|&i| grads[i].abs() >= tol).collect();
    idx.sort_by(|&a, &b| grads[b].abs().total_cmp(&grads[a].abs()).then(a.cmp(&b)));
    idx.truncate(n);
    idx
}

/// One growth step: gradients, selection, append at zero angle, re-optimize.
pub fn adapt_step(
    circ: &mut AnsatzCircuit,
    obj: &Objective,
    pool: &OperatorPool,
    cfg: &AdaptConfig,
) -> Result<AdaptStepOutcome> {
    let psi = apply_ansatz(circ)?;
    let h_psi = obj.hamiltonian.apply(psi.amplitudes());
    let mut grads = pool_gradients(psi.amplitudes(), &h_psi, pool);
    if let Some((s2, w, t)) = &obj.spin_penalty {
        let s_psi = s2.apply(psi.amplitudes());
        let s = s2.expectation(&psi)?;
        let gs = pool_gradients(psi.amplitudes(), &s_psi, pool);
        for (g, x) in grads.iter_mut().zip(gs) {
            *g += 2.0 * w * (s - t) * x;
        }
    }
    if let Some((p, mu)) = &obj.sector_penalty {
        let p_psi = p.apply(psi.amplitudes());
        for (g, x) in grads.iter_mut().zip(pool_gradients(psi.amplitudes(), &p_psi, pool)) {
            *g += mu * x;
        }
    }
    let norm = grads.iter().map(|g| g * g).sum::<f64>().sqrt();
    let gmax = grads.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    let room = cfg.max_total_ops.saturating_sub(circ.len());
    let picked = select_operators(&grads, cfg.n_gates_per_macro.min(room), cfg.pool_grad_tol);
    if picked.is_empty() {
        let (e, _, g) = obj.evaluate(circ)?;
        return Ok(AdaptStepOutcome {
            energy: e,
            pool_grad_norm: norm,
            pool_grad_max: gmax,
            added: picked,
            converged: true,
            vqe_iters: 0,
            vqe_grad_inf: g.iter().fold(0.0, |m, x| m.max(x.abs())),
        });
    }
    for &i in &picked {
        let e = &pool.entries[i];
        circ.push(e.generator.clone(), 0.0, e.label.clone())?;
    }
    let out = vqe_minimize(circ, obj, &cfg.vqe())?;
    Ok(AdaptStepOutcome {
        energy: out.energy,
        pool_grad_norm: norm,
        pool_grad_max: gmax,
        added: picked,
        converged: false,
        vqe_iters: out.iterations,
        vqe_grad_inf: out.grad_inf,
    })
}

#[derive(Debug, Clone)]
pub struct AdaptOutcome {
    pub circuit: AnsatzCircuit,
    pub energy: f64,
    pub trace: Vec<AdaptTraceRecord>,
    pub converged: bool,
    pub stagnated: bool,
}

/// Vanilla ADAPT-VQE at fixed orbitals.
pub fn run_adapt_vqe(
    mut circ: AnsatzCircuit,
    obj: &Objective,
    pool: &OperatorPool,
    cfg: &AdaptConfig,
    s2: Option<&QubitOperator>,
) -> Result<AdaptOutcome> {
    cfg.validate()?;
    let mut trace = Vec::new();
    let mut energy = obj.evaluate(&circ)?.0;
    let mut repeats = 0;
    let mut last_pick: Option<Vec<usize>> = None;
    let mut converged = false;
    let mut stagnated = false;
    let mut iter = 0;
    while circ.len() < cfg.max_total_ops {
        iter += 1;
        let step = adapt_step(&mut circ, obj, pool, cfg)?;
        let de = energy - step.energy;
        energy = step.energy;
        let s2v = match s2 {
            Some(op) => op.expectation(&apply_ansatz(&circ)?)?,
            None => f64::NAN,
        };
        let label = step.added.iter().map(|&i| pool.entries[i].label.as_str()).collect::<Vec<_>>().join(" | ");
        trace.push(AdaptTraceRecord {
            macro_iter: iter,
            op_label: label,
            energy_hartree: energy,
            cnots: cnot_count(&circ),
            pool_grad_norm: step.pool_grad_norm,
            s2: s2v,
            vqe_iters: step.vqe_iters,
        });
        if step.converged || de.abs() < cfg.adapt_energy_tol {
            converged = true;
            break;
        }
        if last_pick.as_ref() == Some(&step.added) && de.abs() < 1e-10 {
            repeats += 1;
        } else {
            repeats = 1;
        }
        last_pick = Some(step.added);
        if repeats >= 3 {
            log::warn!("ADAPT stagnated: same selection three times without energy change");
            stagnated = true;
            break;
        }
    }
    Ok(AdaptOutcome { circuit: circ, energy, trace, converged, stagnated })
}
