use std::sync::Arc;

use ndarray::Array1;
use rayon::prelude::*;

use super::fock::ActiveRdms;
use super::state_average::{StateAverageSpec, TargetState};
use crate::adapt::{
    adapt_step, build_fermionic_pool, build_qubit_pool, vqe_minimize, AdaptConfig, Objective, OperatorPool, PoolKind,
};
use crate::ci::{casci_solve, ci_rdms, ci_s2, sector_component, CiOperator, DeterminantBasis, OUT_OF_SECTOR_TOL};
use crate::fermion::{
    build_number_operator, build_s2_operator, build_sz_operator, map_hamiltonian, FermionEncoding, Mapping, PauliSum,
    SpinOrbitalOrdering,
};
use crate::integrals::{ActiveHamiltonian, OrbitalPartition};
use crate::statevector::{apply_ansatz, cnot_count, reference_occupation, AnsatzCircuit, QubitOperator, RdmMeasurer};
use crate::{Error, Result};

/// Spin-purity tolerance when picking exact roots by `<S²>`.
const S2_MATCH_TOL: f64 = 1e-6;

/// One configurational state at the current orbitals.
#[derive(Debug, Clone)]
pub struct StateSolution {
    pub energy: f64,
    pub s2: f64,
    /// Real determinant-basis amplitudes of the state.
    pub civec: Array1<f64>,
    pub basis: Arc<DeterminantBasis>,
    pub rdms: ActiveRdms,
    pub cnots: usize,
    pub pool_grad_norm: f64,
    /// Operators appended in the last growth step.
    pub added: Vec<String>,
}

/// Supplies states for the outer orbital loop.
pub trait ConfigurationEngine: Clone {
    /// Solves at new orbitals; an adaptive engine may grow its ansatz.
    fn grow(&mut self, act: &ActiveHamiltonian) -> Result<Vec<StateSolution>>;
    /// Re-optimizes without changing the ansatz structure.
    fn relax(&mut self, act: &ActiveHamiltonian) -> Result<Vec<StateSolution>>;
    /// The configurational problem is converged (pool exhausted).
    fn converged(&self) -> bool;
    /// `(label, angle)` lists, one per state; empty for exact engines.
    fn circuits(&self) -> Vec<Vec<(String, f64)>> {
        Vec::new()
    }
}

/// Exact CASCI per target state.
#[derive(Debug, Clone)]
pub struct ExactEngine {
    spec: StateAverageSpec,
    bases: Vec<Arc<DeterminantBasis>>,
}

impl ExactEngine {
    pub fn new(part: &OrbitalPartition, spec: &StateAverageSpec) -> Result<Self> {
        spec.validate()?;
        let bases = spec
            .states
            .iter()
            .map(|s| DeterminantBasis::for_sector(part.nact, part.nelec_act, s.ms2).map(Arc::new))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { spec: spec.clone(), bases })
    }

    fn solve(&self, act: &ActiveHamiltonian) -> Result<Vec<StateSolution>> {
        let mut out = Vec::with_capacity(self.spec.len());
        for (k, (target, basis)) in self.spec.states.iter().zip(&self.bases).enumerate() {
            // states sharing (S, ms2) take successive roots
            let rank = self.spec.states[..k]
                .iter()
                .filter(|s| s.ms2 == target.ms2 && s.spin == target.spin)
                .count();
            let (energy, civec, s2) = pick_root(act, basis, target, rank)?;
            let (g1, g2) = ci_rdms(basis, &civec)?;
            out.push(StateSolution {
                energy,
                s2,
                civec,
                basis: basis.clone(),
                rdms: ActiveRdms { g1, g2 },
                cnots: 0,
                pool_grad_norm: 0.0,
                added: Vec::new(),
            });
        }
        Ok(out)
    }
}

fn pick_root(
    act: &ActiveHamiltonian,
    basis: &DeterminantBasis,
    target: &TargetState,
    rank: usize,
) -> Result<(f64, Array1<f64>, f64)> {
    let want = target.s2_target();
    let mut n = (rank + 1).min(basis.len());
    loop {
        let roots = casci_solve(act, basis, n)?;
        let mut found = 0;
        for r in &roots {
            let s2 = ci_s2(basis, &r.coeffs)?;
            if (s2 - want).abs() < S2_MATCH_TOL {
                if found == rank {
                    return Ok((r.energy, r.coeffs.clone(), s2));
                }
                found += 1;
            }
        }
        if n == basis.len() {
            return Err(Error::InvalidInput(format!(
                "sector ms2 = {} holds fewer than {} states of S = {}",
                target.ms2,
                rank + 1,
                target.spin
            )));
        }
        n = (2 * n + 2).min(basis.len());
    }
}

impl ConfigurationEngine for ExactEngine {
    fn grow(&mut self, act: &ActiveHamiltonian) -> Result<Vec<StateSolution>> {
        self.solve(act)
    }

    fn relax(&mut self, act: &ActiveHamiltonian) -> Result<Vec<StateSolution>> {
        self.solve(act)
    }

    fn converged(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone)]
struct AdaptState {
    target: TargetState,
    circuit: AnsatzCircuit,
    basis: Arc<DeterminantBasis>,
    /// `(N̂ − N)² + (2Ŝ_z − ms2)²` for pools that leave the sector.
    penalty: Option<Arc<PauliSum>>,
    converged: bool,
}

/// ADAPT-VQE per target state on the statevector simulator.
///
/// States must occupy distinct `ms2` sectors, each grown from its own
/// Aufbau reference against the shared orbitals.
#[derive(Debug, Clone)]
pub struct AdaptEngine {
    mapping: Mapping,
    ordering: SpinOrbitalOrdering,
    cfg: AdaptConfig,
    pool: Arc<OperatorPool>,
    s2_pauli: Arc<PauliSum>,
    s2: Arc<QubitOperator>,
    measurer: Arc<RdmMeasurer>,
    states: Vec<AdaptState>,
}

impl AdaptEngine {
    pub fn new(
        part: &OrbitalPartition,
        spec: &StateAverageSpec,
        mapping: Mapping,
        ordering: SpinOrbitalOrdering,
        pool_kind: PoolKind,
        cfg: &AdaptConfig,
    ) -> Result<Self> {
        spec.validate()?;
        cfg.validate()?;
        let mut seen = Vec::new();
        for s in &spec.states {
            if seen.contains(&s.ms2) {
                return Err(Error::InvalidInput(format!(
                    "ADAPT state averaging needs distinct ms2 sectors; ms2 = {} repeats",
                    s.ms2
                )));
            }
            seen.push(s.ms2);
        }
        let fermionic = build_fermionic_pool(part.nact, part.nelec_act, mapping, ordering, cfg.spin_filter)?;
        let pool = match pool_kind {
            PoolKind::Fermionic => fermionic,
            PoolKind::Qubit => build_qubit_pool(&fermionic)?,
        };
        let n = 2 * part.nact;
        let enc = FermionEncoding::new(mapping, n)?;
        let leaky = pool.kind == PoolKind::Qubit && cfg.sector_penalty_weight > 0.0;
        let (number, sz) = (build_number_operator(n, mapping)?, build_sz_operator(part.nact, mapping, ordering)?);
        let states = spec
            .states
            .iter()
            .map(|t| {
                let occ = reference_occupation(part.nact, part.nelec_act, t.ms2, ordering)?;
                Ok(AdaptState {
                    target: *t,
                    circuit: AnsatzCircuit::new(n, enc.encode(occ)),
                    basis: Arc::new(DeterminantBasis::for_sector(part.nact, part.nelec_act, t.ms2)?),
                    penalty: leaky.then(|| Arc::new(sector_penalty(&number, &sz, part.nelec_act, t.ms2))),
                    converged: false,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let s2_pauli = build_s2_operator(part.nact, mapping, ordering)?;
        Ok(Self {
            mapping,
            ordering,
            cfg: cfg.clone(),
            pool: Arc::new(pool),
            s2: Arc::new(QubitOperator::new(&s2_pauli)?),
            s2_pauli: Arc::new(s2_pauli),
            measurer: Arc::new(RdmMeasurer::new(part.nact, mapping, ordering)?),
            states,
        })
    }

    /// Vanilla ADAPT-VQE at fixed orbitals: grows until every state's pool
    /// is exhausted or its operator budget is spent. Returns the states
    /// after each growth step.
    pub fn run_fixed_orbitals(&mut self, act: &ActiveHamiltonian) -> Result<Vec<Vec<StateSolution>>> {
        let mut history = Vec::new();
        loop {
            history.push(self.grow(act)?);
            let full = self.states.iter().all(|s| s.circuit.len() >= self.cfg.max_total_ops);
            if self.converged() || full {
                return Ok(history);
            }
        }
    }

    pub fn pool(&self) -> &OperatorPool {
        &self.pool
    }

    pub fn circuit(&self, state: usize) -> &AnsatzCircuit {
        &self.states[state].circuit
    }

    fn objective(&self, h: &PauliSum, st: &AdaptState) -> Result<Objective> {
        let target = st.target.s2_target();
        let obj = Objective::new(h)?.with_spin_penalty(&self.s2_pauli, self.cfg.spin_penalty_weight, target)?;
        match &st.penalty {
            Some(p) => obj.with_sector_penalty(p, self.cfg.sector_penalty_weight),
            None => Ok(obj),
        }
    }

    fn solution(
        &self,
        st: &AdaptState,
        act: &ActiveHamiltonian,
        energy: f64,
        grad_norm: f64,
        added: Vec<String>,
    ) -> Result<StateSolution> {
        let psi = apply_ansatz(&st.circuit)?;
        let (civec, outside) = sector_component(&psi, &st.basis, self.mapping, self.ordering)?;
        let (energy, (g1, g2)) = if outside > OUT_OF_SECTOR_TOL {
            // qubit-pool ansätze may leave the sector while incomplete; the
            // orbital step then works with the renormalized sector part
            log::debug!("sector leakage {outside:.3e}; using the projected state");
            let hc = CiOperator::from_active(act).apply(&st.basis, &civec)?;
            (civec.dot(&hc), ci_rdms(&st.basis, &civec)?)
        } else {
            match self.measurer.measure(&psi) {
                Ok(r) => (energy, r),
                Err(Error::SectorViolation(_)) => (energy, ci_rdms(&st.basis, &civec)?),
                Err(e) => return Err(e),
            }
        };
        Ok(StateSolution {
            energy,
            s2: self.s2.expectation(&psi)?,
            civec,
            basis: st.basis.clone(),
            rdms: ActiveRdms { g1, g2 },
            cnots: cnot_count(&st.circuit),
            pool_grad_norm: grad_norm,
            added,
        })
    }
}

fn sector_penalty(number: &PauliSum, sz: &PauliSum, nelec: usize, ms2: i32) -> PauliSum {
    let n = number.n_qubits();
    let dn = number.add(&PauliSum::identity(n, -(nelec as f64)));
    let dm = sz.scale(num_complex::Complex64::new(2.0, 0.0)).add(&PauliSum::identity(n, -(ms2 as f64)));
    dn.mul(&dn).add(&dm.mul(&dm))
}

impl ConfigurationEngine for AdaptEngine {
    fn grow(&mut self, act: &ActiveHamiltonian) -> Result<Vec<StateSolution>> {
        let h = map_hamiltonian(act, self.mapping, self.ordering)?;
        let objectives = self.states.iter().map(|s| self.objective(&h, s)).collect::<Result<Vec<_>>>()?;
        let (pool, cfg) = (&self.pool, &self.cfg);
        let steps = self
            .states
            .par_iter_mut()
            .zip(objectives.par_iter())
            .map(|(st, obj)| {
                let before = obj.evaluate(&st.circuit)?.0;
                let full = st.circuit.len() >= cfg.max_total_ops;
                let step = adapt_step(&mut st.circuit, obj, pool, cfg)?;
                st.converged = if full {
                    step.pool_grad_max < cfg.pool_grad_tol
                } else {
                    step.converged || (before - step.energy).abs() < cfg.adapt_energy_tol
                };
                let added = step.added.iter().map(|&i| pool.entries[i].label.clone()).collect::<Vec<_>>();
                Ok((step.energy, step.pool_grad_norm, added))
            })
            .collect::<Result<Vec<_>>>()?;
        self.states
            .iter()
            .zip(steps)
            .map(|(st, (e, g, added))| self.solution(st, act, e, g, added))
            .collect()
    }

    fn relax(&mut self, act: &ActiveHamiltonian) -> Result<Vec<StateSolution>> {
        let h = map_hamiltonian(act, self.mapping, self.ordering)?;
        let objectives = self.states.iter().map(|s| self.objective(&h, s)).collect::<Result<Vec<_>>>()?;
        let vqe = self.cfg.vqe();
        let energies = self
            .states
            .par_iter_mut()
            .zip(objectives.par_iter())
            .map(|(st, obj)| {
                if st.circuit.is_empty() {
                    Ok(obj.evaluate(&st.circuit)?.0)
                } else {
                    Ok(vqe_minimize(&mut st.circuit, obj, &vqe)?.energy)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        self.states.iter().zip(energies).map(|(st, e)| self.solution(st, act, e, f64::NAN, Vec::new())).collect()
    }

    fn converged(&self) -> bool {
        self.states.iter().all(|s| s.converged)
    }

    fn circuits(&self) -> Vec<Vec<(String, f64)>> {
        self.states
            .iter()
            .map(|s| s.circuit.gates.iter().map(|g| (g.label.clone(), g.theta)).collect())
            .collect()
    }
}
