use ndarray::{Array2, Array4};
use num_complex::Complex64;

use super::operator::QubitOperator;
use super::state::{dot, Statevector};
use crate::fermion::{build_number_operator, build_s2_operator, FermionEncoding, Mapping, Spin, SpinOrbitalOrdering};
use crate::{Error, Result};

/// Number-operator variance above which a state is rejected as leaving its sector.
pub const SECTOR_TOL: f64 = 1e-8;

/// Compiled spin-summed excitation operators `E_pq` for repeated RDM extraction.
#[derive(Debug, Clone)]
pub struct RdmMeasurer {
    nact: usize,
    hop: Vec<QubitOperator>,
    number: QubitOperator,
}

impl RdmMeasurer {
    pub fn new(nact: usize, mapping: Mapping, ordering: SpinOrbitalOrdering) -> Result<Self> {
        let n = 2 * nact;
        let enc = FermionEncoding::new(mapping, n)?;
        let mut hop = Vec::with_capacity(nact * nact);
        for p in 0..nact {
            for q in 0..nact {
                let mut e = enc.hopping(ordering.mode(p, Spin::Alpha, nact), ordering.mode(q, Spin::Alpha, nact))?;
                e = e.add(&enc.hopping(ordering.mode(p, Spin::Beta, nact), ordering.mode(q, Spin::Beta, nact))?);
                hop.push(QubitOperator::new(&e)?);
            }
        }
        let number = QubitOperator::new(&build_number_operator(n, mapping)?)?;
        Ok(Self { nact, hop, number })
    }

    /// Electron count, with an error when the number variance exceeds the sector tolerance.
    pub fn particle_number(&self, state: &Statevector) -> Result<f64> {
        let nv = self.number.apply(state.amplitudes());
        let n = dot(state.amplitudes(), &nv).re;
        let n2 = dot(&nv, &nv).re;
        let var = n2 - n * n;
        if var > SECTOR_TOL {
            return Err(Error::SectorViolation(format!("number variance {var:.3e}")));
        }
        Ok(n)
    }

    /// `γ_ij = <E_ij>`, `Γ_ijkl = ½ <E_ij E_kl − δ_jk E_il>`.
    pub fn measure(&self, state: &Statevector) -> Result<(Array2<f64>, Array4<f64>)> {
        let l = self.nact;
        if state.n_qubits() != 2 * l {
            return Err(Error::LengthMismatch(state.n_qubits(), 2 * l));
        }
        self.particle_number(state)?;
        let psi = state.amplitudes();
        let phi: Vec<Vec<Complex64>> = self.hop.iter().map(|e| e.apply(psi)).collect();
        let idx = |p: usize, q: usize| p * l + q;
        let mut g1 = Array2::zeros((l, l));
        for i in 0..l {
            for j in 0..l {
                g1[[i, j]] = dot(psi, &phi[idx(i, j)]).re;
            }
        }
        let mut g2 = Array4::zeros((l, l, l, l));
        for i in 0..l {
            for j in 0..l {
                // <psi| E_ij = (E_ji psi)^†
                let bra = &phi[idx(j, i)];
                for k in 0..l {
                    for m in 0..l {
                        let mut v = dot(bra, &phi[idx(k, m)]).re;
                        if j == k {
                            v -= g1[[i, m]];
                        }
                        g2[[i, j, k, m]] = 0.5 * v;
                    }
                }
            }
        }
        Ok((g1, g2))
    }
}

pub fn measure_rdm12(
    state: &Statevector,
    nact: usize,
    mapping: Mapping,
    ordering: SpinOrbitalOrdering,
) -> Result<(Array2<f64>, Array4<f64>)> {
    RdmMeasurer::new(nact, mapping, ordering)?.measure(state)
}

pub fn expectation_s2(state: &Statevector, nact: usize, mapping: Mapping, ordering: SpinOrbitalOrdering) -> Result<f64> {
    QubitOperator::new(&build_s2_operator(nact, mapping, ordering)?)?.expectation(state)
}
