use num_complex::Complex64;

use super::operator::QubitOperator;
use crate::fermion::{FermionEncoding, Mapping, PauliSum, Spin, SpinOrbitalOrdering};
use crate::integrals::OrbitalPartition;
use crate::{Error, Result};

/// Largest register the dense simulator accepts.
pub const MAX_QUBITS: usize = 24;

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    pub fn basis(n: usize, index: u64) -> Result<Self> {
        if n > MAX_QUBITS {
            return Err(Error::Capacity(n));
        }
        let dim = 1usize << n;
        if index as usize >= dim {
            return Err(Error::InvalidInput(format!("basis index {index} outside {n}-qubit register")));
        }
        let mut amps = vec![Complex64::default(); dim];
        amps[index as usize] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    /// Wraps raw amplitudes; the length must be a power of two.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let dim = amps.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::Dimension(format!("{dim} amplitudes is not a power of two")));
        }
        let n = dim.trailing_zeros() as usize;
        if n > MAX_QUBITS {
            return Err(Error::Capacity(n));
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFinite("amplitudes"));
        }
        Ok(Self { n, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            self.amps.iter_mut().for_each(|a| *a /= n);
        }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Statevector) -> Complex64 {
        dot(&self.amps, &other.amps)
    }

    /// Index/real/imag CSV dump of nonzero amplitudes.
    pub fn to_csv(&self, tol: f64) -> String {
        let mut s = String::from("index,real,imag\n");
        for (i, a) in self.amps.iter().enumerate().filter(|(_, a)| a.norm() > tol) {
            s.push_str(&format!("{i},{:.17e},{:.17e}\n", a.re, a.im));
        }
        s
    }
}

pub(crate) fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Aufbau occupation bitstring of the active space for the given `ms2`.
pub fn reference_occupation(nact: usize, nelec: usize, ms2: i32, ordering: SpinOrbitalOrdering) -> Result<u64> {
    let n = nelec as i64;
    let m = ms2 as i64;
    if (n + m) % 2 != 0 || m.abs() > n {
        return Err(Error::InvalidInput(format!("ms2={ms2} infeasible for {nelec} electrons")));
    }
    let (na, nb) = (((n + m) / 2) as usize, ((n - m) / 2) as usize);
    if na > nact || nb > nact {
        return Err(Error::InvalidInput(format!(
            "{na} alpha / {nb} beta electrons do not fit {nact} active orbitals"
        )));
    }
    let mut occ = 0u64;
    for p in 0..na {
        occ |= 1 << ordering.mode(p, Spin::Alpha, nact);
    }
    for p in 0..nb {
        occ |= 1 << ordering.mode(p, Spin::Beta, nact);
    }
    Ok(occ)
}

/// Reference determinant encoded on `2 nact` qubits.
pub fn init_reference(
    part: &OrbitalPartition,
    ms2: i32,
    mapping: Mapping,
    ordering: SpinOrbitalOrdering,
) -> Result<Statevector> {
    let occ = reference_occupation(part.nact, part.nelec_act, ms2, ordering)?;
    let enc = FermionEncoding::new(mapping, 2 * part.nact)?;
    Statevector::basis(2 * part.nact, enc.encode(occ))
}

/// `<psi|O|psi>` for hermitian `O`.
pub fn expectation(state: &Statevector, op: &PauliSum) -> Result<f64> {
    QubitOperator::new(op)?.expectation(state)
}
