use num_complex::Complex64;

use super::operator::QubitOperator;
use super::state::{dot, Statevector};
use crate::fermion::{PauliString, PauliSum};
use crate::{Error, Result};

/// Hermitian generator `G` with real coefficients and pairwise commuting
/// terms; its gate is `exp(i θ G) = Π_k exp(i θ c_k P_k)` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    n: usize,
    terms: Vec<(PauliString, f64)>,
}

impl Generator {
    pub fn new(sum: &PauliSum) -> Result<Self> {
        if sum.max_imag() > 1e-12 {
            return Err(Error::InvalidInput("generator has complex coefficients".into()));
        }
        if !sum.terms_commute() {
            return Err(Error::NonCommuting(sum.to_text()));
        }
        Ok(Self { n: sum.n_qubits(), terms: sum.iter().map(|(p, c)| (*p, c.re)).collect() })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(PauliString, f64)] {
        &self.terms
    }

    pub fn to_pauli_sum(&self) -> PauliSum {
        PauliSum::from_terms(self.n, self.terms.iter().map(|(p, c)| (*p, Complex64::new(*c, 0.0))))
    }

    /// `psi <- exp(i θ G) psi`.
    pub fn apply(&self, state: &mut Statevector, theta: f64) {
        assert_eq!(state.n_qubits(), self.n, "generator and state registers differ");
        for (p, c) in &self.terms {
            apply_pauli_exp(state.amplitudes_mut(), p, theta * c);
        }
    }

    /// `A psi = i G psi` without exponentiation.
    pub fn act(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); v.len()];
        let i = Complex64::new(0.0, 1.0);
        for (p, c) in &self.terms {
            let x = p.x_mask();
            for (b, a) in v.iter().enumerate() {
                if a.re != 0.0 || a.im != 0.0 {
                    out[b ^ x as usize] += i * *c * p.phase_on(b as u64) * a;
                }
            }
        }
        out
    }

    /// CNOTs of the staircase decomposition: `2 (w - 1)` per factor.
    pub fn cnot_count(&self) -> usize {
        self.terms.iter().map(|(p, _)| 2 * p.weight().saturating_sub(1)).sum()
    }
}

fn apply_pauli_exp(amps: &mut [Complex64], p: &PauliString, phi: f64) {
    let (s, c) = phi.sin_cos();
    let is = Complex64::new(0.0, s);
    let x = p.x_mask();
    if x == 0 {
        for (b, a) in amps.iter_mut().enumerate() {
            *a *= c + is * p.phase_on(b as u64);
        }
        return;
    }
    let low = x & x.wrapping_neg();
    for b in 0..amps.len() as u64 {
        if b & low != 0 {
            continue;
        }
        let b2 = b ^ x;
        let (a1, a2) = (amps[b as usize], amps[b2 as usize]);
        amps[b as usize] = c * a1 + is * p.phase_on(b2) * a2;
        amps[b2 as usize] = c * a2 + is * p.phase_on(b) * a1;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzGate {
    pub generator: Generator,
    pub theta: f64,
    /// Pool operator this gate came from.
    pub label: String,
}

/// `Π_i exp(θ_i A_i)` applied to a basis-state reference.
#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzCircuit {
    pub n_qubits: usize,
    pub reference: u64,
    pub gates: Vec<AnsatzGate>,
}

impl AnsatzCircuit {
    pub fn new(n_qubits: usize, reference: u64) -> Self {
        Self { n_qubits, reference, gates: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, generator: Generator, theta: f64, label: impl Into<String>) -> Result<()> {
        if generator.n_qubits() != self.n_qubits {
            return Err(Error::LengthMismatch(generator.n_qubits(), self.n_qubits));
        }
        if !theta.is_finite() {
            return Err(Error::NonFinite("gate angle"));
        }
        self.gates.push(AnsatzGate { generator, theta, label: label.into() });
        Ok(())
    }

    pub fn params(&self) -> Vec<f64> {
        self.gates.iter().map(|g| g.theta).collect()
    }

    pub fn set_params(&mut self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.gates.len() {
            return Err(Error::LengthMismatch(theta.len(), self.gates.len()));
        }
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite("gate angles"));
        }
        for (g, t) in self.gates.iter_mut().zip(theta) {
            g.theta = *t;
        }
        Ok(())
    }
}

pub fn apply_ansatz(circ: &AnsatzCircuit) -> Result<Statevector> {
    let mut s = Statevector::basis(circ.n_qubits, circ.reference)?;
    for g in &circ.gates {
        g.generator.apply(&mut s, g.theta);
    }
    Ok(s)
}

pub fn cnot_count(circ: &AnsatzCircuit) -> usize {
    circ.gates.iter().map(|g| g.generator.cnot_count()).sum()
}

/// Energy and exact parameter gradient by one forward and one backward sweep.
pub fn ansatz_energy_gradient(circ: &AnsatzCircuit, h: &QubitOperator) -> Result<(f64, Vec<f64>)> {
    let mut phi = apply_ansatz(circ)?;
    let mut lambda = Statevector::from_amplitudes(h.apply(phi.amplitudes()))?;
    let e = dot(phi.amplitudes(), lambda.amplitudes());
    if e.im.abs() > 1e-8 {
        return Err(Error::Consistency(format!("energy has imaginary part {:.3e}", e.im)));
    }
    let mut grad = vec![0.0; circ.len()];
    for (i, g) in circ.gates.iter().enumerate().rev() {
        let a_phi = g.generator.act(phi.amplitudes());
        grad[i] = 2.0 * dot(lambda.amplitudes(), &a_phi).re;
        if i > 0 {
            g.generator.apply(&mut phi, -g.theta);
            g.generator.apply(&mut lambda, -g.theta);
        }
    }
    Ok((e.re, grad))
}

pub fn ansatz_gradient(circ: &AnsatzCircuit, h: &PauliSum) -> Result<Vec<f64>> {
    Ok(ansatz_energy_gradient(circ, &QubitOperator::new(h)?)?.1)
}
