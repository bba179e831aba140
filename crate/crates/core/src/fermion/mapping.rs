use std::collections::HashMap;

use num_complex::Complex64;

use super::operator::{FermionOperator, Ladder};
use super::pauli::{PauliString, PauliSum};
use crate::integrals::ActiveHamiltonian;
use crate::{Error, Result};

/// Residual imaginary part tolerated before a hermitian image is made real.
const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mapping {
    #[default]
    #[serde(alias = "jw")]
    JordanWigner,
    #[serde(alias = "bk")]
    BravyiKitaev,
}

impl std::str::FromStr for Mapping {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "jw" | "jordan-wigner" | "jordanwigner" => Ok(Self::JordanWigner),
            "bk" | "bravyi-kitaev" | "bravyikitaev" => Ok(Self::BravyiKitaev),
            _ => Err(Error::InvalidInput(format!("unknown mapping '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spin {
    Alpha = 0,
    Beta = 1,
}

/// Placement of spin-orbitals on modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpinOrbitalOrdering {
    /// α₀ β₀ α₁ β₁ …
    #[default]
    Interleaved,
    /// α₀ α₁ … β₀ β₁ …
    Blocked,
}

impl std::str::FromStr for SpinOrbitalOrdering {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "interleaved" => Ok(Self::Interleaved),
            "blocked" => Ok(Self::Blocked),
            _ => Err(Error::InvalidInput(format!("unknown spin-orbital ordering '{s}'"))),
        }
    }
}

impl SpinOrbitalOrdering {
    pub fn mode(self, orb: usize, spin: Spin, nact: usize) -> usize {
        match self {
            Self::Interleaved => 2 * orb + spin as usize,
            Self::Blocked => spin as usize * nact + orb,
        }
    }

    /// Inverse of [`Self::mode`].
    pub fn orbital(self, mode: usize, nact: usize) -> (usize, Spin) {
        let (orb, beta) = match self {
            Self::Interleaved => (mode / 2, mode % 2 == 1),
            Self::Blocked => (mode % nact, mode >= nact),
        };
        (orb, if beta { Spin::Beta } else { Spin::Alpha })
    }
}

/// Linear GF(2) encoding `b = β n` of occupations `n` into qubits `b`,
/// with cached qubit images of every ladder operator.
#[derive(Debug, Clone)]
pub struct FermionEncoding {
    mapping: Mapping,
    n_modes: usize,
    beta: Vec<u64>,
    beta_inv: Vec<u64>,
    annihilators: Vec<PauliSum>,
    creators: Vec<PauliSum>,
}

impl FermionEncoding {
    pub fn new(mapping: Mapping, n_modes: usize) -> Result<Self> {
        if n_modes > 64 {
            return Err(Error::Capacity(n_modes));
        }
        let beta: Vec<u64> = (0..n_modes)
            .map(|j| match mapping {
                Mapping::JordanWigner => 1u64 << j,
                Mapping::BravyiKitaev => (j & (j + 1)..=j).fold(0u64, |m, k| m | 1 << k),
            })
            .collect();
        let beta_inv = invert_lower_triangular(&beta);

        let mut annihilators = Vec::with_capacity(n_modes);
        let mut creators = Vec::with_capacity(n_modes);
        for j in 0..n_modes {
            let bit = 1u64 << j;
            let update = (j + 1..n_modes).filter(|&m| beta[m] & bit != 0).fold(0u64, |u, m| u | 1 << m);
            let parity = (0..j).fold(0u64, |p, k| p ^ beta_inv[k]);
            let flip = (0..j).filter(|&k| beta[j] & (1 << k) != 0).fold(0u64, |f, k| f ^ beta_inv[k]);
            let rem = parity ^ flip;
            let w1 = PauliString::from_masks(n_modes, update | bit, parity);
            let w2 = PauliString::from_masks(n_modes, update | bit, rem | bit);
            let half = Complex64::new(0.5, 0.0);
            let ihalf = Complex64::new(0.0, 0.5);
            annihilators.push(PauliSum::from_terms(n_modes, [(w1, half), (w2, ihalf)]));
            creators.push(PauliSum::from_terms(n_modes, [(w1, half), (w2, -ihalf)]));
        }
        Ok(Self { mapping, n_modes, beta, beta_inv, annihilators, creators })
    }

    pub fn mapping(&self) -> Mapping {
        self.mapping
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    /// Qubit basis index of the occupation bitstring `occ`.
    pub fn encode(&self, occ: u64) -> u64 {
        self.beta
            .iter()
            .enumerate()
            .fold(0u64, |b, (j, row)| b | (((row & occ).count_ones() as u64 & 1) << j))
    }

    /// Occupation bitstring of qubit basis index `b`.
    pub fn decode(&self, b: u64) -> u64 {
        self.beta_inv
            .iter()
            .enumerate()
            .fold(0u64, |n, (k, row)| n | (((row & b).count_ones() as u64 & 1) << k))
    }

    pub fn ladder(&self, l: Ladder) -> Result<&PauliSum> {
        if l.mode >= self.n_modes {
            return Err(Error::ModeOutOfRange { mode: l.mode, n_modes: self.n_modes });
        }
        Ok(if l.dagger { &self.creators[l.mode] } else { &self.annihilators[l.mode] })
    }

    pub fn map(&self, op: &FermionOperator) -> Result<PauliSum> {
        op.check_modes(self.n_modes)?;
        let mut out = PauliSum::zero(self.n_modes);
        for t in op.terms() {
            let mut acc = PauliSum::identity(self.n_modes, 1.0);
            for &l in &t.factors {
                acc = acc.mul(self.ladder(l)?);
            }
            out = out.add(&acc.scale(t.coeff));
        }
        Ok(out)
    }

    /// Image of `a†_p a_q`.
    pub fn hopping(&self, p: usize, q: usize) -> Result<PauliSum> {
        Ok(self.ladder(Ladder::create(p))?.mul(self.ladder(Ladder::annihilate(q))?))
    }
}

fn invert_lower_triangular(rows: &[u64]) -> Vec<u64> {
    // forward substitution over GF(2); row k of the inverse expresses n_k in qubits
    let mut inv = vec![0u64; rows.len()];
    for k in 0..rows.len() {
        let mut r = 1u64 << k;
        for m in 0..k {
            if rows[k] & (1 << m) != 0 {
                r ^= inv[m];
            }
        }
        inv[k] = r;
    }
    inv
}

pub fn jordan_wigner(op: &FermionOperator, n_modes: usize) -> Result<PauliSum> {
    FermionEncoding::new(Mapping::JordanWigner, n_modes)?.map(op)
}

pub fn bravyi_kitaev(op: &FermionOperator, n_modes: usize) -> Result<PauliSum> {
    FermionEncoding::new(Mapping::BravyiKitaev, n_modes)?.map(op)
}

fn hermitian(sum: PauliSum, what: &str) -> Result<PauliSum> {
    if sum.max_imag() > HERMITIAN_TOL {
        return Err(Error::Consistency(format!(
            "{what} image has imaginary residue {:.3e}",
            sum.max_imag()
        )));
    }
    Ok(sum.real_part())
}

/// Qubit image of the active-space Hamiltonian including `e_frozen`.
pub fn map_hamiltonian(
    act: &ActiveHamiltonian,
    mapping: Mapping,
    ordering: SpinOrbitalOrdering,
) -> Result<PauliSum> {
    let l = act.nact;
    let n = 2 * l;
    let enc = FermionEncoding::new(mapping, n)?;
    let spins = [Spin::Alpha, Spin::Beta];
    let mode = |p: usize, s: Spin| ordering.mode(p, s, l);

    // same-spin hoppings E^σ_pq, indexed by (σ, p, q)
    let mut hop = Vec::with_capacity(2 * l * l);
    for &s in &spins {
        for p in 0..l {
            for q in 0..l {
                hop.push(enc.hopping(mode(p, s), mode(q, s))?);
            }
        }
    }
    let e = |s: usize, p: usize, q: usize| &hop[(s * l + p) * l + q];

    let mut acc: HashMap<PauliString, Complex64> = HashMap::new();
    let mut push = |sum: &PauliSum, c: f64| {
        for (p, v) in sum.iter() {
            *acc.entry(*p).or_default() += v * c;
        }
    };
    push(&PauliSum::identity(n, 1.0), act.e_frozen);
    for s in 0..2 {
        for p in 0..l {
            for q in 0..l {
                // one-electron part plus the -½ Σ_r (pr|rq) from reordering the two-body term
                let mut c = act.heff[[p, q]];
                for r in 0..l {
                    c -= 0.5 * act.eri[[p, r, r, q]];
                }
                if c != 0.0 {
                    push(e(s, p, q), c);
                }
            }
        }
    }
    // ½ Σ (pq|rs) E_pq E_rs with E_pq = Σ_σ E^σ_pq
    for p in 0..l {
        for q in 0..l {
            for r in 0..l {
                for ss in 0..l {
                    let v = act.eri[[p, q, r, ss]];
                    if v.abs() < 1e-14 {
                        continue;
                    }
                    for s1 in 0..2 {
                        for s2 in 0..2 {
                            push(&e(s1, p, q).mul(e(s2, r, ss)), 0.5 * v);
                        }
                    }
                }
            }
        }
    }
    hermitian(PauliSum::from_terms(n, acc), "Hamiltonian")
}

/// Total number operator `Σ_m a†_m a_m`.
pub fn build_number_operator(n_modes: usize, mapping: Mapping) -> Result<PauliSum> {
    let enc = FermionEncoding::new(mapping, n_modes)?;
    let mut out = PauliSum::zero(n_modes);
    for m in 0..n_modes {
        out = out.add(&enc.hopping(m, m)?);
    }
    hermitian(out, "number operator")
}

/// `Ŝ_z = ½ Σ_p (n_pα − n_pβ)`.
pub fn build_sz_operator(nact: usize, mapping: Mapping, ordering: SpinOrbitalOrdering) -> Result<PauliSum> {
    let enc = FermionEncoding::new(mapping, 2 * nact)?;
    let mut out = PauliSum::zero(2 * nact);
    for p in 0..nact {
        let a = ordering.mode(p, Spin::Alpha, nact);
        let b = ordering.mode(p, Spin::Beta, nact);
        out = out.add(&enc.hopping(a, a)?.scale(Complex64::new(0.5, 0.0)));
        out = out.add(&enc.hopping(b, b)?.scale(Complex64::new(-0.5, 0.0)));
    }
    hermitian(out, "Sz")
}

/// `Ŝ² = Ŝ₋Ŝ₊ + Ŝ_z(Ŝ_z + 1)`.
pub fn build_s2_operator(nact: usize, mapping: Mapping, ordering: SpinOrbitalOrdering) -> Result<PauliSum> {
    let n = 2 * nact;
    let enc = FermionEncoding::new(mapping, n)?;
    let mut s_plus = PauliSum::zero(n);
    for p in 0..nact {
        let a = ordering.mode(p, Spin::Alpha, nact);
        let b = ordering.mode(p, Spin::Beta, nact);
        s_plus = s_plus.add(&enc.hopping(a, b)?);
    }
    let s_minus = s_plus.adjoint();
    let sz = build_sz_operator(nact, mapping, ordering)?;
    let s2 = s_minus.mul(&s_plus).add(&sz.mul(&sz)).add(&sz);
    hermitian(s2, "S^2")
}
