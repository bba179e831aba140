//! Molecular-orbital integrals and everything derived from them: FCIDUMP
//! ingestion, the core/active/virtual partition, the folded active-space
//! Hamiltonian, the two-particle reduced Hamiltonian, and orbital rotations.

mod active;
mod fcidump;
mod rotation;

pub use active::{
    active_hamiltonian_derivative, build_active_hamiltonian, build_reduced_hamiltonian,
    one_index_transform_k2, ActiveHamiltonian, ReducedHamiltonian2K,
};
pub use fcidump::{parse_fcidump, read_fcidump, write_fcidump};
pub use rotation::{
    exp_kappa, one_index_transform_integrals, rotate_integrals, KappaLayout, KappaVector,
};

use ndarray::{Array2, Array4};

use crate::{Error, Result};

/// Full-MO-space integrals in chemist notation, `eri[[p, q, r, s]] = (pq|rs)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralSet {
    pub norb: usize,
    pub nelec: usize,
    pub ms2: i32,
    pub h: Array2<f64>,
    pub eri: Array4<f64>,
    pub e_core: f64,
    /// Point-group labels as read from the file; carried through untouched.
    pub orbsym: Option<Vec<i32>>,
    pub isym: Option<i32>,
}

impl IntegralSet {
    pub fn zeros(norb: usize, nelec: usize, ms2: i32) -> Self {
        Self {
            norb,
            nelec,
            ms2,
            h: Array2::zeros((norb, norb)),
            eri: Array4::zeros((norb, norb, norb, norb)),
            e_core: 0.0,
            orbsym: None,
            isym: None,
        }
    }

    /// Checks finiteness and the permutational symmetries to `tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let n = self.norb;
        if self.h.dim() != (n, n) || self.eri.dim() != (n, n, n, n) {
            return Err(Error::Dimension(format!("integral arrays do not match norb = {n}")));
        }
        if !self.e_core.is_finite()
            || self.h.iter().any(|v| !v.is_finite())
            || self.eri.iter().any(|v| !v.is_finite())
        {
            return Err(Error::NonFinite("integrals"));
        }
        for p in 0..n {
            for q in 0..n {
                if (self.h[[p, q]] - self.h[[q, p]]).abs() > tol {
                    return Err(Error::InvalidInput(format!("h not symmetric at ({p},{q})")));
                }
            }
        }
        let drift = eri_symmetry_drift(&self.eri);
        if drift > tol {
            return Err(Error::InvalidInput(format!("eri symmetry violated by {drift:e}")));
        }
        Ok(())
    }
}

/// Largest deviation between an element and its 8-fold symmetry partners.
pub(crate) fn eri_symmetry_drift(eri: &Array4<f64>) -> f64 {
    let n = eri.dim().0;
    let mut drift = 0.0f64;
    for p in 0..n {
        for q in 0..=p {
            for r in 0..n {
                for s in 0..=r {
                    let v = eri[[p, q, r, s]];
                    for w in eight_fold(p, q, r, s) {
                        drift = drift.max((eri[w] - v).abs());
                    }
                }
            }
        }
    }
    drift
}

/// Replaces each element by the mean over its 8 symmetry partners.
pub(crate) fn symmetrize_eri(eri: &mut Array4<f64>) {
    let n = eri.dim().0;
    for p in 0..n {
        for q in 0..=p {
            for r in 0..=p {
                let smax = if r == p { q } else { r };
                for s in 0..=smax {
                    let idx = eight_fold(p, q, r, s);
                    let mean = idx.iter().map(|&w| eri[w]).sum::<f64>() / 8.0;
                    for w in idx {
                        eri[w] = mean;
                    }
                }
            }
        }
    }
}

pub(crate) fn symmetrize_matrix(h: &mut Array2<f64>) {
    let n = h.dim().0;
    for p in 0..n {
        for q in 0..p {
            let m = 0.5 * (h[[p, q]] + h[[q, p]]);
            h[[p, q]] = m;
            h[[q, p]] = m;
        }
    }
}

pub(crate) fn eight_fold(p: usize, q: usize, r: usize, s: usize) -> [[usize; 4]; 8] {
    [
        [p, q, r, s],
        [q, p, r, s],
        [p, q, s, r],
        [q, p, s, r],
        [r, s, p, q],
        [s, r, p, q],
        [r, s, q, p],
        [s, r, q, p],
    ]
}

/// Core/active/virtual split of the MO space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrbitalPartition {
    pub ncore: usize,
    pub nact: usize,
    pub nvirt: usize,
    pub nelec_act: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrbitalClass {
    Core,
    Active,
    Virtual,
}

impl OrbitalPartition {
    pub fn new(norb: usize, nelec: usize, ncore: usize, nact: usize) -> Result<Self> {
        if ncore + nact > norb {
            return Err(Error::InvalidInput(format!(
                "ncore ({ncore}) + nact ({nact}) exceeds norb ({norb})"
            )));
        }
        if 2 * ncore > nelec {
            return Err(Error::InvalidInput(format!(
                "{ncore} core orbitals need more than {nelec} electrons"
            )));
        }
        let nelec_act = nelec - 2 * ncore;
        if nelec_act > 2 * nact {
            return Err(Error::InvalidInput(format!(
                "{nelec_act} active electrons do not fit in {nact} orbitals"
            )));
        }
        Ok(Self { ncore, nact, nvirt: norb - ncore - nact, nelec_act })
    }

    pub fn norb(&self) -> usize {
        self.ncore + self.nact + self.nvirt
    }

    pub fn core(&self) -> std::ops::Range<usize> {
        0..self.ncore
    }

    pub fn active(&self) -> std::ops::Range<usize> {
        self.ncore..self.ncore + self.nact
    }

    pub fn virt(&self) -> std::ops::Range<usize> {
        self.ncore + self.nact..self.norb()
    }

    pub fn class(&self, p: usize) -> OrbitalClass {
        if p < self.ncore {
            OrbitalClass::Core
        } else if p < self.ncore + self.nact {
            OrbitalClass::Active
        } else {
            OrbitalClass::Virtual
        }
    }

    pub(crate) fn check(&self, ints: &IntegralSet) -> Result<()> {
        if self.norb() != ints.norb {
            return Err(Error::Dimension(format!(
                "partition spans {} orbitals, integrals have {}",
                self.norb(),
                ints.norb
            )));
        }
        if ints.nelec != self.nelec_act + 2 * self.ncore {
            return Err(Error::InvalidInput(format!(
                "nelec_act {} inconsistent with {} electrons and {} core orbitals",
                self.nelec_act, ints.nelec, self.ncore
            )));
        }
        Ok(())
    }
}
