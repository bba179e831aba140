use ndarray::{Array1, Array2, Array4};
use rayon::prelude::*;

use super::basis::DeterminantBasis;
use crate::integrals::{ActiveHamiltonian, ReducedHamiltonian2K};
use crate::{Error, Result};

/// Symmetric operator `c + Σ one_pq E_pq + Σ two_pqrs E_pq E_rs` on the
/// spin-summed excitation operators.
#[derive(Debug, Clone)]
pub struct CiOperator {
    pub nact: usize,
    pub one: Array2<f64>,
    pub two: Array4<f64>,
    pub constant: f64,
}

impl CiOperator {
    /// `H = e_frozen + Σ k_pq E_pq + ½ Σ (pq|rs) E_pq E_rs`, `k_pq = h_pq − ½ Σ_r (pr|rq)`.
    pub fn from_active(act: &ActiveHamiltonian) -> Self {
        let l = act.nact;
        let mut one = act.heff.clone();
        for p in 0..l {
            for q in 0..l {
                for r in 0..l {
                    one[[p, q]] -= 0.5 * act.eri[[p, r, r, q]];
                }
            }
        }
        Self { nact: l, one, two: act.eri.mapv(|v| 0.5 * v), constant: act.e_frozen }
    }

    /// `Σ ²K_pqrs · ½ (E_pq E_rs − δ_qr E_ps)`, equal to `H − e_frozen` in the N-electron sector.
    pub fn from_k2(k2: &ReducedHamiltonian2K) -> Self {
        let l = k2.nact;
        let mut one = Array2::zeros((l, l));
        for p in 0..l {
            for s in 0..l {
                one[[p, s]] = -0.5 * (0..l).map(|q| k2.k2[[p, q, q, s]]).sum::<f64>();
            }
        }
        Self { nact: l, one, two: k2.k2.mapv(|v| 0.5 * v), constant: 0.0 }
    }

    fn check(&self, basis: &DeterminantBasis) -> Result<()> {
        if basis.nact() != self.nact {
            return Err(Error::Dimension(format!("operator on {} orbitals, basis on {}", self.nact, basis.nact())));
        }
        Ok(())
    }

    /// Visits the nonzero contributions `<L|O|I>` of column `I` (repeated `L` allowed).
    #[inline]
    fn column(&self, basis: &DeterminantBasis, i: usize, mut f: impl FnMut(usize, f64)) {
        f(i, self.constant);
        basis.for_each_excitation(i, |r, s, k, s1| {
            let v = self.one[[r, s]];
            if v != 0.0 {
                f(k, v * s1);
            }
            basis.for_each_excitation(k, |p, q, m, s2| {
                let w = self.two[[p, q, r, s]];
                if w != 0.0 {
                    f(m, w * s1 * s2);
                }
            });
        });
    }

    pub fn apply(&self, basis: &DeterminantBasis, c: &Array1<f64>) -> Result<Array1<f64>> {
        self.check(basis)?;
        if c.len() != basis.len() {
            return Err(Error::LengthMismatch(c.len(), basis.len()));
        }
        // symmetric, so row I equals column I
        let out: Vec<f64> = (0..basis.len())
            .into_par_iter()
            .map(|i| {
                let mut acc = 0.0;
                self.column(basis, i, |m, v| acc += v * c[m]);
                acc
            })
            .collect();
        Ok(Array1::from(out))
    }

    pub fn diagonal(&self, basis: &DeterminantBasis) -> Result<Array1<f64>> {
        self.check(basis)?;
        let out: Vec<f64> = (0..basis.len())
            .into_par_iter()
            .map(|i| {
                let mut acc = 0.0;
                self.column(basis, i, |m, v| {
                    if m == i {
                        acc += v;
                    }
                });
                acc
            })
            .collect();
        Ok(Array1::from(out))
    }

    pub fn dense(&self, basis: &DeterminantBasis) -> Result<Array2<f64>> {
        self.check(basis)?;
        let dim = basis.len();
        let cols: Vec<Vec<f64>> = (0..dim)
            .into_par_iter()
            .map(|i| {
                let mut col = vec![0.0; dim];
                self.column(basis, i, |m, v| col[m] += v);
                col
            })
            .collect();
        let mut h = Array2::zeros((dim, dim));
        for (i, col) in cols.iter().enumerate() {
            for (m, v) in col.iter().enumerate() {
                h[[m, i]] = *v;
            }
        }
        Ok(h)
    }
}

pub fn sigma_apply(act: &ActiveHamiltonian, basis: &DeterminantBasis, c: &Array1<f64>) -> Result<Array1<f64>> {
    CiOperator::from_active(act).apply(basis, c)
}

/// `²K`-form σ vector; omits `e_frozen`.
pub fn sigma_apply_k2(k2: &ReducedHamiltonian2K, basis: &DeterminantBasis, c: &Array1<f64>) -> Result<Array1<f64>> {
    if k2.nelec_act != basis.nelec() {
        return Err(Error::InvalidInput(format!(
            "reduced Hamiltonian built for {} electrons, basis has {}",
            k2.nelec_act,
            basis.nelec()
        )));
    }
    CiOperator::from_k2(k2).apply(basis, c)
}
