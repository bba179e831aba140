use ndarray::{s, Array2, Array4};

use super::{one_index_transform_integrals, IntegralSet, OrbitalPartition};
use crate::{Error, Result};

/// Active-space Hamiltonian with the doubly occupied core folded in.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveHamiltonian {
    pub nact: usize,
    pub nelec_act: usize,
    pub heff: Array2<f64>,
    pub eri: Array4<f64>,
    pub e_frozen: f64,
}

impl ActiveHamiltonian {
    pub fn zeros(nact: usize, nelec_act: usize) -> Self {
        Self {
            nact,
            nelec_act,
            heff: Array2::zeros((nact, nact)),
            eri: Array4::zeros((nact, nact, nact, nact)),
            e_frozen: 0.0,
        }
    }
}

/// `heff_uv = h_uv + sum_i [2(uv|ii) - (ui|iv)]`,
/// `e_frozen = e_core + sum_i 2 h_ii + sum_ij [2(ii|jj) - (ij|ji)]`.
pub fn build_active_hamiltonian(ints: &IntegralSet, part: &OrbitalPartition) -> Result<ActiveHamiltonian> {
    part.check(ints)?;
    let act = part.active();
    let mut heff = ints.h.slice(s![act.clone(), act.clone()]).to_owned();
    let mut e_frozen = ints.e_core;
    for i in part.core() {
        e_frozen += 2.0 * ints.h[[i, i]];
        for j in part.core() {
            e_frozen += 2.0 * ints.eri[[i, i, j, j]] - ints.eri[[i, j, j, i]];
        }
        for (a, u) in act.clone().enumerate() {
            for (b, v) in act.clone().enumerate() {
                heff[[a, b]] += 2.0 * ints.eri[[u, v, i, i]] - ints.eri[[u, i, i, v]];
            }
        }
    }
    let eri = ints.eri.slice(s![act.clone(), act.clone(), act.clone(), act]).to_owned();
    Ok(ActiveHamiltonian { nact: part.nact, nelec_act: part.nelec_act, heff, eri, e_frozen })
}

/// Derivative of the folded active Hamiltonian along the full-space
/// rotation generator `k` (antisymmetric `norb x norb`), core and virtual
/// couplings included.
pub fn active_hamiltonian_derivative(
    ints: &IntegralSet,
    part: &OrbitalPartition,
    k: &Array2<f64>,
) -> Result<ActiveHamiltonian> {
    if k.dim() != (ints.norb, ints.norb) {
        return Err(Error::Dimension(format!("generator {:?} vs {} orbitals", k.dim(), ints.norb)));
    }
    // heff and e_frozen are linear in (h, eri, e_core) at fixed index sets
    let d = one_index_transform_integrals(ints, k);
    build_active_hamiltonian(&d, part)
}

/// Two-particle reduced Hamiltonian, stored as `k2[[p, q, r, s]] = 2K^{pr}_{qs}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedHamiltonian2K {
    pub nact: usize,
    pub nelec_act: usize,
    pub k2: Array4<f64>,
}

impl ReducedHamiltonian2K {
    /// `Tr(2K Gamma) = sum_pqrs 2K^{pr}_{qs} Gamma_pqrs`.
    pub fn contract(&self, gamma: &Array4<f64>) -> f64 {
        self.k2.iter().zip(gamma.iter()).map(|(a, b)| a * b).sum()
    }
}

/// `2K^{pr}_{qs} = (pq|rs) + [h_pq d_rs + h_rs d_pq] / (N - 1)`.
pub fn build_reduced_hamiltonian(act: &ActiveHamiltonian) -> Result<ReducedHamiltonian2K> {
    let n = act.nelec_act;
    if n < 2 {
        return Err(Error::ReducedHamiltonianUndefined(n));
    }
    let l = act.nact;
    let scale = 1.0 / (n as f64 - 1.0);
    let mut k2 = act.eri.clone();
    for p in 0..l {
        for q in 0..l {
            let hpq = act.heff[[p, q]] * scale;
            for r in 0..l {
                k2[[p, q, r, r]] += hpq;
                k2[[r, r, p, q]] += hpq;
            }
        }
    }
    Ok(ReducedHamiltonian2K { nact: l, nelec_act: n, k2 })
}

/// One-index transform of the reduced Hamiltonian along an active-block
/// rotation generator `kappa` (`nact x nact`, antisymmetric):
/// `K^k[i,j,k,l] = sum_p K[p,j,k,l] k_pi + K[i,p,k,l] k_pj + K[i,j,p,l] k_pk + K[i,j,k,p] k_pl`.
pub fn one_index_transform_k2(k2: &ReducedHamiltonian2K, kappa: &Array2<f64>) -> Result<ReducedHamiltonian2K> {
    let l = k2.nact;
    if kappa.dim() != (l, l) {
        return Err(Error::Dimension(format!("kappa {:?} vs {l} active orbitals", kappa.dim())));
    }
    let t = &k2.k2;
    let mut out = Array4::zeros((l, l, l, l));
    for i in 0..l {
        for j in 0..l {
            for k in 0..l {
                for m in 0..l {
                    let mut acc = 0.0;
                    for p in 0..l {
                        acc += t[[p, j, k, m]] * kappa[[p, i]]
                            + t[[i, p, k, m]] * kappa[[p, j]]
                            + t[[i, j, p, m]] * kappa[[p, k]]
                            + t[[i, j, k, p]] * kappa[[p, m]];
                    }
                    out[[i, j, k, m]] = acc;
                }
            }
        }
    }
    Ok(ReducedHamiltonian2K { nact: l, nelec_act: k2.nelec_act, k2: out })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_core_is_plain_slice() {
        let mut ints = IntegralSet::zeros(3, 2, 0);
        ints.h[[1, 1]] = -0.5;
        ints.h[[2, 1]] = 0.1;
        ints.h[[1, 2]] = 0.1;
        ints.e_core = 0.3;
        let part = OrbitalPartition::new(3, 2, 0, 2).unwrap();
        let act = build_active_hamiltonian(&ints, &part).unwrap();
        assert_eq!(act.heff, ints.h.slice(s![0..2, 0..2]).to_owned());
        assert_eq!(act.e_frozen, 0.3);
    }

    #[test]
    fn reduced_hamiltonian_plug_in() {
        let mut act = ActiveHamiltonian::zeros(2, 2);
        act.heff = Array2::eye(2);
        let k = build_reduced_hamiltonian(&act).unwrap();
        assert_eq!(k.k2[[0, 0, 0, 0]], 2.0);
        assert_eq!(k.k2[[0, 0, 1, 1]], 2.0);
        assert_eq!(k.k2[[0, 1, 0, 1]], 0.0);
    }

    #[test]
    fn reduced_hamiltonian_needs_two_electrons() {
        let act = ActiveHamiltonian::zeros(2, 1);
        assert!(matches!(build_reduced_hamiltonian(&act), Err(Error::ReducedHamiltonianUndefined(1))));
    }

    #[test]
    fn transform_is_linear() {
        let mut act = ActiveHamiltonian::zeros(3, 2);
        for (i, v) in act.eri.iter_mut().enumerate() {
            *v = (i as f64 * 0.37).sin();
        }
        act.heff[[0, 1]] = 0.2;
        act.heff[[1, 0]] = 0.2;
        let k2 = build_reduced_hamiltonian(&act).unwrap();
        let mut kap = Array2::zeros((3, 3));
        kap[[1, 0]] = 0.3;
        kap[[0, 1]] = -0.3;
        kap[[2, 1]] = -0.1;
        kap[[1, 2]] = 0.1;
        let zero = one_index_transform_k2(&k2, &Array2::zeros((3, 3))).unwrap();
        assert!(zero.k2.iter().all(|&v| v == 0.0));
        let a = one_index_transform_k2(&k2, &kap).unwrap();
        let b = one_index_transform_k2(&k2, &(&kap * 2.0)).unwrap();
        for (x, y) in a.k2.iter().zip(b.k2.iter()) {
            assert_eq!(2.0 * x, *y);
        }
    }
}
