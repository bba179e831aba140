use ndarray::{Array2, Array4};

use crate::integrals::{IntegralSet, KappaLayout, OrbitalPartition};
use crate::{Error, Result};

/// Active-space one- and two-particle density matrices,
/// `γ_tu = <E_tu>`, `Γ_tuvw = ½ <E_tu E_vw − δ_uv E_tw>`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveRdms {
    pub g1: Array2<f64>,
    pub g2: Array4<f64>,
}

impl ActiveRdms {
    pub fn zeros(nact: usize) -> Self {
        Self { g1: Array2::zeros((nact, nact)), g2: Array4::zeros((nact, nact, nact, nact)) }
    }

    pub fn nact(&self) -> usize {
        self.g1.nrows()
    }

    pub fn scaled_add(&mut self, w: f64, other: &ActiveRdms) {
        self.g1.scaled_add(w, &other.g1);
        self.g2.scaled_add(w, &other.g2);
    }

    pub fn sub(&self, other: &ActiveRdms) -> ActiveRdms {
        ActiveRdms { g1: &self.g1 - &other.g1, g2: &self.g2 - &other.g2 }
    }
}

fn check(ints: &IntegralSet, part: &OrbitalPartition, rdms: &ActiveRdms) -> Result<()> {
    if ints.norb != part.norb() {
        return Err(Error::Dimension(format!("{} orbitals vs partition of {}", ints.norb, part.norb())));
    }
    let l = part.nact;
    if rdms.g1.dim() != (l, l) || rdms.g2.dim() != (l, l, l, l) {
        return Err(Error::Dimension(format!("RDMs do not match {l} active orbitals")));
    }
    Ok(())
}

/// Inactive Fock matrix `F^I_pq = h_pq + Σ_j [2 (pq|jj) − (pj|jq)]`.
pub fn inactive_fock(ints: &IntegralSet, part: &OrbitalPartition) -> Array2<f64> {
    let n = ints.norb;
    let mut f = ints.h.clone();
    for p in 0..n {
        for q in 0..n {
            for j in part.core() {
                f[[p, q]] += 2.0 * ints.eri[[p, q, j, j]] - ints.eri[[p, j, j, q]];
            }
        }
    }
    f
}

/// Active Fock matrix `F^A_pq = Σ_tu γ_tu [(pq|tu) − ½ (pt|uq)]`.
fn active_fock(ints: &IntegralSet, part: &OrbitalPartition, g1: &Array2<f64>) -> Array2<f64> {
    let n = ints.norb;
    let off = part.ncore;
    let l = part.nact;
    let mut f = Array2::zeros((n, n));
    for p in 0..n {
        for q in 0..n {
            let mut acc = 0.0;
            for t in 0..l {
                for u in 0..l {
                    let d = g1[[t, u]];
                    if d != 0.0 {
                        acc += d * (ints.eri[[p, q, t + off, u + off]] - 0.5 * ints.eri[[p, t + off, u + off, q]]);
                    }
                }
            }
            f[[p, q]] = acc;
        }
    }
    f
}

/// Generalized Fock matrix `F_pq = Σ_r D_pr h_qr + Σ_rst P_prst (qr|st)` with
/// the closed-shell core, active RDMs (`P = 2Γ`) and empty virtuals.
pub fn generalized_fock(ints: &IntegralSet, part: &OrbitalPartition, rdms: &ActiveRdms) -> Result<Array2<f64>> {
    check(ints, part, rdms)?;
    let n = ints.norb;
    let off = part.ncore;
    let l = part.nact;
    let fi = inactive_fock(ints, part);
    let fa = active_fock(ints, part, &rdms.g1);
    let mut f = Array2::zeros((n, n));
    for i in part.core() {
        for q in 0..n {
            f[[i, q]] = 2.0 * (fi[[q, i]] + fa[[q, i]]);
        }
    }
    for t in 0..l {
        for q in 0..n {
            let mut acc = 0.0;
            for u in 0..l {
                acc += rdms.g1[[t, u]] * fi[[q, u + off]];
                for v in 0..l {
                    for w in 0..l {
                        let d = rdms.g2[[t, u, v, w]];
                        if d != 0.0 {
                            acc += 2.0 * d * ints.eri[[q, u + off, v + off, w + off]];
                        }
                    }
                }
            }
            f[[t + off, q]] = acc;
        }
    }
    Ok(f)
}

/// `dE/dκ_pq` on the layout pairs, where `κ_pq` (`p > q`) enters the
/// rotation generator as `K[p][q] = κ`, `K[q][p] = −κ`: `2 (F_qp − F_pq)`.
pub fn orbital_gradient(fock: &Array2<f64>, layout: &KappaLayout) -> Vec<f64> {
    layout.pairs.iter().map(|&(p, q)| 2.0 * (fock[[q, p]] - fock[[p, q]])).collect()
}

/// Full antisymmetric gradient matrix `2 (Fᵀ − F)` over all pairs.
pub fn gradient_matrix(fock: &Array2<f64>) -> Array2<f64> {
    (&fock.t() - fock) * 2.0
}

/// Energy of frozen active RDMs in the given orbital basis.
pub fn energy_from_rdms(ints: &IntegralSet, part: &OrbitalPartition, rdms: &ActiveRdms) -> Result<f64> {
    check(ints, part, rdms)?;
    let fi = inactive_fock(ints, part);
    let off = part.ncore;
    let l = part.nact;
    let mut e = ints.e_core;
    for i in part.core() {
        e += ints.h[[i, i]] + fi[[i, i]];
    }
    for t in 0..l {
        for u in 0..l {
            e += rdms.g1[[t, u]] * fi[[t + off, u + off]];
            for v in 0..l {
                for w in 0..l {
                    e += rdms.g2[[t, u, v, w]] * ints.eri[[t + off, u + off, v + off, w + off]];
                }
            }
        }
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ci::{casci_solve, ci_rdms, DeterminantBasis};
    use crate::integrals::{build_active_hamiltonian, exp_kappa, rotate_integrals};
    use crate::test_util::random_ints;

    fn ground_rdms(ints: &IntegralSet, part: &OrbitalPartition) -> (f64, ActiveRdms) {
        let act = build_active_hamiltonian(ints, part).unwrap();
        let basis = DeterminantBasis::for_sector(part.nact, part.nelec_act, 0).unwrap();
        let root = casci_solve(&act, &basis, 1).unwrap().remove(0);
        let (g1, g2) = ci_rdms(&basis, &root.coeffs).unwrap();
        (root.energy, ActiveRdms { g1, g2 })
    }

    #[test]
    fn energy_matches_casci() {
        let ints = random_ints(6, 4, 2);
        let part = OrbitalPartition::new(6, 4, 1, 3).unwrap();
        let (e, rdms) = ground_rdms(&ints, &part);
        assert!((energy_from_rdms(&ints, &part, &rdms).unwrap() - e).abs() < 1e-10);
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let ints = random_ints(6, 4, 4);
        let part = OrbitalPartition::new(6, 4, 1, 3).unwrap();
        let (_, rdms) = ground_rdms(&ints, &part);
        let layout = KappaLayout::new(&part, true);
        let g = orbital_gradient(&generalized_fock(&ints, &part, &rdms).unwrap(), &layout);
        let eps = 1e-5;
        for k in 0..layout.len() {
            let mut v = vec![0.0; layout.len()];
            v[k] = eps;
            let ep = energy_from_rdms(&rotate_integrals(&ints, &exp_kappa(&layout.vector(v.clone()), 6).unwrap()).unwrap(), &part, &rdms).unwrap();
            v[k] = -eps;
            let em = energy_from_rdms(&rotate_integrals(&ints, &exp_kappa(&layout.vector(v), 6).unwrap()).unwrap(), &part, &rdms).unwrap();
            let fd = (ep - em) / (2.0 * eps);
            assert!((fd - g[k]).abs() <= 1e-6 * g[k].abs().max(1e-3), "{:?}: {fd} vs {}", layout.pairs[k], g[k]);
        }
    }

    #[test]
    fn full_active_space_has_no_active_gradient() {
        let ints = random_ints(4, 4, 6);
        let part = OrbitalPartition::new(4, 4, 0, 4).unwrap();
        let (_, rdms) = ground_rdms(&ints, &part);
        let layout = KappaLayout::new(&part, true);
        let g = orbital_gradient(&generalized_fock(&ints, &part, &rdms).unwrap(), &layout);
        assert!(g.iter().all(|x| x.abs() < 1e-8));
    }

    #[test]
    fn one_electron_core_limit() {
        let mut ints = random_ints(3, 2, 8);
        ints.eri.fill(0.0);
        let part = OrbitalPartition::new(3, 2, 1, 0).unwrap();
        let f = generalized_fock(&ints, &part, &ActiveRdms::zeros(0)).unwrap();
        for q in 0..3 {
            assert!((f[[0, q]] - 2.0 * ints.h[[q, 0]]).abs() < 1e-15);
            assert_eq!(f[[1, q]], 0.0);
        }
    }
}
