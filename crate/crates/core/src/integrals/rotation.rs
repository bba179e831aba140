use ndarray::{Array2, Array4};

use super::{symmetrize_eri, symmetrize_matrix, IntegralSet, OrbitalClass, OrbitalPartition};
use crate::{linalg, Error, Result};

/// Ordered set of non-redundant rotation pairs `(p, q)`, `p > q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KappaLayout {
    pub norb: usize,
    pub pairs: Vec<(usize, usize)>,
}

impl KappaLayout {
    /// Core-active, core-virtual and active-virtual pairs; active-active
    /// pairs only when `include_active_active` is set.
    pub fn new(part: &OrbitalPartition, include_active_active: bool) -> Self {
        let norb = part.norb();
        let mut pairs = Vec::new();
        for p in 0..norb {
            for q in 0..p {
                let (cp, cq) = (part.class(p), part.class(q));
                let keep = cp != cq || (include_active_active && cp == OrbitalClass::Active);
                if keep {
                    pairs.push((p, q));
                }
            }
        }
        Self { norb, pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn zeros(&self) -> KappaVector {
        KappaVector { pairs: self.pairs.clone(), values: vec![0.0; self.pairs.len()] }
    }

    pub fn vector(&self, values: Vec<f64>) -> KappaVector {
        assert_eq!(values.len(), self.pairs.len());
        KappaVector { pairs: self.pairs.clone(), values }
    }

    /// Packs the `(p, q)` entries of a full matrix.
    pub fn pack(&self, m: &Array2<f64>) -> Vec<f64> {
        self.pairs.iter().map(|&(p, q)| m[[p, q]]).collect()
    }
}

/// Orbital-rotation amplitudes (radians) on a list of pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct KappaVector {
    pub pairs: Vec<(usize, usize)>,
    pub values: Vec<f64>,
}

impl KappaVector {
    /// Antisymmetric expansion: `K[p][q] = kappa`, `K[q][p] = -kappa`.
    pub fn to_matrix(&self, norb: usize) -> Result<Array2<f64>> {
        let mut k = Array2::zeros((norb, norb));
        for (&(p, q), &v) in self.pairs.iter().zip(&self.values) {
            if p >= norb || q >= norb {
                return Err(Error::Dimension(format!("rotation pair ({p},{q}) outside {norb} orbitals")));
            }
            if !v.is_finite() {
                return Err(Error::NonFinite("rotation amplitudes"));
            }
            k[[p, q]] += v;
            k[[q, p]] -= v;
        }
        Ok(k)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { pairs: self.pairs.clone(), values: self.values.iter().map(|v| v * s).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Restriction to pairs with both indices in the active block,
    /// returned as an `nact x nact` antisymmetric matrix.
    pub fn active_block(&self, part: &OrbitalPartition) -> Array2<f64> {
        let mut k = Array2::zeros((part.nact, part.nact));
        let off = part.ncore;
        for (&(p, q), &v) in self.pairs.iter().zip(&self.values) {
            if part.class(p) == OrbitalClass::Active && part.class(q) == OrbitalClass::Active {
                k[[p - off, q - off]] += v;
                k[[q - off, p - off]] -= v;
            }
        }
        k
    }
}

/// `U = exp(K)` for the antisymmetric expansion `K` of `kappa`.
pub fn exp_kappa(kappa: &KappaVector, norb: usize) -> Result<Array2<f64>> {
    let k = kappa.to_matrix(norb)?;
    Ok(linalg::expm(&k))
}

// result[a, ...] = sum_p u[p, a] t[p, ...], then axis 0 moved to the back
fn contract_first_and_cycle(t: &Array4<f64>, u: &Array2<f64>) -> Array4<f64> {
    let n = t.dim().0;
    let m = t
        .as_standard_layout()
        .into_owned()
        .into_shape_with_order((n, n * n * n))
        .unwrap();
    let r = u.t().dot(&m);
    let r4 = r.into_shape_with_order((n, n, n, n)).unwrap();
    r4.permuted_axes([3, 0, 1, 2]).as_standard_layout().into_owned()
}

/// `h' = U^T h U` and `(p'q'|r's') = sum U_pp' U_qq' U_rr' U_ss' (pq|rs)`
/// as four one-index contractions. Symmetry drift above 1e-9 is an error;
/// below it the result is re-symmetrized by averaging.
pub fn rotate_integrals(ints: &IntegralSet, u: &Array2<f64>) -> Result<IntegralSet> {
    let n = ints.norb;
    if u.dim() != (n, n) {
        return Err(Error::Dimension(format!("rotation is {:?}, integrals have {n} orbitals", u.dim())));
    }
    let mut h = u.t().dot(&ints.h).dot(u);
    let mut eri = ints.eri.clone();
    for _ in 0..4 {
        eri = contract_first_and_cycle(&eri, u);
    }
    let drift = super::eri_symmetry_drift(&eri);
    if drift > 1e-9 {
        return Err(Error::SymmetryDrift { drift });
    }
    symmetrize_eri(&mut eri);
    symmetrize_matrix(&mut h);
    Ok(IntegralSet { h, eri, ..ints.clone() })
}

/// First-order response of the integrals to `U = exp(eps K)` at `eps = 0`:
/// `h^K_ij = sum_p K_pi h_pj + K_pj h_ip` and likewise on each index of
/// `(pq|rs)`. The core energy of the result is zero.
pub fn one_index_transform_integrals(ints: &IntegralSet, k: &Array2<f64>) -> IntegralSet {
    let n = ints.norb;
    let kh = k.t().dot(&ints.h);
    let h = &kh + &kh.t();
    let mut eri = Array4::zeros((n, n, n, n));
    for axis in 0..4 {
        // contract the chosen axis of eri with K, keeping index order
        let mut perm = [0, 1, 2, 3];
        perm.swap(0, axis);
        let moved = ints.eri.clone().permuted_axes(perm);
        let m = moved
            .as_standard_layout()
            .into_owned()
            .into_shape_with_order((n, n * n * n))
            .unwrap();
        let r = k.t().dot(&m).into_shape_with_order((n, n, n, n)).unwrap();
        eri += &r.permuted_axes(perm);
    }
    IntegralSet { h, eri, e_core: 0.0, ..ints.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn zero_kappa_is_identity() {
        let kappa = KappaVector { pairs: vec![(1, 0), (2, 1)], values: vec![0.0, 0.0] };
        let u = exp_kappa(&kappa, 3).unwrap();
        assert!(linalg::max_abs_diff(&u, &Array2::eye(3)) < 1e-15);
    }

    #[test]
    fn quarter_turn_plane_rotation() {
        let kappa = KappaVector { pairs: vec![(1, 0)], values: vec![FRAC_PI_2] };
        let u = exp_kappa(&kappa, 2).unwrap();
        let expected = ndarray::arr2(&[[0.0, -1.0], [1.0, 0.0]]);
        assert!(linalg::max_abs_diff(&u, &expected) < 1e-14);
    }

    #[test]
    fn non_finite_amplitude_rejected() {
        let kappa = KappaVector { pairs: vec![(1, 0)], values: vec![f64::NAN] };
        assert!(matches!(exp_kappa(&kappa, 2), Err(Error::NonFinite(_))));
    }

    #[test]
    fn layout_excludes_same_class_pairs() {
        let part = OrbitalPartition::new(5, 4, 1, 2).unwrap();
        let layout = KappaLayout::new(&part, false);
        assert_eq!(layout.pairs, vec![(1, 0), (2, 0), (3, 0), (3, 1), (3, 2), (4, 0), (4, 1), (4, 2)]);
        let with_aa = KappaLayout::new(&part, true);
        assert!(with_aa.pairs.contains(&(2, 1)));
        assert_eq!(with_aa.len(), layout.len() + 1);
    }

    #[test]
    fn rotate_dimension_mismatch() {
        let ints = IntegralSet::zeros(2, 2, 0);
        assert!(matches!(rotate_integrals(&ints, &Array2::eye(3)), Err(Error::Dimension(_))));
    }
}
