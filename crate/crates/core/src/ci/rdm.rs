use std::collections::HashMap;

use ndarray::{Array1, Array2, Array4};

use super::basis::DeterminantBasis;
use crate::{Error, Result};

/// `γ_ij = <E_ij>` and `Γ_ijkl = ½ <E_ij E_kl − δ_jk E_il>` of a real CI vector.
pub fn ci_rdms(basis: &DeterminantBasis, c: &Array1<f64>) -> Result<(Array2<f64>, Array4<f64>)> {
    if c.len() != basis.len() {
        return Err(Error::LengthMismatch(c.len(), basis.len()));
    }
    let l = basis.nact();
    // d[rs] = E_rs c
    let mut d = vec![Array1::<f64>::zeros(basis.len()); l * l];
    for (i, ci) in c.iter().enumerate() {
        if *ci == 0.0 {
            continue;
        }
        basis.for_each_excitation(i, |r, s, k, sign| d[r * l + s][k] += sign * ci);
    }
    let g1 = Array2::from_shape_fn((l, l), |(i, j)| c.dot(&d[i * l + j]));
    let mut g2 = Array4::zeros((l, l, l, l));
    for i in 0..l {
        for j in 0..l {
            for k in 0..l {
                for m in 0..l {
                    let mut v = d[j * l + i].dot(&d[k * l + m]);
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

/// `<S²> = S_z² + S_z + |S₊ c|²`.
pub fn ci_s2(basis: &DeterminantBasis, c: &Array1<f64>) -> Result<f64> {
    if c.len() != basis.len() {
        return Err(Error::LengthMismatch(c.len(), basis.len()));
    }
    let sz = 0.5 * basis.ms2() as f64;
    let norm2 = c.dot(c);
    // S₊ = Σ_p a†_pα a_pβ; the common (−1)^{N_α} from passing the α string is dropped
    let mut plus: HashMap<(u64, u64), f64> = HashMap::new();
    for (i, ci) in c.iter().enumerate() {
        if *ci == 0.0 {
            continue;
        }
        let (a, b) = basis.determinant(i);
        for p in 0..basis.nact() {
            let bit = 1u64 << p;
            if b & bit == 0 || a & bit != 0 {
                continue;
            }
            let below = (bit - 1) & (a | b);
            let sign = if (below & a).count_ones() + (below & b).count_ones() & 1 == 0 { 1.0 } else { -1.0 };
            *plus.entry((a | bit, b & !bit)).or_default() += sign * ci;
        }
    }
    let s_plus: f64 = plus.values().map(|v| v * v).sum();
    Ok((sz * sz + sz) * norm2 + s_plus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ci::{casci_solve, DeterminantBasis};
    use crate::test_util::random_active;

    #[test]
    fn single_determinant() {
        let basis = DeterminantBasis::new(2, 1, 1).unwrap();
        let mut c = Array1::zeros(basis.len());
        c[0] = 1.0;
        let (g1, g2) = ci_rdms(&basis, &c).unwrap();
        assert_eq!(g1[[0, 0]], 2.0);
        assert_eq!(g2[[0, 0, 0, 0]], 1.0);
        assert_eq!(g2.iter().map(|v| v.abs()).sum::<f64>(), 1.0);
        assert_eq!(ci_s2(&basis, &c).unwrap(), 0.0);
    }

    #[test]
    fn sum_rules_and_energy() {
        let act = random_active(4, 4, 9);
        let basis = DeterminantBasis::new(4, 2, 2).unwrap();
        let roots = casci_solve(&act, &basis, 2).unwrap();
        let (g1, g2) = ci_rdms(&basis, &roots[0].coeffs).unwrap();
        let n = 4.0;
        let trace: f64 = (0..4).flat_map(|i| (0..4).map(move |j| (i, j))).map(|(i, j)| g2[[i, i, j, j]]).sum();
        assert!((trace - n * (n - 1.0) / 2.0).abs() < 1e-10);
        for i in 0..4 {
            for j in 0..4 {
                let partial: f64 = (0..4).map(|k| g2[[i, j, k, k]]).sum();
                assert!((partial - (n - 1.0) / 2.0 * g1[[i, j]]).abs() < 1e-10);
            }
        }
        let k2 = crate::integrals::build_reduced_hamiltonian(&act).unwrap();
        assert!((k2.contract(&g2) + act.e_frozen - roots[0].energy).abs() < 1e-10);
    }

    #[test]
    fn triplet_components() {
        // two electrons in two orbitals: one α in each orbital gives S=1
        let basis = DeterminantBasis::new(2, 2, 0).unwrap();
        let c = Array1::from_elem(1, 1.0);
        assert!((ci_s2(&basis, &c).unwrap() - 2.0).abs() < 1e-14);
        // Ms = 0 component (|a0 b1> + |a1 b0>)/√2 with the α-first convention
        let b0 = DeterminantBasis::new(2, 1, 1).unwrap();
        let mut t = Array1::zeros(4);
        t[1] = 0.5f64.sqrt();
        t[2] = 0.5f64.sqrt();
        let s2 = ci_s2(&b0, &t).unwrap();
        let mut sing = Array1::zeros(4);
        sing[1] = 0.5f64.sqrt();
        sing[2] = -0.5f64.sqrt();
        let s0 = ci_s2(&b0, &sing).unwrap();
        assert!(((s2 - 2.0).abs() < 1e-14 && s0.abs() < 1e-14) || ((s0 - 2.0).abs() < 1e-14 && s2.abs() < 1e-14));
        let _ = casci_solve;
    }
}
