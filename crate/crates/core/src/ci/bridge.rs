use ndarray::Array1;
use num_complex::Complex64;

use super::basis::DeterminantBasis;
use crate::fermion::{FermionEncoding, Mapping, Spin, SpinOrbitalOrdering};
use crate::statevector::Statevector;
use crate::{Error, Result};

/// Largest tolerated weight outside the determinant sector.
pub const OUT_OF_SECTOR_TOL: f64 = 1e-8;

/// Mode occupation of determinant `(a, b)` and the sign relating
/// `A†(a) B†(b)|vac>` to the mode-ordered product.
pub fn determinant_sign(a: u64, b: u64, nact: usize, ordering: SpinOrbitalOrdering) -> (u64, f64) {
    let mut occ = 0u64;
    for p in 0..nact {
        if a & (1 << p) != 0 {
            occ |= 1 << ordering.mode(p, Spin::Alpha, nact);
        }
        if b & (1 << p) != 0 {
            occ |= 1 << ordering.mode(p, Spin::Beta, nact);
        }
    }
    let sign = match ordering {
        SpinOrbitalOrdering::Blocked => 1.0,
        SpinOrbitalOrdering::Interleaved => {
            // each β_j moves left past the α_i with i > j
            let swaps: u32 = (0..nact).filter(|j| b & (1 << j) != 0).map(|j| (a >> (j + 1)).count_ones()).sum();
            if swaps % 2 == 0 {
                1.0
            } else {
                -1.0
            }
        }
    };
    (occ, sign)
}

/// Gathers the sector amplitudes of `state` into a real, normalized CI vector.
pub fn project_statevector(
    state: &Statevector,
    basis: &DeterminantBasis,
    mapping: Mapping,
    ordering: SpinOrbitalOrdering,
) -> Result<Array1<f64>> {
    let (c, outside) = sector_component(state, basis, mapping, ordering)?;
    if outside > OUT_OF_SECTOR_TOL {
        return Err(Error::SectorViolation(format!("weight {outside:.3e} outside the determinant sector")));
    }
    Ok(c)
}

/// Normalized sector part of `state` and the weight found outside it,
/// without the leakage guard of [`project_statevector`].
pub fn sector_component(
    state: &Statevector,
    basis: &DeterminantBasis,
    mapping: Mapping,
    ordering: SpinOrbitalOrdering,
) -> Result<(Array1<f64>, f64)> {
    let l = basis.nact();
    if state.n_qubits() != 2 * l {
        return Err(Error::LengthMismatch(state.n_qubits(), 2 * l));
    }
    let enc = FermionEncoding::new(mapping, 2 * l)?;
    let amps = state.amplitudes();
    let mut c: Vec<Complex64> = (0..basis.len())
        .map(|i| {
            let (a, b) = basis.determinant(i);
            let (occ, sign) = determinant_sign(a, b, l, ordering);
            amps[enc.encode(occ) as usize] * sign
        })
        .collect();
    let inside: f64 = c.iter().map(|v| v.norm_sqr()).sum();
    let total: f64 = amps.iter().map(|v| v.norm_sqr()).sum();
    if inside == 0.0 {
        return Err(Error::SectorViolation("state has no weight in the determinant sector".into()));
    }
    // remove the global phase carried by the largest amplitude
    let big = c.iter().copied().max_by(|x, y| x.norm_sqr().total_cmp(&y.norm_sqr())).unwrap_or_default();
    let phase = big.conj() / big.norm();
    c.iter_mut().for_each(|v| *v *= phase);
    let imag = c.iter().fold(0.0f64, |m, v| m.max(v.im.abs()));
    if imag > 1e-8 {
        return Err(Error::Consistency(format!("state is not real up to a phase (residue {imag:.3e})")));
    }
    let n = inside.sqrt();
    Ok((c.iter().map(|v| v.re / n).collect(), (total - inside) / total))
}

/// Inverse of [`project_statevector`].
pub fn embed_civector(
    c: &Array1<f64>,
    basis: &DeterminantBasis,
    mapping: Mapping,
    ordering: SpinOrbitalOrdering,
) -> Result<Statevector> {
    if c.len() != basis.len() {
        return Err(Error::LengthMismatch(c.len(), basis.len()));
    }
    let l = basis.nact();
    let enc = FermionEncoding::new(mapping, 2 * l)?;
    let mut amps = vec![Complex64::default(); 1 << (2 * l)];
    for (i, v) in c.iter().enumerate() {
        let (a, b) = basis.determinant(i);
        let (occ, sign) = determinant_sign(a, b, l, ordering);
        amps[enc.encode(occ) as usize] = Complex64::new(v * sign, 0.0);
    }
    Statevector::from_amplitudes(amps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ci::{casci_solve, ci_rdms};
    use crate::fermion::map_hamiltonian;
    use crate::statevector::{expectation, measure_rdm12};
    use crate::test_util::random_active;

    #[test]
    fn interleaved_sign() {
        // α1 β0: modes 2 and 1; A†B† = a†_2 a†_1 = −a†_1 a†_2
        assert_eq!(determinant_sign(0b10, 0b01, 2, SpinOrbitalOrdering::Interleaved), (0b0110, -1.0));
        assert_eq!(determinant_sign(0b01, 0b10, 2, SpinOrbitalOrdering::Interleaved), (0b1001, 1.0));
        assert_eq!(determinant_sign(0b10, 0b01, 2, SpinOrbitalOrdering::Blocked).1, 1.0);
    }

    #[test]
    fn ci_and_qubit_pictures_agree() {
        let act = random_active(3, 4, 21);
        let basis = DeterminantBasis::new(3, 2, 2).unwrap();
        let roots = casci_solve(&act, &basis, 1).unwrap();
        let (g1, g2) = ci_rdms(&basis, &roots[0].coeffs).unwrap();
        for mapping in [Mapping::JordanWigner, Mapping::BravyiKitaev] {
            for ord in [SpinOrbitalOrdering::Interleaved, SpinOrbitalOrdering::Blocked] {
                let s = embed_civector(&roots[0].coeffs, &basis, mapping, ord).unwrap();
                let h = map_hamiltonian(&act, mapping, ord).unwrap();
                assert!((expectation(&s, &h).unwrap() - roots[0].energy).abs() < 1e-10);
                let (q1, q2) = measure_rdm12(&s, 3, mapping, ord).unwrap();
                assert!((&q1 - &g1).iter().all(|d| d.abs() < 1e-10));
                assert!((&q2 - &g2).iter().all(|d| d.abs() < 1e-10));
                let back = project_statevector(&s, &basis, mapping, ord).unwrap();
                let ov = back.dot(&roots[0].coeffs).abs();
                assert!((ov - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn wrong_sector_rejected() {
        let basis = DeterminantBasis::new(2, 1, 1).unwrap();
        let trip = Statevector::basis(4, 0b0101).unwrap();
        assert!(matches!(
            project_statevector(&trip, &basis, Mapping::JordanWigner, SpinOrbitalOrdering::Interleaved),
            Err(Error::SectorViolation(_))
        ));
    }
}
