use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;

use super::state::{dot, Statevector};
use crate::fermion::PauliSum;
use crate::{Error, Result};

/// Dimension above which applications run in parallel over rows.
const PAR_DIM: usize = 1 << 12;
/// Largest `groups * dim` for which column factors are tabulated.
const TABULATE_LIMIT: usize = 1 << 22;

#[derive(Debug, Clone)]
struct Group {
    x: u64,
    // (z mask, coefficient times i^{#Y})
    terms: Vec<(u64, Complex64)>,
    table: Option<Vec<Complex64>>,
}

impl Group {
    #[inline]
    fn factor(&self, b: u64) -> Complex64 {
        match &self.table {
            Some(t) => t[b as usize],
            None => self
                .terms
                .iter()
                .map(|&(z, c)| if (z & b).count_ones() & 1 == 1 { -c } else { c })
                .sum(),
        }
    }
}

/// A Pauli sum compiled for repeated application to statevectors.
///
/// Terms sharing an X mask form one permutation `b -> b ^ x` with a
/// diagonal factor, so each row of the result is one gather per group.
#[derive(Debug, Clone)]
pub struct QubitOperator {
    n: usize,
    groups: Vec<Group>,
}

impl QubitOperator {
    pub fn new(sum: &PauliSum) -> Result<Self> {
        let n = sum.n_qubits();
        if n > super::MAX_QUBITS {
            return Err(Error::Capacity(n));
        }
        let mut by_x: BTreeMap<u64, Vec<(u64, Complex64)>> = BTreeMap::new();
        for (p, c) in sum.iter() {
            let iy = crate::fermion::Phase((p.y_count() & 3) as u8).to_complex();
            by_x.entry(p.x_mask()).or_default().push((p.z_mask(), c * iy));
        }
        let dim = 1usize << n;
        let tabulate = by_x.len().saturating_mul(dim) <= TABULATE_LIMIT;
        let groups = by_x
            .into_iter()
            .map(|(x, terms)| {
                let mut g = Group { x, terms, table: None };
                if tabulate {
                    g.table = Some((0..dim as u64).map(|b| g.factor(b)).collect());
                }
                g
            })
            .collect();
        Ok(Self { n, groups })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); v.len()];
        self.apply_into(v, &mut out);
        out
    }

    pub fn apply_into(&self, v: &[Complex64], out: &mut [Complex64]) {
        assert_eq!(v.len(), 1usize << self.n, "state dimension differs from operator");
        let row = |r: usize| -> Complex64 {
            let r = r as u64;
            self.groups
                .iter()
                .map(|g| {
                    let b = r ^ g.x;
                    g.factor(b) * v[b as usize]
                })
                .sum()
        };
        if v.len() >= PAR_DIM {
            out.par_iter_mut().enumerate().for_each(|(r, o)| *o = row(r));
        } else {
            out.iter_mut().enumerate().for_each(|(r, o)| *o = row(r));
        }
    }

    /// `<psi|O|psi>`; an imaginary part above 1e-8 is an error.
    pub fn expectation(&self, state: &Statevector) -> Result<f64> {
        if state.n_qubits() != self.n {
            return Err(Error::LengthMismatch(state.n_qubits(), self.n));
        }
        let e = dot(state.amplitudes(), &self.apply(state.amplitudes()));
        if e.im.abs() > 1e-8 {
            return Err(Error::Consistency(format!("expectation has imaginary part {:.3e}", e.im)));
        }
        Ok(e.re)
    }
}
