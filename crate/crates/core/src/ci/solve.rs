use ndarray::{Array1, Array2};

use super::basis::DeterminantBasis;
use super::sigma::CiOperator;
use crate::integrals::ActiveHamiltonian;
use crate::linalg::symmetric_eigh;
use crate::{Error, Result};

/// Largest basis diagonalized densely.
pub const DENSE_LIMIT: usize = 2000;
pub const DAVIDSON_MAX_ITER: usize = 200;
const DAVIDSON_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct CasciRoot {
    /// Includes `e_frozen`.
    pub energy: f64,
    pub coeffs: Array1<f64>,
}

/// Lowest `n_roots` eigenpairs of the active Hamiltonian in `basis`.
pub fn casci_solve(act: &ActiveHamiltonian, basis: &DeterminantBasis, n_roots: usize) -> Result<Vec<CasciRoot>> {
    solve_with_limit(&CiOperator::from_active(act), basis, n_roots, DENSE_LIMIT)
}

pub(crate) fn solve_with_limit(
    op: &CiOperator,
    basis: &DeterminantBasis,
    n_roots: usize,
    dense_limit: usize,
) -> Result<Vec<CasciRoot>> {
    if n_roots == 0 || n_roots > basis.len() {
        return Err(Error::InvalidInput(format!("{n_roots} roots requested from {} determinants", basis.len())));
    }
    if basis.len() <= dense_limit {
        let (w, v) = symmetric_eigh(&op.dense(basis)?);
        return Ok((0..n_roots).map(|k| CasciRoot { energy: w[k], coeffs: v.column(k).to_owned() }).collect());
    }
    davidson(op, basis, n_roots)
}

fn orthonormalize_against(v: &mut Array1<f64>, basis: &[Array1<f64>]) -> f64 {
    for _ in 0..2 {
        for b in basis {
            let d = b.dot(v);
            v.scaled_add(-d, b);
        }
    }
    let n = v.dot(v).sqrt();
    if n > 0.0 {
        *v /= n;
    }
    n
}

fn davidson(op: &CiOperator, basis: &DeterminantBasis, k: usize) -> Result<Vec<CasciRoot>> {
    let dim = basis.len();
    let diag = op.diagonal(basis)?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]).then(a.cmp(&b)));
    let max_sub = (20 * k).max(40).min(dim);

    let mut vs: Vec<Array1<f64>> = Vec::new();
    for &i in order.iter().take((2 * k).min(dim)) {
        let mut v = Array1::zeros(dim);
        v[i] = 1.0;
        vs.push(v);
    }
    let mut ws: Vec<Array1<f64>> = vs.iter().map(|v| op.apply(basis, v)).collect::<Result<_>>()?;

    for _ in 0..DAVIDSON_MAX_ITER {
        let m = vs.len();
        let g = Array2::from_shape_fn((m, m), |(i, j)| vs[i].dot(&ws[j]));
        let g = (&g + &g.t()) * 0.5;
        let (theta, y) = symmetric_eigh(&g);
        let ritz = |idx: usize, src: &[Array1<f64>]| {
            let mut x = Array1::zeros(dim);
            for (j, s) in src.iter().enumerate() {
                x.scaled_add(y[[j, idx]], s);
            }
            x
        };
        let mut new = Vec::new();
        let mut done = true;
        let mut roots = Vec::with_capacity(k);
        for idx in 0..k {
            let x = ritz(idx, &vs);
            let r = ritz(idx, &ws) - &x * theta[idx];
            let rn = r.dot(&r).sqrt();
            if rn > DAVIDSON_TOL {
                done = false;
                let mut t = Array1::from_shape_fn(dim, |i| {
                    let d = theta[idx] - diag[i];
                    r[i] / if d.abs() < 1e-8 { 1e-8f64.copysign(d) } else { d }
                });
                if orthonormalize_against(&mut t, &vs) > 1e-10 && orthonormalize_against(&mut t, &new) > 1e-10 {
                    new.push(t);
                }
            }
            roots.push(CasciRoot { energy: theta[idx], coeffs: x });
        }
        if done {
            for r in roots.iter_mut() {
                let n = r.coeffs.dot(&r.coeffs).sqrt();
                r.coeffs /= n;
            }
            return Ok(roots);
        }
        if new.is_empty() {
            return Err(Error::DavidsonNotConverged(DAVIDSON_MAX_ITER));
        }
        if m + new.len() > max_sub {
            // restart from the current Ritz vectors
            let keep = (2 * k).min(m);
            let xs: Vec<_> = (0..keep).map(|i| ritz(i, &vs)).collect();
            let wx: Vec<_> = (0..keep).map(|i| ritz(i, &ws)).collect();
            vs = xs;
            ws = wx;
            let mut kept = Vec::new();
            for mut t in new.drain(..) {
                if orthonormalize_against(&mut t, &vs) > 1e-10 {
                    kept.push(t);
                }
            }
            new = kept;
        }
        for t in new {
            ws.push(op.apply(basis, &t)?);
            vs.push(t);
        }
    }
    Err(Error::DavidsonNotConverged(DAVIDSON_MAX_ITER))
}
