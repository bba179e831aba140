//! Potential energy curve scans with orbital warm starts.

use ndarray::Array2;
use serde::Serialize;

use crate::integrals::IntegralSet;
use crate::scf::ScfResult;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PecPoint {
    /// Geometry parameter (Å).
    pub r: f64,
    pub energies: Vec<f64>,
    pub energy_sa: f64,
    pub cnots: Vec<usize>,
    pub converged: bool,
    pub n_macro: usize,
}

/// Relative MO signs `d` with `next ≈ d_p d_q … prev` element-wise.
///
/// Canonical orbitals from independent calculations carry arbitrary signs, so
/// a rotation from one geometry is only meaningful at the next after
/// conjugating with `diag(d)`. Each pair's sign is read off the integrals that
/// transform as `d_p d_q` (`h_pq`, `(pq|rr)`, `(pr|rq)`); orbitals are joined
/// along the strongest such evidence. Orbitals with no coupling keep `+1`.
pub fn phase_alignment(prev: &IntegralSet, next: &IntegralSet) -> Result<Vec<f64>> {
    let n = prev.norb;
    if next.norb != n {
        return Err(Error::Dimension(format!("{n} vs {} orbitals", next.norb)));
    }
    let mut w = Array2::<f64>::zeros((n, n));
    for p in 0..n {
        for q in 0..p {
            let mut acc = prev.h[[p, q]] * next.h[[p, q]];
            for r in 0..n {
                acc += prev.eri[[p, q, r, r]] * next.eri[[p, q, r, r]];
                acc += prev.eri[[p, r, r, q]] * next.eri[[p, r, r, q]];
            }
            w[[p, q]] = acc;
            w[[q, p]] = acc;
        }
    }
    let floor = 1e-12 * w.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let mut d = vec![0.0; n];
    for root in 0..n {
        if d[root] != 0.0 {
            continue;
        }
        d[root] = 1.0;
        // Prim's maximum spanning tree over |w| within this component.
        loop {
            let mut best: Option<(usize, usize, f64)> = None;
            for p in (0..n).filter(|&p| d[p] != 0.0) {
                for q in (0..n).filter(|&q| d[q] == 0.0) {
                    let v = w[[p, q]].abs();
                    if v > floor && best.map_or(true, |b| v > b.2) {
                        best = Some((p, q, v));
                    }
                }
            }
            let Some((p, q, _)) = best else { break };
            d[q] = d[p] * w[[p, q]].signum();
        }
    }
    Ok(d)
}

/// Runs `solve` at every geometry in order. With `warm_start`, each point
/// starts from the previous point's accumulated orbital rotation, carried
/// over with [`phase_alignment`].
/// Non-converged points are flagged and the scan continues.
pub fn pec_scan<F>(geometries: &[(f64, IntegralSet)], warm_start: bool, mut solve: F) -> Result<Vec<PecPoint>>
where
    F: FnMut(&IntegralSet, Option<&Array2<f64>>) -> Result<ScfResult>,
{
    if geometries.is_empty() {
        return Err(Error::InvalidInput("empty scan".into()));
    }
    if geometries.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::InvalidInput("scan coordinates must be strictly increasing".into()));
    }
    let mut out = Vec::with_capacity(geometries.len());
    let mut previous: Option<(&IntegralSet, Array2<f64>)> = None;
    for (r, ints) in geometries {
        let guess = match &previous {
            Some((prev, u)) => {
                let d = phase_alignment(prev, ints)?;
                Some(Array2::from_shape_fn(u.dim(), |(i, j)| d[i] * u[[i, j]] * d[j]))
            }
            None => None,
        };
        let res = solve(ints, guess.as_ref())?;
        if !res.converged {
            log::warn!("scan point R = {r} did not converge");
        }
        if warm_start {
            previous = Some((ints, res.u_total_matrix()));
        }
        out.push(PecPoint {
            r: *r,
            energies: res.energies.clone(),
            energy_sa: res.energy_sa,
            cnots: res.cnots.clone(),
            converged: res.converged,
            n_macro: res.n_macro,
        });
    }
    Ok(out)
}
