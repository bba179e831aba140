use ndarray::Array1;

use super::fock::{generalized_fock, orbital_gradient, ActiveRdms};
use crate::ci::{ci_rdms, CiOperator, DeterminantBasis};
use crate::integrals::{IntegralSet, KappaLayout, OrbitalPartition};
use crate::Result;

/// Smallest allowed `|H_ii − e0|` in the diagonal preconditioner.
pub const DENOMINATOR_CLAMP: f64 = 0.1;

/// First-order CI response to an orbital rotation.
///
/// `h_kappa` is the derivative of the active Hamiltonian along the trial
/// rotation and `diag` the determinant diagonal of the current one. Returns
/// `θ¹ = −(diag − e0)⁻¹ Q H^κ c0` and the RDM change
/// `Γ[normalize(c0 + θ¹)] − Γ[c0]`.
pub fn coupled_micro_iteration(
    h_kappa: &CiOperator,
    diag: &Array1<f64>,
    e0: f64,
    c0: &Array1<f64>,
    basis: &DeterminantBasis,
) -> Result<(Array1<f64>, ActiveRdms)> {
    refine_micro_iteration(h_kappa, None, diag, e0, c0, basis)
}

/// Further preconditioned step on `Q (H − e0) θ = −Q H^κ c0`, starting
/// from a previous response `(h0, θ)`; with `None` this is the plain
/// diagonal estimate of [`coupled_micro_iteration`].
pub fn refine_micro_iteration(
    h_kappa: &CiOperator,
    previous: Option<(&CiOperator, &Array1<f64>)>,
    diag: &Array1<f64>,
    e0: f64,
    c0: &Array1<f64>,
    basis: &DeterminantBasis,
) -> Result<(Array1<f64>, ActiveRdms)> {
    let mut r = h_kappa.apply(basis, c0)?;
    let mut theta = Array1::zeros(c0.len());
    if let Some((h0, t)) = previous {
        let ht = h0.apply(basis, t)?;
        r = r + ht - t * e0;
        theta.assign(t);
    }
    let overlap = c0.dot(&r);
    r.scaled_add(-overlap, c0);
    let mut clamped = 0;
    for i in 0..c0.len() {
        let mut d = diag[i] - e0;
        if d.abs() < DENOMINATOR_CLAMP {
            d = DENOMINATOR_CLAMP.copysign(d);
            clamped += 1;
        }
        theta[i] -= r[i] / d;
    }
    if clamped == c0.len() && c0.len() > 1 {
        log::warn!("every CI denominator was clamped; skipping the configurational response");
        return Ok((Array1::zeros(c0.len()), ActiveRdms::zeros(basis.nact())));
    }
    let overlap = c0.dot(&theta);
    theta.scaled_add(-overlap, c0);
    if theta.iter().all(|v| *v == 0.0) {
        return Ok((theta, ActiveRdms::zeros(basis.nact())));
    }
    let (g1, g2) = ci_rdms(basis, c0)?;
    let mut c1 = c0 + &theta;
    let n = c1.dot(&c1).sqrt();
    c1 /= n;
    let (h1, h2) = ci_rdms(basis, &c1)?;
    Ok((theta, ActiveRdms { g1: h1 - g1, g2: h2 - g2 }))
}

/// `G̃ = g + [g(rdms + Δ) − g(rdms)]`: the orbital gradient with the
/// configurational response folded in.
pub fn fold_orbital_gradient(
    g: &[f64],
    ints: &IntegralSet,
    part: &OrbitalPartition,
    rdms: &ActiveRdms,
    delta: &ActiveRdms,
    layout: &KappaLayout,
) -> Result<Vec<f64>> {
    let mut shifted = rdms.clone();
    shifted.scaled_add(1.0, delta);
    let fp = orbital_gradient(&generalized_fock(ints, part, &shifted)?, layout);
    let f0 = orbital_gradient(&generalized_fock(ints, part, rdms)?, layout);
    Ok(g.iter().zip(fp.iter().zip(&f0)).map(|(a, (b, c))| a + b - c).collect())
}
