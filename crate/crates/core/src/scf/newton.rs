use ndarray::Array2;

use super::fock::{generalized_fock, gradient_matrix, orbital_gradient, ActiveRdms};
use crate::integrals::{exp_kappa, rotate_integrals, IntegralSet, KappaLayout, OrbitalPartition};
use crate::Result;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Orbital Hessian action at frozen RDMs.
///
/// The gradient in a rotated frame is differenced centrally along `v`; the
/// frame change of the gradient itself adds `−½ [G, V]` (BCH), which keeps
/// the result symmetric away from stationary points.
pub struct OrbitalHessian<'a> {
    ints: &'a IntegralSet,
    part: &'a OrbitalPartition,
    rdms: &'a ActiveRdms,
    layout: &'a KappaLayout,
    fd_step: f64,
    grad_matrix: Array2<f64>,
}

impl<'a> OrbitalHessian<'a> {
    pub fn new(
        ints: &'a IntegralSet,
        part: &'a OrbitalPartition,
        rdms: &'a ActiveRdms,
        layout: &'a KappaLayout,
        fd_step: f64,
    ) -> Result<Self> {
        let grad_matrix = gradient_matrix(&generalized_fock(ints, part, rdms)?);
        Ok(Self { ints, part, rdms, layout, fd_step, grad_matrix })
    }

    fn rotated_gradient(&self, v: &[f64], h: f64) -> Result<Vec<f64>> {
        let kv = self.layout.vector(v.iter().map(|x| x * h).collect());
        let u = exp_kappa(&kv, self.ints.norb)?;
        let rotated = rotate_integrals(self.ints, &u)?;
        Ok(orbital_gradient(&generalized_fock(&rotated, self.part, self.rdms)?, self.layout))
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        let vn = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if vn == 0.0 {
            return Ok(vec![0.0; v.len()]);
        }
        let h = self.fd_step / vn.max(1.0);
        let gp = self.rotated_gradient(v, h)?;
        let gm = self.rotated_gradient(v, -h)?;
        let vm = self.layout.vector(v.to_vec()).to_matrix(self.ints.norb)?;
        let comm = self.grad_matrix.dot(&vm) - vm.dot(&self.grad_matrix);
        Ok(self
            .layout
            .pairs
            .iter()
            .enumerate()
            .map(|(k, &(p, q))| (gp[k] - gm[k]) / (2.0 * h) - 0.5 * comm[[p, q]])
            .collect())
    }
}

/// Frozen-RDM Hessian action, `v ↦ H v`.
pub fn hessian_vector(
    ints: &IntegralSet,
    part: &OrbitalPartition,
    rdms: &ActiveRdms,
    layout: &KappaLayout,
    v: &[f64],
    fd_step: f64,
) -> Result<Vec<f64>> {
    OrbitalHessian::new(ints, part, rdms, layout, fd_step)?.apply(v)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonStep {
    pub kappa: Vec<f64>,
    /// Quadratic-model energy change `gᵀκ + ½ κᵀHκ`.
    pub predicted: f64,
    pub level_shift: f64,
    /// CG failed and the step is scaled steepest descent.
    pub fallback: bool,
    pub truncated: bool,
}

const CG_TOL: f64 = 1e-10;

/// Solves `(H + λ) κ = −g` by conjugate gradients, raising `λ` from
/// `level_shift_floor` on negative curvature or a non-descent model, then
/// caps `|κ|∞` at `trust_radius`.
pub fn newton_step(
    g: &[f64],
    mut hv: impl FnMut(&[f64]) -> Result<Vec<f64>>,
    level_shift_floor: f64,
    trust_radius: f64,
) -> Result<NewtonStep> {
    let n = g.len();
    let gnorm = dot(g, g).sqrt();
    if gnorm == 0.0 {
        return Ok(NewtonStep { kappa: vec![0.0; n], predicted: 0.0, level_shift: level_shift_floor, fallback: false, truncated: false });
    }
    let mut lambda = level_shift_floor.max(0.0);
    let max_iter = (2 * n).max(20);
    for _attempt in 0..12 {
        match cg(g, &mut hv, lambda, max_iter)? {
            CgResult::Solved(x) => {
                let hx = hv(&x)?;
                let predicted = dot(g, &x) + 0.5 * dot(&x, &hx);
                if predicted < 0.0 {
                    let m = inf_norm(&x);
                    let (kappa, truncated, predicted) = if m > trust_radius {
                        let s = trust_radius / m;
                        let k: Vec<f64> = x.iter().map(|v| v * s).collect();
                        (k, true, s * dot(g, &x) + 0.5 * s * s * dot(&x, &hx))
                    } else {
                        (x, false, predicted)
                    };
                    return Ok(NewtonStep { kappa, predicted, level_shift: lambda, fallback: false, truncated });
                }
                lambda = (2.0 * lambda).max(0.1);
            }
            CgResult::NegativeCurvature(c) => {
                lambda = (2.0 * lambda).max(-c + 0.1).max(0.1);
            }
            CgResult::Stalled => break,
        }
    }
    log::warn!("Newton step fell back to steepest descent");
    let m = inf_norm(g);
    let s = trust_radius.min(m) / m;
    let kappa: Vec<f64> = g.iter().map(|v| -v * s).collect();
    let hk = hv(&kappa)?;
    let predicted = dot(g, &kappa) + 0.5 * dot(&kappa, &hk);
    Ok(NewtonStep { kappa, predicted, level_shift: lambda, fallback: true, truncated: true })
}

enum CgResult {
    Solved(Vec<f64>),
    /// Rayleigh quotient of the offending direction for `H + λ`.
    NegativeCurvature(f64),
    Stalled,
}

fn cg(g: &[f64], hv: &mut impl FnMut(&[f64]) -> Result<Vec<f64>>, lambda: f64, max_iter: usize) -> Result<CgResult> {
    let n = g.len();
    let mut x = vec![0.0; n];
    let mut r: Vec<f64> = g.iter().map(|v| -v).collect();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let bnorm = rr.sqrt();
    for _ in 0..max_iter {
        if rr.sqrt() <= CG_TOL * bnorm.max(1.0) {
            return Ok(CgResult::Solved(x));
        }
        let mut ap = hv(&p)?;
        ap.iter_mut().zip(&p).for_each(|(a, b)| *a += lambda * b);
        let pap = dot(&p, &ap);
        let pp = dot(&p, &p);
        if pap <= 1e-12 * pp {
            return Ok(CgResult::NegativeCurvature(pap / pp - lambda));
        }
        let alpha = rr / pap;
        x.iter_mut().zip(&p).for_each(|(a, b)| *a += alpha * b);
        r.iter_mut().zip(&ap).for_each(|(a, b)| *a -= alpha * b);
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        p = r.iter().zip(&p).map(|(a, b)| a + beta * b).collect();
    }
    // accept a partially converged solve when the residual dropped well
    if rr.sqrt() <= 1e-6 * bnorm {
        Ok(CgResult::Solved(x))
    } else {
        Ok(CgResult::Stalled)
    }
}
