use crate::fermion::PauliSum;
use crate::statevector::{ansatz_energy_gradient, AnsatzCircuit, QubitOperator};
use crate::Result;

/// `E(θ) = <H>`, optionally plus `w (<Ŝ²> − target)²` and `μ <P>` for a
/// positive semidefinite sector penalty `P`.
#[derive(Debug, Clone)]
pub struct Objective {
    pub hamiltonian: QubitOperator,
    pub spin_penalty: Option<(QubitOperator, f64, f64)>,
    pub sector_penalty: Option<(QubitOperator, f64)>,
}

impl Objective {
    pub fn new(h: &PauliSum) -> Result<Self> {
        Ok(Self { hamiltonian: QubitOperator::new(h)?, spin_penalty: None, sector_penalty: None })
    }

    pub fn with_sector_penalty(mut self, penalty: &PauliSum, weight: f64) -> Result<Self> {
        if weight > 0.0 {
            self.sector_penalty = Some((QubitOperator::new(penalty)?, weight));
        }
        Ok(self)
    }

    pub fn with_spin_penalty(mut self, s2: &PauliSum, weight: f64, target: f64) -> Result<Self> {
        if weight > 0.0 {
            self.spin_penalty = Some((QubitOperator::new(s2)?, weight, target));
        }
        Ok(self)
    }

    /// Objective value and gradient; the plain energy is returned first.
    pub fn evaluate(&self, circ: &AnsatzCircuit) -> Result<(f64, f64, Vec<f64>)> {
        let (e, mut g) = ansatz_energy_gradient(circ, &self.hamiltonian)?;
        let mut f = e;
        if let Some((s2, w, t)) = &self.spin_penalty {
            let (s, gs) = ansatz_energy_gradient(circ, s2)?;
            f += w * (s - t) * (s - t);
            for (gi, gsi) in g.iter_mut().zip(&gs) {
                *gi += 2.0 * w * (s - t) * gsi;
            }
        }
        if let Some((p, mu)) = &self.sector_penalty {
            let (v, gp) = ansatz_energy_gradient(circ, p)?;
            f += mu * v;
            for (gi, gpi) in g.iter_mut().zip(&gp) {
                *gi += mu * gpi;
            }
        }
        Ok((e, f, g))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VqeConfig {
    pub grad_tol: f64,
    pub max_iter: usize,
}

impl Default for VqeConfig {
    fn default() -> Self {
        Self { grad_tol: 1e-7, max_iter: 500 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VqeOutcome {
    /// `<H>` at the returned angles (penalty excluded).
    pub energy: f64,
    pub objective: f64,
    pub iterations: usize,
    pub grad_inf: f64,
    pub converged: bool,
    /// The line search failed and the best point seen was returned.
    pub line_search_failed: bool,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// BFGS with Armijo backtracking on the circuit angles; `circ` is left at
/// the best point found.
pub fn vqe_minimize(circ: &mut AnsatzCircuit, obj: &Objective, cfg: &VqeConfig) -> Result<VqeOutcome> {
    let n = circ.len();
    let (mut e, mut f, mut g) = obj.evaluate(circ)?;
    let mut x = circ.params();
    let mut hinv = identity(n);
    let mut iterations = 0;
    let mut line_search_failed = false;
    while iterations < cfg.max_iter && inf_norm(&g) >= cfg.grad_tol {
        iterations += 1;
        let mut d = matvec(&hinv, &g).into_iter().map(|v| -v).collect::<Vec<_>>();
        let mut slope: f64 = d.iter().zip(&g).map(|(a, b)| a * b).sum();
        if slope >= 0.0 {
            hinv = identity(n);
            d = g.iter().map(|v| -v).collect();
            slope = -g.iter().map(|v| v * v).sum::<f64>();
        }
        // angles are periodic; keep trial steps inside one radian
        let dmax = inf_norm(&d);
        if dmax > 1.0 {
            d.iter_mut().for_each(|v| *v /= dmax);
            slope /= dmax;
        }
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let xt: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + alpha * b).collect();
            circ.set_params(&xt)?;
            let (et, ft, gt) = obj.evaluate(circ)?;
            if ft <= f + 1e-4 * alpha * slope {
                accepted = Some((xt, et, ft, gt));
                break;
            }
            alpha *= 0.5;
        }
        let Some((xn, en, fn_, gn)) = accepted else {
            if is_identity(&hinv) {
                circ.set_params(&x)?;
                line_search_failed = true;
                log::warn!("VQE line search failed after {iterations} iterations, |g| = {:.3e}", inf_norm(&g));
                break;
            }
            hinv = identity(n);
            circ.set_params(&x)?;
            continue;
        };
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        if sy > 1e-14 {
            bfgs_update(&mut hinv, &s, &y, sy);
        }
        x = xn;
        e = en;
        f = fn_;
        g = gn;
    }
    circ.set_params(&x)?;
    let grad_inf = inf_norm(&g);
    Ok(VqeOutcome {
        energy: e,
        objective: f,
        iterations,
        grad_inf,
        converged: grad_inf < cfg.grad_tol,
        line_search_failed,
    })
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

fn is_identity(m: &[Vec<f64>]) -> bool {
    m.iter().enumerate().all(|(i, r)| r.iter().enumerate().all(|(j, v)| *v == if i == j { 1.0 } else { 0.0 }))
}

fn matvec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

fn bfgs_update(h: &mut [Vec<f64>], s: &[f64], y: &[f64], sy: f64) {
    // H+ = (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ
    let rho = 1.0 / sy;
    let hy = matvec(h, y);
    let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
    let n = s.len();
    for i in 0..n {
        for j in 0..n {
            h[i][j] += -rho * (s[i] * hy[j] + hy[i] * s[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
        }
    }
}
