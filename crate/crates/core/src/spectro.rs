//! Spectroscopic constants from a quartic least-squares fit of a potential
//! energy curve.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::{Error, Result};

pub const HARTREE_J: f64 = 4.3597447222071e-18;
pub const AMU_KG: f64 = 1.66053906660e-27;
pub const SPEED_OF_LIGHT_CM_S: f64 = 2.99792458e10;
pub const ANGSTROM_M: f64 = 1e-10;
pub const HARTREE_CM: f64 = 219474.6313632;

/// `E(R) = Σ_k c_k ((R − center) / scale)^k`, k = 0..4.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuarticFit {
    pub coeffs: [f64; 5],
    pub center: f64,
    pub scale: f64,
    /// Root-mean-square residual of the fit (Hartree).
    pub rms_residual: f64,
}

impl QuarticFit {
    fn x(&self, r: f64) -> f64 {
        (r - self.center) / self.scale
    }

    pub fn value(&self, r: f64) -> f64 {
        let x = self.x(r);
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn first_derivative(&self, r: f64) -> f64 {
        let x = self.x(r);
        let c = &self.coeffs;
        (c[1] + x * (2.0 * c[2] + x * (3.0 * c[3] + x * 4.0 * c[4]))) / self.scale
    }

    pub fn second_derivative(&self, r: f64) -> f64 {
        let x = self.x(r);
        let c = &self.coeffs;
        (2.0 * c[2] + x * (6.0 * c[3] + x * 12.0 * c[4])) / (self.scale * self.scale)
    }
}

pub fn fit_quartic(r: &[f64], e: &[f64]) -> Result<QuarticFit> {
    if r.len() != e.len() {
        return Err(Error::LengthMismatch(r.len(), e.len()));
    }
    if r.len() < 5 {
        return Err(Error::InvalidInput(format!("a quartic fit needs at least 5 points, got {}", r.len())));
    }
    if r.iter().chain(e).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("potential energy curve"));
    }
    let n = r.len();
    let center = r.iter().sum::<f64>() / n as f64;
    let scale = r.iter().fold(0.0f64, |m, v| m.max((v - center).abs()));
    if scale == 0.0 {
        return Err(Error::InvalidInput("all grid points coincide".into()));
    }
    let a = DMatrix::from_fn(n, 5, |i, k| ((r[i] - center) / scale).powi(k as i32));
    let b = DVector::from_column_slice(e);
    let sol = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|m| Error::InvalidInput(format!("quartic fit failed: {m}")))?;
    let resid = &a * &sol - &b;
    let coeffs = [sol[0], sol[1], sol[2], sol[3], sol[4]];
    Ok(QuarticFit { coeffs, center, scale, rms_residual: (resid.norm_squared() / n as f64).sqrt() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveConstants {
    /// Equilibrium distance (Å).
    pub r_e: f64,
    /// Fitted energy at `r_e` (Hartree).
    pub e_min: f64,
    /// Curvature at `r_e` (Hartree/Å²).
    pub force_constant: f64,
    /// Harmonic wavenumber (cm⁻¹).
    pub omega_e: f64,
    pub fit: QuarticFit,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectroscopicConstants {
    pub states: Vec<CurveConstants>,
    /// Adiabatic excitation energies of states 1.. relative to state 0 (cm⁻¹).
    pub t_e: Vec<f64>,
}

/// `ω = √(k/μ) / (2πc)` with `k` in Hartree/Å² and `μ` in amu, in cm⁻¹.
pub fn harmonic_wavenumber(force_constant: f64, reduced_mass_amu: f64) -> f64 {
    let k_si = force_constant * HARTREE_J / (ANGSTROM_M * ANGSTROM_M);
    (k_si / (reduced_mass_amu * AMU_KG)).sqrt() / (2.0 * std::f64::consts::PI * SPEED_OF_LIGHT_CM_S)
}

fn is_minimum(fit: &QuarticFit, r: f64, lo: f64, hi: f64) -> bool {
    r.is_finite() && r >= lo && r <= hi && fit.second_derivative(r) > 0.0
}

/// Minimum of the fitted quartic inside the grid: Newton from the grid
/// minimum, with a bracketing search if Newton wanders off.
fn locate_minimum(fit: &QuarticFit, r: &[f64], e: &[f64]) -> Result<f64> {
    let lo = r.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let start = r[e.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i).unwrap_or(0)];
    let mut x = start;
    for _ in 0..100 {
        let d2 = fit.second_derivative(x);
        if d2 <= 0.0 {
            break;
        }
        let dx = fit.first_derivative(x) / d2;
        x -= dx;
        if !(lo..=hi).contains(&x) {
            break;
        }
        if dx.abs() <= 1e-14 * x.abs().max(1.0) {
            if is_minimum(fit, x, lo, hi) {
                return Ok(x);
            }
            break;
        }
    }
    // bracket sign changes of E' from − to + on a fine grid and bisect
    let m = 4000;
    let mut best: Option<f64> = None;
    let mut prev = (lo, fit.first_derivative(lo));
    for k in 1..=m {
        let xk = lo + (hi - lo) * k as f64 / m as f64;
        let dk = fit.first_derivative(xk);
        if prev.1 < 0.0 && dk >= 0.0 {
            let (mut a, mut b) = (prev.0, xk);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if fit.first_derivative(mid) < 0.0 {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            let root = 0.5 * (a + b);
            if is_minimum(fit, root, lo, hi) && best.map_or(true, |b| fit.value(root) < fit.value(b)) {
                best = Some(root);
            }
        }
        prev = (xk, dk);
    }
    best.ok_or(Error::NoBoundMinimum)
}

/// Fits each state's curve on the common grid `r` (Å, strictly increasing)
/// and extracts `R_e`, `ω_e` and `T_e`; state 0 is the reference for `T_e`.
pub fn fit_spectroscopic(r: &[f64], energies: &[Vec<f64>], reduced_mass_amu: f64) -> Result<SpectroscopicConstants> {
    if energies.is_empty() {
        return Err(Error::InvalidInput("no curves to fit".into()));
    }
    if !(reduced_mass_amu > 0.0) {
        return Err(Error::InvalidInput(format!("reduced mass {reduced_mass_amu} must be positive")));
    }
    if r.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("grid points must be strictly increasing".into()));
    }
    let mut states = Vec::with_capacity(energies.len());
    for e in energies {
        let fit = fit_quartic(r, e)?;
        let r_e = locate_minimum(&fit, r, e)?;
        let k = fit.second_derivative(r_e);
        states.push(CurveConstants {
            r_e,
            e_min: fit.value(r_e),
            force_constant: k,
            omega_e: harmonic_wavenumber(k, reduced_mass_amu),
            fit,
        });
    }
    let t_e = states[1..].iter().map(|s| (s.e_min - states[0].e_min) * HARTREE_CM).collect();
    Ok(SpectroscopicConstants { states, t_e })
}
