use serde::{Deserialize, Serialize};

use super::fock::ActiveRdms;
use crate::{Error, Result};

pub const WEIGHT_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetState {
    /// Total spin quantum number S (0, 0.5, 1, ...).
    pub spin: f64,
    pub ms2: i32,
    pub weight: f64,
}

impl TargetState {
    pub fn s2_target(&self) -> f64 {
        self.spin * (self.spin + 1.0)
    }
}

/// Fixed convex combination of states sharing one orbital set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateAverageSpec {
    pub states: Vec<TargetState>,
}

impl StateAverageSpec {
    /// One state of spin `|ms2|/2` with weight 1.
    pub fn single(ms2: i32) -> Self {
        Self { states: vec![TargetState { spin: ms2.unsigned_abs() as f64 / 2.0, ms2, weight: 1.0 }] }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.weight).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.states.is_empty() {
            return Err(Error::InvalidInput("state average needs at least one state".into()));
        }
        let mut sum = 0.0;
        for s in &self.states {
            if !(0.0..=1.0).contains(&s.weight) {
                return Err(Error::InvalidInput(format!("weight {} outside [0, 1]", s.weight)));
            }
            let twice = 2.0 * s.spin;
            if s.spin < 0.0 || (twice - twice.round()).abs() > 1e-12 {
                return Err(Error::InvalidInput(format!("spin {} is not a half-integer", s.spin)));
            }
            if (s.ms2.unsigned_abs() as f64) > twice + 1e-12 || (twice.round() as i64 - s.ms2 as i64) % 2 != 0 {
                return Err(Error::InvalidInput(format!("ms2 = {} incompatible with S = {}", s.ms2, s.spin)));
            }
            sum += s.weight;
        }
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidInput(format!("state weights sum to {sum}, not 1")));
        }
        Ok(())
    }
}

/// Weighted energy and RDMs, `E_sa = Σ λ_i E_i`.
pub fn state_average_assemble(per_state: &[(f64, &ActiveRdms)], spec: &StateAverageSpec) -> Result<(f64, ActiveRdms)> {
    if per_state.len() != spec.len() || per_state.is_empty() {
        return Err(Error::Dimension(format!("{} states for {} weights", per_state.len(), spec.len())));
    }
    let mut rdms = ActiveRdms::zeros(per_state[0].1.nact());
    let mut e = 0.0;
    for ((ei, ri), s) in per_state.iter().zip(&spec.states) {
        if ri.nact() != rdms.nact() {
            return Err(Error::Dimension("states disagree on the active-space size".into()));
        }
        e += s.weight * ei;
        rdms.scaled_add(s.weight, ri);
    }
    Ok((e, rdms))
}
