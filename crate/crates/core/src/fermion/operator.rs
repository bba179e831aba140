use num_complex::Complex64;

use crate::{Error, Result};

/// A single creation (`dagger = true`) or annihilation operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Ladder {
    pub mode: usize,
    pub dagger: bool,
}

impl Ladder {
    pub fn create(mode: usize) -> Self {
        Self { mode, dagger: true }
    }

    pub fn annihilate(mode: usize) -> Self {
        Self { mode, dagger: false }
    }

    pub fn adjoint(self) -> Self {
        Self { mode: self.mode, dagger: !self.dagger }
    }
}

/// Product of ladder operators, applied right to left.
#[derive(Debug, Clone, PartialEq)]
pub struct FermionTerm {
    pub coeff: Complex64,
    pub factors: Vec<Ladder>,
}

/// Linear combination of ladder-operator products.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FermionOperator {
    terms: Vec<FermionTerm>,
}

impl FermionOperator {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn identity(c: f64) -> Self {
        Self::term(Complex64::new(c, 0.0), &[])
    }

    pub fn term(coeff: Complex64, factors: &[Ladder]) -> Self {
        Self { terms: vec![FermionTerm { coeff, factors: factors.to_vec() }] }
    }

    /// `a†_p a_q`.
    pub fn hopping(p: usize, q: usize) -> Self {
        Self::term(Complex64::new(1.0, 0.0), &[Ladder::create(p), Ladder::annihilate(q)])
    }

    pub fn terms(&self) -> &[FermionTerm] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest mode index referenced, if any.
    pub fn max_mode(&self) -> Option<usize> {
        self.terms.iter().flat_map(|t| t.factors.iter().map(|l| l.mode)).max()
    }

    pub fn check_modes(&self, n_modes: usize) -> Result<()> {
        match self.max_mode() {
            Some(m) if m >= n_modes => Err(Error::ModeOutOfRange { mode: m, n_modes }),
            _ => Ok(()),
        }
    }

    pub fn add(&self, other: &FermionOperator) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self { terms }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| FermionTerm { coeff: t.coeff * s, factors: t.factors.clone() })
                .collect(),
        }
    }

    pub fn mul(&self, other: &FermionOperator) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let mut factors = a.factors.clone();
                factors.extend_from_slice(&b.factors);
                terms.push(FermionTerm { coeff: a.coeff * b.coeff, factors });
            }
        }
        Self { terms }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| FermionTerm {
                    coeff: t.coeff.conj(),
                    factors: t.factors.iter().rev().map(|l| l.adjoint()).collect(),
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjoint_reverses_and_flips() {
        let op = FermionOperator::term(
            Complex64::new(0.0, 2.0),
            &[Ladder::create(3), Ladder::annihilate(1)],
        );
        let adj = op.adjoint();
        assert_eq!(adj.terms()[0].coeff, Complex64::new(0.0, -2.0));
        assert_eq!(adj.terms()[0].factors, vec![Ladder::create(1), Ladder::annihilate(3)]);
    }

    #[test]
    fn mode_range() {
        let op = FermionOperator::hopping(0, 4);
        assert!(op.check_modes(5).is_ok());
        assert!(matches!(op.check_modes(4), Err(Error::ModeOutOfRange { mode: 4, n_modes: 4 })));
    }
}
