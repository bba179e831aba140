use std::collections::HashMap;

use crate::{Error, Result};

/// `E_pq` acting on an occupation string: `E_pq |s> = sign |target>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Excitation {
    pub p: u8,
    pub q: u8,
    pub target: u32,
    pub sign: i8,
}

/// Sorted α and β strings with fixed popcounts; determinant `(ia, ib)` has
/// index `ia * n_beta + ib` and stands for `A†(ia) B†(ib) |vac>`.
#[derive(Debug, Clone)]
pub struct DeterminantBasis {
    nact: usize,
    nalpha: usize,
    nbeta: usize,
    alpha: Vec<u64>,
    beta: Vec<u64>,
    alpha_exc: Vec<Vec<Excitation>>,
    beta_exc: Vec<Vec<Excitation>>,
}

fn strings(nact: usize, nel: usize) -> Vec<u64> {
    (0..1u64 << nact).filter(|s| s.count_ones() as usize == nel).collect()
}

fn excitation_lists(nact: usize, strs: &[u64]) -> Vec<Vec<Excitation>> {
    let index: HashMap<u64, u32> = strs.iter().enumerate().map(|(i, s)| (*s, i as u32)).collect();
    strs.iter()
        .map(|&s| {
            let mut list = Vec::new();
            for q in 0..nact {
                if s & (1 << q) == 0 {
                    continue;
                }
                let below_q = (s & ((1 << q) - 1)).count_ones();
                let s1 = s & !(1 << q);
                for p in 0..nact {
                    if s1 & (1 << p) != 0 {
                        continue;
                    }
                    let below_p = (s1 & ((1 << p) - 1)).count_ones();
                    let t = s1 | (1 << p);
                    let sign = if (below_q + below_p) % 2 == 0 { 1 } else { -1 };
                    list.push(Excitation { p: p as u8, q: q as u8, target: index[&t], sign });
                }
            }
            list
        })
        .collect()
}

impl DeterminantBasis {
    pub fn new(nact: usize, nalpha: usize, nbeta: usize) -> Result<Self> {
        if nact > 32 || nalpha > nact || nbeta > nact {
            return Err(Error::InvalidInput(format!("{nalpha}a/{nbeta}b electrons in {nact} orbitals")));
        }
        let alpha = strings(nact, nalpha);
        let beta = strings(nact, nbeta);
        let alpha_exc = excitation_lists(nact, &alpha);
        let beta_exc = excitation_lists(nact, &beta);
        Ok(Self { nact, nalpha, nbeta, alpha, beta, alpha_exc, beta_exc })
    }

    /// Basis for `nelec` active electrons with spin projection `ms2 / 2`.
    pub fn for_sector(nact: usize, nelec: usize, ms2: i32) -> Result<Self> {
        let (n, m) = (nelec as i64, ms2 as i64);
        if (n + m) % 2 != 0 || m.abs() > n {
            return Err(Error::InvalidInput(format!("ms2={ms2} infeasible for {nelec} electrons")));
        }
        Self::new(nact, ((n + m) / 2) as usize, ((n - m) / 2) as usize)
    }

    pub fn nact(&self) -> usize {
        self.nact
    }

    pub fn nalpha(&self) -> usize {
        self.nalpha
    }

    pub fn nbeta(&self) -> usize {
        self.nbeta
    }

    pub fn nelec(&self) -> usize {
        self.nalpha + self.nbeta
    }

    pub fn ms2(&self) -> i32 {
        self.nalpha as i32 - self.nbeta as i32
    }

    pub fn len(&self) -> usize {
        self.alpha.len() * self.beta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn alpha_strings(&self) -> &[u64] {
        &self.alpha
    }

    pub fn beta_strings(&self) -> &[u64] {
        &self.beta
    }

    /// `(alpha string, beta string)` of determinant `i`.
    pub fn determinant(&self, i: usize) -> (u64, u64) {
        let nb = self.beta.len();
        (self.alpha[i / nb], self.beta[i % nb])
    }

    /// Visits every `E_pq |I> = sign |K>` (spin-summed), diagonal included.
    #[inline]
    pub fn for_each_excitation(&self, i: usize, mut f: impl FnMut(usize, usize, usize, f64)) {
        let nb = self.beta.len();
        let (ia, ib) = (i / nb, i % nb);
        for e in &self.alpha_exc[ia] {
            f(e.p as usize, e.q as usize, e.target as usize * nb + ib, e.sign as f64);
        }
        for e in &self.beta_exc[ib] {
            f(e.p as usize, e.q as usize, ia * nb + e.target as usize, e.sign as f64);
        }
    }
}
