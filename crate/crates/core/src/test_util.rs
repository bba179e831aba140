use ndarray::{Array2, Array4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::integrals::{symmetrize_eri, symmetrize_matrix, ActiveHamiltonian, IntegralSet};

/// Integrals with the full permutational symmetry and a dominant diagonal.
pub fn random_ints(norb: usize, nelec: usize, seed: u64) -> IntegralSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut h = Array2::from_shape_fn((norb, norb), |_| rng.gen_range(-0.2..0.2));
    for p in 0..norb {
        h[[p, p]] = -2.0 + 0.5 * p as f64;
    }
    symmetrize_matrix(&mut h);
    let mut eri = Array4::from_shape_fn((norb, norb, norb, norb), |_| rng.gen_range(-0.05..0.05));
    for p in 0..norb {
        for q in 0..norb {
            eri[[p, p, q, q]] += 0.5;
        }
    }
    symmetrize_eri(&mut eri);
    IntegralSet { h, eri, e_core: rng.gen_range(-1.0..1.0), ..IntegralSet::zeros(norb, nelec, 0) }
}

pub fn random_active(nact: usize, nelec: usize, seed: u64) -> ActiveHamiltonian {
    let ints = random_ints(nact, nelec, seed);
    ActiveHamiltonian { nact, nelec_act: nelec, heff: ints.h, eri: ints.eri, e_frozen: ints.e_core }
}
