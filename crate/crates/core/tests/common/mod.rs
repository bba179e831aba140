#![allow(dead_code)]

use std::path::PathBuf;

use ndarray::{Array2, Array4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use vqescf::integrals::{read_fcidump, IntegralSet, OrbitalPartition};
use vqescf::linalg::expm;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn load(name: &str) -> IntegralSet {
    read_fcidump(fixture_path(&format!("{name}.fcidump"))).unwrap()
}

pub fn reference() -> Value {
    serde_json::from_str(&std::fs::read_to_string(fixture_path("reference.json")).unwrap()).unwrap()
}

/// Fixture integrals with the partition recorded in `reference.json`.
pub fn fixture(entry: &Value) -> (IntegralSet, OrbitalPartition) {
    let name = entry["file"].as_str().unwrap().trim_end_matches(".fcidump");
    let ints = load(name);
    let part = OrbitalPartition::new(
        ints.norb,
        ints.nelec,
        entry["ncore"].as_u64().unwrap() as usize,
        entry["nact"].as_u64().unwrap() as usize,
    )
    .unwrap();
    (ints, part)
}

/// Every fixture entry, PEC points included.
pub fn all_fixtures() -> Vec<(String, Value)> {
    let r = reference();
    let mut out = Vec::new();
    for (k, v) in r.as_object().unwrap() {
        match v {
            Value::Array(items) => {
                for (i, it) in items.iter().enumerate() {
                    out.push((format!("{k}[{i}]"), it.clone()));
                }
            }
            _ => out.push((k.clone(), v.clone())),
        }
    }
    out
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random integrals with the 8-fold permutational symmetry and a
/// diagonally dominant Coulomb part.
pub fn random_ints(norb: usize, nelec: usize, seed: u64) -> IntegralSet {
    let mut rng = rng(seed);
    let mut h = Array2::from_shape_fn((norb, norb), |_| rng.gen_range(-0.2..0.2));
    h = (&h + &h.t()) * 0.5;
    for p in 0..norb {
        h[[p, p]] = -2.0 + 0.5 * p as f64;
    }
    let raw = Array4::from_shape_fn((norb, norb, norb, norb), |_| rng.gen_range(-0.05..0.05));
    let mut eri = Array4::from_shape_fn((norb, norb, norb, norb), |(p, q, r, s)| {
        let perms = [(p, q, r, s), (q, p, r, s), (p, q, s, r), (q, p, s, r), (r, s, p, q), (s, r, p, q), (r, s, q, p), (s, r, q, p)];
        perms.iter().map(|&(a, b, c, d)| raw[[a, b, c, d]]).sum::<f64>() / 8.0
    });
    for p in 0..norb {
        for q in 0..norb {
            eri[[p, p, q, q]] += 0.5;
        }
    }
    IntegralSet { h, eri, e_core: rng.gen_range(-1.0..1.0), ..IntegralSet::zeros(norb, nelec, 0) }
}

pub fn random_antisymmetric(n: usize, scale: f64, rng: &mut impl Rng) -> Array2<f64> {
    let a = Array2::from_shape_fn((n, n), |_| rng.gen_range(-scale..scale));
    &a - &a.t()
}

pub fn random_orthogonal(n: usize, rng: &mut impl Rng) -> Array2<f64> {
    expm(&random_antisymmetric(n, 1.0, rng))
}

pub fn max_abs(a: impl IntoIterator<Item = f64>) -> f64 {
    a.into_iter().fold(0.0, |m, v| m.max(v.abs()))
}
