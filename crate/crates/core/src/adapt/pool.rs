use std::collections::{BTreeSet, HashSet};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::fermion::{
    build_s2_operator, FermionEncoding, FermionOperator, Ladder, Mapping, PauliString, PauliSum, Spin,
    SpinOrbitalOrdering,
};
use crate::statevector::Generator;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PoolKind {
    #[default]
    Fermionic,
    Qubit,
}

impl std::str::FromStr for PoolKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fermionic" | "fermion" => Ok(Self::Fermionic),
            "qubit" => Ok(Self::Qubit),
            _ => Err(crate::Error::InvalidInput(format!("unknown pool '{s}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PoolEntry {
    pub generator: Generator,
    pub label: String,
    /// Commutes with `Ŝ²`.
    pub spin_preserving: bool,
}

#[derive(Debug, Clone)]
pub struct OperatorPool {
    pub kind: PoolKind,
    pub n_qubits: usize,
    pub entries: Vec<PoolEntry>,
}

impl OperatorPool {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// `a†_{create...} a_{annihilate...}` with strictly descending index lists.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Excitation {
    create: Vec<usize>,
    annihilate: Vec<usize>,
}

impl Excitation {
    fn operator(&self) -> FermionOperator {
        let mut f: Vec<Ladder> = self.create.iter().map(|&m| Ladder::create(m)).collect();
        f.extend(self.annihilate.iter().map(|&m| Ladder::annihilate(m)));
        let t = FermionOperator::term(Complex64::new(1.0, 0.0), &f);
        t.add(&t.adjoint().scale(Complex64::new(-1.0, 0.0)))
    }

    /// Canonical representative and the sign relating the anti-hermitian
    /// operators: `T(self) = sign * T(canonical)`.
    fn canonical(&self) -> (Excitation, f64) {
        let mut sign = 1.0;
        let mut c = self.create.clone();
        let mut a = self.annihilate.clone();
        sign *= sort_desc(&mut c);
        sign *= sort_desc(&mut a);
        if c < a {
            // T = A - A†; swapping roles negates it
            std::mem::swap(&mut c, &mut a);
            sign = -sign;
        }
        (Excitation { create: c, annihilate: a }, sign)
    }

    fn map_modes(&self, f: impl Fn(usize) -> usize) -> Excitation {
        Excitation {
            create: self.create.iter().map(|&m| f(m)).collect(),
            annihilate: self.annihilate.iter().map(|&m| f(m)).collect(),
        }
    }

    fn label(&self, nact: usize, ordering: SpinOrbitalOrdering) -> String {
        let name = |m: usize| {
            let (o, s) = ordering.orbital(m, nact);
            format!("{o}{}", if s == Spin::Alpha { 'a' } else { 'b' })
        };
        let c: Vec<String> = self.create.iter().map(|&m| format!("{}^", name(m))).collect();
        let a: Vec<String> = self.annihilate.iter().map(|&m| name(m)).collect();
        format!("{} {}", c.join(" "), a.join(" "))
    }
}

/// Sorts descending by adjacent swaps and returns the permutation sign.
fn sort_desc(v: &mut [usize]) -> f64 {
    let mut sign = 1.0;
    for i in 0..v.len() {
        for j in 0..v.len() - 1 - i {
            if v[j] < v[j + 1] {
                v.swap(j, j + 1);
                sign = -sign;
            }
        }
    }
    sign
}

fn all_excitations(n: usize) -> Vec<Excitation> {
    let mut out = Vec::new();
    for p in 0..n {
        for q in 0..p {
            out.push(Excitation { create: vec![p], annihilate: vec![q] });
        }
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|p| (0..p).map(move |q| (p, q))).collect();
    for (i, &(p, q)) in pairs.iter().enumerate() {
        for &(r, s) in &pairs[..i] {
            out.push(Excitation { create: vec![p, q], annihilate: vec![r, s] });
        }
    }
    out
}

fn to_generator(enc: &FermionEncoding, op: &FermionOperator) -> Result<Option<Generator>> {
    // A = T is anti-hermitian, G = -iT hermitian
    let g = enc.map(op)?.scale(Complex64::new(0.0, -1.0));
    if g.is_empty() {
        return Ok(None);
    }
    if !g.terms_commute() {
        return Ok(None);
    }
    Ok(Some(Generator::new(&g)?))
}

fn commutes_with(g: &PauliSum, s2: &PauliSum) -> bool {
    g.commutator(s2).max_abs() < 1e-10
}

/// Spin-orbital singles and doubles over `2 nact` modes as anti-hermitian
/// generators. With `spin_filter`, only `Ŝ_z`-conserving excitations are
/// kept and each is merged with its spin-flip image into one generator
/// when the combined Pauli terms commute.
pub fn build_fermionic_pool(
    nact: usize,
    nelec_act: usize,
    mapping: Mapping,
    ordering: SpinOrbitalOrdering,
    spin_filter: bool,
) -> Result<OperatorPool> {
    let _ = nelec_act;
    let n = 2 * nact;
    let enc = FermionEncoding::new(mapping, n)?;
    let s2 = build_s2_operator(nact, mapping, ordering)?;
    let spin = |m: usize| ordering.orbital(m, nact).1;
    let flip = |m: usize| {
        let (o, s) = ordering.orbital(m, nact);
        ordering.mode(o, if s == Spin::Alpha { Spin::Beta } else { Spin::Alpha }, nact)
    };
    let mut entries = Vec::new();
    let mut used: HashSet<Excitation> = HashSet::new();
    for ex in all_excitations(n) {
        let alpha = |v: &[usize]| v.iter().filter(|&&m| spin(m) == Spin::Alpha).count();
        let sz_ok = alpha(&ex.create) == alpha(&ex.annihilate);
        if spin_filter && !sz_ok {
            continue;
        }
        if used.contains(&ex) {
            continue;
        }
        used.insert(ex.clone());
        let op = ex.operator();
        let mut label = ex.label(nact, ordering);
        let mut combined = None;
        if spin_filter {
            let (partner, _) = ex.map_modes(flip).canonical();
            if partner != ex {
                let both = op.add(&ex.map_modes(flip).operator());
                if let Some(g) = to_generator(&enc, &both)? {
                    used.insert(partner.clone());
                    label = format!("{label} + {}", ex.map_modes(flip).label(nact, ordering));
                    combined = Some(g);
                }
            }
        }
        let gen = match combined {
            Some(g) => g,
            None => match to_generator(&enc, &op)? {
                Some(g) => g,
                None => continue,
            },
        };
        let spin_preserving = commutes_with(&gen.to_pauli_sum(), &s2);
        entries.push(PoolEntry { generator: gen, label, spin_preserving });
    }
    Ok(OperatorPool { kind: PoolKind::Fermionic, n_qubits: n, entries })
}

/// Distinct Z-stripped Pauli strings of a fermionic pool, one entry each.
pub fn build_qubit_pool(fermionic: &OperatorPool) -> Result<OperatorPool> {
    let n = fermionic.n_qubits;
    let mut seen: BTreeSet<PauliString> = BTreeSet::new();
    let mut entries = Vec::new();
    for e in &fermionic.entries {
        for (p, _) in e.generator.terms() {
            let w = p.without_z();
            if w.y_count() % 2 == 1 && seen.insert(w) {
                let g = Generator::new(&PauliSum::from_terms(n, [(w, Complex64::new(1.0, 0.0))]))?;
                entries.push(PoolEntry { generator: g, label: w.to_string(), spin_preserving: false });
            }
        }
    }
    Ok(OperatorPool { kind: PoolKind::Qubit, n_qubits: n, entries })
}

/// `dE/dθ = <ψ|[H, A_i]|ψ> = 2 Re <Hψ|A_i ψ>` for every pool entry.
pub fn pool_gradients(psi: &[Complex64], h_psi: &[Complex64], pool: &OperatorPool) -> Vec<f64> {
    pool.entries.par_iter().map(|e| commutator_expectation(&e.generator, psi, h_psi)).collect()
}

pub(crate) fn commutator_expectation(g: &Generator, psi: &[Complex64], h_psi: &[Complex64]) -> f64 {
    let mut acc = Complex64::default();
    for (p, c) in g.terms() {
        let x = p.x_mask() as usize;
        let mut t = Complex64::default();
        for (b, a) in psi.iter().enumerate() {
            if a.re != 0.0 || a.im != 0.0 {
                t += h_psi[b ^ x].conj() * p.phase_on(b as u64) * a;
            }
        }
        acc += t * *c;
    }
    // A = iG
    2.0 * (Complex64::new(0.0, 1.0) * acc).re
}
