//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion,
//! followed by indented detail lines, and exits non-zero if any fails.
//!
//! Run a subset with `cargo test --test acceptance -- 3 7`.

mod common;

use std::collections::{BTreeMap, HashMap};
use std::error::Error;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::*;
use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rand::Rng;
use serde_json::Value;
use vqescf::adapt::{build_fermionic_pool, pool_gradients, AdaptConfig, PoolKind};
use vqescf::ci::{ci_rdms, embed_civector, CiOperator, DeterminantBasis};
use vqescf::fermion::{map_hamiltonian, FermionEncoding, Mapping, PauliSum, Spin, SpinOrbitalOrdering};
use vqescf::integrals::{
    build_active_hamiltonian, build_reduced_hamiltonian, exp_kappa, one_index_transform_k2, rotate_integrals,
    IntegralSet, KappaLayout, OrbitalPartition,
};
use vqescf::linalg::{expm, symmetric_eigh};
use vqescf::scf::{
    energy_from_rdms, generalized_fock, orbital_gradient, run_adapt_vqe_scf, run_casscf, ActiveRdms, AdaptEngine,
    AdaptSetup, ConfigurationEngine, ExactEngine, ScfConfig, ScfMode, ScfResult, StateAverageSpec, TargetState,
};
use vqescf::spectro::{fit_spectroscopic, SpectroscopicConstants};
use vqescf::statevector::{
    ansatz_gradient, apply_ansatz, expectation, measure_rdm12, AnsatzCircuit, QubitOperator, Statevector,
};

type Res = Result<(), Box<dyn Error>>;

const JW: Mapping = Mapping::JordanWigner;
const BK: Mapping = Mapping::BravyiKitaev;
const INTERLEAVED: SpinOrbitalOrdering = SpinOrbitalOrdering::Interleaved;

#[derive(Default)]
struct Check {
    ok: bool,
    details: Vec<String>,
}

impl Check {
    fn expect(&mut self, cond: bool, msg: impl Into<String>) {
        let msg = msg.into();
        self.ok &= cond;
        self.details.push(format!("{} {msg}", if cond { "ok  " } else { "FAIL" }));
    }

    fn note(&mut self, msg: impl Into<String>) {
        self.details.push(format!("     {}", msg.into()));
    }
}

fn main() {
    let criteria: [(usize, &str, fn(&mut Check) -> Res); 12] = [
        (1, "ADAPT-VQE-SCF matches exact CASSCF", oracle_casscf),
        (2, "vanilla ADAPT matches CASCI", vanilla_casci),
        (3, "qubit pool needs fewer CNOTs than fermionic pool", cnot_advantage),
        (4, "orbital relaxation beats vanilla ADAPT on CNOTs", relaxation_benefit),
        (5, "analytic gradients match finite differences", gradient_suite),
        (6, "RDM invariants", rdm_invariants),
        (7, "JW and BK Hamiltonians are isospectral", mapping_equivalence),
        (8, "state-averaged optimization", state_average),
        (9, "one-step needs no more macro-iterations than two-step", one_vs_two_step),
        (10, "spin filter keeps a pure singlet", spin_filter),
        (11, "spectroscopic fit of a planted quartic", spectroscopic_fit),
        (12, "full-CI spectrum is invariant under orbital rotation", unitary_invariance),
    ];
    let wanted: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = Vec::new();
    for (n, name, f) in criteria {
        if !wanted.is_empty() && !wanted.contains(&n) {
            continue;
        }
        let t = Instant::now();
        let mut ck = Check { ok: true, details: Vec::new() };
        match catch_unwind(AssertUnwindSafe(|| f(&mut ck))) {
            Ok(Ok(())) => {}
            Ok(Err(e)) => ck.expect(false, format!("error: {e}")),
            Err(_) => ck.expect(false, "panicked"),
        }
        let verdict = if ck.ok { "PASS" } else { "FAIL" };
        println!("criterion {n:>2} {verdict}  {name}  ({:.1} s)", t.elapsed().as_secs_f64());
        for d in &ck.details {
            println!("      {d}");
        }
        if !ck.ok {
            failed.push(n);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all selected criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}

fn f64_of(v: &Value) -> f64 {
    v.as_f64().expect("number in reference.json")
}

fn setup(mapping: Mapping, pool: PoolKind) -> AdaptSetup {
    AdaptSetup { mapping, ordering: INTERLEAVED, pool }
}

fn n_gates(n: usize) -> AdaptConfig {
    AdaptConfig { n_gates_per_macro: n, ..AdaptConfig::default() }
}

fn singlet() -> StateAverageSpec {
    StateAverageSpec::single(0)
}

/// CNOT count of the first macro-iteration within `tol` of `target`.
fn cnots_to_reach(r: &ScfResult, target: f64, tol: f64) -> Option<usize> {
    r.records.iter().find(|m| (m.energy_sa - target).abs() < tol).map(|m| m.cnots.iter().sum())
}

fn oracle_casscf(ck: &mut Check) -> Res {
    let refs = reference();
    let limit = Duration::from_secs(120);
    for name in ["h4_sto3g", "h4_631g"] {
        let (ints, part) = fixture(&refs[name]);
        let scf = ScfConfig::default();
        let oracle = run_casscf(&ints, &part, &singlet(), &scf, None)?;
        let golden = f64_of(&refs[name]["e_casscf"]);
        ck.expect(
            oracle.converged && (oracle.energy_sa - golden).abs() < 1e-8,
            format!("{name}: exact CASSCF {:.10} vs reference {golden:.10}", oracle.energy_sa),
        );
        for pool in [PoolKind::Fermionic, PoolKind::Qubit] {
            for mapping in [JW, BK] {
                for ng in [1, 5] {
                    let t = Instant::now();
                    let r = run_adapt_vqe_scf(&ints, &part, setup(mapping, pool), &n_gates(ng), &scf, &singlet(), None)?;
                    let dt = t.elapsed();
                    let err = r.energy_sa - oracle.energy_sa;
                    ck.expect(
                        r.converged && err.abs() < 1e-6 && dt < limit,
                        format!(
                            "{name} {pool:?} {mapping:?} {ng}G: E = {:.10}, error {err:.1e}, {} macro, {:.1} s",
                            r.energy_sa,
                            r.n_macro,
                            dt.as_secs_f64()
                        ),
                    );
                }
            }
        }
    }
    Ok(())
}

fn vanilla_casci(ck: &mut Check) -> Res {
    let limit = Duration::from_secs(60);
    for (name, entry) in all_fixtures() {
        let (ints, part) = fixture(&entry);
        let act = build_active_hamiltonian(&ints, &part)?;
        let spec = StateAverageSpec::single(ints.ms2);
        let exact = ExactEngine::new(&part, &spec)?.grow(&act)?[0].energy;
        let golden = f64_of(&entry["e_casci"]);
        ck.expect((exact - golden).abs() < 1e-8, format!("{name}: exact CASCI {exact:.10} vs reference {golden:.10}"));
        for pool in [PoolKind::Fermionic, PoolKind::Qubit] {
            let t = Instant::now();
            let mut engine = AdaptEngine::new(&part, &spec, JW, INTERLEAVED, pool, &AdaptConfig::default())?;
            let history = engine.run_fixed_orbitals(&act)?;
            let dt = t.elapsed();
            let e = history.last().map_or(f64::NAN, |s| s[0].energy);
            ck.expect(
                engine.converged() && (e - exact).abs() < 1e-6 && dt < limit,
                format!("{name} {pool:?}: E = {e:.10}, error {:.1e}, {:.1} s", e - exact, dt.as_secs_f64()),
            );
        }
    }
    Ok(())
}

fn cnot_advantage(ck: &mut Check) -> Res {
    let refs = reference();
    let (ints, part) = fixture(&refs["h4_631g"]);
    let scf = ScfConfig::default();
    let target = run_casscf(&ints, &part, &singlet(), &scf, None)?.energy_sa;
    for mapping in [JW, BK] {
        let mut counts = Vec::new();
        for pool in [PoolKind::Qubit, PoolKind::Fermionic] {
            let r = run_adapt_vqe_scf(&ints, &part, setup(mapping, pool), &n_gates(1), &scf, &singlet(), None)?;
            counts.push(cnots_to_reach(&r, target, 1e-3));
        }
        let (q, f) = (counts[0], counts[1]);
        ck.expect(
            matches!((q, f), (Some(q), Some(f)) if q < f),
            format!("h4_631g {mapping:?} 1G: qubit pool {q:?} CNOTs, fermionic pool {f:?} CNOTs"),
        );
    }
    Ok(())
}

fn relaxation_benefit(ck: &mut Check) -> Res {
    let refs = reference();
    let (ints, part) = fixture(&refs["h4_631g"]);
    let scf = ScfConfig::default();
    let casscf = run_casscf(&ints, &part, &singlet(), &scf, None)?.energy_sa;
    let act = build_active_hamiltonian(&ints, &part)?;
    let casci = f64_of(&refs["h4_631g"]["e_casci"]);
    for pool in [PoolKind::Fermionic, PoolKind::Qubit] {
        let mut vanilla = AdaptEngine::new(&part, &singlet(), JW, INTERLEAVED, pool, &AdaptConfig::default())?;
        let history = vanilla.run_fixed_orbitals(&act)?;
        let first = |target: f64| history.iter().find(|s| (s[0].energy - target).abs() < 1e-3).map(|s| s[0].cnots);
        let v = first(casscf);
        let r = run_adapt_vqe_scf(&ints, &part, setup(JW, pool), &n_gates(1), &scf, &singlet(), None)?;
        let s = cnots_to_reach(&r, casscf, 1e-3);
        // an unreached threshold counts as an unbounded CNOT count
        ck.expect(
            s.is_some() && v.map_or(true, |v| Some(v) > s),
            format!("h4_631g {pool:?}: within 1e-3 of CASSCF after vanilla {v:?} / 1G-SCF {s:?} CNOTs"),
        );
        ck.note(format!(
            "vanilla converges to CASCI {:.6} ({:.4} above CASSCF), reaching 1e-3 of it after {:?} CNOTs",
            history.last().map_or(f64::NAN, |s| s[0].energy),
            casci - casscf,
            first(casci)
        ));
    }
    Ok(())
}

fn relative_error(analytic: &[f64], fd: &[f64]) -> f64 {
    let diff = max_abs(analytic.iter().zip(fd).map(|(a, b)| a - b));
    diff / max_abs(analytic.iter().copied()).max(1e-12)
}

fn central<F: FnMut(f64) -> Result<f64, Box<dyn Error>>>(mut f: F, h: f64) -> Result<f64, Box<dyn Error>> {
    Ok((f(h)? - f(-h)?) / (2.0 * h))
}

fn random_civector(n: usize, rng: &mut impl Rng) -> Array1<f64> {
    let c: Array1<f64> = Array1::from_shape_fn(n, |_| rng.gen_range(-1.0..1.0));
    let norm = c.dot(&c).sqrt();
    c / norm
}

/// Random active-space problem of `nact` orbitals and its encoded Hamiltonian.
fn random_qubit_problem(nact: usize, nelec: usize, mapping: Mapping, seed: u64) -> Result<(OrbitalPartition, PauliSum), Box<dyn Error>> {
    let ints = random_ints(nact, nelec, seed);
    let part = OrbitalPartition::new(nact, nelec, 0, nact)?;
    let act = build_active_hamiltonian(&ints, &part)?;
    Ok((part, map_hamiltonian(&act, mapping, INTERLEAVED)?))
}

fn random_circuit(part: &OrbitalPartition, mapping: Mapping, n_ops: usize, rng: &mut impl Rng) -> Result<AnsatzCircuit, Box<dyn Error>> {
    let pool = build_fermionic_pool(part.nact, part.nelec_act, mapping, INTERLEAVED, false)?;
    let occ = vqescf::statevector::reference_occupation(part.nact, part.nelec_act, 0, INTERLEAVED)?;
    let enc = FermionEncoding::new(mapping, 2 * part.nact)?;
    let mut circ = AnsatzCircuit::new(2 * part.nact, enc.encode(occ));
    for _ in 0..n_ops {
        let e = &pool.entries[rng.gen_range(0..pool.len())];
        circ.push(e.generator.clone(), rng.gen_range(-0.6..0.6), e.label.clone())?;
    }
    Ok(circ)
}

fn gradient_suite(ck: &mut Check) -> Res {
    let t = Instant::now();
    let tol = 1e-5;
    let h = 1e-5;
    let mut rng = rng(2024);
    let mapping = |k: usize| if k % 2 == 0 { JW } else { BK };

    let mut worst = 0.0f64;
    for k in 0..20 {
        let (part, ham) = random_qubit_problem(3, 2 + 2 * (k % 2), mapping(k), 100 + k as u64)?;
        // redraw circuits whose gates all act trivially on the reference
        let (mut circ, g) = loop {
            let circ = random_circuit(&part, mapping(k), 4, &mut rng)?;
            let g = ansatz_gradient(&circ, &ham)?;
            if max_abs(g.iter().copied()) > 1e-3 {
                break (circ, g);
            }
        };
        let theta = circ.params();
        let mut fd = Vec::new();
        for i in 0..theta.len() {
            fd.push(central(
                |d| {
                    let mut t = theta.clone();
                    t[i] += d;
                    circ.set_params(&t)?;
                    Ok(expectation(&apply_ansatz(&circ)?, &ham)?)
                },
                h,
            )?);
        }
        worst = worst.max(relative_error(&g, &fd));
    }
    ck.expect(worst < tol, format!("ansatz_gradient: worst relative error {worst:.1e} over 20 instances"));

    let mut worst = 0.0f64;
    for k in 0..20 {
        let (part, ham) = random_qubit_problem(3, 2 + 2 * (k % 2), mapping(k), 200 + k as u64)?;
        let psi = apply_ansatz(&random_circuit(&part, mapping(k), 3, &mut rng)?)?;
        let op = QubitOperator::new(&ham)?;
        let h_psi = op.apply(psi.amplitudes());
        let pool = build_fermionic_pool(part.nact, part.nelec_act, mapping(k), INTERLEAVED, k % 3 == 0)?;
        let g = pool_gradients(psi.amplitudes(), &h_psi, &pool);
        let mut fd = Vec::new();
        for e in &pool.entries {
            fd.push(central(
                |d| {
                    let mut s: Statevector = psi.clone();
                    e.generator.apply(&mut s, d);
                    Ok(op.expectation(&s)?)
                },
                h,
            )?);
        }
        worst = worst.max(relative_error(&g, &fd));
    }
    ck.expect(worst < tol, format!("pool_gradients: worst relative error {worst:.1e} over 20 instances"));

    let mut worst = 0.0f64;
    for k in 0..20 {
        let (norb, ncore, nact) = if k % 2 == 0 { (6, 1, 3) } else { (5, 0, 3) };
        let ints = random_ints(norb, 2 * ncore + 2, 300 + k as u64);
        let part = OrbitalPartition::new(norb, ints.nelec, ncore, nact)?;
        let basis = DeterminantBasis::for_sector(nact, 2, 0)?;
        let (g1, g2) = ci_rdms(&basis, &random_civector(basis.len(), &mut rng))?;
        let rdms = ActiveRdms { g1, g2 };
        let layout = KappaLayout::new(&part, k % 4 < 2);
        let g = orbital_gradient(&generalized_fock(&ints, &part, &rdms)?, &layout);
        let mut fd = Vec::new();
        for i in 0..layout.len() {
            fd.push(central(
                |d| {
                    let mut v = vec![0.0; layout.len()];
                    v[i] = d;
                    let u = exp_kappa(&layout.vector(v), norb)?;
                    Ok(energy_from_rdms(&rotate_integrals(&ints, &u)?, &part, &rdms)?)
                },
                h,
            )?);
        }
        worst = worst.max(relative_error(&g, &fd));
    }
    ck.expect(worst < tol, format!("orbital_gradient: worst relative error {worst:.1e} over 20 instances"));

    let mut worst = 0.0f64;
    for k in 0..20 {
        let n = 3 + k % 2;
        let ints = random_ints(n, 2 + 2 * (k % 2), 400 + k as u64);
        let part = OrbitalPartition::new(n, ints.nelec, 0, n)?;
        let k2_at = |ints: &IntegralSet| -> Result<_, Box<dyn Error>> {
            Ok(build_reduced_hamiltonian(&build_active_hamiltonian(ints, &part)?)?)
        };
        let kappa = random_antisymmetric(n, 0.5, &mut rng);
        let analytic = one_index_transform_k2(&k2_at(&ints)?, &kappa)?;
        let plus = k2_at(&rotate_integrals(&ints, &expm(&(&kappa * h)))?)?;
        let minus = k2_at(&rotate_integrals(&ints, &expm(&(&kappa * -h)))?)?;
        let fd: Vec<f64> = plus.k2.iter().zip(minus.k2.iter()).map(|(p, m)| (p - m) / (2.0 * h)).collect();
        worst = worst.max(relative_error(&analytic.k2.iter().copied().collect::<Vec<_>>(), &fd));
    }
    ck.expect(worst < tol, format!("one_index_transform_k2: worst relative error {worst:.1e} over 20 instances"));
    ck.expect(t.elapsed() < Duration::from_secs(60), format!("runtime {:.1} s", t.elapsed().as_secs_f64()));
    Ok(())
}

fn rdm_invariants(ck: &mut Check) -> Res {
    let tol = 1e-10;
    let refs = reference();
    let names = ["h2_sto3g", "h4_sto3g", "h4_631g", "lih_sto3g", "h2_631g_stretched"];
    let mut rng = rng(7);
    let mut worst = [0.0f64; 4];
    let mut sectors = BTreeMap::new();
    for k in 0..50 {
        let (ints, part) = fixture(&refs[names[k % names.len()]]);
        let act = build_active_hamiltonian(&ints, &part)?;
        let n_el = part.nelec_act;
        let ms2 = if (k / names.len()) % 2 == 1 && n_el <= part.nact { 2 } else { 0 };
        let basis = DeterminantBasis::for_sector(part.nact, n_el, ms2)?;
        let c = random_civector(basis.len(), &mut rng);
        // alternate between the determinant-space and the measured qubit RDMs
        let (g1, g2) = if k % 2 == 0 {
            ci_rdms(&basis, &c)?
        } else {
            let mapping = if k % 4 == 1 { JW } else { BK };
            measure_rdm12(&embed_civector(&c, &basis, mapping, INTERLEAVED)?, part.nact, mapping, INTERLEAVED)?
        };
        *sectors.entry((names[k % names.len()], ms2)).or_insert(0) += 1;
        let l = part.nact;
        let n = n_el as f64;
        let mut trace = 0.0;
        for i in 0..l {
            for j in 0..l {
                trace += g2[[i, i, j, j]];
                let partial: f64 = (0..l).map(|m| g2[[i, j, m, m]]).sum();
                worst[1] = worst[1].max((partial - 0.5 * (n - 1.0) * g1[[i, j]]).abs());
                for p in 0..l {
                    for q in 0..l {
                        worst[2] = worst[2].max((g2[[i, j, p, q]] - g2[[p, q, i, j]]).abs());
                    }
                }
            }
        }
        worst[0] = worst[0].max((trace - 0.5 * n * (n - 1.0)).abs());
        let k2 = build_reduced_hamiltonian(&act)?;
        let h_exp = c.dot(&CiOperator::from_active(&act).apply(&basis, &c)?);
        worst[3] = worst[3].max((k2.contract(&g2) + act.e_frozen - h_exp).abs());
    }
    ck.note(format!("50 states over sectors {sectors:?}"));
    let labels = ["trace N(N-1)/2", "partial trace (N-1)/2 gamma", "pair symmetry", "Tr(2K Gamma) + e_frozen = <H>"];
    for (label, w) in labels.iter().zip(worst) {
        ck.expect(w < tol, format!("{label}: max deviation {w:.1e}"));
    }
    Ok(())
}

/// Full spectrum of a qubit Hamiltonian that conserves the α and β
/// electron counts, by dense diagonalization of each (Nα, Nβ) block.
/// Matrix elements outside the blocks are checked to vanish.
fn block_spectrum(h: &PauliSum, nact: usize, mapping: Mapping) -> Result<Vec<f64>, Box<dyn Error>> {
    let n = 2 * nact;
    let enc = FermionEncoding::new(mapping, n)?;
    let alpha: u64 = (0..nact).map(|p| 1u64 << INTERLEAVED.mode(p, Spin::Alpha, nact)).sum();
    let beta: u64 = (0..nact).map(|p| 1u64 << INTERLEAVED.mode(p, Spin::Beta, nact)).sum();
    let mut blocks: BTreeMap<(u32, u32), Vec<u64>> = BTreeMap::new();
    let mut place = vec![((0, 0), 0usize); 1 << n];
    for b in 0..1u64 << n {
        let occ = enc.decode(b);
        let key = ((occ & alpha).count_ones(), (occ & beta).count_ones());
        let members = blocks.entry(key).or_default();
        place[b as usize] = (key, members.len());
        members.push(b);
    }
    let mut mats: BTreeMap<(u32, u32), Array2<Complex64>> =
        blocks.iter().map(|(k, v)| (*k, Array2::zeros((v.len(), v.len())))).collect();
    let mut outside: HashMap<(u64, u64), Complex64> = HashMap::new();
    for (p, c) in h.iter() {
        let x = p.x_mask();
        for b in 0..1u64 << n {
            let (kb, ib) = place[b as usize];
            let (kt, it) = place[(b ^ x) as usize];
            let v = c * p.phase_on(b);
            if kb == kt {
                mats.get_mut(&kb).expect("block")[[it, ib]] += v;
            } else {
                *outside.entry((b ^ x, b)).or_default() += v;
            }
        }
    }
    let leak = outside.values().fold(0.0f64, |m, v| m.max(v.norm()));
    if leak > 1e-12 {
        return Err(format!("{mapping:?}: Hamiltonian couples particle sectors ({leak:.1e})").into());
    }
    let mut spectrum = Vec::with_capacity(1 << n);
    for m in mats.values() {
        let imag = m.iter().fold(0.0f64, |a, v| a.max(v.im.abs()));
        if imag > 1e-12 {
            return Err(format!("{mapping:?}: complex matrix elements ({imag:.1e})").into());
        }
        spectrum.extend(symmetric_eigh(&m.mapv(|v| v.re)).0);
    }
    spectrum.sort_by(f64::total_cmp);
    Ok(spectrum)
}

fn mapping_equivalence(ck: &mut Check) -> Res {
    let refs = reference();
    let mut cases: Vec<(String, IntegralSet, OrbitalPartition)> = Vec::new();
    for (name, entry) in all_fixtures() {
        let (ints, part) = fixture(&entry);
        cases.push((format!("{name} CAS({},{})", part.nelec_act, part.nact), ints, part));
    }
    for name in ["h2_631g_stretched", "lih_sto3g"] {
        let (ints, _) = fixture(&refs[name]);
        let part = OrbitalPartition::new(ints.norb, ints.nelec, 0, ints.norb)?;
        cases.push((format!("{name} full space"), ints, part));
    }
    for (label, ints, part) in cases {
        if 2 * part.nact > 12 {
            continue;
        }
        let act = build_active_hamiltonian(&ints, &part)?;
        let jw = block_spectrum(&map_hamiltonian(&act, JW, INTERLEAVED)?, part.nact, JW)?;
        let bk = block_spectrum(&map_hamiltonian(&act, BK, INTERLEAVED)?, part.nact, BK)?;
        let dev = max_abs(jw.iter().zip(&bk).map(|(a, b)| a - b));
        ck.expect(
            jw.len() == bk.len() && dev < 1e-10,
            format!("{label}: {} qubits, {} eigenvalues, max deviation {dev:.1e}", 2 * part.nact, jw.len()),
        );
    }
    Ok(())
}

fn singlet_triplet(w: f64) -> StateAverageSpec {
    StateAverageSpec {
        states: vec![
            TargetState { spin: 0.0, ms2: 0, weight: w },
            TargetState { spin: 1.0, ms2: 2, weight: 1.0 - w },
        ],
    }
}

fn state_average(ck: &mut Check) -> Res {
    let refs = reference();
    let entry = &refs["h2_631g_stretched"];
    let (ints, part) = fixture(entry);
    let scf = ScfConfig::default();
    let adapt = AdaptConfig::default();
    let fermionic = setup(JW, PoolKind::Fermionic);

    let oracle = run_casscf(&ints, &part, &singlet_triplet(0.5), &scf, None)?;
    let golden = f64_of(&entry["e_sa_casscf"]);
    ck.expect(
        (oracle.energy_sa - golden).abs() < 1e-8,
        format!("exact SA-CASSCF {:.10} vs reference {golden:.10}", oracle.energy_sa),
    );
    let sa = run_adapt_vqe_scf(&ints, &part, fermionic, &adapt, &scf, &singlet_triplet(0.5), None)?;
    let worst = max_abs(sa.records.iter().map(|m| m.energy_sa - 0.5 * m.energies[0] - 0.5 * m.energies[1]));
    ck.expect(worst < 1e-12, format!("E_sa = (E1 + E2)/2 over {} macro-iterations: max deviation {worst:.1e}", sa.n_macro));
    ck.expect(
        sa.converged && (sa.energy_sa - oracle.energy_sa).abs() < 1e-5,
        format!("ADAPT SA energy {:.10}, error vs oracle {:.1e}", sa.energy_sa, sa.energy_sa - oracle.energy_sa),
    );

    let pinned = run_adapt_vqe_scf(&ints, &part, fermionic, &adapt, &scf, &singlet_triplet(1.0), None)?;
    let single = run_adapt_vqe_scf(&ints, &part, fermionic, &adapt, &scf, &singlet(), None)?;
    let diff = pinned.energy_sa - single.energy_sa;
    ck.expect(
        pinned.converged && single.converged && diff.abs() < 1e-6,
        format!("weights (1, 0): {:.10} vs state-specific {:.10} ({diff:.1e})", pinned.energy_sa, single.energy_sa),
    );
    Ok(())
}

fn one_vs_two_step(ck: &mut Check) -> Res {
    let refs = reference();
    for name in ["h4_631g", "h4_sto3g"] {
        let (ints, part) = fixture(&refs[name]);
        let mut n = Vec::new();
        for mode in [ScfMode::OneStep, ScfMode::TwoStep] {
            let cfg = ScfConfig { mode, ..ScfConfig::default() };
            let r = run_casscf(&ints, &part, &singlet(), &cfg, None)?;
            if !r.converged {
                return Err(format!("{name} {mode:?} did not converge").into());
            }
            n.push(r.n_macro);
        }
        ck.expect(n[0] <= n[1], format!("{name}: one-step {} vs two-step {} macro-iterations", n[0], n[1]));
    }
    Ok(())
}

fn spin_filter(ck: &mut Check) -> Res {
    let refs = reference();
    let (ints, part) = fixture(&refs["lih_sto3g"]);
    let cfg = AdaptConfig { spin_filter: true, ..AdaptConfig::default() };
    for mapping in [JW, BK] {
        let r = run_adapt_vqe_scf(&ints, &part, setup(mapping, PoolKind::Fermionic), &cfg, &ScfConfig::default(), &singlet(), None)?;
        let dev = (r.s2[0] - 0.0).abs();
        ck.expect(
            r.converged && dev < 1e-6,
            format!("lih_sto3g {mapping:?}: E = {:.10}, |<S2> - S(S+1)| = {dev:.1e}", r.energy_sa),
        );
    }
    Ok(())
}

fn spectroscopic_fit(ck: &mut Check) -> Res {
    let (r_e, k, e0, mu) = (0.7414, 0.3652, -1.1373, 0.503_912_5);
    let (a3, a4) = (-0.31, 0.27);
    let grid: Vec<f64> = (0..15).map(|i| 0.55 + 0.03 * i as f64).collect();
    let curve = |shift: f64| -> Vec<f64> {
        grid.iter()
            .map(|r| {
                let x = r - r_e;
                e0 + shift + 0.5 * k * x * x + a3 * x.powi(3) + a4 * x.powi(4)
            })
            .collect()
    };
    // ω = sqrt(k/μ) / (2πc), with k in Eh/Å² and μ in Da
    let k_si = k * 4.3597447222071e-18 / 1e-20;
    let mu_si = mu * 1.66053906660e-27;
    let omega = (k_si / mu_si).sqrt() / (2.0 * std::f64::consts::PI * 2.99792458e10);

    let fit: SpectroscopicConstants = fit_spectroscopic(&grid, &[curve(0.0)], mu)?;
    let s = &fit.states[0];
    ck.expect((s.r_e - r_e).abs() < 1e-8, format!("R_e {:.12} vs planted {r_e} ({:.1e})", s.r_e, s.r_e - r_e));
    let rel = (s.omega_e - omega).abs() / omega;
    ck.expect(rel < 1e-6, format!("omega_e {:.6} vs planted {omega:.6} cm-1 (relative {rel:.1e})", s.omega_e));

    let shifted = fit_spectroscopic(&grid, &[curve(3.75)], mu)?;
    let t = &shifted.states[0];
    let dr = (t.r_e - s.r_e).abs();
    let dw = (t.omega_e - s.omega_e).abs() / s.omega_e;
    ck.expect(
        dr < 1e-12 && dw < 1e-12,
        format!("uniform shift: R_e moves {dr:.1e}, omega_e moves {dw:.1e} (relative)"),
    );
    Ok(())
}

fn full_ci_spectrum(ints: &IntegralSet) -> Result<Vec<f64>, Box<dyn Error>> {
    let part = OrbitalPartition::new(ints.norb, ints.nelec, 0, ints.norb)?;
    let act = build_active_hamiltonian(ints, &part)?;
    let basis = DeterminantBasis::for_sector(ints.norb, ints.nelec, ints.ms2)?;
    let mut e = symmetric_eigh(&CiOperator::from_active(&act).dense(&basis)?).0;
    e.sort_by(f64::total_cmp);
    Ok(e)
}

fn unitary_invariance(ck: &mut Check) -> Res {
    let mut rng = rng(99);
    for name in ["h2_sto3g", "h4_sto3g", "h2_631g_stretched", "lih_sto3g", "h4_631g"] {
        let ints = load(name);
        let u = random_orthogonal(ints.norb, &mut rng);
        let before = full_ci_spectrum(&ints)?;
        let after = full_ci_spectrum(&rotate_integrals(&ints, &u)?)?;
        let dev = max_abs(before.iter().zip(&after).map(|(a, b)| a - b));
        ck.expect(dev < 1e-9, format!("{name}: {} determinants, max eigenvalue deviation {dev:.1e}", before.len()));
    }
    Ok(())
}
