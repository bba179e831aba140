//! Mode dispatch.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use vqescf::integrals::{build_active_hamiltonian, read_fcidump, IntegralSet, OrbitalPartition};
use vqescf::pec::pec_scan;
use vqescf::scf::{
    run_adapt_vqe_scf, run_casscf, AdaptEngine, AdaptSetup, ConfigurationEngine, ExactEngine, ScfResult,
    StateAverageSpec, StateSolution,
};
use vqescf::spectro::fit_spectroscopic;
use vqescf::Error;

use crate::config::{Mode, RunConfig};
use crate::output::{cell, join, write_csv, write_json, write_jsonl, Table, CNOT_CONVENTION};

#[derive(Debug)]
pub enum RunError {
    /// Bad configuration or input files (exit 1).
    Input(String),
    /// The computation itself failed (exit 2).
    Failed(String),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Input(m) | RunError::Failed(m) => f.write_str(m),
        }
    }
}

fn classify(e: Error) -> RunError {
    match e {
        Error::Parse { .. }
        | Error::InvalidInput(_)
        | Error::Dimension(_)
        | Error::NonFinite(_)
        | Error::LengthMismatch(..)
        | Error::Capacity(_) => RunError::Input(e.to_string()),
        _ => RunError::Failed(e.to_string()),
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> RunError + '_ {
    move |e| RunError::Failed(format!("{}: {e}", path.display()))
}

struct Problem {
    ints: IntegralSet,
    part: OrbitalPartition,
    spec: StateAverageSpec,
}

fn load_problem(cfg: &RunConfig, path: &Path) -> Result<Problem, RunError> {
    let ints = read_fcidump(path).map_err(|e| {
        let msg = e.to_string();
        let shown = path.display().to_string();
        RunError::Input(if msg.contains(&shown) { msg } else { format!("{shown}: {msg}") })
    })?;
    let nact = cfg.nact.expect("validated");
    let ncore = match (cfg.ncore, cfg.nelec_act) {
        (Some(c), _) => c,
        (None, Some(n)) if n <= ints.nelec && (ints.nelec - n) % 2 == 0 => (ints.nelec - n) / 2,
        (None, Some(n)) => {
            return Err(RunError::Input(format!("nelec_act = {n} incompatible with {} electrons", ints.nelec)))
        }
        (None, None) => 0,
    };
    let part = OrbitalPartition::new(ints.norb, ints.nelec, ncore, nact)
        .map_err(|e| RunError::Input(format!("{}: {e}", path.display())))?;
    if let Some(n) = cfg.nelec_act {
        if n != part.nelec_act {
            return Err(RunError::Input(format!(
                "nelec_act = {n} but ncore = {ncore} leaves {} active electrons",
                part.nelec_act
            )));
        }
    }
    let spec = cfg.states.clone().unwrap_or_else(|| StateAverageSpec::single(ints.ms2));
    Ok(Problem { ints, part, spec })
}

fn setup(cfg: &RunConfig) -> AdaptSetup {
    AdaptSetup { mapping: cfg.mapping, ordering: cfg.ordering, pool: cfg.pool }
}

#[derive(Serialize)]
struct Summary<'a> {
    mode: Mode,
    converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    energy_sa: Option<f64>,
    energies: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    s2: Vec<f64>,
    cnots: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n_macro: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle_energy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error_vs_oracle: Option<f64>,
    #[serde(skip_serializing_if = "Value::is_null")]
    extra: Value,
    cnot_convention: &'static str,
    config: &'a RunConfig,
}

impl<'a> Summary<'a> {
    fn new(cfg: &'a RunConfig, converged: bool) -> Self {
        Self {
            mode: cfg.mode,
            converged,
            energy_sa: None,
            energies: Vec::new(),
            s2: Vec::new(),
            cnots: Vec::new(),
            n_macro: None,
            oracle_energy: None,
            error_vs_oracle: None,
            extra: Value::Null,
            cnot_convention: CNOT_CONVENTION,
            config: cfg,
        }
    }

    fn from_scf(cfg: &'a RunConfig, r: &ScfResult) -> Self {
        let mut s = Self::new(cfg, r.converged);
        s.energy_sa = Some(r.energy_sa);
        s.energies = r.energies.clone();
        s.s2 = r.s2.clone();
        s.cnots = r.cnots.clone();
        s.n_macro = Some(r.n_macro);
        s.extra = json!({ "u_total": r.u_total, "circuits": r.circuits });
        s
    }

    fn with_oracle(mut self, reference: f64) -> Self {
        let e = self.energy_sa.unwrap_or(f64::NAN);
        self.oracle_energy = Some(reference);
        self.error_vs_oracle = Some(e - reference);
        self
    }
}

fn scf_table(n_states: usize, results: &[(Option<f64>, &ScfResult)]) -> Table {
    let mut header = Vec::new();
    if results.iter().any(|(r, _)| r.is_some()) {
        header.push("r".to_string());
    }
    let with_r = !header.is_empty();
    header.extend(["macro_iter", "energy_sa"].map(String::from));
    header.extend((0..n_states).map(|k| format!("energy_{k}")));
    header.push("grad_norm".into());
    header.extend((0..n_states).map(|k| format!("cnots_{k}")));
    header.extend((0..n_states).map(|k| format!("pool_grad_norm_{k}")));
    header.extend(["trust_radius", "step_norm", "retries", "fallback", "ops_added"].map(String::from));
    let mut t = Table::new(header);
    for (r, res) in results {
        for rec in &res.records {
            let mut row = Vec::new();
            if with_r {
                row.push(r.map(cell).unwrap_or_default());
            }
            row.push(cell(rec.macro_iter));
            row.push(cell(rec.energy_sa));
            row.extend(rec.energies.iter().map(cell));
            row.push(cell(rec.grad_norm));
            row.extend(rec.cnots.iter().map(cell));
            row.extend(rec.pool_grad_norm.iter().map(cell));
            row.extend([cell(rec.trust_radius), cell(rec.step_norm), cell(rec.retries), cell(rec.fallback)]);
            row.push(rec.ops_added.iter().map(|v| join(v)).collect::<Vec<_>>().join("|"));
            t.push(row);
        }
    }
    t
}

struct Artifacts {
    dir: PathBuf,
}

impl Artifacts {
    fn new(dir: &Path) -> Result<Self, RunError> {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn trace<T: Serialize>(&self, table: &Table, records: &[T]) -> Result<(), RunError> {
        let p = self.path("trace.csv");
        write_csv(&p, table).map_err(|e| RunError::Failed(format!("{}: {e}", p.display())))?;
        let p = self.path("trace.jsonl");
        write_jsonl(&p, records).map_err(io_err(&p))
    }

    fn summary(&self, s: &Summary) -> Result<(), RunError> {
        let p = self.path("summary.json");
        write_json(&p, s).map_err(io_err(&p))
    }
}

/// Runs the configured mode; `Ok(true)` when it converged.
pub fn run(cfg: &RunConfig) -> Result<bool, RunError> {
    cfg.validate().map_err(|e| RunError::Input(e.0))?;
    let out = Artifacts::new(&cfg.output_dir)?;
    match cfg.mode {
        Mode::Casci => casci(cfg, &out),
        Mode::CasscfOracle => {
            let p = load_problem(cfg, cfg.fcidump.as_deref().expect("validated"))?;
            let r = run_casscf(&p.ints, &p.part, &p.spec, &cfg.scf, None).map_err(classify)?;
            out.trace(&scf_table(p.spec.len(), &[(None, &r)]), &r.records)?;
            out.summary(&Summary::from_scf(cfg, &r))?;
            Ok(r.converged)
        }
        Mode::AdaptVqeScf => {
            let p = load_problem(cfg, cfg.fcidump.as_deref().expect("validated"))?;
            let r = run_adapt_vqe_scf(&p.ints, &p.part, setup(cfg), &cfg.adapt, &cfg.scf, &p.spec, None)
                .map_err(classify)?;
            out.trace(&scf_table(p.spec.len(), &[(None, &r)]), &r.records)?;
            let mut summary = Summary::from_scf(cfg, &r);
            if cfg.oracle {
                let o = run_casscf(&p.ints, &p.part, &p.spec, &cfg.scf, None).map_err(classify)?;
                summary = summary.with_oracle(o.energy_sa);
            }
            out.summary(&summary)?;
            Ok(r.converged)
        }
        Mode::AdaptVqe => adapt_vqe(cfg, &out),
        Mode::PecScan => scan(cfg, &out),
        Mode::Fit => fit(cfg, &out),
    }
}

fn weighted(spec: &StateAverageSpec, e: &[f64]) -> f64 {
    spec.states.iter().zip(e).map(|(s, e)| s.weight * e).sum()
}

fn casci(cfg: &RunConfig, out: &Artifacts) -> Result<bool, RunError> {
    let p = load_problem(cfg, cfg.fcidump.as_deref().expect("validated"))?;
    let act = build_active_hamiltonian(&p.ints, &p.part).map_err(classify)?;
    let states = ExactEngine::new(&p.part, &p.spec).and_then(|mut e| e.grow(&act)).map_err(classify)?;
    let mut t = Table::new(["state", "spin", "ms2", "weight", "energy", "s2"]);
    let mut records = Vec::new();
    for (k, (s, t_state)) in states.iter().zip(&p.spec.states).enumerate() {
        t.push(vec![cell(k), cell(t_state.spin), cell(t_state.ms2), cell(t_state.weight), cell(s.energy), cell(s.s2)]);
        records.push(json!({ "state": k, "spin": t_state.spin, "ms2": t_state.ms2, "energy": s.energy, "s2": s.s2 }));
    }
    out.trace(&t, &records)?;
    let mut summary = Summary::new(cfg, true);
    summary.energies = states.iter().map(|s| s.energy).collect();
    summary.energy_sa = Some(weighted(&p.spec, &summary.energies));
    summary.s2 = states.iter().map(|s| s.s2).collect();
    summary.cnots = vec![0; states.len()];
    out.summary(&summary)?;
    Ok(true)
}

fn adapt_vqe(cfg: &RunConfig, out: &Artifacts) -> Result<bool, RunError> {
    let p = load_problem(cfg, cfg.fcidump.as_deref().expect("validated"))?;
    let act = build_active_hamiltonian(&p.ints, &p.part).map_err(classify)?;
    let mut engine = AdaptEngine::new(&p.part, &p.spec, cfg.mapping, cfg.ordering, cfg.pool, &cfg.adapt)
        .map_err(classify)?;
    let history = engine.run_fixed_orbitals(&act).map_err(classify)?;
    let converged = engine.converged();
    let mut t = Table::new(["iteration", "state", "op_label", "energy", "cnots", "pool_grad_norm", "s2"]);
    let mut records = Vec::new();
    for (it, states) in history.iter().enumerate() {
        for (k, s) in states.iter().enumerate() {
            let label = join(&s.added);
            t.push(vec![cell(it + 1), cell(k), label.clone(), cell(s.energy), cell(s.cnots), cell(s.pool_grad_norm), cell(s.s2)]);
            records.push(json!({
                "iteration": it + 1, "state": k, "op_label": label, "energy": s.energy,
                "cnots": s.cnots, "pool_grad_norm": s.pool_grad_norm, "s2": s.s2,
            }));
        }
    }
    out.trace(&t, &records)?;
    let last: &[StateSolution] = history.last().map(Vec::as_slice).unwrap_or_default();
    let mut summary = Summary::new(cfg, converged);
    summary.energies = last.iter().map(|s| s.energy).collect();
    summary.energy_sa = Some(weighted(&p.spec, &summary.energies));
    summary.s2 = last.iter().map(|s| s.s2).collect();
    summary.cnots = last.iter().map(|s| s.cnots).collect();
    summary.extra = json!({ "circuits": engine.circuits() });
    if cfg.oracle {
        let exact = ExactEngine::new(&p.part, &p.spec).and_then(|mut e| e.grow(&act)).map_err(classify)?;
        let e: Vec<f64> = exact.iter().map(|s| s.energy).collect();
        summary = summary.with_oracle(weighted(&p.spec, &e));
    }
    out.summary(&summary)?;
    Ok(converged)
}

fn scan(cfg: &RunConfig, out: &Artifacts) -> Result<bool, RunError> {
    let mut geometries = Vec::new();
    let mut spec = None;
    let mut part = None;
    for (path, r) in cfg.fcidumps.iter().zip(&cfg.r_values) {
        let p = load_problem(cfg, path)?;
        if part.is_some_and(|q: OrbitalPartition| q != p.part) {
            return Err(RunError::Input(format!("{}: partition differs from the first scan point", path.display())));
        }
        part = Some(p.part);
        spec.get_or_insert(p.spec);
        geometries.push((*r, p.ints));
    }
    let (part, spec) = (part.expect("non-empty"), spec.expect("non-empty"));
    let mut results: Vec<ScfResult> = Vec::new();
    let points = pec_scan(&geometries, cfg.warm_start, |ints, guess| {
        let r = match cfg.scan_mode {
            Mode::CasscfOracle => run_casscf(ints, &part, &spec, &cfg.scf, guess),
            _ => run_adapt_vqe_scf(ints, &part, setup(cfg), &cfg.adapt, &cfg.scf, &spec, guess),
        }?;
        results.push(r.clone());
        Ok(r)
    })
    .map_err(classify)?;
    let n = spec.len();
    let mut pec = Table::new(
        std::iter::once("r".to_string())
            .chain((0..n).map(|k| format!("e_{k}")))
            .chain(["energy_sa".to_string()])
            .chain((0..n).map(|k| format!("cnots_{k}")))
            .chain(["converged".to_string(), "n_macro".to_string()]),
    );
    for pt in &points {
        let mut row = vec![cell(pt.r)];
        row.extend(pt.energies.iter().map(cell));
        row.push(cell(pt.energy_sa));
        row.extend(pt.cnots.iter().map(cell));
        row.extend([cell(pt.converged), cell(pt.n_macro)]);
        pec.push(row);
    }
    let p = out.path("pec.csv");
    write_csv(&p, &pec).map_err(|e| RunError::Failed(format!("{}: {e}", p.display())))?;
    let tagged: Vec<(Option<f64>, &ScfResult)> = points.iter().map(|p| Some(p.r)).zip(&results).collect();
    let records: Vec<Value> = points
        .iter()
        .zip(&results)
        .flat_map(|(pt, r)| r.records.iter().map(move |rec| json!({ "r": pt.r, "record": rec })))
        .collect();
    out.trace(&scf_table(n, &tagged), &records)?;
    let converged = points.iter().all(|p| p.converged);
    let mut summary = Summary::new(cfg, converged);
    summary.energies = points.iter().map(|p| p.energy_sa).collect();
    summary.cnots = points.iter().map(|p| p.cnots.iter().sum()).collect();
    summary.extra = json!({ "points": points });
    out.summary(&summary)?;
    Ok(converged)
}

/// Reads a `pec.csv`-style table: column `r` plus one `e_<k>` column per state.
fn read_pec(path: &Path) -> Result<(Vec<f64>, Vec<Vec<f64>>), RunError> {
    let bad = |m: String| RunError::Input(format!("{}: {m}", path.display()));
    let mut rd = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let header = rd.headers().map_err(|e| bad(e.to_string()))?.clone();
    let r_col = header.iter().position(|h| h == "r").ok_or_else(|| bad("no 'r' column".into()))?;
    let e_cols: Vec<usize> = (0..)
        .map_while(|k| header.iter().position(|h| h == format!("e_{k}")))
        .collect();
    if e_cols.is_empty() {
        return Err(bad("no 'e_0' column".into()));
    }
    let mut r = Vec::new();
    let mut e = vec![Vec::new(); e_cols.len()];
    for (i, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|err| bad(err.to_string()))?;
        let num = |c: usize| {
            rec.get(c)
                .unwrap_or("")
                .trim()
                .parse::<f64>()
                .map_err(|err| bad(format!("line {}: {err}", i + 2)))
        };
        r.push(num(r_col)?);
        for (k, &c) in e_cols.iter().enumerate() {
            e[k].push(num(c)?);
        }
    }
    Ok((r, e))
}

fn fit(cfg: &RunConfig, out: &Artifacts) -> Result<bool, RunError> {
    let path = cfg.pec_input.as_deref().expect("validated");
    let (r, curves) = read_pec(path)?;
    let c = fit_spectroscopic(&r, &curves, cfg.reduced_mass.expect("validated")).map_err(classify)?;
    let n = curves.len();
    let mut t = Table::new(
        std::iter::once("r".to_string())
            .chain((0..n).map(|k| format!("e_{k}")))
            .chain((0..n).map(|k| format!("fit_{k}"))),
    );
    let mut records = Vec::new();
    for (i, ri) in r.iter().enumerate() {
        let e: Vec<f64> = curves.iter().map(|cv| cv[i]).collect();
        let f: Vec<f64> = c.states.iter().map(|s| s.fit.value(*ri)).collect();
        let mut row = vec![cell(ri)];
        row.extend(e.iter().map(cell));
        row.extend(f.iter().map(cell));
        t.push(row);
        records.push(json!({ "r": ri, "energies": e, "fitted": f }));
    }
    out.trace(&t, &records)?;
    let mut summary = Summary::new(cfg, true);
    summary.energies = c.states.iter().map(|s| s.e_min).collect();
    summary.extra = json!({
        "r_e": c.states.iter().map(|s| s.r_e).collect::<Vec<_>>(),
        "omega_e": c.states.iter().map(|s| s.omega_e).collect::<Vec<_>>(),
        "t_e": c.t_e,
        "rms_residual": c.states.iter().map(|s| s.fit.rms_residual).collect::<Vec<_>>(),
        "constants": c,
    });
    out.summary(&summary)?;
    Ok(true)
}
