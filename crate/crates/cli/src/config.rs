//! Flat key-value run configuration with command-line overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::ValueEnum;
use vqescf::adapt::{AdaptConfig, PoolKind};
use vqescf::fermion::{Mapping, SpinOrbitalOrdering};
use vqescf::scf::{ScfConfig, ScfMode, StateAverageSpec, TargetState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    AdaptVqe,
    AdaptVqeScf,
    Casci,
    CasscfOracle,
    PecScan,
    Fit,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.to_possible_value().expect("no skipped variants").get_name())
    }
}

/// Input problem: configuration error with its origin.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Where a setting came from, for error messages.
#[derive(Debug, Clone)]
enum Origin {
    File(PathBuf, Option<usize>),
    Flag,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::File(p, Some(l)) => write!(f, "{}:{l}", p.display()),
            Origin::File(p, None) => write!(f, "{}", p.display()),
            Origin::Flag => f.write_str("command line"),
        }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub fcidump: Option<PathBuf>,
    pub fcidumps: Vec<PathBuf>,
    pub r_values: Vec<f64>,
    pub ncore: Option<usize>,
    pub nact: Option<usize>,
    pub nelec_act: Option<usize>,
    pub mapping: Mapping,
    pub ordering: SpinOrbitalOrdering,
    pub pool: PoolKind,
    pub states: Option<StateAverageSpec>,
    pub adapt: AdaptConfig,
    pub scf: ScfConfig,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub warm_start: bool,
    /// Also run the exact engine and report the deviation.
    pub oracle: bool,
    /// Engine used per point of a scan.
    pub scan_mode: Mode,
    pub pec_input: Option<PathBuf>,
    pub reduced_mass: Option<f64>,
}

impl RunConfig {
    fn new(mode: Mode) -> Self {
        Self {
            mode,
            fcidump: None,
            fcidumps: Vec::new(),
            r_values: Vec::new(),
            ncore: None,
            nact: None,
            nelec_act: None,
            mapping: Mapping::JordanWigner,
            ordering: SpinOrbitalOrdering::Interleaved,
            pool: PoolKind::Fermionic,
            states: None,
            adapt: AdaptConfig::default(),
            scf: ScfConfig::default(),
            output_dir: PathBuf::from("."),
            seed: 0,
            warm_start: true,
            oracle: false,
            scan_mode: Mode::AdaptVqeScf,
            pec_input: None,
            reduced_mass: None,
        }
    }

    /// Reads `config` (if any), then applies `overrides` (`--key value` or
    /// `--key=value`) in order.
    pub fn load(mode: Mode, config: Option<&Path>, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut cfg = Self::new(mode);
        if let Some(path) = config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
            let ini = ini::Ini::load_from_str(&text)
                .map_err(|e| ConfigError(format!("{}:{}: {}", path.display(), e.line, e.msg)))?;
            let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
            for (_, props) in ini.iter() {
                for (key, value) in props.iter() {
                    let origin = Origin::File(path.to_path_buf(), line_of(&text, key));
                    cfg.set(key, value, &base, &origin)?;
                }
            }
        }
        let cwd = PathBuf::from(".");
        for (key, value) in parse_overrides(overrides)? {
            cfg.set(&key, &value, &cwd, &Origin::Flag)?;
        }
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str, base: &Path, origin: &Origin) -> Result<(), ConfigError> {
        let key = key.trim().to_ascii_lowercase().replace('-', "_");
        let value = value.trim();
        let bad = |e: &dyn fmt::Display| ConfigError(format!("{origin}: invalid value '{value}' for '{key}': {e}"));
        let path = |v: &str| {
            let p = PathBuf::from(v);
            if p.is_absolute() { p } else { base.join(p) }
        };
        fn num<T: FromStr>(v: &str) -> Result<T, String>
        where
            T::Err: fmt::Display,
        {
            v.parse::<T>().map_err(|e| e.to_string())
        }
        match key.as_str() {
            "fcidump" => self.fcidump = Some(path(value)),
            "fcidumps" => self.fcidumps = split_list(value).map(path).collect(),
            "r_values" => {
                self.r_values = split_list(value).map(num::<f64>).collect::<Result<_, _>>().map_err(|e| bad(&e))?
            }
            "ncore" => self.ncore = Some(num(value).map_err(|e| bad(&e))?),
            "nact" => self.nact = Some(num(value).map_err(|e| bad(&e))?),
            "nelec_act" => self.nelec_act = Some(num(value).map_err(|e| bad(&e))?),
            "mapping" => self.mapping = value.parse().map_err(|e| bad(&e))?,
            "ordering" => self.ordering = value.parse().map_err(|e| bad(&e))?,
            "pool" => self.pool = value.parse().map_err(|e| bad(&e))?,
            "n_gates" | "n_gates_per_macro" => self.adapt.n_gates_per_macro = num(value).map_err(|e| bad(&e))?,
            "states" => self.states = Some(parse_states(value).map_err(|e| bad(&e))?),
            "pool_grad_tol" => self.adapt.pool_grad_tol = num(value).map_err(|e| bad(&e))?,
            "adapt_energy_tol" => self.adapt.adapt_energy_tol = num(value).map_err(|e| bad(&e))?,
            "vqe_grad_tol" => self.adapt.vqe_grad_tol = num(value).map_err(|e| bad(&e))?,
            "vqe_max_iter" => self.adapt.vqe_max_iter = num(value).map_err(|e| bad(&e))?,
            "max_total_ops" => self.adapt.max_total_ops = num(value).map_err(|e| bad(&e))?,
            "spin_filter" => self.adapt.spin_filter = parse_bool(value).map_err(|e| bad(&e))?,
            "spin_penalty_weight" => self.adapt.spin_penalty_weight = num(value).map_err(|e| bad(&e))?,
            "sector_penalty_weight" => self.adapt.sector_penalty_weight = num(value).map_err(|e| bad(&e))?,
            "scf_mode" => self.scf.mode = value.parse::<ScfMode>().map_err(|e| bad(&e))?,
            "macro_tol_energy" => self.scf.macro_tol_energy = num(value).map_err(|e| bad(&e))?,
            "macro_tol_grad" => self.scf.macro_tol_grad = num(value).map_err(|e| bad(&e))?,
            "max_macro" => self.scf.max_macro = num(value).map_err(|e| bad(&e))?,
            "micro_max" => self.scf.micro_max = num(value).map_err(|e| bad(&e))?,
            "trust_radius" => self.scf.trust_radius = num(value).map_err(|e| bad(&e))?,
            "level_shift_floor" => self.scf.level_shift_floor = num(value).map_err(|e| bad(&e))?,
            "include_active_active" => self.scf.include_active_active = parse_bool(value).map_err(|e| bad(&e))?,
            "fd_step" => self.scf.fd_step = num(value).map_err(|e| bad(&e))?,
            "output_dir" => self.output_dir = path(value),
            "seed" => self.seed = num(value).map_err(|e| bad(&e))?,
            "warm_start" => self.warm_start = parse_bool(value).map_err(|e| bad(&e))?,
            "oracle" => self.oracle = parse_bool(value).map_err(|e| bad(&e))?,
            "scan_mode" => {
                self.scan_mode = Mode::from_str(value, true).map_err(|e| bad(&e))?;
                if !matches!(self.scan_mode, Mode::AdaptVqeScf | Mode::CasscfOracle) {
                    return Err(bad(&"scans run adapt-vqe-scf or casscf-oracle"));
                }
            }
            "pec_input" => self.pec_input = Some(path(value)),
            "reduced_mass" => self.reduced_mass = Some(num(value).map_err(|e| bad(&e))?),
            _ => return Err(ConfigError(format!("{origin}: unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Checks that the fields the mode needs are present and consistent.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let need = |ok: bool, what: &str| {
            if ok { Ok(()) } else { Err(ConfigError(format!("mode {} requires '{what}'", self.mode))) }
        };
        match self.mode {
            Mode::Fit => {
                need(self.pec_input.is_some(), "pec_input")?;
                need(self.reduced_mass.is_some(), "reduced_mass")?;
            }
            Mode::PecScan => {
                need(!self.fcidumps.is_empty(), "fcidumps")?;
                if self.r_values.len() != self.fcidumps.len() {
                    return Err(ConfigError(format!(
                        "{} r_values for {} fcidumps",
                        self.r_values.len(),
                        self.fcidumps.len()
                    )));
                }
                need(self.nact.is_some(), "nact")?;
            }
            _ => {
                need(self.fcidump.is_some(), "fcidump")?;
                need(self.nact.is_some(), "nact")?;
            }
        }
        self.adapt.validate().map_err(|e| ConfigError(e.to_string()))?;
        self.scf.validate().map_err(|e| ConfigError(e.to_string()))?;
        if let Some(s) = &self.states {
            s.validate().map_err(|e| ConfigError(e.to_string()))?;
        }
        Ok(())
    }
}

fn split_list(v: &str) -> impl Iterator<Item = &str> {
    v.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty())
}

fn parse_bool(v: &str) -> Result<bool, String> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err("expected a boolean".into()),
    }
}

/// `S:ms2:weight` entries separated by commas, e.g. `0:0:0.5, 1:2:0.5`.
fn parse_states(v: &str) -> Result<StateAverageSpec, String> {
    let mut states = Vec::new();
    for item in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let parts: Vec<&str> = item.split(':').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(format!("state '{item}' is not S:ms2:weight"));
        }
        states.push(TargetState {
            spin: parts[0].parse().map_err(|e| format!("{e}"))?,
            ms2: parts[1].parse().map_err(|e| format!("{e}"))?,
            weight: parts[2].parse().map_err(|e| format!("{e}"))?,
        });
    }
    Ok(StateAverageSpec { states })
}

fn parse_overrides(args: &[String]) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let Some(flag) = arg.strip_prefix("--") else {
            return Err(ConfigError(format!("command line: expected --key value, found '{arg}'")));
        };
        match flag.split_once('=') {
            Some((k, v)) => out.push((k.to_string(), v.to_string())),
            None => {
                let v = it.next().ok_or_else(|| ConfigError(format!("command line: --{flag} needs a value")))?;
                out.push((flag.to_string(), v.clone()));
            }
        }
    }
    Ok(out)
}

/// First line defining `key`, 1-based.
fn line_of(text: &str, key: &str) -> Option<usize> {
    text.lines()
        .position(|l| l.split_once('=').is_some_and(|(k, _)| k.trim() == key))
        .map(|i| i + 1)
}
