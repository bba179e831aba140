use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

mod config;
mod output;
mod run;

use config::{Mode, RunConfig};
use run::RunError;

/// ADAPT-VQE with coupled orbital optimization, plus exact CASCI/CASSCF.
///
/// Any configuration key can be overridden after the mode as `--key value`
/// or `--key=value`. The thread count is taken from `VQESCF_THREADS`.
#[derive(Parser, Debug)]
#[command(name = "vqescf", version)]
struct Cli {
    mode: Mode,

    /// INI-style configuration file; section headers are ignored.
    #[arg(long)]
    config: Option<PathBuf>,

    /// `--key value` overrides applied after the configuration file.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
    overrides: Vec<String>,
}

/// Pulls a `--config` that clap left among the trailing overrides.
fn split_config(cli: &mut Cli) -> Result<(), String> {
    let mut i = 0;
    while i < cli.overrides.len() {
        let a = &cli.overrides[i];
        if let Some(p) = a.strip_prefix("--config=") {
            cli.config = Some(PathBuf::from(p));
            cli.overrides.remove(i);
        } else if a == "--config" {
            let p = cli.overrides.get(i + 1).ok_or("--config needs a path")?.clone();
            cli.config = Some(PathBuf::from(p));
            cli.overrides.drain(i..i + 2);
        } else {
            i += 1;
        }
    }
    Ok(())
}

fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("VQESCF_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|_| format!("VQESCF_THREADS: not a thread count: {v:?}"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let mut cli = Cli::parse();
    let prepared = split_config(&mut cli)
        .and_then(|_| init_threads())
        .and_then(|_| RunConfig::load(cli.mode, cli.config.as_deref(), &cli.overrides).map_err(|e| e.0));
    let cfg = match prepared {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match run::run(&cfg) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("warning: {} did not converge; see {}", cfg.mode, cfg.output_dir.display());
            ExitCode::from(2)
        }
        Err(RunError::Input(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(RunError::Failed(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
