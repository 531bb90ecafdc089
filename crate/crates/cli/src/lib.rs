//! Experiment runner for the `fracstep` solver: convergence tables, weight
//! audits, the stability recurrence lab and truncation-error fits.

pub mod config;
pub mod error;
pub mod format;
pub mod run;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;

use config::{load_config_file, ExperimentConfig, RawConfig};
pub use error::CliError;

/// Environment variable overriding `--out`.
pub const OUT_ENV: &str = "FRACSTEP_OUT";

#[derive(Debug, Parser)]
#[command(name = "fracstep", version, about = "Alikhanov/graded-mesh subdiffusion experiments")]
pub struct Cli {
    /// Flat `key = value` config file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Problem: 1 (manufactured, exact solution) or 2 (two-mesh).
    #[arg(long)]
    pub example: Option<String>,
    /// Fractional orders, comma separated.
    #[arg(long)]
    pub alpha: Option<String>,
    /// Grading exponents, e.g. `1,2,2/alpha`.
    #[arg(long)]
    pub r: Option<String>,
    /// Step counts: `64,128` or the doubling range `64..1024`.
    #[arg(long = "N")]
    pub n: Option<String>,
    /// Spatial cells per direction: `25` or `25x30`.
    #[arg(long = "M")]
    pub m: Option<String>,
    /// Final time.
    #[arg(long = "T")]
    pub t: Option<String>,
    /// Diffusion coefficient.
    #[arg(long)]
    pub nu: Option<String>,
    /// table | audit | recurrence | truncation
    #[arg(long)]
    pub mode: Option<String>,
    /// Output directory (`FRACSTEP_OUT` takes precedence).
    #[arg(long)]
    pub out: Option<String>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    pub jobs: Option<String>,
    /// Recurrence lab: exponents γ (default α−1, −0.5, 0.5).
    #[arg(long)]
    pub gamma: Option<String>,
    /// Recurrence lab: λ1 values.
    #[arg(long)]
    pub lambda1: Option<String>,
    /// Recurrence lab: λ2 values.
    #[arg(long)]
    pub lambda2: Option<String>,
    /// Audit mode: also write every weight row.
    #[arg(long)]
    pub dump_weights: bool,
}

impl Cli {
    /// Config file entries, overridden by flags, overridden by the environment.
    pub fn resolve(&self) -> Result<ExperimentConfig, CliError> {
        let mut raw = match &self.config {
            Some(path) => load_config_file(path)?,
            None => RawConfig::new(),
        };
        let flags = [
            ("example", &self.example),
            ("alpha", &self.alpha),
            ("r", &self.r),
            ("N", &self.n),
            ("M", &self.m),
            ("T", &self.t),
            ("nu", &self.nu),
            ("mode", &self.mode),
            ("out", &self.out),
            ("jobs", &self.jobs),
            ("gamma", &self.gamma),
            ("lambda1", &self.lambda1),
            ("lambda2", &self.lambda2),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                raw.insert(key.to_string(), v.clone());
            }
        }
        if self.dump_weights {
            raw.insert("dump_weights".into(), "true".into());
        }
        if let Some(out) = std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()) {
            raw.insert("out".into(), out.to_string_lossy().into_owned());
        }
        ExperimentConfig::from_raw(&raw)
    }
}

/// Parse arguments, run, and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = cli.resolve().and_then(|config| {
        let outcome = run::run(&config)?;
        print!("{}", outcome.summary);
        for f in &outcome.files {
            log::info!("wrote {}", f.display());
        }
        match outcome.failures {
            0 => Ok(()),
            n => Err(CliError::Numerical(n)),
        }
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("fracstep: {e}");
            e.exit_code()
        }
    }
}
