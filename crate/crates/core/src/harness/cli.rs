use super::config::ExperimentConfig;
use super::{report, run_convergence, run_mach_sweep, run_single};
use crate::error::{Error, Result};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

/// Vortex-layer numerical laboratory.
#[derive(Debug, Parser)]
#[command(name = "vortexlab", version)]
pub struct Cli {
    #[command(subcommand)]
    pub verb: Verb,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Experiment config (TOML); defaults are used when absent.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory; defaults to `<output_dir>/<name>` from the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for sweeps and convergence studies.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Run fan-outs sequentially in a fixed order.
    #[arg(long)]
    pub deterministic: bool,
}

#[derive(Debug, Subcommand)]
pub enum Verb {
    /// Single evolution with diagnostics.
    Run(Common),
    /// Mach-number sweep against an incompressible reference.
    SweepMach {
        #[command(flatten)]
        common: Common,
        /// Comma-separated, strictly decreasing Mach numbers.
        #[arg(long, value_delimiter = ',')]
        eps_list: Option<Vec<f64>>,
    },
    /// Observed orders under normal refinement.
    Converge {
        #[command(flatten)]
        common: Common,
        /// Comma-separated, strictly increasing normal point counts.
        #[arg(long, value_delimiter = ',')]
        refine_list: Option<Vec<usize>>,
    },
    /// Re-derive fits and monitors from an existing run directory.
    Report {
        /// Run directory containing `series.csv`.
        #[arg(long)]
        out: PathBuf,
        /// Fit window `start,end`.
        #[arg(long, value_delimiter = ',')]
        window: Option<Vec<f64>>,
    },
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

fn load(common: &Common) -> Result<ExperimentConfig> {
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(Error::Config("--threads must be positive".into()));
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match &common.config {
        Some(p) => ExperimentConfig::load(p),
        None => Ok(ExperimentConfig::default()),
    }
}

fn out_dir(common: &Common, cfg: &ExperimentConfig) -> PathBuf {
    common.out.clone().unwrap_or_else(|| cfg.output_dir.join(&cfg.name))
}

fn execute(cli: Cli) -> Result<String> {
    match cli.verb {
        Verb::Run(common) => {
            let cfg = load(&common)?;
            let dir = out_dir(&common, &cfg);
            let rec = run_single(&cfg, &dir)?;
            Ok(serde_json::to_string_pretty(&rec.fits)?)
        }
        Verb::SweepMach { common, eps_list } => {
            let mut cfg = load(&common)?;
            if let Some(e) = eps_list {
                cfg.sweep.eps_list = e;
            }
            let dir = out_dir(&common, &cfg);
            let rep = run_mach_sweep(&cfg, Some(&dir), common.deterministic)?;
            Ok(serde_json::to_string_pretty(&rep.rows)?)
        }
        Verb::Converge { common, refine_list } => {
            let mut cfg = load(&common)?;
            if let Some(r) = refine_list {
                cfg.sweep.refine_list = r;
            }
            let dir = out_dir(&common, &cfg);
            let table = run_convergence(&cfg, Some(&dir), common.deterministic)?;
            Ok(serde_json::to_string_pretty(&table.rows)?)
        }
        Verb::Report { out, window } => {
            let w = match window.as_deref() {
                None => None,
                Some(&[a, b]) => Some([a, b]),
                Some(_) => return Err(Error::Config("--window takes exactly two values".into())),
            };
            let rep = report(&out, w)?;
            Ok(serde_json::to_string_pretty(&rep.fits)?)
        }
    }
}

/// Exit code for an error: 2 for bad input, 3 for everything else.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_config() {
        EXIT_CONFIG
    } else {
        EXIT_NUMERICAL
    }
}

/// Parses `args`, runs the verb, prints the summary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(summary) => {
            println!("{summary}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::RunFailed { checkpoint, .. } = &e {
                eprintln!("checkpoint: {}", checkpoint.display());
            }
            exit_code(&e)
        }
    }
}
