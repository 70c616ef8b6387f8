use super::config::{ExperimentConfig, LambdaChoice, CONFIG_VERSION};
use super::families::initial_perturbation;
use crate::ansatz::{build_ansatz, compute_alphas, Alphas, AnsatzSpec, InitialPerturbation};
use crate::diagnostics::{
    apriori_monitor, fit_decay_with, read_reports_csv, write_reports_csv, BoundConstant, DecayFit, EnergyReport,
    FitOptions, Sampler,
};
use crate::domain::PhysParams;
use crate::error::{Error, Result};
use crate::solver::{write_checkpoint, CompressibleSolver, State};
use serde::{Deserialize, Serialize};
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Everything derived from a config before time stepping.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub params: PhysParams,
    pub perturbation: InitialPerturbation,
    pub alphas: Alphas,
    pub spec: AnsatzSpec,
    pub state: State,
    pub chi: f64,
    pub m0: f64,
}

/// Initial data, `Lambda`, wave amplitudes and the ansatz for a config.
pub fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    cfg.validate()?;
    let mut params = cfg.params.clone();
    let perturbation = initial_perturbation(&cfg.initial, &cfg.grid, &params, cfg.seed)?;
    let m0 = perturbation.m0()?;
    let chi = perturbation.chi()?;
    if let LambdaChoice::Scaled { c1 } = cfg.run.lambda {
        params.big_lambda = PhysParams::lambda_rule(c1, params.u_bar_norm(), m0);
    }
    let alphas = compute_alphas(&perturbation, &params);
    let spec = build_ansatz(alphas.clone(), &params)?;
    let state = State::from_primitive(perturbation.rho0(&params), &perturbation.u0(&params), 0.0)?;
    Ok(Prepared { params, perturbation, alphas, spec, state, chi, m0 })
}

/// A power-law fit of one series column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedFit {
    pub quantity: String,
    pub fit: Option<DecayFit>,
    pub error: Option<String>,
}

/// Columns fitted after every run, with their windows relative to the configured one.
pub const FITTED_COLUMNS: [&str; 4] = ["linf_bv", "md_h1", "dzp_linf", "pert_l2"];

pub fn column(r: &EnergyReport, name: &str) -> Option<f64> {
    Some(match name {
        "linf_bv" => r.linf_bv,
        "md_h1" => r.md_h1,
        "dzp_linf" => r.dzp_linf,
        "pert_l2" => r.pert_l2,
        "e_star" => r.e_star,
        "e_full" => r.e_full,
        "q_l2" => r.q_l2,
        "div_l2" => r.div_l2,
        "mass_defect" => r.mass_defect,
        _ => return None,
    })
}

pub fn series_of(reports: &[EnergyReport], name: &str) -> Vec<(f64, f64)> {
    reports.iter().filter_map(|r| column(r, name).map(|v| (r.t, v))).collect()
}

/// Noise-trimmed fits of the standard columns.
pub fn fit_columns(reports: &[EnergyReport], window: [f64; 2]) -> Vec<NamedFit> {
    FITTED_COLUMNS
        .iter()
        .map(|&q| {
            let s = series_of(reports, q);
            match fit_decay_with(&s, (window[0], window[1]), FitOptions { shift: 1.0, floor: 1e-10 }) {
                Ok(f) => NamedFit { quantity: q.into(), fit: Some(f), error: None },
                Err(e) => NamedFit { quantity: q.into(), fit: None, error: Some(e.to_string()) },
            }
        })
        .collect()
}

/// Summary written next to the series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub version: u32,
    pub name: String,
    pub config_hash: String,
    pub seed: u64,
    pub family: String,
    pub lambda: f64,
    pub alphas: Alphas,
    pub chi: f64,
    pub m0: f64,
    pub series: PathBuf,
    pub checkpoints: Vec<PathBuf>,
    pub fits: Vec<NamedFit>,
    pub monitors: Vec<BoundConstant>,
    /// Every catalogue constant stayed bounded.
    pub monitors_bounded: bool,
    /// Largest anti-derivative endpoint over the run.
    pub max_mass_defect: f64,
    pub samples: usize,
    pub final_t: f64,
    pub wall_clock_s: f64,
    pub threads: usize,
}

impl RunRecord {
    pub fn fit(&self, quantity: &str) -> Option<&DecayFit> {
        self.fits.iter().find(|f| f.quantity == quantity).and_then(|f| f.fit.as_ref())
    }
}

pub const SERIES_FILE: &str = "series.csv";
pub const RECORD_FILE: &str = "record.json";
pub const CONFIG_FILE: &str = "config.toml";

fn save_checkpoint(dir: &Path, name: &str, s: &State, p: &PhysParams) -> Result<PathBuf> {
    let path = dir.join(name);
    let mut w = BufWriter::new(File::create(&path)?);
    write_checkpoint(&mut w, s, p)?;
    Ok(path)
}

/// Sample times `0, dt, 2 dt, ...` up to `t_end` inclusive.
pub fn sample_times(t_end: f64, every: f64) -> Vec<f64> {
    let n = (t_end / every + 1e-9).floor() as usize;
    let mut ts: Vec<f64> = (0..=n).map(|k| k as f64 * every).collect();
    if t_end - ts[n] > 1e-9 * t_end {
        ts.push(t_end);
    }
    ts
}

/// Evolves the compressible system, sampling diagnostics; returns the samples.
pub fn evolve(cfg: &ExperimentConfig, prep: &Prepared, out: Option<&Path>) -> Result<(Vec<EnergyReport>, Vec<PathBuf>)> {
    let mut solver = CompressibleSolver::new(cfg.grid, prep.params.clone(), cfg.solver.clone())?;
    let mut sampler = Sampler::new(prep.spec.clone());
    let mut state = prep.state.clone();
    let mut reports = Vec::new();
    let mut checkpoints = Vec::new();
    for (k, &t) in sample_times(cfg.run.t_end, cfg.run.sample_every).iter().enumerate() {
        match solver.advance_to(&state, t) {
            Ok(next) => state = next,
            Err(e) => {
                let dir = out.map(Path::to_path_buf).unwrap_or_else(std::env::temp_dir);
                let checkpoint = save_checkpoint(&dir, "checkpoint_failed.vlck", &state, &prep.params)?;
                return Err(Error::RunFailed { t: state.t, checkpoint, source: Box::new(e) });
            }
        }
        reports.push(sampler.sample(&state)?);
        if let Some(dir) = out {
            let every = cfg.run.checkpoint_every;
            if every > 0 && k % every == 0 {
                checkpoints.push(save_checkpoint(dir, &format!("checkpoint_{k:05}.vlck"), &state, &prep.params)?);
            }
        }
    }
    Ok((reports, checkpoints))
}

/// Full single run: initial data, ansatz, evolution, diagnostics, persistence under `out`.
pub fn run_single(cfg: &ExperimentConfig, out: &Path) -> Result<RunRecord> {
    let start = Instant::now();
    let prep = prepare(cfg)?;
    fs::create_dir_all(out)?;
    fs::write(out.join(CONFIG_FILE), cfg.to_toml())?;
    let (reports, checkpoints) = evolve(cfg, &prep, Some(out))?;
    write_reports_csv(BufWriter::new(File::create(out.join(SERIES_FILE))?), &reports)?;
    let monitors = apriori_monitor(&reports);
    let record = RunRecord {
        version: CONFIG_VERSION,
        name: cfg.name.clone(),
        config_hash: cfg.hash(),
        seed: cfg.seed,
        family: cfg.initial.family.name().into(),
        lambda: prep.params.big_lambda,
        alphas: prep.alphas.clone(),
        chi: prep.chi,
        m0: prep.m0,
        series: PathBuf::from(SERIES_FILE),
        checkpoints: checkpoints
            .iter()
            .map(|p| p.file_name().map(PathBuf::from).unwrap_or_else(|| p.clone()))
            .collect(),
        fits: fit_columns(&reports, cfg.run.fit_window),
        monitors_bounded: monitors.iter().all(|m| m.bounded),
        monitors,
        max_mass_defect: reports.iter().map(|r| r.mass_defect).fold(0.0, f64::max),
        samples: reports.len(),
        final_t: reports.last().map(|r| r.t).unwrap_or(0.0),
        wall_clock_s: start.elapsed().as_secs_f64(),
        threads: rayon::current_num_threads(),
    };
    serde_json::to_writer_pretty(BufWriter::new(File::create(out.join(RECORD_FILE))?), &record)?;
    Ok(record)
}

/// Fits and monitors re-derived from a stored series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub window: [f64; 2],
    pub samples: usize,
    pub fits: Vec<NamedFit>,
    pub monitors: Vec<BoundConstant>,
}

/// Re-derives fits from `dir/series.csv` without re-running; window from the stored config
/// when present.
pub fn report(dir: &Path, window: Option<[f64; 2]>) -> Result<Report> {
    let reports = read_reports_csv(File::open(dir.join(SERIES_FILE))?)?;
    let window = match window {
        Some(w) => w,
        None => match fs::read_to_string(dir.join(CONFIG_FILE)) {
            Ok(s) => ExperimentConfig::from_toml(&s)?.run.fit_window,
            Err(_) => super::config::RunConfig::default().fit_window,
        },
    };
    let rep = Report {
        window,
        samples: reports.len(),
        fits: fit_columns(&reports, window),
        monitors: apriori_monitor(&reports),
    };
    serde_json::to_writer_pretty(BufWriter::new(File::create(dir.join("report.json"))?), &rep)?;
    Ok(rep)
}
