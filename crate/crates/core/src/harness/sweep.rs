use super::config::ExperimentConfig;
use super::run::{prepare, sample_times};
use crate::diagnostics::{divergence, mach_metrics};
use crate::domain::Field;
use crate::error::{Error, Result};
use crate::solver::{CompressibleSolver, IncState, IncompressibleSolver, LerayProjector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;
use std::time::Instant;

/// Time averages of one compressible run against the incompressible reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub eps: f64,
    /// Mean of `|| q ||_{L^2}` over the sample times after `t = 0`.
    pub q_l2: f64,
    pub div_l2: f64,
    /// Mean of `|| u^eps - u^0 ||_{L^2}`.
    pub u_err_l2: f64,
    pub wall_clock_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub name: String,
    pub config_hash: String,
    pub times: Vec<f64>,
    pub rows: Vec<SweepRow>,
    /// Ratios `row[k+1] / row[k]` of `(q, div, u_err)`.
    pub factors: Vec<[f64; 3]>,
    /// Every column strictly decreases along the list.
    pub monotone: bool,
    pub reference_div_l2: f64,
    pub wall_clock_s: f64,
}

impl SweepReport {
    pub fn max_factor(&self, column: usize) -> f64 {
        self.factors.iter().map(|f| f[column]).fold(0.0, f64::max)
    }
}

fn l2_diff(a: &[Field], b: &[Field]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.zip_map(y, |p, q| p - q).l2_norm().powi(2))
        .sum::<f64>()
        .sqrt()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Projected reference velocity at every sample time.
fn reference(cfg: &ExperimentConfig, times: &[f64]) -> Result<(Vec<Vec<Field>>, f64)> {
    let prep = prepare(cfg)?;
    let projector = LerayProjector::new(&cfg.grid, cfg.solver.projection_tol)?;
    let solver = IncompressibleSolver::new(cfg.grid, prep.params.clone(), cfg.solver.clone())?;
    let mut s = IncState { u: projector.project(&prep.perturbation.u0(&prep.params))?, t: 0.0 };
    let mut snaps = Vec::with_capacity(times.len());
    let mut div = 0.0f64;
    for &t in times {
        s = solver.advance_to(&s, t)?;
        div = div.max(projector.divergence(&s.u).l2_norm());
        snaps.push(s.u.clone());
    }
    Ok((snaps, div))
}

fn one_eps(cfg: &ExperimentConfig, eps: f64, times: &[f64], reference: &[Vec<Field>]) -> Result<SweepRow> {
    let start = Instant::now();
    let mut c = cfg.clone();
    c.params.eps = eps;
    let prep = prepare(&c)?;
    let mut solver = CompressibleSolver::new(c.grid, prep.params.clone(), c.solver.clone())?;
    let mut s = prep.state.clone();
    let (mut q, mut div, mut err) = (Vec::new(), Vec::new(), Vec::new());
    for (&t, u0) in times.iter().zip(reference) {
        s = solver.advance_to(&s, t)?;
        if t == 0.0 {
            continue;
        }
        let m = mach_metrics(&s, &prep.params)?;
        q.push(m.q_l2);
        div.push(divergence(&s.velocity())?.l2_norm());
        err.push(l2_diff(&s.velocity(), u0));
    }
    Ok(SweepRow {
        eps,
        q_l2: mean(&q),
        div_l2: mean(&div),
        u_err_l2: mean(&err),
        wall_clock_s: start.elapsed().as_secs_f64(),
    })
}

/// Same initial data across the Mach numbers of the config, plus one projection-method reference.
pub fn run_mach_sweep(cfg: &ExperimentConfig, out: Option<&Path>, deterministic: bool) -> Result<SweepReport> {
    let start = Instant::now();
    let eps_list = cfg.eps_axis()?;
    cfg.validate()?;
    let times = sample_times(cfg.run.t_end, cfg.run.sample_every);
    if times.len() < 2 {
        return Err(Error::Config("Mach sweep needs at least one sample after t = 0".into()));
    }
    let (reference, reference_div_l2) = reference(cfg, &times)?;
    let rows: Vec<SweepRow> = if deterministic {
        eps_list.iter().map(|&e| one_eps(cfg, e, &times, &reference)).collect::<Result<_>>()?
    } else {
        eps_list.par_iter().map(|&e| one_eps(cfg, e, &times, &reference)).collect::<Result<_>>()?
    };
    let factors: Vec<[f64; 3]> = rows
        .windows(2)
        .map(|w| [w[1].q_l2 / w[0].q_l2, w[1].div_l2 / w[0].div_l2, w[1].u_err_l2 / w[0].u_err_l2])
        .collect();
    let monotone = factors.iter().all(|f| f.iter().all(|&r| r < 1.0));
    let report = SweepReport {
        name: cfg.name.clone(),
        config_hash: cfg.hash(),
        times,
        rows,
        factors,
        monotone,
        reference_div_l2,
        wall_clock_s: start.elapsed().as_secs_f64(),
    };
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("config.toml"), cfg.to_toml())?;
        let mut w = csv::Writer::from_writer(BufWriter::new(File::create(dir.join("sweep.csv"))?));
        for r in &report.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        serde_json::to_writer_pretty(BufWriter::new(File::create(dir.join("sweep.json"))?), &report)?;
    }
    Ok(report)
}
