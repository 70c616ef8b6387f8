use super::config::{ConvergenceProblem, ExperimentConfig};
use crate::domain::{Field, Grid, PhysParams};
use crate::error::{Error, Result};
use crate::profiles::{vortex_layer_velocity, LayerAge};
use crate::solver::mms::ManufacturedSolution;
use crate::solver::{CompressibleSolver, DtPolicy, SolverConfig, State};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;
use std::sync::Arc;

/// Orders below this, or grids coarser than the problem's length scale, are pre-asymptotic.
pub const ASYMPTOTIC_ORDER: f64 = 1.5;

/// Amplitudes of the manufactured solution used by convergence studies.
pub const MMS: ManufacturedSolution = ManufacturedSolution { a: 0.05, b: 0.05 };

/// Errors of one resolution against the exact solution, per field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelError {
    pub n3: usize,
    pub h3: f64,
    pub dt: f64,
    /// `[rho, m_1 .. m_d, m_3]` in `L^inf`.
    pub errors: Vec<f64>,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderRow {
    pub coarse: usize,
    pub fine: usize,
    /// Observed order of each field between consecutive levels.
    pub orders: Vec<f64>,
    pub total_order: f64,
    /// Order from the self-convergence triple ending at `fine`, without the exact solution.
    pub richardson: Option<f64>,
    pub pre_asymptotic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrdersTable {
    pub problem: ConvergenceProblem,
    pub t_end: f64,
    pub levels: Vec<LevelError>,
    pub rows: Vec<OrderRow>,
}

impl OrdersTable {
    /// Smallest total order among the rows not flagged pre-asymptotic.
    pub fn min_order(&self) -> Option<f64> {
        self.rows.iter().filter(|r| !r.pre_asymptotic).map(|r| r.total_order).reduce(f64::min)
    }
}

fn layer_state(grid: Grid, p: &PhysParams, t: f64) -> Result<State> {
    let d = grid.d;
    let mut u: Vec<Field> = (0..d)
        .map(|i| Field::from_fn(grid, |_, x3| vortex_layer_velocity(x3, t, p, LayerAge::Layer)[i]))
        .collect();
    u.push(Field::zeros(grid));
    State::from_primitive(Field::constant(grid, p.rho_bar), &u, t)
}

/// Length the grid must resolve before orders are trusted.
fn length_scale(problem: ConvergenceProblem, p: &PhysParams) -> f64 {
    match problem {
        ConvergenceProblem::Layer => 2.0 * (p.mu * p.t0 / p.rho_bar).sqrt(),
        ConvergenceProblem::Manufactured => 0.5,
    }
}

fn field_errors(a: &State, b: &State) -> Vec<f64> {
    let mut e = vec![a.rho.zip_map(&b.rho, |x, y| x - y).max_abs()];
    e.extend(a.m.iter().zip(&b.m).map(|(x, y)| x.zip_map(y, |p, q| p - q).max_abs()));
    e
}

/// Restriction of a fine state to the nodes of a grid with half the normal points.
fn restrict(s: &State, coarse: Grid) -> Result<State> {
    let nt = coarse.n_tan();
    let pick = |f: &Field| {
        let mut v = Vec::with_capacity(coarse.len());
        for j in 0..coarse.n_normal() {
            v.extend_from_slice(&f.values()[2 * j * nt..2 * j * nt + nt]);
        }
        Field::from_values(coarse, v)
    };
    State::new(pick(&s.rho)?, s.m.iter().map(pick).collect::<Result<_>>()?, s.t)
}

fn solve_level(cfg: &ExperimentConfig, n3: usize, dt: f64) -> Result<(State, State)> {
    let grid = Grid::new(cfg.grid.d, cfg.grid.n_perp, n3, cfg.grid.l)?;
    let p = cfg.params.clone();
    let scfg = SolverConfig { dt: DtPolicy::Fixed { dt }, ..cfg.solver.clone() };
    let t_end = cfg.sweep.converge_t_end;
    match cfg.sweep.problem {
        ConvergenceProblem::Layer => {
            let s0 = layer_state(grid, &p, 0.0)?;
            let s1 = CompressibleSolver::new(grid, p.clone(), scfg)?.advance_to(&s0, t_end)?;
            Ok((s1, layer_state(grid, &p, t_end)?))
        }
        ConvergenceProblem::Manufactured => {
            if grid.d != 1 {
                return Err(Error::Config("manufactured convergence runs in d = 1 only".into()));
            }
            let s0 = MMS.exact(&grid, &p, 0.0);
            let mut solver = CompressibleSolver::new(grid, p.clone(), scfg)?.with_forcing(Arc::new(MMS));
            let s1 = solver.advance_to(&s0, t_end)?;
            Ok((s1, MMS.exact(&grid, &p, t_end)))
        }
    }
}

fn total(e: &[f64]) -> f64 {
    e.iter().sum()
}

/// Observed orders on the refinement axis; `dt` shrinks with `h3`.
pub fn run_convergence(cfg: &ExperimentConfig, out: Option<&Path>, deterministic: bool) -> Result<OrdersTable> {
    let ns = cfg.refine_axis()?;
    cfg.validate()?;
    let n0 = ns[0] as f64;
    let dt_of = |n: usize| cfg.sweep.converge_dt * n0 / n as f64;
    let solve = |&n: &usize| solve_level(cfg, n, dt_of(n));
    let runs: Vec<(State, State)> = if deterministic {
        ns.iter().map(solve).collect::<Result<_>>()?
    } else {
        ns.par_iter().map(solve).collect::<Result<_>>()?
    };
    let levels: Vec<LevelError> = ns
        .iter()
        .zip(&runs)
        .map(|(&n, (num, ex))| {
            let errors = field_errors(num, ex);
            LevelError { n3: n, h3: 2.0 * cfg.grid.l / n as f64, dt: dt_of(n), total: total(&errors), errors }
        })
        .collect();
    let scale = length_scale(cfg.sweep.problem, &cfg.params);
    let mut rows = Vec::new();
    for k in 0..levels.len() - 1 {
        let (c, f) = (&levels[k], &levels[k + 1]);
        let r = (f.n3 as f64 / c.n3 as f64).ln();
        let order = |a: f64, b: f64| (a / b).ln() / r;
        let orders: Vec<f64> = c.errors.iter().zip(&f.errors).map(|(&a, &b)| order(a, b)).collect();
        let total_order = order(c.total, f.total);
        let richardson = if k >= 1 && ns[k] == 2 * ns[k - 1] && ns[k + 1] == 2 * ns[k] {
            let g0 = *runs[k - 1].0.grid();
            let mid = restrict(&runs[k].0, g0)?;
            let fine = restrict(&restrict(&runs[k + 1].0, *runs[k].0.grid())?, g0)?;
            let d01 = total(&field_errors(&runs[k - 1].0, &mid));
            let d12 = total(&field_errors(&mid, &fine));
            Some((d01 / d12).log2())
        } else {
            None
        };
        rows.push(OrderRow {
            coarse: c.n3,
            fine: f.n3,
            pre_asymptotic: !(total_order >= ASYMPTOTIC_ORDER) || c.h3 > scale,
            orders,
            total_order,
            richardson,
        });
    }
    let table = OrdersTable { problem: cfg.sweep.problem, t_end: cfg.sweep.converge_t_end, levels, rows };
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("config.toml"), cfg.to_toml())?;
        let mut w = csv::Writer::from_writer(BufWriter::new(File::create(dir.join("orders.csv"))?));
        w.write_record(["coarse", "fine", "total_order", "richardson", "pre_asymptotic"])?;
        for r in &table.rows {
            w.write_record([
                r.coarse.to_string(),
                r.fine.to_string(),
                format!("{:.6}", r.total_order),
                r.richardson.map(|x| format!("{x:.6}")).unwrap_or_default(),
                r.pre_asymptotic.to_string(),
            ])?;
        }
        w.flush()?;
        serde_json::to_writer_pretty(BufWriter::new(File::create(dir.join("orders.json"))?), &table)?;
    }
    Ok(table)
}
