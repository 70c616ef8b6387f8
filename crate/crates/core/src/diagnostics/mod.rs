//! Perturbation variables, anti-derivatives, energy functionals and rate fits.
//!
//! Everything here reads a [`State`] snapshot and never mutates it. A [`Sampler`] carries the
//! running monitors across a run and produces one [`EnergyReport`] per sample.

mod energy;
mod fit;
mod monitor;
mod perturbation;

pub use energy::{
    energy_full, energy_star, linf_bv, read_reports_csv, write_reports_csv, EnergyReport, EnergyTerms,
    RunningMonitors, Sampler, REPORT_COLUMNS,
};
pub use fit::{fit_decay, fit_decay_with, fit_two_term, DecayFit, FitOptions, MIN_SAMPLES};
pub use monitor::{
    apriori_monitor, monitor_one, relative_spread, Bound, BoundConstant, Scale, CATALOGUE, GROWTH_LIMIT,
};
pub use perturbation::{build_antiderivatives, extract_perturbations, AntiDerivativeSet, PerturbationSet};

use crate::domain::{d_normal, d_tangential, Field, PhysParams};
use crate::error::Result;
use crate::solver::State;
use serde::{Deserialize, Serialize};

/// Low-Mach indicators of a state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MachMetrics {
    /// `|| (p(rho) - p(rho_bar)) / eps ||_{L^2}`.
    pub q_l2: f64,
    /// `|| div u ||_{L^2}`.
    pub div_l2: f64,
}

pub fn mach_metrics(s: &State, params: &PhysParams) -> Result<MachMetrics> {
    let p_bar = params.pressure(params.rho_bar);
    let q = s.rho.map(|r| (params.pressure(r) - p_bar) / params.eps);
    Ok(MachMetrics { q_l2: q.l2_norm(), div_l2: divergence(&s.velocity())?.l2_norm() })
}

/// `sum_k d_k u_k + d3 u3` with spectral tangential and finite-difference normal derivatives.
pub fn divergence(u: &[Field]) -> Result<Field> {
    let d = u.len() - 1;
    let mut div = d_normal(&u[d], 1)?;
    for (k, uk) in u.iter().enumerate().take(d) {
        div.axpy(1.0, &d_tangential(uk, k, 1));
    }
    Ok(div)
}
