//! Time integration on the periodic strip.
//!
//! Compressible: Strang splitting around an implicit linear acoustic step,
//!
//! ```text
//!   N(dt/2)  A(dt)  N(dt/2)
//!   A:  d_t rho + div m = 0,            d_t m + c^2 grad rho = 0,        c = a_bar / eps
//!   N:  d_t m = -div(m (x) u) - eps^-2 grad varpi(rho, rho_bar) + mu lap u + (mu + lambda) grad div u
//! ```
//!
//! `A` is solved per tangential Fourier mode with a theta-scheme and characteristic closures at
//! `x3 = +-L`; `N` is SSP-RK3 on the momentum with density frozen. The stiff acoustic speed
//! never enters the time-step restriction.
//!
//! Incompressible: SSP-RK3 with a Leray projection after every stage.

mod band;
mod checkpoint;
mod compressible;
mod incompressible;
pub mod mms;
mod normal;
mod spectral_ops;

pub use band::{BandLu, BandMatrix};
pub use checkpoint::{read_checkpoint, write_checkpoint};
pub use compressible::CompressibleSolver;
pub use incompressible::{IncompressibleSolver, LerayProjector};
pub use normal::NormalOp;

use crate::domain::{Field, Grid, PhysParams};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Conservative unknowns `(rho, m)`; momentum components tangential first, normal last.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub rho: Field,
    pub m: Vec<Field>,
    pub t: f64,
}

impl State {
    pub fn new(rho: Field, m: Vec<Field>, t: f64) -> Result<Self> {
        let grid = *rho.grid();
        if m.len() != grid.d + 1 {
            return Err(Error::InvalidParams(format!(
                "momentum needs {} components, got {}",
                grid.d + 1,
                m.len()
            )));
        }
        if m.iter().any(|f| *f.grid() != grid) {
            return Err(Error::GridMismatch);
        }
        Ok(State { rho, m, t })
    }

    /// From density and velocity.
    pub fn from_primitive(rho: Field, u: &[Field], t: f64) -> Result<Self> {
        let m = u.iter().map(|ui| rho.zip_map(ui, |r, v| r * v)).collect();
        State::new(rho, m, t)
    }

    pub fn grid(&self) -> &Grid {
        self.rho.grid()
    }

    pub fn velocity(&self) -> Vec<Field> {
        self.m.iter().map(|mi| mi.zip_map(&self.rho, |m, r| m / r)).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.rho.is_finite() && self.m.iter().all(|f| f.is_finite())
    }
}

/// Divergence-free velocity of the incompressible reference flow.
#[derive(Debug, Clone, PartialEq)]
pub struct IncState {
    pub u: Vec<Field>,
    pub t: f64,
}

impl IncState {
    pub fn grid(&self) -> &Grid {
        self.u[0].grid()
    }
}

/// Time-step policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DtPolicy {
    Fixed { dt: f64 },
    /// `dt = cfl * min(advective, viscous)`, capped at `dt_max`.
    Cfl { cfl: f64, dt_max: f64 },
}

/// Closure at `x3 = +-L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryKind {
    /// Incoming acoustic characteristic set to zero, outgoing one advected out.
    NonReflecting,
    /// `rho = rho_bar`, `m3 = 0`: fully reflecting.
    Dirichlet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub dt: DtPolicy,
    /// Implicitness of the acoustic step: 0.5 is Crank-Nicolson, 1 is backward Euler.
    pub theta: f64,
    pub boundary: BoundaryKind,
    /// Relative residual accepted from a banded solve.
    pub linear_tol: f64,
    /// Relative discrete divergence accepted after a projection.
    pub projection_tol: f64,
    /// Density floor as a fraction of `rho_bar`.
    pub density_floor: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            dt: DtPolicy::Cfl { cfl: 0.4, dt_max: 0.05 },
            theta: 0.5,
            boundary: BoundaryKind::NonReflecting,
            linear_tol: 1e-8,
            projection_tol: 1e-10,
            density_floor: 0.25,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = match self.dt {
            DtPolicy::Fixed { dt } => dt > 0.0 && dt.is_finite(),
            DtPolicy::Cfl { cfl, dt_max } => cfl > 0.0 && dt_max > 0.0,
        };
        if !ok {
            return Err(Error::Config(format!("invalid time-step policy {:?}", self.dt)));
        }
        if !(self.theta >= 0.5 && self.theta <= 1.0) {
            return Err(Error::Config(format!("theta must lie in [0.5, 1], got {}", self.theta)));
        }
        if !(self.linear_tol > 0.0 && self.projection_tol > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if !(self.density_floor > 0.0 && self.density_floor < 1.0) {
            return Err(Error::Config("density floor must lie in (0, 1)".into()));
        }
        Ok(())
    }

    /// Step size for a velocity field with the given maxima.
    pub fn dt_for(&self, grid: &Grid, params: &PhysParams, max_u_perp: f64, max_u3: f64) -> f64 {
        match self.dt {
            DtPolicy::Fixed { dt } => dt,
            DtPolicy::Cfl { cfl, dt_max } => {
                let h3 = grid.h3();
                let hp = grid.h_perp();
                let adv_perp = if max_u_perp > 0.0 { hp / max_u_perp } else { f64::INFINITY };
                let adv_3 = if max_u3 > 0.0 { h3 / max_u3 } else { f64::INFINITY };
                let visc = params.rho_bar
                    / (params.mu_tilde().max(params.mu) * (grid.d as f64 / (hp * hp) + 1.0 / (h3 * h3)));
                (cfl * adv_perp.min(adv_3).min(visc)).min(dt_max)
            }
        }
    }
}

/// Largest tangential speed and largest normal speed.
pub(crate) fn speed_maxima(u: &[Field]) -> (f64, f64) {
    let d = u.len() - 1;
    let n = u[0].values().len();
    let mut perp: f64 = 0.0;
    for k in 0..n {
        let s: f64 = (0..d).map(|i| u[i].values()[k].powi(2)).sum::<f64>().sqrt();
        perp = perp.max(s);
    }
    (perp, u[d].max_abs())
}

/// Far-field values at `x3 = +-L`: tangential momentum `rho (+-u_bar)`; with the non-reflecting
/// closure the boundary node is projected onto the outgoing acoustic characteristic, with the
/// Dirichlet closure it is reset to `(rho_bar, 0)`.
pub fn boundary_apply(s: &mut State, cfg: &SolverConfig, params: &PhysParams) {
    let grid = *s.grid();
    let d = grid.d;
    let nt = grid.n_tan();
    let last = grid.n_normal() - 1;
    let c = params.sound_speed();
    for (j, sign) in [(0usize, -1.0f64), (last, 1.0)] {
        for t in 0..nt {
            let k = j * nt + t;
            match cfg.boundary {
                BoundaryKind::Dirichlet => {
                    s.rho.values_mut()[k] = params.rho_bar;
                    s.m[d].values_mut()[k] = 0.0;
                }
                BoundaryKind::NonReflecting => {
                    // keep w = m3 + sign c rho', zero the incoming combination
                    let rp = s.rho.values()[k] - params.rho_bar;
                    let m3 = s.m[d].values()[k];
                    let w = m3 + sign * c * rp;
                    s.m[d].values_mut()[k] = 0.5 * w;
                    s.rho.values_mut()[k] = params.rho_bar + sign * 0.5 * w / c;
                }
            }
            let r = s.rho.values()[k];
            for i in 0..d {
                s.m[i].values_mut()[k] = r * sign * params.u_bar[i];
            }
        }
    }
}

/// One compressible step with a freshly built solver.
pub fn step_compressible(s: &State, cfg: &SolverConfig, params: &PhysParams) -> Result<State> {
    CompressibleSolver::new(*s.grid(), params.clone(), cfg.clone())?.step(s)
}

/// One incompressible step with a freshly built solver.
pub fn step_incompressible(s: &IncState, cfg: &SolverConfig, params: &PhysParams) -> Result<IncState> {
    IncompressibleSolver::new(*s.grid(), params.clone(), cfg.clone())?.step(s)
}

/// `Pi = Id - grad lap^-1 div` with the discrete operators of the incompressible solver.
pub fn leray_project(v: &[Field]) -> Result<Vec<Field>> {
    let grid = *v[0].grid();
    LerayProjector::new(&grid, 1e-10)?.project(v)
}
