use super::band::{BandLu, BandMatrix};
use super::normal::NormalOp;
use super::spectral_ops::SpectralOps;
use super::{speed_maxima, IncState, SolverConfig};
use crate::domain::{zero_mode, Field, Grid, PhysParams};
use crate::error::{Error, Result};
use rustfft::num_complex::Complex64;
use std::collections::HashMap;
use std::sync::Arc;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Discrete Leray projector.
///
/// Solves `(D1 D1 - |k|^2) chi = div v` at interior nodes with `chi = 0` at `x3 = +-L`, then
/// subtracts `grad chi`. The divergence uses the conservative `D1` in `x3`, so the projected
/// field is discretely divergence-free at every interior node. The tangential mean of the normal
/// component is removed outright: on the whole line it is constant and decaying, hence zero.
#[derive(Debug, Clone)]
pub struct LerayProjector {
    grid: Grid,
    spec: SpectralOps,
    d1: NormalOp,
    lu: Vec<Arc<BandLu>>,
    tol: f64,
}

impl LerayProjector {
    pub fn new(grid: &Grid, tol: f64) -> Result<Self> {
        let spec = SpectralOps::new(grid);
        let n = grid.n_normal();
        let d1 = NormalOp::d1(n);
        let h = grid.h3();
        let mut cache: HashMap<u64, Arc<BandLu>> = HashMap::new();
        let mut lu = Vec::with_capacity(spec.nt);
        for t in 0..spec.nt {
            let k2 = spec.k2[t];
            let f = match cache.get(&k2.to_bits()) {
                Some(f) => f.clone(),
                None => {
                    let mut a = BandMatrix::zeros(n, 4, 4);
                    a.set(0, 0, Complex64::new(1.0, 0.0));
                    a.set(n - 1, n - 1, Complex64::new(1.0, 0.0));
                    for j in 1..n - 1 {
                        for &(k, w1) in &d1.rows[j] {
                            for &(l, w2) in &d1.rows[k] {
                                a.add(j, l, w1 * w2 / (h * h));
                            }
                        }
                        a.add(j, j, -k2);
                    }
                    let f = Arc::new(a.factor().ok_or_else(|| {
                        Error::PoissonSolveDiverged(format!("singular Poisson matrix at |k|^2 = {k2}"))
                    })?);
                    cache.insert(k2.to_bits(), f.clone());
                    f
                }
            };
            lu.push(f);
        }
        Ok(LerayProjector { grid: *grid, spec, d1, lu, tol })
    }

    /// Discrete divergence `sum_k d_k v_k + D1 v3`.
    pub fn divergence(&self, v: &[Field]) -> Field {
        let d = self.grid.d;
        let nt = self.grid.n_tan();
        let mut div_hat = self.spec.fwd(&self.d1.apply_vec(v[d].values(), nt, self.grid.h3()));
        for k in 0..d {
            for (a, b) in div_hat.iter_mut().zip(self.spec.ddir(&self.spec.fwd(v[k].values()), k)) {
                *a += b;
            }
        }
        Field::from_values(self.grid, self.spec.inv(div_hat)).expect("finite divergence")
    }

    pub fn project(&self, v: &[Field]) -> Result<Vec<Field>> {
        let g = self.grid;
        let d = g.d;
        let nt = g.n_tan();
        let n = g.n_normal();
        let h = g.h3();
        let div = self.divergence(v);
        let div_hat = self.spec.fwd(div.values());
        let mut chi_hat = vec![ZERO; nt * n];
        for t in 0..nt {
            let mut col: Vec<Complex64> = (0..n).map(|j| div_hat[j * nt + t]).collect();
            col[0] = ZERO;
            col[n - 1] = ZERO;
            self.lu[t].solve(&mut col);
            for j in 0..n {
                chi_hat[j * nt + t] = col[j];
            }
        }
        let mut out = Vec::with_capacity(d + 1);
        for k in 0..d {
            let grad = self.spec.inv(self.spec.ddir(&chi_hat, k));
            out.push(v[k].zip_map(&Field::from_values(g, grad)?, |a, b| a - b));
        }
        let chi = self.spec.inv(chi_hat);
        let g3 = self.d1.apply_vec(&chi, nt, h);
        let mut u3 = v[d].zip_map(&Field::from_values(g, g3)?, |a, b| a - b);
        let mean = zero_mode(&u3);
        for j in 0..n {
            let m = mean.values()[j];
            u3.row_mut(j).iter_mut().for_each(|x| *x -= m);
        }
        out.push(u3);
        if out.iter().any(|f| !f.is_finite()) {
            return Err(Error::PoissonSolveDiverged("non-finite projection".into()));
        }
        let residual = interior_l2(&self.divergence(&out));
        let scale = v.iter().map(|f| f.max_abs()).fold(0.0, f64::max) / h;
        if residual > self.tol * scale.max(1.0) {
            return Err(Error::PoissonSolveDiverged(format!(
                "divergence {residual:.3e} left after projection"
            )));
        }
        Ok(out)
    }
}

/// `L^2` over interior nodes only.
pub(crate) fn interior_l2(f: &Field) -> f64 {
    let g = f.grid();
    let nt = g.n_tan() as f64;
    let n = g.n_normal();
    let s: f64 = (1..n - 1).map(|j| f.row(j).iter().map(|v| v * v).sum::<f64>() / nt).sum();
    (s * g.h3()).sqrt()
}

/// Projection-method stepper for `rho_bar (d_t u + u . grad u) + grad P = mu lap u`, `div u = 0`.
#[derive(Debug)]
pub struct IncompressibleSolver {
    grid: Grid,
    params: PhysParams,
    cfg: SolverConfig,
    spec: SpectralOps,
    d1: NormalOp,
    d2: NormalOp,
    proj: LerayProjector,
}

impl IncompressibleSolver {
    pub fn new(grid: Grid, params: PhysParams, cfg: SolverConfig) -> Result<Self> {
        grid.validate()?;
        params.validate(grid.d)?;
        cfg.validate()?;
        let n = grid.n_normal();
        Ok(IncompressibleSolver {
            spec: SpectralOps::new(&grid),
            d1: NormalOp::d1(n),
            d2: NormalOp::d2(n),
            proj: LerayProjector::new(&grid, cfg.projection_tol)?,
            grid,
            params,
            cfg,
        })
    }

    pub fn projector(&self) -> &LerayProjector {
        &self.proj
    }

    pub fn dt_for(&self, s: &IncState) -> f64 {
        let (up, u3) = speed_maxima(&s.u);
        self.cfg.dt_for(&self.grid, &self.params, up, u3)
    }

    /// Dirichlet tangential velocity `+-u_bar` at the two boundary levels.
    fn apply_boundary(&self, u: &mut [Field]) {
        let last = self.grid.n_normal() - 1;
        for (j, sign) in [(0usize, -1.0f64), (last, 1.0)] {
            for (i, ui) in u.iter_mut().enumerate().take(self.grid.d) {
                ui.row_mut(j).iter_mut().for_each(|v| *v = sign * self.params.u_bar[i]);
            }
        }
    }

    fn rhs(&self, u: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let g = &self.grid;
        let d = g.d;
        let nt = g.n_tan();
        let h = g.h3();
        let nu = self.params.mu / self.params.rho_bar;
        let sp = &self.spec;
        let mut out = Vec::with_capacity(d + 1);
        for i in 0..=d {
            let mut s_hat: Vec<Complex64> = sp.fwd(&u[i]);
            for (idx, v) in s_hat.iter_mut().enumerate() {
                *v *= -nu * sp.k2[idx % nt];
            }
            for k in 0..d {
                let prod: Vec<f64> = u[i].iter().zip(&u[k]).map(|(a, b)| a * b).collect();
                for (a, b) in s_hat.iter_mut().zip(sp.ddir(&sp.fwd(&prod), k)) {
                    *a -= b;
                }
            }
            let mut r = sp.inv(s_hat);
            let flux: Vec<f64> = u[i].iter().zip(&u[d]).map(|(a, b)| a * b).collect();
            let conv = self.d1.apply_vec(&flux, nt, h);
            let visc = self.d2.apply_vec(&u[i], nt, h);
            for ((a, c), v) in r.iter_mut().zip(&conv).zip(&visc) {
                *a += -c + nu * v;
            }
            let last = g.n_normal() - 1;
            r[..nt].iter_mut().for_each(|v| *v = 0.0);
            r[last * nt..].iter_mut().for_each(|v| *v = 0.0);
            out.push(r);
        }
        out
    }

    /// `P((1 - w) base + w (from + tau R(from)))`.
    fn stage(&self, base: &[Field], w: f64, from: &[Field], tau: f64) -> Result<Vec<Field>> {
        let vals: Vec<Vec<f64>> = from.iter().map(|f| f.values().to_vec()).collect();
        let r = self.rhs(&vals);
        let mut next: Vec<Field> = base
            .iter()
            .zip(from)
            .zip(&r)
            .map(|((b, f), r)| {
                let mut out = b.scaled(1.0 - w);
                for ((o, x), y) in out.values_mut().iter_mut().zip(f.values()).zip(r) {
                    *o += w * (x + tau * y);
                }
                out
            })
            .collect();
        self.apply_boundary(&mut next);
        self.proj.project(&next)
    }

    pub fn step(&self, s: &IncState) -> Result<IncState> {
        let dt = self.dt_for(s);
        self.step_dt(s, dt)
    }

    pub fn step_dt(&self, s: &IncState, dt: f64) -> Result<IncState> {
        let u0 = &s.u;
        let u1 = self.stage(u0, 1.0, u0, dt)?;
        let u2 = self.stage(u0, 0.25, &u1, dt)?;
        let u3 = self.stage(u0, 2.0 / 3.0, &u2, dt)?;
        Ok(IncState { u: u3, t: s.t + dt })
    }

    pub fn advance_to(&self, s: &IncState, t_end: f64) -> Result<IncState> {
        let mut cur = s.clone();
        while cur.t < t_end - 1e-12 {
            let dt = self.dt_for(&cur).min(t_end - cur.t);
            cur = self.step_dt(&cur, dt)?;
        }
        cur.t = cur.t.max(t_end);
        Ok(cur)
    }
}
