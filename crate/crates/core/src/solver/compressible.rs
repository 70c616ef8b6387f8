use super::band::{BandLu, BandMatrix};
use super::mms::Forcing;
use super::normal::NormalOp;
use super::spectral_ops::SpectralOps;
use super::{boundary_apply, speed_maxima, BoundaryKind, SolverConfig, State};
use crate::domain::{Field, Grid, PhysParams};
use crate::error::{Error, Result};
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use std::collections::HashMap;
use std::sync::Arc;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Compressible stepper with cached operators and per-mode acoustic factorizations.
pub struct CompressibleSolver {
    grid: Grid,
    params: PhysParams,
    cfg: SolverConfig,
    spec: SpectralOps,
    d1: NormalOp,
    d2: NormalOp,
    forcing: Option<Arc<dyn Forcing>>,
    lu_dt: f64,
    lu: HashMap<u64, Arc<(BandMatrix, BandLu)>>,
}

impl std::fmt::Debug for CompressibleSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CompressibleSolver")
            .field("grid", &self.grid)
            .field("params", &self.params)
            .field("cfg", &self.cfg)
            .finish()
    }
}

impl CompressibleSolver {
    pub fn new(grid: Grid, params: PhysParams, cfg: SolverConfig) -> Result<Self> {
        grid.validate()?;
        params.validate(grid.d)?;
        cfg.validate()?;
        let n = grid.n_normal();
        Ok(CompressibleSolver {
            spec: SpectralOps::new(&grid),
            d1: NormalOp::d1(n),
            d2: NormalOp::d2(n),
            grid,
            params,
            cfg,
            forcing: None,
            lu_dt: f64::NAN,
            lu: HashMap::new(),
        })
    }

    /// Adds a momentum source, evaluated at every explicit stage.
    pub fn with_forcing(mut self, f: Arc<dyn Forcing>) -> Self {
        self.forcing = Some(f);
        self
    }

    pub fn params(&self) -> &PhysParams {
        &self.params
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn dt_for(&self, s: &State) -> f64 {
        let (up, u3) = speed_maxima(&s.velocity());
        self.cfg.dt_for(&self.grid, &self.params, up, u3)
    }

    fn check_floor(&self, s: &State) -> Result<()> {
        let floor = self.cfg.density_floor * self.params.rho_bar;
        let min = s.rho.min();
        if !(min >= floor) {
            return Err(Error::DensityFloorViolation { min, floor });
        }
        Ok(())
    }

    /// Advances by the policy's step.
    pub fn step(&mut self, s: &State) -> Result<State> {
        let dt = self.dt_for(s);
        self.step_dt(s, dt)
    }

    pub fn step_dt(&mut self, s: &State, dt: f64) -> Result<State> {
        if *s.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        self.check_floor(s)?;
        let mut out = s.clone();
        self.explicit_half(&mut out, 0.5 * dt)?;
        self.acoustic(&mut out, dt)?;
        out.t = s.t + 0.5 * dt;
        self.explicit_half(&mut out, 0.5 * dt)?;
        out.t = s.t + dt;
        if !out.is_finite() {
            return Err(Error::LinearSolveDiverged(format!("non-finite state at t = {}", out.t)));
        }
        self.check_floor(&out)?;
        Ok(out)
    }

    /// Advances to exactly `t_end`, shortening the last step.
    pub fn advance_to(&mut self, s: &State, t_end: f64) -> Result<State> {
        let mut cur = s.clone();
        while cur.t < t_end - 1e-12 {
            let dt = self.dt_for(&cur).min(t_end - cur.t);
            cur = self.step_dt(&cur, dt)?;
        }
        cur.t = cur.t.max(t_end);
        Ok(cur)
    }

    /// SSP-RK3 on the momentum over `tau` with density frozen.
    fn explicit_half(&self, s: &mut State, tau: f64) -> Result<()> {
        let rho = s.rho.values().to_vec();
        let m0: Vec<Vec<f64>> = s.m.iter().map(|f| f.values().to_vec()).collect();
        let t = s.t;
        let stage = |base: &[Vec<f64>], r: &[Vec<f64>]| -> Vec<Vec<f64>> {
            base.iter()
                .zip(r)
                .map(|(b, r)| b.iter().zip(r).map(|(x, y)| x + tau * y).collect())
                .collect()
        };
        let blend = |a: f64, x: &[Vec<f64>], b: f64, y: &[Vec<f64>]| -> Vec<Vec<f64>> {
            x.iter()
                .zip(y)
                .map(|(x, y)| x.iter().zip(y).map(|(p, q)| a * p + b * q).collect())
                .collect()
        };
        let r0 = self.momentum_rhs(&rho, &m0, t);
        let m1 = stage(&m0, &r0);
        let r1 = self.momentum_rhs(&rho, &m1, t + tau);
        let m2 = blend(0.75, &m0, 0.25, &stage(&m1, &r1));
        let r2 = self.momentum_rhs(&rho, &m2, t + 0.5 * tau);
        let m3 = blend(1.0 / 3.0, &m0, 2.0 / 3.0, &stage(&m2, &r2));
        for (f, v) in s.m.iter_mut().zip(m3) {
            f.values_mut().copy_from_slice(&v);
        }
        boundary_apply(s, &self.cfg, &self.params);
        Ok(())
    }

    /// Explicit momentum tendency; zero on the boundary nodes.
    pub(crate) fn momentum_rhs(&self, rho: &[f64], m: &[Vec<f64>], t: f64) -> Vec<Vec<f64>> {
        let p = &self.params;
        let g = &self.grid;
        let d = g.d;
        let nt = g.n_tan();
        let h = g.h3();
        let sp = &self.spec;
        let inv_eps2 = 1.0 / (p.eps * p.eps);
        let mu = p.mu;
        let bulk = p.mu + p.lambda;

        let u: Vec<Vec<f64>> = m.iter().map(|mi| mi.iter().zip(rho).map(|(a, r)| a / r).collect()).collect();
        let varpi: Vec<f64> = rho.iter().map(|&r| p.varpi(r, p.rho_bar)).collect();
        let u_hat: Vec<Vec<Complex64>> = u.iter().map(|ui| sp.fwd(ui)).collect();
        let varpi_hat = sp.fwd(&varpi);
        let d1u3 = self.d1.apply_vec(&u[d], nt, h);
        let d1u3_hat = sp.fwd(&d1u3);
        let mut div_perp_hat = vec![ZERO; u_hat[0].len()];
        for k in 0..d {
            for (acc, v) in div_perp_hat.iter_mut().zip(sp.ddir(&u_hat[k], k)) {
                *acc += v;
            }
        }

        let mut out = Vec::with_capacity(d + 1);
        for i in 0..=d {
            let mut s_hat = vec![ZERO; u_hat[0].len()];
            for k in 0..d {
                let prod: Vec<f64> = m[i].iter().zip(&u[k]).map(|(a, b)| a * b).collect();
                for (acc, v) in s_hat.iter_mut().zip(sp.ddir(&sp.fwd(&prod), k)) {
                    *acc -= v;
                }
            }
            for (idx, acc) in s_hat.iter_mut().enumerate() {
                *acc -= mu * sp.k2[idx % nt] * u_hat[i][idx];
            }
            if i < d {
                let grad: Vec<Complex64> = (0..s_hat.len())
                    .map(|idx| bulk * (div_perp_hat[idx] + d1u3_hat[idx]) - inv_eps2 * varpi_hat[idx])
                    .collect();
                for (acc, v) in s_hat.iter_mut().zip(sp.ddir(&grad, i)) {
                    *acc += v;
                }
            }
            let mut r = sp.inv(s_hat);

            // normal fluxes
            let mut flux: Vec<f64> = m[i].iter().zip(&u[d]).map(|(a, b)| a * b).collect();
            if i == d {
                for (f, w) in flux.iter_mut().zip(&varpi) {
                    *f += inv_eps2 * w;
                }
            }
            let mut normal = self.d1.apply_vec(&flux, nt, h);
            normal.iter_mut().for_each(|v| *v = -*v);
            let visc = if i == d { mu + bulk } else { mu };
            let d2u = self.d2.apply_vec(&u[i], nt, h);
            for (a, b) in normal.iter_mut().zip(&d2u) {
                *a += visc * b;
            }
            if i == d {
                let div_perp = sp.inv(div_perp_hat.clone());
                let d1div = self.d1.apply_vec(&div_perp, nt, h);
                for (a, b) in normal.iter_mut().zip(&d1div) {
                    *a += bulk * b;
                }
            }
            for (a, b) in r.iter_mut().zip(&normal) {
                *a += b;
            }
            out.push(r);
        }
        if let Some(f) = &self.forcing {
            let src = f.momentum(g, p, t);
            for (r, s) in out.iter_mut().zip(src) {
                for (a, b) in r.iter_mut().zip(s) {
                    *a += b;
                }
            }
        }
        let last = g.n_normal() - 1;
        for r in &mut out {
            r[..nt].iter_mut().for_each(|v| *v = 0.0);
            r[last * nt..].iter_mut().for_each(|v| *v = 0.0);
        }
        out
    }

    fn assemble(&self, k2: f64, dt: f64) -> BandMatrix {
        let n = self.grid.n_normal();
        let h = self.grid.h3();
        let th = self.cfg.theta;
        let c = self.params.sound_speed();
        let kk = c * c * k2;
        let mut a = BandMatrix::zeros(2 * n, 5, 5);
        let one = Complex64::new(1.0, 0.0);
        for j in 1..n - 1 {
            a.set(2 * j, 2 * j, one * (1.0 + th * th * dt * dt * kk));
            for &(k, w) in &self.d1.rows[j] {
                a.add(2 * j, 2 * k + 1, th * dt * w / h);
                a.add(2 * j + 1, 2 * k, th * dt * c * c * w / h);
            }
            a.add(2 * j + 1, 2 * j + 1, 1.0);
        }
        match self.cfg.boundary {
            BoundaryKind::Dirichlet => {
                for j in [0, n - 1] {
                    a.set(2 * j, 2 * j, one);
                    a.set(2 * j + 1, 2 * j + 1, one);
                }
            }
            BoundaryKind::NonReflecting => {
                // left: outgoing w- = m3 - c rho', incoming m3 + c rho' = 0
                a.add(0, 1, 1.0);
                a.add(0, 0, -c);
                for &(k, w) in &self.d1.rows[0] {
                    let coef = -th * dt * c * w / h;
                    a.add(0, 2 * k + 1, coef);
                    a.add(0, 2 * k, -c * coef);
                }
                a.add(0, 0, -c * th * th * dt * dt * kk);
                a.add(1, 1, 1.0);
                a.add(1, 0, c);
                // right: outgoing w+ = m3 + c rho', incoming m3 - c rho' = 0
                let r = 2 * (n - 1);
                a.add(r, r + 1, 1.0);
                a.add(r, r, c);
                for &(k, w) in &self.d1.rows[n - 1] {
                    let coef = th * dt * c * w / h;
                    a.add(r, 2 * k + 1, coef);
                    a.add(r, 2 * k, c * coef);
                }
                a.add(r, r, c * th * th * dt * dt * kk);
                a.add(r + 1, r + 1, 1.0);
                a.add(r + 1, r, -c);
            }
        }
        a
    }

    fn factorization(&mut self, k2: f64, dt: f64) -> Result<Arc<(BandMatrix, BandLu)>> {
        if self.lu_dt != dt {
            self.lu.clear();
            self.lu_dt = dt;
        }
        if let Some(f) = self.lu.get(&k2.to_bits()) {
            return Ok(f.clone());
        }
        let a = self.assemble(k2, dt);
        let lu = a.factor().ok_or_else(|| {
            Error::LinearSolveDiverged(format!("singular acoustic matrix for |k|^2 = {k2}"))
        })?;
        let f = Arc::new((a, lu));
        self.lu.insert(k2.to_bits(), f.clone());
        Ok(f)
    }

    /// Implicit linear acoustics over `dt`, mode by mode.
    fn acoustic(&mut self, s: &mut State, dt: f64) -> Result<()> {
        let g = self.grid;
        let d = g.d;
        let nt = g.n_tan();
        let n = g.n_normal();
        let h = g.h3();
        let th = self.cfg.theta;
        let c = self.params.sound_speed();
        let rho_bar = self.params.rho_bar;
        let tol = self.cfg.linear_tol;

        let rp: Vec<f64> = s.rho.values().iter().map(|r| r - rho_bar).collect();
        let rho_hat = self.spec.fwd(&rp);
        let m_hat: Vec<Vec<Complex64>> = s.m.iter().map(|f| self.spec.fwd(f.values())).collect();

        let mut facs = Vec::with_capacity(nt);
        for t in 0..nt {
            facs.push(self.factorization(self.spec.k2[t], dt)?);
        }
        let boundary = self.cfg.boundary;
        let d1 = &self.d1;
        let spec = &self.spec;

        type Column = (Vec<Complex64>, Vec<Vec<Complex64>>);
        let cols: Vec<Result<Column>> = (0..nt)
            .into_par_iter()
            .map(|t| {
                let kk = c * c * spec.k2[t];
                let x: Vec<Complex64> = (0..n).map(|j| rho_hat[j * nt + t]).collect();
                let y: Vec<Complex64> = (0..n).map(|j| m_hat[d][j * nt + t]).collect();
                let q: Vec<Complex64> = (0..n)
                    .map(|j| (0..d).map(|k| spec.ik[k][t] * m_hat[k][j * nt + t]).sum())
                    .collect();
                let apply = |f: &[Complex64], j: usize| -> Complex64 {
                    d1.rows[j].iter().map(|&(k, w)| f[k] * w).sum::<Complex64>() / h
                };
                let mut b = vec![ZERO; 2 * n];
                for j in 1..n - 1 {
                    b[2 * j] = x[j] - q[j] * dt - x[j] * (th * (1.0 - th) * dt * dt * kk)
                        - apply(&y, j) * ((1.0 - th) * dt);
                    b[2 * j + 1] = y[j] - apply(&x, j) * ((1.0 - th) * dt * c * c);
                }
                if boundary == BoundaryKind::NonReflecting {
                    let wl: Vec<Complex64> = (0..n).map(|j| y[j] - x[j] * c).collect();
                    b[0] = wl[0] + apply(&wl, 0) * ((1.0 - th) * dt * c) + q[0] * (dt * c)
                        + x[0] * (c * th * (1.0 - th) * dt * dt * kk);
                    let wr: Vec<Complex64> = (0..n).map(|j| y[j] + x[j] * c).collect();
                    let r = n - 1;
                    b[2 * r] = wr[r] - apply(&wr, r) * ((1.0 - th) * dt * c) - q[r] * (dt * c)
                        - x[r] * (c * th * (1.0 - th) * dt * dt * kk);
                }
                let (a, lu) = &*facs[t];
                let mut sol = b.clone();
                lu.solve(&mut sol);
                let mut res = vec![ZERO; 2 * n];
                a.matvec(&sol, &mut res);
                let err: f64 = res.iter().zip(&b).map(|(r, b)| (r - b).norm_sqr()).sum::<f64>().sqrt();
                let scale: f64 = b.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
                if !(err <= tol * scale.max(1e-300)) && err > 1e-300 {
                    return Err(Error::LinearSolveDiverged(format!(
                        "acoustic residual {err:.3e} vs rhs {scale:.3e} at mode {t}"
                    )));
                }
                let x_new: Vec<Complex64> = (0..n).map(|j| sol[2 * j]).collect();
                let y_new: Vec<Complex64> = (0..n).map(|j| sol[2 * j + 1]).collect();
                let perp: Vec<Vec<Complex64>> = (0..d)
                    .map(|k| {
                        (0..n)
                            .map(|j| {
                                let rt = x_new[j] * th + x[j] * (1.0 - th);
                                m_hat[k][j * nt + t] - spec.ik[k][t] * rt * (dt * c * c)
                            })
                            .collect()
                    })
                    .collect();
                let mut comps = perp;
                comps.push(y_new);
                Ok((x_new, comps))
            })
            .collect();

        let mut new_rho = vec![ZERO; nt * n];
        let mut new_m = vec![vec![ZERO; nt * n]; d + 1];
        for (t, col) in cols.into_iter().enumerate() {
            let (x, comps) = col?;
            for j in 0..n {
                new_rho[j * nt + t] = x[j];
                for (i, cmp) in comps.iter().enumerate() {
                    new_m[i][j * nt + t] = cmp[j];
                }
            }
        }
        let rho: Vec<f64> = self.spec.inv(new_rho).into_iter().map(|v| v + rho_bar).collect();
        s.rho = Field::from_values(g, rho)
            .map_err(|_| Error::LinearSolveDiverged("non-finite density".into()))?;
        for (f, mh) in s.m.iter_mut().zip(new_m) {
            *f = Field::from_values(g, self.spec.inv(mh))
                .map_err(|_| Error::LinearSolveDiverged("non-finite momentum".into()))?;
        }
        boundary_apply(s, &self.cfg, &self.params);
        Ok(())
    }
}
