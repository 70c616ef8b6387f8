//! Manufactured solutions for order verification.
//!
//! For `d = 1` with variables `(x1, x3, t)`:
//!
//! ```text
//!   rho = rho_bar + a g cos(2 pi x1) cos t,                     g = exp(-x3^2)
//!   m1  = rho_bar u_bar erf(x3) + a/(2 pi) g sin(2 pi x1) sin t + d3 S
//!   m3  = -d1 S,                                                S = b g sin(2 pi x1) cos t
//! ```
//!
//! The mass equation holds exactly; the momentum residual is returned as a source.

use crate::domain::{Field, Grid, PhysParams};
use crate::solver::State;
use std::f64::consts::PI;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Momentum source added to the explicit tendency.
pub trait Forcing: Send + Sync {
    /// One vector per momentum component, normal last, on every grid node.
    fn momentum(&self, grid: &Grid, params: &PhysParams, t: f64) -> Vec<Vec<f64>>;
}

/// Second-order Taylor jet in three variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet3 {
    pub v: f64,
    pub g: [f64; 3],
    pub h: [[f64; 3]; 3],
}

impl Jet3 {
    pub fn constant(v: f64) -> Self {
        Jet3 { v, g: [0.0; 3], h: [[0.0; 3]; 3] }
    }

    pub fn variable(v: f64, k: usize) -> Self {
        let mut j = Jet3::constant(v);
        j.g[k] = 1.0;
        j
    }

    /// `f(self)` from `f, f', f''` at `self.v`.
    pub fn compose(&self, f0: f64, f1: f64, f2: f64) -> Self {
        let mut out = Jet3::constant(f0);
        for a in 0..3 {
            out.g[a] = f1 * self.g[a];
            for b in 0..3 {
                out.h[a][b] = f1 * self.h[a][b] + f2 * self.g[a] * self.g[b];
            }
        }
        out
    }

    pub fn sin(&self) -> Self {
        self.compose(self.v.sin(), self.v.cos(), -self.v.sin())
    }

    pub fn cos(&self) -> Self {
        self.compose(self.v.cos(), -self.v.sin(), -self.v.cos())
    }

    pub fn exp(&self) -> Self {
        let e = self.v.exp();
        self.compose(e, e, e)
    }

    pub fn erf(&self) -> Self {
        let d = std::f64::consts::FRAC_2_SQRT_PI * (-self.v * self.v).exp();
        self.compose(libm::erf(self.v), d, -2.0 * self.v * d)
    }

    pub fn powf(&self, p: f64) -> Self {
        let x = self.v;
        self.compose(x.powf(p), p * x.powf(p - 1.0), p * (p - 1.0) * x.powf(p - 2.0))
    }

    pub fn recip(&self) -> Self {
        let x = self.v;
        self.compose(1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x))
    }

    pub fn scale(&self, a: f64) -> Self {
        let mut out = *self;
        out.v *= a;
        for k in 0..3 {
            out.g[k] *= a;
            for l in 0..3 {
                out.h[k][l] *= a;
            }
        }
        out
    }
}

impl Add for Jet3 {
    type Output = Jet3;
    fn add(self, o: Jet3) -> Jet3 {
        let mut out = self;
        out.v += o.v;
        for k in 0..3 {
            out.g[k] += o.g[k];
            for l in 0..3 {
                out.h[k][l] += o.h[k][l];
            }
        }
        out
    }
}

impl Sub for Jet3 {
    type Output = Jet3;
    fn sub(self, o: Jet3) -> Jet3 {
        self + (-o)
    }
}

impl Neg for Jet3 {
    type Output = Jet3;
    fn neg(self) -> Jet3 {
        self.scale(-1.0)
    }
}

impl Mul for Jet3 {
    type Output = Jet3;
    fn mul(self, o: Jet3) -> Jet3 {
        let mut out = Jet3::constant(self.v * o.v);
        for k in 0..3 {
            out.g[k] = self.v * o.g[k] + o.v * self.g[k];
            for l in 0..3 {
                out.h[k][l] = self.v * o.h[k][l]
                    + o.v * self.h[k][l]
                    + self.g[k] * o.g[l]
                    + o.g[k] * self.g[l];
            }
        }
        out
    }
}

impl Div for Jet3 {
    type Output = Jet3;
    fn div(self, o: Jet3) -> Jet3 {
        self * o.recip()
    }
}

const X1: usize = 0;
const X3: usize = 1;
const T: usize = 2;

/// The manufactured solution above with amplitudes `a` (compressive) and `b` (solenoidal).
#[derive(Debug, Clone, PartialEq)]
pub struct ManufacturedSolution {
    pub a: f64,
    pub b: f64,
}

impl ManufacturedSolution {
    fn jets(&self, p: &PhysParams, x1: f64, x3: f64, t: f64) -> (Jet3, [Jet3; 2]) {
        let vx1 = Jet3::variable(x1, X1);
        let vx3 = Jet3::variable(x3, X3);
        let vt = Jet3::variable(t, T);
        let g = (-(vx3 * vx3)).exp();
        let arg = vx1.scale(2.0 * PI);
        let rho = g * arg.cos() * vt.cos() * Jet3::constant(self.a) + Jet3::constant(p.rho_bar);
        // d3 S and -d1 S written out
        let s3 = (vx3 * g).scale(-2.0 * self.b) * arg.sin() * vt.cos();
        let m1 = vx3.erf().scale(p.rho_bar * p.u_bar[0])
            + (g * arg.sin() * vt.sin()).scale(self.a / (2.0 * PI))
            + s3;
        let m3 = (g * arg.cos() * vt.cos()).scale(-2.0 * PI * self.b);
        (rho, [m1, m3])
    }

    pub fn exact(&self, grid: &Grid, p: &PhysParams, t: f64) -> State {
        assert_eq!(grid.d, 1, "manufactured solution is for d = 1");
        let rho = Field::from_fn(*grid, |x, x3| self.jets(p, x[0], x3, t).0.v);
        let m = (0..2)
            .map(|i| Field::from_fn(*grid, |x, x3| self.jets(p, x[0], x3, t).1[i].v))
            .collect();
        State { rho, m, t }
    }

    fn source(&self, p: &PhysParams, x1: f64, x3: f64, t: f64) -> [f64; 2] {
        let (rho, m) = self.jets(p, x1, x3, t);
        let u = [m[0] / rho, m[1] / rho];
        let pr = rho.powf(p.gamma);
        let inv_eps2 = 1.0 / (p.eps * p.eps);
        let axes = [X1, X3];
        let mut out = [0.0; 2];
        for i in 0..2 {
            let mut r = m[i].g[T];
            for (k, &ax) in axes.iter().enumerate() {
                r += (m[i] * u[k]).g[ax];
            }
            r += inv_eps2 * pr.g[axes[i]];
            r -= p.mu * (u[i].h[X1][X1] + u[i].h[X3][X3]);
            r -= (p.mu + p.lambda) * (u[0].h[axes[i]][X1] + u[1].h[axes[i]][X3]);
            out[i] = r;
        }
        out
    }
}

impl Forcing for ManufacturedSolution {
    fn momentum(&self, grid: &Grid, params: &PhysParams, t: f64) -> Vec<Vec<f64>> {
        let nt = grid.n_tan();
        let mut out = vec![Vec::with_capacity(grid.len()); 2];
        for j in 0..grid.n_normal() {
            let x3 = grid.x3(j);
            for tt in 0..nt {
                let s = self.source(params, grid.x_perp(tt)[0], x3, t);
                out[0].push(s[0]);
                out[1].push(s[1]);
            }
        }
        out
    }
}
