//! Discretization of the periodic strip `T^d x [-L, L]`.
//!
//! ```text
//!   tangential: x_i = k / n_perp,   k = 0 .. n_perp-1   (period 1, d = 1 or 2)
//!   normal:     x3  = -L + j h3,    j = 0 .. n3,  h3 = 2L / n3
//!   storage:    index = j * n_perp^d + t,   t = i2 * n_perp + i1   (tangential fastest)
//! ```
//!
//! The zero mode of a field is its tangential mean at each normal level,
//! the non-zero mode is the remainder:
//!
//! ```text
//!   f_flat(x3)  = mean_{x_perp} f(x_perp, x3)
//!   f_sharp(x)  = f(x) - f_flat(x3)
//! ```

mod calculus;
mod io;
mod params;
mod spectral;

pub use calculus::{antiderivative, d_normal, d_tangential, fd_weights, NormalDiff};
pub use io::{read_field, read_profile, write_field, write_profile, write_profile_csv};
pub use params::PhysParams;
pub use spectral::TangentialTransform;

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Uniform grid on `T^d x [-L, L]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grid {
    pub d: usize,
    pub n_perp: usize,
    pub n3: usize,
    #[serde(rename = "L")]
    pub l: f64,
}

/// Desk-scale default: `d = 1`, 64 x 1024 points, `L = 20`.
impl Default for Grid {
    fn default() -> Self {
        Grid { d: 1, n_perp: 64, n3: 1024, l: 20.0 }
    }
}

impl Grid {
    pub fn new(d: usize, n_perp: usize, n3: usize, l: f64) -> Result<Self> {
        let g = Grid { d, n_perp, n3, l };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d == 1 || self.d == 2) {
            return Err(Error::InvalidGrid(format!("d must be 1 or 2, got {}", self.d)));
        }
        if self.n_perp < 2 || !self.n_perp.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n_perp must be a power of two >= 2, got {}",
                self.n_perp
            )));
        }
        if self.n3 < 16 {
            return Err(Error::InvalidGrid(format!("n3 must be >= 16, got {}", self.n3)));
        }
        if !(self.l.is_finite() && self.l > 0.0) {
            return Err(Error::InvalidGrid(format!("L must be positive, got {}", self.l)));
        }
        Ok(())
    }

    pub fn h3(&self) -> f64 {
        2.0 * self.l / self.n3 as f64
    }

    pub fn h_perp(&self) -> f64 {
        1.0 / self.n_perp as f64
    }

    /// Number of tangential nodes per normal level, `n_perp^d`.
    pub fn n_tan(&self) -> usize {
        self.n_perp.pow(self.d as u32)
    }

    /// Number of normal nodes, `n3 + 1`.
    pub fn n_normal(&self) -> usize {
        self.n3 + 1
    }

    pub fn len(&self) -> usize {
        self.n_tan() * self.n_normal()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x3(&self, j: usize) -> f64 {
        // symmetric evaluation keeps x3(j) = -x3(n3 - j) exactly
        let half = self.n3 as f64 / 2.0;
        (j as f64 - half) * self.h3()
    }

    pub fn x3_nodes(&self) -> Vec<f64> {
        (0..self.n_normal()).map(|j| self.x3(j)).collect()
    }

    /// Tangential coordinates `(x1, x2)` of flat tangential index `t`; `x2 = 0` when `d = 1`.
    pub fn x_perp(&self, t: usize) -> [f64; 2] {
        let h = self.h_perp();
        if self.d == 1 {
            [t as f64 * h, 0.0]
        } else {
            [(t % self.n_perp) as f64 * h, (t / self.n_perp) as f64 * h]
        }
    }

    /// Trapezoid rule over the normal nodes.
    pub fn trapz(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.n_normal());
        let n = values.len();
        let inner: f64 = values[1..n - 1].iter().sum();
        self.h3() * (inner + 0.5 * (values[0] + values[n - 1]))
    }
}

/// Scalar field on every grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: Grid) -> Self {
        Field { grid, values: vec![0.0; grid.len()] }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Field { grid, values: vec![c; grid.len()] }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Format(format!(
                "field needs {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Format("field contains non-finite values".into()));
        }
        Ok(Field { grid, values })
    }

    /// Samples `f(x_perp, x3)` at every node.
    pub fn from_fn(grid: Grid, f: impl Fn([f64; 2], f64) -> f64) -> Self {
        let nt = grid.n_tan();
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.n_normal() {
            let x3 = grid.x3(j);
            for t in 0..nt {
                values.push(f(grid.x_perp(t), x3));
            }
        }
        Field { grid, values }
    }

    /// Extends a profile constantly in the tangential directions.
    pub fn broadcast(p: &Profile) -> Self {
        let grid = p.grid;
        let nt = grid.n_tan();
        let mut values = Vec::with_capacity(grid.len());
        for &v in &p.values {
            values.extend(std::iter::repeat(v).take(nt));
        }
        Field { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Tangential slab at normal index `j`.
    pub fn row(&self, j: usize) -> &[f64] {
        let nt = self.grid.n_tan();
        &self.values[j * nt..(j + 1) * nt]
    }

    pub fn row_mut(&mut self, j: usize) -> &mut [f64] {
        let nt = self.grid.n_tan();
        &mut self.values[j * nt..(j + 1) * nt]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Field {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Field { grid: self.grid, values }
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &Field) {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        for (s, o) in self.values.iter_mut().zip(&other.values) {
            *s += a * o;
        }
    }

    pub fn scaled(&self, a: f64) -> Field {
        self.map(|v| a * v)
    }

    /// Pointwise product with a profile broadcast along the tangential directions.
    pub fn mul_profile(&self, p: &Profile) -> Field {
        assert_eq!(self.grid, p.grid, "grid mismatch");
        let nt = self.grid.n_tan();
        let mut out = self.clone();
        for (j, &pv) in p.values.iter().enumerate() {
            for v in &mut out.values[j * nt..(j + 1) * nt] {
                *v *= pv;
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// `L^2(T^d x [-L, L])`: torus mean, then trapezoid in x3.
    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    pub fn l2_norm_sq(&self) -> f64 {
        let nt = self.grid.n_tan() as f64;
        let level: Vec<f64> = (0..self.grid.n_normal())
            .map(|j| self.row(j).iter().map(|v| v * v).sum::<f64>() / nt)
            .collect();
        self.grid.trapz(&level)
    }
}

/// Scalar function of the normal coordinate alone.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    grid: Grid,
    values: Vec<f64>,
}

impl Profile {
    pub fn zeros(grid: Grid) -> Self {
        Profile { grid, values: vec![0.0; grid.n_normal()] }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_normal() {
            return Err(Error::Format(format!(
                "profile needs {} values, got {}",
                grid.n_normal(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Format("profile contains non-finite values".into()));
        }
        Ok(Profile { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        Profile { grid, values: (0..grid.n_normal()).map(|j| f(grid.x3(j))).collect() }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Profile {
        Profile { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map(&self, other: &Profile, f: impl Fn(f64, f64) -> f64) -> Profile {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Profile { grid: self.grid, values }
    }

    pub fn axpy(&mut self, a: f64, other: &Profile) {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        for (s, o) in self.values.iter_mut().zip(&other.values) {
            *s += a * o;
        }
    }

    /// Trapezoid integral over `[-L, L]`.
    pub fn integral(&self) -> f64 {
        self.grid.trapz(&self.values)
    }

    pub fn l2_norm(&self) -> f64 {
        weighted_l2_norm(self, 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Tangential average at each normal level.
pub fn zero_mode(f: &Field) -> Profile {
    let grid = f.grid;
    let nt = grid.n_tan() as f64;
    let values = (0..grid.n_normal()).map(|j| f.row(j).iter().sum::<f64>() / nt).collect();
    Profile { grid, values }
}

/// `f - zero_mode(f)` broadcast.
pub fn nonzero_mode(f: &Field) -> Field {
    let flat = zero_mode(f);
    let nt = f.grid.n_tan();
    let mut out = f.clone();
    for (j, &m) in flat.values.iter().enumerate() {
        for v in &mut out.values[j * nt..(j + 1) * nt] {
            *v -= m;
        }
    }
    out
}

/// `|| <x3>^alpha p ||_{L^2}` with `<x3> = sqrt(1 + x3^2)`, trapezoid on the box.
pub fn weighted_l2_norm(p: &Profile, alpha: f64) -> f64 {
    let grid = p.grid;
    let integrand: Vec<f64> = p
        .values
        .iter()
        .enumerate()
        .map(|(j, v)| {
            let x = grid.x3(j);
            (1.0 + x * x).powf(alpha) * v * v
        })
        .collect();
    grid.trapz(&integrand).sqrt()
}

/// `H^s` norm over the strip: every mixed derivative `d_perp^a d_3^b` with `|a| + b <= s`.
pub fn hs_norm(f: &Field, s: usize) -> Result<f64> {
    Ok(hs_norm_sq(f, s)?.sqrt())
}

pub(crate) fn hs_norm_sq(f: &Field, s: usize) -> Result<f64> {
    (0..=s).map(|k| derivative_norm_sq(f, k)).sum()
}

/// `sum_{|beta| = k} || d^beta f ||^2`, each multi-index counted once.
pub fn derivative_norm_sq(f: &Field, k: usize) -> Result<f64> {
    let grid = *f.grid();
    let tr = TangentialTransform::new(&grid);
    let nt = grid.n_tan();
    let mut total = 0.0;
    for b in 0..=k {
        let g = if b == 0 { f.clone() } else { d_normal(f, b)? };
        let a = k - b;
        let spec = tr.forward_field(&g);
        // Parseval per level: mean |g|^2 = sum |g_hat|^2 / nt^2
        let level: Vec<f64> = (0..grid.n_normal())
            .map(|j| {
                let row = &spec[j * nt..(j + 1) * nt];
                row.iter()
                    .enumerate()
                    .map(|(t, c)| tr.multi_index_weight(t, a) * c.norm_sqr())
                    .sum::<f64>()
                    / (nt * nt) as f64
            })
            .collect();
        total += grid.trapz(&level);
    }
    Ok(total)
}

/// `|| grad_perp f ||_{L^2}` of the tangential trigonometric interpolant.
pub fn grad_perp_norm(f: &Field) -> f64 {
    let grid = *f.grid();
    let tr = TangentialTransform::new(&grid);
    let nt = grid.n_tan();
    let spec = tr.forward_field(f);
    let level: Vec<f64> = (0..grid.n_normal())
        .map(|j| {
            spec[j * nt..(j + 1) * nt]
                .iter()
                .enumerate()
                .map(|(t, c)| tr.multi_index_weight(t, 1) * c.norm_sqr())
                .sum::<f64>()
                / (nt * nt) as f64
        })
        .collect();
    grid.trapz(&level).sqrt()
}

/// The two summands of the weighted norm and their sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HsAlphaNorm {
    pub weighted_zero_mode: f64,
    pub sobolev: f64,
    pub total: f64,
}

/// `|| <x3>^alpha f_flat ||_{L^2} + || f ||_{H^s}`.
pub fn hs_alpha_norm(f: &Field, s: usize, alpha: f64) -> Result<HsAlphaNorm> {
    let weighted_zero_mode = weighted_l2_norm(&zero_mode(f), alpha);
    let sobolev = hs_norm(f, s)?;
    Ok(HsAlphaNorm { weighted_zero_mode, sobolev, total: weighted_zero_mode + sobolev })
}

/// Weighted norm of a vector of fields, components combined in `l^2`.
pub fn hs_alpha_norm_vec(fs: &[&Field], s: usize, alpha: f64) -> Result<HsAlphaNorm> {
    let mut w = 0.0;
    let mut h = 0.0;
    for f in fs {
        w += weighted_l2_norm(&zero_mode(f), alpha).powi(2);
        h += hs_norm_sq(f, s)?;
    }
    let (w, h) = (w.sqrt(), h.sqrt());
    Ok(HsAlphaNorm { weighted_zero_mode: w, sobolev: h, total: w + h })
}
