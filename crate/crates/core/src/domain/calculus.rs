use super::{Field, Profile, TangentialTransform};
use crate::error::{Error, Result};
use rustfft::num_complex::Complex64;

/// Finite-difference weights for the `order`-th derivative at `z` on `nodes` (Fornberg's recursion).
pub fn fd_weights(z: f64, nodes: &[f64], order: usize) -> Vec<f64> {
    let n = nodes.len();
    let m = order;
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - z;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}

/// Stencil plan for a 4th-order normal derivative on `n` nodes with unit spacing.
struct NormalStencil {
    /// Central weights, offsets `-r..=r`.
    central: Vec<f64>,
    r: usize,
    /// One-sided weights for the first `r` nodes, each on nodes `0..width`.
    left: Vec<Vec<f64>>,
    odd: bool,
}

impl NormalStencil {
    fn new(order: usize, n: usize) -> Result<Self> {
        let r = (order + 1) / 2 + 1;
        let width = order + 4;
        let needed = (2 * r + 1).max(width).max(2 * order + 3);
        if n < needed {
            return Err(Error::StencilTooWide { order, needed, have: n });
        }
        let offsets: Vec<f64> = (-(r as i64)..=r as i64).map(|o| o as f64).collect();
        let central = fd_weights(0.0, &offsets, order);
        let block: Vec<f64> = (0..width).map(|i| i as f64).collect();
        let left = (0..r).map(|j| fd_weights(j as f64, &block, order)).collect();
        Ok(NormalStencil { central, r, left, odd: order % 2 == 1 })
    }

    /// Applies the stencil to a strided column: `get(j)` reads node `j`, result scaled by `scale`.
    fn apply(&self, n: usize, scale: f64, get: impl Fn(usize) -> f64, mut put: impl FnMut(usize, f64)) {
        let r = self.r;
        for j in 0..n {
            let v = if j < r {
                self.left[j].iter().enumerate().map(|(i, w)| w * get(i)).sum::<f64>()
            } else if j + r >= n {
                // mirror of the left closure: node n-1-jj with reflected offsets
                let jj = n - 1 - j;
                let sign = if self.odd { -1.0 } else { 1.0 };
                sign * self.left[jj]
                    .iter()
                    .enumerate()
                    .map(|(i, w)| w * get(n - 1 - i))
                    .sum::<f64>()
            } else {
                self.central.iter().enumerate().map(|(i, w)| w * get(j + i - r)).sum::<f64>()
            };
            put(j, v * scale);
        }
    }
}

/// Objects with a normal axis that [`d_normal`] can differentiate.
pub trait NormalDiff: Sized {
    #[doc(hidden)]
    fn d_normal_impl(&self, order: usize) -> Result<Self>;
}

impl NormalDiff for Profile {
    fn d_normal_impl(&self, order: usize) -> Result<Self> {
        let grid = *self.grid();
        let n = grid.n_normal();
        if order == 0 {
            return Ok(self.clone());
        }
        let st = NormalStencil::new(order, n)?;
        let scale = grid.h3().powi(-(order as i32));
        let src = self.values();
        let mut out = vec![0.0; n];
        st.apply(n, scale, |j| src[j], |j, v| out[j] = v);
        Profile::from_values(grid, out)
    }
}

impl NormalDiff for Field {
    fn d_normal_impl(&self, order: usize) -> Result<Self> {
        let grid = *self.grid();
        let n = grid.n_normal();
        if order == 0 {
            return Ok(self.clone());
        }
        let st = NormalStencil::new(order, n)?;
        let scale = grid.h3().powi(-(order as i32));
        let nt = grid.n_tan();
        let src = self.values();
        let mut out = vec![0.0; src.len()];
        for t in 0..nt {
            st.apply(n, scale, |j| src[j * nt + t], |j, v| out[j * nt + t] = v);
        }
        Field::from_values(grid, out)
    }
}

/// `d^order / dx3^order`: centered 4th-order differences inside, 4th-order one-sided closures
/// at both ends.
pub fn d_normal<T: NormalDiff>(f: &T, order: usize) -> Result<T> {
    f.d_normal_impl(order)
}

/// `d^order / dx_dir^order` by spectral differentiation on the torus.
pub fn d_tangential(f: &Field, dir: usize, order: usize) -> Field {
    let grid = *f.grid();
    assert!(dir < grid.d, "tangential direction {dir} out of range");
    let tr = TangentialTransform::new(&grid);
    let nt = grid.n_tan();
    let mut spec = tr.forward_field(f);
    let symbols: Vec<Complex64> = (0..nt).map(|t| tr.derivative_symbol(t, dir, order)).collect();
    for row in spec.chunks_mut(nt) {
        for (c, s) in row.iter_mut().zip(&symbols) {
            *c *= s;
        }
    }
    let mut out = vec![0.0; f.values().len()];
    tr.inverse(&mut spec, &mut out);
    Field::from_values(grid, out).expect("spectral derivative of a finite field is finite")
}

/// Cumulative trapezoid from `-L`: `result(x3) = int_{-L}^{x3} p`.
pub fn antiderivative(p: &Profile) -> Profile {
    let grid = *p.grid();
    let h = grid.h3();
    let v = p.values();
    let mut out = Vec::with_capacity(v.len());
    let mut acc = 0.0;
    out.push(0.0);
    for j in 1..v.len() {
        acc += 0.5 * h * (v[j - 1] + v[j]);
        out.push(acc);
    }
    Profile::from_values(grid, out).expect("cumulative sum of a finite profile is finite")
}
