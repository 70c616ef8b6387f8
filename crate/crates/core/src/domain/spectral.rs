use super::{Field, Grid};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

/// Discrete Fourier transform over the tangential torus, applied level by level.
///
/// Forward transforms are unnormalized; `inverse` divides by `n_perp^d`.
#[derive(Clone)]
pub struct TangentialTransform {
    d: usize,
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for TangentialTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TangentialTransform").field("d", &self.d).field("n", &self.n).finish()
    }
}

impl TangentialTransform {
    pub fn new(grid: &Grid) -> Self {
        let mut planner = FftPlanner::new();
        TangentialTransform {
            d: grid.d,
            n: grid.n_perp,
            fwd: planner.plan_fft_forward(grid.n_perp),
            inv: planner.plan_fft_inverse(grid.n_perp),
        }
    }

    pub fn n_tan(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    /// Signed integer frequency of flat spectral index `t` along `dir`.
    pub fn frequency(&self, t: usize, dir: usize) -> i64 {
        let m = if dir == 0 { t % self.n } else { t / self.n };
        let m = m as i64;
        let n = self.n as i64;
        if m > n / 2 {
            m - n
        } else {
            m
        }
    }

    /// Angular wavenumber `2 pi m` along `dir`.
    pub fn wavenumber(&self, t: usize, dir: usize) -> f64 {
        2.0 * PI * self.frequency(t, dir) as f64
    }

    pub fn is_nyquist(&self, t: usize, dir: usize) -> bool {
        self.frequency(t, dir) == (self.n / 2) as i64
    }

    /// `|k|^2` summed over tangential directions.
    pub fn k2(&self, t: usize) -> f64 {
        (0..self.d).map(|dir| self.wavenumber(t, dir).powi(2)).sum()
    }

    /// Spectral multiplier of `d^order / dx_dir^order`; odd orders vanish on the Nyquist mode.
    pub fn derivative_symbol(&self, t: usize, dir: usize, order: usize) -> Complex64 {
        if order == 0 {
            return Complex64::new(1.0, 0.0);
        }
        if order % 2 == 1 && self.is_nyquist(t, dir) {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::new(0.0, self.wavenumber(t, dir)).powu(order as u32)
    }

    /// `sum_{|a| = order} prod_dir |k_dir|^{2 a_dir}`, the Parseval weight of all tangential
    /// derivatives of total order `order` of the trigonometric interpolant. The Nyquist mode keeps
    /// its full weight here even though its odd derivatives vanish at the nodes.
    pub fn multi_index_weight(&self, t: usize, order: usize) -> f64 {
        if order == 0 {
            return 1.0;
        }
        let w = |dir: usize, a: usize| self.wavenumber(t, dir).powi(2 * a as i32);
        if self.d == 1 {
            w(0, order)
        } else {
            (0..=order).map(|a1| w(0, a1) * w(1, order - a1)).sum()
        }
    }

    /// Transforms every tangential slab of `real` (length a multiple of `n_perp^d`).
    pub fn forward(&self, real: &[f64], out: &mut [Complex64]) {
        debug_assert_eq!(real.len(), out.len());
        for (o, &r) in out.iter_mut().zip(real) {
            *o = Complex64::new(r, 0.0);
        }
        self.apply(out, &self.fwd);
    }

    pub fn forward_field(&self, f: &Field) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); f.values().len()];
        self.forward(f.values(), &mut out);
        out
    }

    /// Inverse transform in place, normalized; real part written to `out`.
    pub fn inverse(&self, spec: &mut [Complex64], out: &mut [f64]) {
        debug_assert_eq!(spec.len(), out.len());
        self.apply(spec, &self.inv);
        let scale = 1.0 / self.n_tan() as f64;
        for (o, c) in out.iter_mut().zip(spec.iter()) {
            *o = c.re * scale;
        }
    }

    fn apply(&self, buf: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        plan.process(buf);
        if self.d == 2 {
            let block = n * n;
            let mut tmp = vec![Complex64::new(0.0, 0.0); block];
            for slab in buf.chunks_mut(block) {
                transpose(slab, &mut tmp, n);
                plan.process(&mut tmp);
                transpose(&tmp, slab, n);
            }
        }
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    for r in 0..n {
        for c in 0..n {
            dst[c * n + r] = src[r * n + c];
        }
    }
}
