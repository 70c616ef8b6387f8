use crate::domain::{Grid, TangentialTransform};
use rustfft::num_complex::Complex64;

/// Tangential transform plus the first-derivative symbols of every spectral index.
#[derive(Debug, Clone)]
pub(crate) struct SpectralOps {
    pub tr: TangentialTransform,
    pub nt: usize,
    /// `ik_dir` per direction, zero on the Nyquist mode.
    pub ik: Vec<Vec<Complex64>>,
    /// `sum_dir |ik_dir|^2`.
    pub k2: Vec<f64>,
}

impl SpectralOps {
    pub fn new(grid: &Grid) -> Self {
        let tr = TangentialTransform::new(grid);
        let nt = grid.n_tan();
        let ik: Vec<Vec<Complex64>> = (0..grid.d)
            .map(|dir| (0..nt).map(|t| tr.derivative_symbol(t, dir, 1)).collect())
            .collect();
        let k2 = (0..nt).map(|t| ik.iter().map(|s| s[t].norm_sqr()).sum()).collect();
        SpectralOps { tr, nt, ik, k2 }
    }

    pub fn fwd(&self, v: &[f64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
        self.tr.forward(v, &mut out);
        out
    }

    pub fn inv(&self, mut s: Vec<Complex64>) -> Vec<f64> {
        let mut out = vec![0.0; s.len()];
        self.tr.inverse(&mut s, &mut out);
        out
    }

    /// `d/dx_dir` of a spectral array, returned in spectral space.
    pub fn ddir(&self, s: &[Complex64], dir: usize) -> Vec<Complex64> {
        let nt = self.nt;
        s.iter().enumerate().map(|(i, c)| c * self.ik[dir][i % nt]).collect()
    }
}
