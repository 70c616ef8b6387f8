//! Complex banded LU with partial pivoting.
//!
//! Row `i` stores columns `i - kl ..= i + ku + kl`; the extra `kl` upper diagonals hold
//! fill-in from row exchanges.

use rustfft::num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    a: Vec<Complex64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        BandMatrix { n, kl, ku, a: vec![Complex64::new(0.0, 0.0); n * (2 * kl + ku + 1)] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn width(&self) -> usize {
        2 * self.kl + self.ku + 1
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.ku + self.kl, "({i}, {j}) outside band");
        i * self.width() + (j + self.kl - i)
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        assert!(j + self.kl >= i && j <= i + self.ku, "({i}, {j}) outside band");
        let k = self.idx(i, j);
        self.a[k] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(j + self.kl >= i && j <= i + self.ku, "({i}, {j}) outside band");
        let k = self.idx(i, j);
        self.a[k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        if j + self.kl < i || j > i + self.ku + self.kl {
            return Complex64::new(0.0, 0.0);
        }
        self.a[self.idx(i, j)]
    }

    pub fn matvec(&self, x: &[Complex64], y: &mut [Complex64]) {
        for i in 0..self.n {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            y[i] = (lo..=hi).map(|j| self.a[self.idx(i, j)] * x[j]).sum();
        }
    }

    /// Factors a copy; `None` on an exactly singular pivot.
    pub fn factor(&self) -> Option<BandLu> {
        let mut m = self.clone();
        let n = m.n;
        let (kl, ku2) = (m.kl, m.ku + m.kl);
        let mut piv = vec![0; n];
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = m.a[m.idx(k, k)].norm();
            for i in k + 1..=last {
                let v = m.a[m.idx(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 {
                return None;
            }
            piv[k] = p;
            let jmax = (k + ku2).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let (a, b) = (m.idx(k, j), m.idx(p, j));
                    m.a.swap(a, b);
                }
            }
            let pivot = m.a[m.idx(k, k)];
            for i in k + 1..=last {
                let ik = m.idx(i, k);
                let l = m.a[ik] / pivot;
                m.a[ik] = l;
                if l.norm() == 0.0 {
                    continue;
                }
                for j in k + 1..=jmax {
                    let (ij, kj) = (m.idx(i, j), m.idx(k, j));
                    let akj = m.a[kj];
                    m.a[ij] -= l * akj;
                }
            }
        }
        Some(BandLu { m, piv })
    }
}

#[derive(Debug, Clone)]
pub struct BandLu {
    m: BandMatrix,
    piv: Vec<usize>,
}

impl BandLu {
    pub fn solve(&self, b: &mut [Complex64]) {
        let m = &self.m;
        let n = m.n;
        let (kl, ku2) = (m.kl, m.ku + m.kl);
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            for i in k + 1..=(k + kl).min(n - 1) {
                b[i] -= m.a[m.idx(i, k)] * bk;
            }
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for j in i + 1..=(i + ku2).min(n - 1) {
                s -= m.a[m.idx(i, j)] * b[j];
            }
            b[i] = s / m.a[m.idx(i, i)];
        }
    }
}
